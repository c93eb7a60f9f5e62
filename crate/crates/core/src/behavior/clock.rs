use std::time::Instant;

pub const DEFAULT_TICK_MS: u64 = 50;

/// Monotonic millisecond time source.
pub trait Clock {
    fn now_ms(&self) -> u64;
}

/// Discrete clock advanced by hand, one tick at a time.
#[derive(Debug, Clone)]
pub struct TickClock {
    tick_ms: u64,
    now: u64,
}

impl TickClock {
    pub fn new(tick_ms: u64) -> Self {
        Self {
            tick_ms: tick_ms.max(1),
            now: 0,
        }
    }

    pub fn tick_ms(&self) -> u64 {
        self.tick_ms
    }

    pub fn tick(&mut self) -> u64 {
        self.now += self.tick_ms;
        self.now
    }
}

impl Clock for TickClock {
    fn now_ms(&self) -> u64 {
        self.now
    }
}

/// Wall-clock adapter for live sessions, quantized down to whole ticks.
#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
    tick_ms: u64,
}

impl WallClock {
    pub fn start(tick_ms: u64) -> Self {
        Self {
            start: Instant::now(),
            tick_ms: tick_ms.max(1),
        }
    }
}

impl Clock for WallClock {
    fn now_ms(&self) -> u64 {
        let elapsed = self.start.elapsed().as_millis() as u64;
        elapsed - elapsed % self.tick_ms
    }
}

/// Tick instants `t` with `after < t <= through` on the `tick_ms` grid.
pub fn ticks_through(after: u64, through: u64, tick_ms: u64) -> impl Iterator<Item = u64> {
    let tick_ms = tick_ms.max(1);
    let first = (after / tick_ms + 1) * tick_ms;
    (first..=through).step_by(tick_ms as usize)
}
