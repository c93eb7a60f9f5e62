//! Listener nodding and silence-based end-of-turn detection.

use serde::{Deserialize, Serialize};

use super::{ticks_through, BehaviorConfig};

/// Speech-activity signal from the client, standing in for voice activity
/// detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeechActivity {
    UserSpeechStart,
    UserSpeechStop,
    UserTextFinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodOutput {
    Nod { at: u64 },
    EndOfTurn { at: u64 },
}

/// Nods every `nod_period` from the first activity of a user turn and ends
/// the turn once `silence` ms pass after the latest activity. The user is
/// not silent between a speech start and its stop. Any activity restarts the
/// silence timer; the nod cadence is not reset.
#[derive(Debug, Clone)]
pub struct NodController {
    period_ms: u64,
    silence_ms: u64,
    last_activity: Option<u64>,
    speaking: bool,
    next_nod: Option<u64>,
}

impl NodController {
    pub fn new(config: &BehaviorConfig) -> Self {
        Self {
            period_ms: config.nod_period_ms().max(1),
            silence_ms: config.silence_ms(),
            last_activity: None,
            speaking: false,
            next_nod: None,
        }
    }

    pub fn on_activity(&mut self, at: u64, activity: SpeechActivity) {
        match activity {
            SpeechActivity::UserSpeechStart => self.speaking = true,
            SpeechActivity::UserSpeechStop => self.speaking = false,
            SpeechActivity::UserTextFinal => {}
        }
        self.last_activity = Some(self.last_activity.map_or(at, |l| l.max(at)));
        if self.next_nod.is_none() {
            self.next_nod = Some(at + self.period_ms);
        }
    }

    pub fn last_activity(&self) -> Option<u64> {
        self.last_activity
    }

    /// When the open turn will end if nothing else happens.
    pub fn deadline(&self) -> Option<u64> {
        if self.speaking {
            return None;
        }
        self.last_activity.map(|l| l + self.silence_ms)
    }

    pub fn is_active(&self) -> bool {
        self.last_activity.is_some()
    }

    pub fn is_speaking(&self) -> bool {
        self.speaking
    }

    pub fn reset(&mut self) {
        self.last_activity = None;
        self.speaking = false;
        self.next_nod = None;
    }

    /// Evaluates the controller at clock time `now`. End of turn takes
    /// precedence over a nod due on the same tick.
    pub fn poll(&mut self, now: u64) -> Option<NodOutput> {
        if self.deadline().is_some_and(|d| now >= d) {
            self.reset();
            return Some(NodOutput::EndOfTurn { at: now });
        }
        let next = self.next_nod?;
        if now >= next {
            let missed = (now - next) / self.period_ms + 1;
            self.next_nod = Some(next + missed * self.period_ms);
            return Some(NodOutput::Nod { at: now });
        }
        None
    }
}

/// Outcome of feeding one user turn's activity trace through the controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodRun {
    pub nods: Vec<u64>,
    pub end_of_turn: Option<u64>,
}

/// Runs a [`NodController`] over a timestamp-ordered activity trace on a
/// `tick_ms` clock until the turn ends.
pub fn run_nod_controller(
    events: &[(u64, SpeechActivity)],
    config: &BehaviorConfig,
    tick_ms: u64,
) -> NodRun {
    let mut ctl = NodController::new(config);
    let mut run = NodRun {
        nods: Vec::new(),
        end_of_turn: None,
    };
    let mut clock = 0u64;
    let handle = |out: Option<NodOutput>, run: &mut NodRun| match out {
        Some(NodOutput::Nod { at }) => run.nods.push(at),
        Some(NodOutput::EndOfTurn { at }) => run.end_of_turn = Some(at),
        None => {}
    };
    for &(at, activity) in events {
        for t in ticks_through(clock, at, tick_ms) {
            handle(ctl.poll(t), &mut run);
            if run.end_of_turn.is_some() {
                return run;
            }
        }
        clock = clock.max(at);
        ctl.on_activity(at, activity);
    }
    while let Some(deadline) = ctl.deadline() {
        for t in ticks_through(clock, deadline + tick_ms, tick_ms) {
            handle(ctl.poll(t), &mut run);
            if run.end_of_turn.is_some() {
                return run;
            }
            clock = t;
        }
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use SpeechActivity::*;

    fn run(events: &[(u64, SpeechActivity)]) -> NodRun {
        run_nod_controller(events, &BehaviorConfig::default(), 50)
    }

    #[test]
    fn ends_two_seconds_after_last_activity() {
        let r = run(&[(1000, UserSpeechStart), (3000, UserSpeechStop)]);
        assert_eq!(r.end_of_turn, Some(5000));
    }

    #[test]
    fn new_activity_resets_the_timer() {
        let r = run(&[
            (1000, UserSpeechStart),
            (3000, UserSpeechStop),
            (4500, UserSpeechStart),
            (4500, UserSpeechStop),
        ]);
        assert_eq!(r.end_of_turn, Some(6500));
    }

    #[test]
    fn zero_length_turn_still_nods() {
        let r = run(&[(700, UserSpeechStart), (700, UserSpeechStop)]);
        assert_eq!(r.end_of_turn, Some(2700));
        assert_eq!(r.nods, vec![1700]);
    }

    #[test]
    fn off_grid_activity_lands_within_one_tick() {
        let r = run(&[(1017, UserSpeechStart), (3017, UserSpeechStop)]);
        let eot = r.end_of_turn.unwrap();
        assert!((5017..5017 + 50).contains(&eot), "{eot}");
    }

    #[test]
    fn nods_every_period_while_talking() {
        let r = run(&[(0, UserSpeechStart), (4000, UserSpeechStop)]);
        assert_eq!(r.nods, vec![1000, 2000, 3000, 4000, 5000]);
        assert_eq!(r.end_of_turn, Some(6000));
    }

    #[test]
    fn no_end_while_speaking() {
        let r = run(&[(0, UserSpeechStart), (10_000, UserSpeechStop)]);
        assert_eq!(r.end_of_turn, Some(12_000));
        let r = run(&[(0, UserSpeechStart)]);
        assert_eq!(r.end_of_turn, None);
    }

    #[test]
    fn no_activity_means_no_end() {
        let mut ctl = NodController::new(&BehaviorConfig::default());
        assert_eq!(ctl.poll(100_000), None);
    }
}
