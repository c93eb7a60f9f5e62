//! Headless, deterministic replay of a recorded inbound message log.
//!
//! Inbound lines are `at_ms<TAB>kind<TAB>message-json`. `kind` is the
//! message type, optionally suffixed `@N` to address connection `N`.
//! Without a suffix, every `hello` opens a new connection and later lines go
//! to the newest one. A `disconnect` line (payload `null`) drops the
//! connection. Time advances on the tick grid between lines; after the last
//! line the clock keeps running until every session is finished or waiting
//! for input.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use super::hub::{ConnId, Hub, Outbound};
use super::store::Store;
use super::wire::{Body, WireMessage};
use super::ServerConfig;
use crate::behavior::trace::{read_trace, write_trace, TraceError, TraceLine};
use crate::behavior::{ticks_through, BehaviorError};

/// Simulated time allowed after the last inbound line.
pub const DRAIN_LIMIT_MS: u64 = 10 * 60 * 1000;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn outbound_line(o: &Outbound) -> TraceLine {
    TraceLine::new(
        o.at,
        o.msg.type_name(),
        serde_json::to_value(&o.msg).unwrap_or_default(),
    )
}

pub fn inbound_line(at: u64, msg: &WireMessage) -> TraceLine {
    TraceLine::new(
        at,
        msg.type_name(),
        serde_json::to_value(msg).unwrap_or_default(),
    )
}

enum Inbound {
    Message(WireMessage),
    Disconnect,
}

fn decode(line: &TraceLine, number: usize) -> Result<(Option<u64>, Inbound), ReplayError> {
    let bad = |reason: String| ReplayError::BadLine {
        line: number,
        reason,
    };
    let (kind, tag) = match line.kind.split_once('@') {
        Some((k, n)) => (
            k,
            Some(
                n.parse::<u64>()
                    .map_err(|_| bad(format!("bad connection tag {n:?}")))?,
            ),
        ),
        None => (line.kind.as_str(), None),
    };
    if kind == "disconnect" {
        return Ok((tag, Inbound::Disconnect));
    }
    let msg: WireMessage =
        serde_json::from_value(line.payload.clone()).map_err(|e| bad(e.to_string()))?;
    if msg.type_name() != kind {
        return Err(bad(format!(
            "kind {kind:?} does not match message type {:?}",
            msg.type_name()
        )));
    }
    if !msg.body.is_client() {
        return Err(bad(format!("{kind:?} is not a client message")));
    }
    Ok((tag, Inbound::Message(msg)))
}

/// Replays parsed inbound lines against `hub`, returning outbound lines.
pub fn replay_lines(hub: &mut Hub, lines: &[TraceLine]) -> Result<Vec<TraceLine>, ReplayError> {
    let tick = hub.config().tick_ms.max(1);
    let mut out: Vec<Outbound> = Vec::new();
    let mut tagged: BTreeMap<u64, ConnId> = BTreeMap::new();
    let mut current: Option<ConnId> = None;
    let mut clock = hub.now();

    for (i, line) in lines.iter().enumerate() {
        let (tag, inbound) = decode(line, i + 1)?;
        for t in ticks_through(clock, line.at, tick) {
            out.extend(hub.tick(t));
        }
        clock = clock.max(line.at);
        let conn = match (tag, &inbound) {
            (Some(n), _) => *tagged.entry(n).or_insert_with(|| hub.connect()),
            (
                None,
                Inbound::Message(WireMessage {
                    body: Body::Hello { .. },
                    ..
                }),
            ) => {
                let c = hub.connect();
                current = Some(c);
                c
            }
            (None, _) => match current {
                Some(c) => c,
                None => {
                    let c = hub.connect();
                    current = Some(c);
                    c
                }
            },
        };
        match inbound {
            Inbound::Message(msg) => out.extend(hub.handle(conn, msg, clock)),
            Inbound::Disconnect => {
                hub.disconnect(conn);
                if let Some(n) = tag {
                    tagged.remove(&n);
                }
                if current == Some(conn) {
                    current = None;
                }
            }
        }
    }

    let limit = clock + DRAIN_LIMIT_MS;
    let mut t = clock;
    while !hub.is_quiescent() && t < limit {
        t = (t / tick + 1) * tick;
        out.extend(hub.tick(t));
    }
    Ok(out.iter().map(outbound_line).collect())
}

/// Replays an inbound trace with a fresh in-memory store and writes the
/// outbound trace. Returns the number of outbound lines.
pub fn replay<R: BufRead, W: Write>(
    input: R,
    output: W,
    config: ServerConfig,
) -> Result<usize, ReplayError> {
    let lines = read_trace(input)?;
    let mut hub = Hub::new(config, Store::default())?;
    let out = replay_lines(&mut hub, &lines)?;
    write_trace(output, &out)?;
    Ok(out.len())
}
