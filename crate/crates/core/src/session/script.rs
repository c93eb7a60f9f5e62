//! Scripted client: turns plain transcripts into inbound message logs by
//! answering each listening cue with the next scripted utterance.
//!
//! Transcript format:
//!
//! ```text
//! # comment
//! @session <user_id> <YYYY-MM-DD> [plain]
//! first user utterance
//! second user utterance
//! ```
//!
//! `plain` selects the no-nonverbal rendering condition. When a session's
//! utterances run out before it ends, the client sends `bye`.

use chrono::NaiveDate;
use thiserror::Error;

use super::hub::{Hub, Outbound};
use super::replay::{inbound_line, outbound_line};
use super::store::Store;
use super::wire::{Body, SpeechEventKind, WireMessage};
use super::ServerConfig;
use crate::behavior::trace::TraceLine;
use crate::behavior::BehaviorError;

#[derive(Debug, Error, PartialEq)]
pub enum ScriptError {
    #[error("line {line}: utterance before any @session header")]
    UtteranceBeforeSession { line: usize },
    #[error("line {line}: {reason}")]
    BadHeader { line: usize, reason: String },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptSession {
    pub user_id: String,
    pub date: NaiveDate,
    pub render_nonverbal: bool,
    pub utterances: Vec<String>,
}

pub fn parse_script(source: &str) -> Result<Vec<ScriptSession>, ScriptError> {
    let mut sessions: Vec<ScriptSession> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(header) = text.strip_prefix("@session") {
            let bad = |reason: &str| ScriptError::BadHeader {
                line,
                reason: reason.to_owned(),
            };
            let fields: Vec<&str> = header.split_whitespace().collect();
            let (user_id, date, flag) = match fields.as_slice() {
                [u, d] => (*u, *d, None),
                [u, d, f] => (*u, *d, Some(*f)),
                _ => return Err(bad("expected `@session <user_id> <date> [plain]`")),
            };
            let date = date.parse().map_err(|_| bad("bad date"))?;
            let render_nonverbal = match flag {
                None => true,
                Some("plain") => false,
                Some(_) => return Err(bad("unknown flag")),
            };
            sessions.push(ScriptSession {
                user_id: user_id.to_owned(),
                date,
                render_nonverbal,
                utterances: Vec::new(),
            });
            continue;
        }
        sessions
            .last_mut()
            .ok_or(ScriptError::UtteranceBeforeSession { line })?
            .utterances
            .push(text.to_owned());
    }
    Ok(sessions)
}

/// Timing of the simulated user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientTiming {
    /// Delay from the listening cue to speech start.
    pub think_ms: u64,
    pub ms_per_word: u64,
    /// Pause between one session ending and the next `hello`.
    pub gap_ms: u64,
    /// Longest a single session may run.
    pub session_limit_ms: u64,
}

impl Default for ClientTiming {
    fn default() -> Self {
        Self {
            think_ms: 600,
            ms_per_word: 250,
            gap_ms: 1000,
            session_limit_ms: 10 * 60 * 1000,
        }
    }
}

/// Inbound log produced by a scripted run and the outbound log it caused.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptRun {
    pub inbound: Vec<TraceLine>,
    pub outbound: Vec<TraceLine>,
}

fn round_up(t: u64, tick: u64) -> u64 {
    t.div_ceil(tick) * tick
}

/// Drives the sessions one after another against a fresh in-memory hub.
pub fn run_script(
    sessions: &[ScriptSession],
    config: ServerConfig,
    timing: ClientTiming,
) -> Result<ScriptRun, ScriptError> {
    let tick = config.tick_ms.max(1);
    let mut hub = Hub::new(config, Store::default())?;
    let mut run = ScriptRun {
        inbound: Vec::new(),
        outbound: Vec::new(),
    };
    let mut clock = 0u64;

    for session in sessions {
        let start = round_up(clock + timing.gap_ms, tick);
        let mut t = clock;
        while t < start {
            t += tick;
            run.outbound.extend(hub.tick(t).iter().map(outbound_line));
        }
        let conn = hub.connect();
        let mut scheduled: Vec<(u64, WireMessage)> = vec![(
            start,
            WireMessage::client(Body::Hello {
                user_id: session.user_id.clone(),
                date: Some(session.date),
                render_nonverbal: session.render_nonverbal,
            }),
        )];
        let mut script = session.utterances.iter();
        let mut ended = false;
        let limit = start + timing.session_limit_ms;

        let mut react = |outs: Vec<Outbound>,
                         now: u64,
                         scheduled: &mut Vec<(u64, WireMessage)>,
                         run: &mut ScriptRun,
                         ended: &mut bool| {
            for o in outs {
                match &o.msg.body {
                    Body::Listening { on: true } => match script.next() {
                        Some(text) => {
                            let words = text.split_whitespace().count().max(1) as u64;
                            let begin = round_up(now + timing.think_ms, tick);
                            let end = round_up(begin + words * timing.ms_per_word, tick);
                            let speech = |kind| WireMessage::client(Body::SpeechEvent { kind });
                            scheduled.push((begin, speech(SpeechEventKind::Start)));
                            scheduled.push((end, speech(SpeechEventKind::Stop)));
                            scheduled.push((
                                end,
                                WireMessage::client(Body::UserUtterance {
                                    text: text.clone(),
                                    ts_ms: end,
                                }),
                            ));
                        }
                        None => scheduled.push((
                            round_up(now + timing.think_ms, tick),
                            WireMessage::client(Body::Bye),
                        )),
                    },
                    Body::SessionEnded { .. } | Body::Error { .. } => *ended = true,
                    _ => {}
                }
                run.outbound.push(outbound_line(&o));
            }
        };

        while !ended && t < limit {
            t += tick;
            let outs = hub.tick(t);
            react(outs, t, &mut scheduled, &mut run, &mut ended);
            while !ended {
                let Some(pos) = scheduled.iter().position(|(at, _)| *at <= t) else {
                    break;
                };
                let (_, msg) = scheduled.remove(pos);
                run.inbound.push(inbound_line(t, &msg));
                let outs = hub.handle(conn, msg, t);
                react(outs, t, &mut scheduled, &mut run, &mut ended);
            }
        }
        clock = t;
    }
    Ok(run)
}
