//! Connection and session lifecycle on a single ordered event stream.
//!
//! The hub is transport-agnostic and clock-agnostic: callers feed it
//! inbound messages and clock ticks stamped with global milliseconds, and it
//! returns outbound messages in causal order. Each session keeps its own
//! session-relative clock for behavior events and turn timestamps.
//!
//! Turn-taking is half-duplex. Client turn messages that arrive while the
//! server is not listening are queued and released one user turn at a time
//! when listening starts again.

use std::collections::{BTreeMap, VecDeque};

use chrono::NaiveDate;

use super::store::{session_id, JournalEntry, Store};
use super::wire::{Body, ErrorCode, SessionSummary, SpeechEventKind, WireMessage};
use super::ServerConfig;
use crate::behavior::{
    BehaviorController, BehaviorError, BehaviorKind, ControllerOutput, Holder, SpeechActivity,
};
use crate::dialogue::{
    DialogueEngine, DialogueState, Phase, ResponsePlan, SessionRecord, Speaker, TemplateSet,
    TurnRecord,
};
use crate::empathy::{EmpathyAnalyzer, EmpathyScores};
use crate::expression::predict_expression;
use crate::nlu::Understander;

pub type ConnId = u64;

/// A message for one connection, stamped with global time.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub conn: ConnId,
    pub at: u64,
    pub msg: WireMessage,
}

const FALLBACK_TEXT: &str = "Sorry, I lost my train of thought.";

#[derive(Debug, Default)]
struct Connection {
    session: Option<String>,
}

#[derive(Debug)]
struct LiveSession {
    id: String,
    conn: Option<ConnId>,
    state: DialogueState,
    record: SessionRecord,
    controller: BehaviorController,
    render_nonverbal: bool,
    /// Global time of session-relative zero.
    origin: u64,
    /// Session-relative time when the session lost its connection.
    frozen_at: Option<u64>,
    listening: bool,
    /// User utterances of the open turn with their arrival times.
    pending: Vec<(u64, String)>,
    buffered: VecDeque<Body>,
    last_user_empathy: EmpathyScores,
    seed: u64,
    system_turns: u64,
}

impl LiveSession {
    fn rel(&self, now: u64) -> u64 {
        now.saturating_sub(self.origin)
    }

    fn send(&self, out: &mut Vec<Outbound>, at: u64, body: Body) {
        if let Some(conn) = self.conn {
            out.push(Outbound {
                conn,
                at,
                msg: WireMessage::new(Some(self.id.clone()), body),
            });
        }
    }

    /// True when nothing will happen without client input.
    fn idle(&self) -> bool {
        self.conn.is_none()
            || (self.listening
                && !self.controller.system_speaking()
                && self.controller.turn_state().last_user_activity.is_none())
    }
}

/// Stable 64-bit FNV-1a, used to derive per-session seeds.
fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn turn_seed(session_seed: u64, turn: u64) -> u64 {
    session_seed ^ turn.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Shared dialogue components and persistence.
#[derive(Debug)]
struct Core {
    config: ServerConfig,
    store: Store,
    engine: DialogueEngine,
    nlu: Understander,
    empathy: EmpathyAnalyzer,
    templates: TemplateSet,
}

#[derive(Debug)]
pub struct Hub {
    core: Core,
    connections: BTreeMap<ConnId, Connection>,
    sessions: BTreeMap<String, LiveSession>,
    next_conn: ConnId,
    now: u64,
    today: Option<NaiveDate>,
}

fn error(session: Option<String>, conn: ConnId, at: u64, code: ErrorCode, msg: &str) -> Outbound {
    Outbound {
        conn,
        at,
        msg: WireMessage::new(
            session,
            Body::Error {
                code,
                message: msg.to_owned(),
            },
        ),
    }
}

impl Hub {
    pub fn new(config: ServerConfig, store: Store) -> Result<Self, BehaviorError> {
        config.behavior.validate()?;
        Ok(Self {
            core: Core {
                config,
                store,
                engine: DialogueEngine::default(),
                nlu: Understander::default(),
                empathy: EmpathyAnalyzer::default(),
                templates: TemplateSet::builtin(),
            },
            connections: BTreeMap::new(),
            sessions: BTreeMap::new(),
            next_conn: 0,
            now: 0,
            today: None,
        })
    }

    /// Replaces the built-in language assets.
    pub fn with_assets(
        mut self,
        nlu: Understander,
        empathy: EmpathyAnalyzer,
        templates: TemplateSet,
    ) -> Self {
        self.core.nlu = nlu;
        self.core.empathy = empathy;
        self.core.templates = templates;
        self
    }

    pub fn config(&self) -> &ServerConfig {
        &self.core.config
    }

    pub fn store(&self) -> &Store {
        &self.core.store
    }

    pub fn into_store(self) -> Store {
        self.core.store
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    /// Date used for `hello` without one, ahead of the configured default.
    pub fn set_today(&mut self, date: NaiveDate) {
        self.today = Some(date);
    }

    pub fn connect(&mut self) -> ConnId {
        let id = self.next_conn;
        self.next_conn += 1;
        self.connections.insert(id, Connection::default());
        id
    }

    /// Drops a connection. Its session, if unfinished, is frozen until a
    /// `hello` for the same user and date resumes it.
    pub fn disconnect(&mut self, conn: ConnId) {
        if let Some(c) = self.connections.remove(&conn) {
            if let Some(s) = c.session.and_then(|id| self.sessions.get_mut(&id)) {
                if s.conn == Some(conn) {
                    s.conn = None;
                    s.frozen_at = Some(s.rel(self.now));
                }
            }
        }
    }

    pub fn live_sessions(&self) -> usize {
        self.sessions.len()
    }

    /// True when no attached session can make progress without input.
    pub fn is_quiescent(&self) -> bool {
        self.sessions.values().all(LiveSession::idle)
    }

    /// Parses and handles one text frame.
    pub fn handle_text(&mut self, conn: ConnId, text: &str, now: u64) -> Vec<Outbound> {
        match WireMessage::from_json(text) {
            Ok(msg) => self.handle(conn, msg, now),
            Err(e) => {
                self.now = self.now.max(now);
                let session = self.connections.get(&conn).and_then(|c| c.session.clone());
                vec![error(
                    session,
                    conn,
                    self.now,
                    ErrorCode::BadMessage,
                    &e.to_string(),
                )]
            }
        }
    }

    pub fn handle(&mut self, conn: ConnId, msg: WireMessage, now: u64) -> Vec<Outbound> {
        self.now = self.now.max(now);
        let now = self.now;
        let mut out = Vec::new();
        let current = self.connections.entry(conn).or_default().session.clone();
        let reject = |out: &mut Vec<Outbound>, code, text: &str| {
            out.push(error(current.clone(), conn, now, code, text));
        };

        match msg.body {
            Body::Hello {
                user_id,
                date,
                render_nonverbal,
            } => {
                if current.is_some() {
                    reject(&mut out, ErrorCode::Protocol, "hello already received");
                } else {
                    self.open(conn, user_id, date, render_nonverbal, &mut out);
                }
            }
            body if !body.is_client() => {
                reject(&mut out, ErrorCode::Protocol, "not a client message type");
            }
            body => {
                let Some(id) = current.clone() else {
                    reject(&mut out, ErrorCode::Protocol, "send hello first");
                    return out;
                };
                if msg.session_id.as_ref().is_some_and(|s| *s != id) {
                    reject(
                        &mut out,
                        ErrorCode::UnknownSession,
                        "session_id does not match",
                    );
                    return out;
                }
                let Some(mut s) = self.sessions.remove(&id) else {
                    reject(&mut out, ErrorCode::UnknownSession, "session is gone");
                    return out;
                };
                let keep = match body {
                    Body::Bye => {
                        self.finalize(&mut s, false, &mut out);
                        false
                    }
                    body if s.listening => {
                        self.core.client_turn(&mut s, body, now);
                        true
                    }
                    body => {
                        s.buffered.push_back(body);
                        true
                    }
                };
                if keep {
                    self.sessions.insert(id, s);
                }
            }
        }
        out
    }

    /// Advances every attached session's clock to `now`.
    pub fn tick(&mut self, now: u64) -> Vec<Outbound> {
        self.now = self.now.max(now);
        let now = self.now;
        let mut out = Vec::new();
        let ids: Vec<String> = self
            .sessions
            .iter()
            .filter(|(_, s)| s.conn.is_some())
            .map(|(id, _)| id.clone())
            .collect();
        for id in ids {
            let Some(mut s) = self.sessions.remove(&id) else {
                continue;
            };
            if self.core.step(&mut s, now, &mut out) {
                self.sessions.insert(id, s);
            } else {
                self.finalize(&mut s, true, &mut out);
            }
        }
        out
    }

    fn open(
        &mut self,
        conn: ConnId,
        user_id: String,
        date: Option<NaiveDate>,
        render_nonverbal: bool,
        out: &mut Vec<Outbound>,
    ) {
        let now = self.now;
        if user_id.trim().is_empty() {
            out.push(error(
                None,
                conn,
                now,
                ErrorCode::Protocol,
                "user_id must not be empty",
            ));
            return;
        }
        let Some(date) = date.or(self.today).or(self.core.config.default_date) else {
            out.push(error(None, conn, now, ErrorCode::Protocol, "date required"));
            return;
        };
        let id = session_id(&user_id, date);

        if let Some(s) = self.sessions.get_mut(&id) {
            if let Some(old) = s.conn.replace(conn) {
                if let Some(c) = self.connections.get_mut(&old) {
                    c.session = None;
                }
            }
            if let Some(frozen) = s.frozen_at.take() {
                s.origin = now.saturating_sub(frozen);
            }
            s.render_nonverbal = render_nonverbal;
            self.connections.entry(conn).or_default().session = Some(id);
            s.send(
                out,
                now,
                Body::SessionStarted {
                    kind: s.state.kind,
                    resumed: true,
                },
            );
            if s.listening {
                s.send(out, now, Body::Listening { on: true });
            }
            return;
        }

        if self.core.store.data.session(&user_id, date).is_some() {
            out.push(error(
                Some(id),
                conn,
                now,
                ErrorCode::SessionComplete,
                "today's session is already finished",
            ));
            return;
        }

        let seed = self.core.config.seed ^ fnv1a(&id);
        let controller = match BehaviorController::new(self.core.config.behavior.clone(), seed) {
            Ok(c) => c,
            Err(e) => {
                out.push(error(
                    Some(id),
                    conn,
                    now,
                    ErrorCode::Internal,
                    &e.to_string(),
                ));
                return;
            }
        };

        let journaled = self.core.store.data.in_progress.get(&id).cloned();
        let (state, record, opening) = match journaled {
            Some(j) => {
                let last_system = j
                    .record
                    .turns
                    .iter()
                    .rev()
                    .find(|t| t.speaker == Speaker::System)
                    .map(|t| t.text.clone());
                (j.state, j.record, Err(last_system))
            }
            None => {
                match self
                    .core
                    .engine
                    .start_session(&user_id, date, &self.core.store.data.sessions)
                {
                    Ok((state, plan)) => {
                        let record = SessionRecord::new(&user_id, date, state.kind);
                        (state, record, Ok(plan))
                    }
                    Err(e) => {
                        out.push(error(
                            Some(id),
                            conn,
                            now,
                            ErrorCode::SessionComplete,
                            &e.to_string(),
                        ));
                        return;
                    }
                }
            }
        };

        let mut s = LiveSession {
            id: id.clone(),
            conn: Some(conn),
            state,
            record,
            controller,
            render_nonverbal,
            origin: now,
            frozen_at: None,
            listening: false,
            pending: Vec::new(),
            buffered: VecDeque::new(),
            last_user_empathy: EmpathyScores::neutral(),
            seed,
            system_turns: 0,
        };
        self.connections.entry(conn).or_default().session = Some(id.clone());
        s.send(
            out,
            now,
            Body::SessionStarted {
                kind: s.state.kind,
                resumed: opening.is_err(),
            },
        );
        let text = match opening {
            Ok(plan) => self.core.render(&mut s, &plan, now, out),
            Err(last) => last.unwrap_or_else(|| FALLBACK_TEXT.to_owned()),
        };
        self.core.speak(&mut s, text, now, out);
        self.core.journal(&s, now, out);
        self.sessions.insert(id, s);
    }

    /// Commits the session if the user said anything and reports it closed.
    fn finalize(&mut self, s: &mut LiveSession, completed: bool, out: &mut Vec<Outbound>) {
        let now = self.now;
        s.record.answers = s.state.answers.clone();
        let user_turns = s
            .record
            .turns
            .iter()
            .filter(|t| t.speaker == Speaker::User)
            .count();
        if user_turns > 0 {
            if let Err(e) = self.core.store.commit(s.record.clone()) {
                s.send(
                    out,
                    now,
                    Body::Error {
                        code: ErrorCode::Internal,
                        message: e.to_string(),
                    },
                );
            }
        } else {
            self.core.store.data.in_progress.remove(&s.id);
        }
        s.send(
            out,
            now,
            Body::SessionEnded {
                summary: SessionSummary {
                    user_id: s.record.user_id.clone(),
                    date: s.record.date,
                    kind: s.record.kind,
                    answers: s.record.answers.clone(),
                    user_turns,
                    completed,
                },
            },
        );
        if let Some(c) = s.conn.and_then(|c| self.connections.get_mut(&c)) {
            c.session = None;
        }
    }
}

impl Core {
    /// Runs one session's controller to `now`. Returns false once the
    /// closing utterance has finished and the session should be finalized.
    fn step(&mut self, s: &mut LiveSession, now: u64, out: &mut Vec<Outbound>) -> bool {
        let rel = s.rel(now);
        for o in s.controller.advance_to(rel) {
            match o {
                ControllerOutput::Event(e) => match e.kind {
                    BehaviorKind::ListeningOff => {
                        s.listening = false;
                        s.send(out, now, Body::Listening { on: false });
                    }
                    _ if s.render_nonverbal => s.send(out, now, Body::Behavior(e)),
                    _ => {}
                },
                ControllerOutput::SystemTurnDone { .. } => {
                    if s.state.phase == Phase::Ended {
                        return false;
                    }
                    self.open_user_turn(s, now, out);
                }
                ControllerOutput::EndOfTurn { .. } => self.close_user_turn(s, now, out),
            }
        }
        true
    }

    fn open_user_turn(&mut self, s: &mut LiveSession, now: u64, out: &mut Vec<Outbound>) {
        let rel = s.rel(now);
        let event = s.controller.begin_user_turn(rel);
        debug_assert_eq!(event.kind, BehaviorKind::ListeningOn);
        s.listening = true;
        s.send(out, now, Body::Listening { on: true });
        while let Some(body) = s.buffered.pop_front() {
            let utterance = matches!(body, Body::UserUtterance { .. });
            self.client_turn(s, body, now);
            if utterance {
                break;
            }
        }
    }

    /// Applies a turn message while listening.
    fn client_turn(&mut self, s: &mut LiveSession, body: Body, now: u64) {
        let rel = s.rel(now);
        match body {
            Body::UserUtterance { text, .. } => {
                s.pending.push((rel, text));
                s.controller.speech(rel, SpeechActivity::UserTextFinal);
            }
            Body::SpeechEvent { kind } => {
                let activity = match kind {
                    SpeechEventKind::Start => SpeechActivity::UserSpeechStart,
                    SpeechEventKind::Stop => SpeechActivity::UserSpeechStop,
                };
                s.controller.speech(rel, activity);
            }
            _ => {}
        }
    }

    fn close_user_turn(&mut self, s: &mut LiveSession, now: u64, out: &mut Vec<Outbound>) {
        let Some(&(at, _)) = s.pending.first() else {
            // Activity but no words: keep listening.
            self.open_user_turn(s, now, out);
            return;
        };
        let text = s
            .pending
            .drain(..)
            .map(|(_, t)| t)
            .collect::<Vec<_>>()
            .join(" ");
        let nlu = self.nlu.understand(&text, s.state.phase);
        let empathy = self.empathy.score_turn(&text);
        s.record.push_turn(TurnRecord {
            speaker: Speaker::User,
            text,
            timestamp: at,
            empathy: Some(empathy),
            expression: None,
        });
        let (next, plan) = self.engine.advance(&s.state, &nlu, &empathy);
        s.state = next;
        s.record.answers = s.state.answers.clone();
        s.last_user_empathy = empathy;
        let reply = self.render(s, &plan, now, out);
        self.speak(s, reply, now, out);
        self.journal(s, now, out);
    }

    fn render(
        &self,
        s: &mut LiveSession,
        plan: &ResponsePlan,
        now: u64,
        out: &mut Vec<Outbound>,
    ) -> String {
        let mut answers = s.state.answers.clone();
        if answers.profession.is_none() {
            answers.profession = self
                .store
                .data
                .users
                .get(&s.record.user_id)
                .and_then(|u| u.profession.clone());
        }
        let seed = turn_seed(s.seed, s.system_turns);
        match self
            .templates
            .render(plan, &answers, &s.last_user_empathy, seed)
        {
            Ok(text) => text,
            Err(e) => {
                s.send(
                    out,
                    now,
                    Body::Error {
                        code: ErrorCode::Internal,
                        message: e.to_string(),
                    },
                );
                FALLBACK_TEXT.to_owned()
            }
        }
    }

    fn speak(&self, s: &mut LiveSession, text: String, now: u64, out: &mut Vec<Outbound>) {
        let rel = s.rel(now);
        let expression = predict_expression(self.empathy.lexicon(), &text, &s.last_user_empathy);
        let words = text.split_whitespace().count() as u64;
        let duration = (words * self.config.ms_per_word).max(self.config.min_utterance_ms);
        let (gesture, events) = s.controller.begin_system_turn(rel, duration, expression);
        debug_assert_eq!(s.controller.holder(), Holder::System);
        s.listening = false;
        s.send(
            out,
            now,
            Body::SystemUtterance {
                text: text.clone(),
                expression,
                gesture_id: s.render_nonverbal.then_some(gesture),
            },
        );
        if s.render_nonverbal {
            for e in events {
                s.send(out, now, Body::Behavior(e));
            }
        }
        s.record.push_turn(TurnRecord {
            speaker: Speaker::System,
            text,
            timestamp: rel,
            empathy: None,
            expression: Some(expression),
        });
        s.system_turns += 1;
    }

    fn journal(&mut self, s: &LiveSession, now: u64, out: &mut Vec<Outbound>) {
        let entry = JournalEntry {
            session_id: s.id.clone(),
            state: s.state.clone(),
            record: s.record.clone(),
        };
        if let Err(e) = self.store.journal(entry) {
            s.send(
                out,
                now,
                Body::Error {
                    code: ErrorCode::Internal,
                    message: e.to_string(),
                },
            );
        }
    }
}
