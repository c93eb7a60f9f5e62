//! Generators shared by the integration tests.

#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use nora_core::dialogue::{
    self, Activity, Answers, DialogueState, Feeling, Phase, SessionKind, SessionRecord, Speaker,
    TurnRecord,
};
use nora_core::empathy::{EmpathyAnalyzer, EmpathyScores};
use nora_core::expression::ExpressionClass;
use nora_core::nlu::Understander;
use nora_core::session::{JournalEntry, PersistedStore, Store};
use rand::seq::IndexedRandom;
use rand::Rng;
use std::sync::LazyLock;

pub static NLU: LazyLock<Understander> = LazyLock::new(Understander::default);
pub static EMPATHY: LazyLock<EmpathyAnalyzer> = LazyLock::new(EmpathyAnalyzer::default);

pub fn day(offset: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 5, 1).unwrap() + Days::new(offset)
}

fn random_scores<R: Rng>(rng: &mut R) -> EmpathyScores {
    EmpathyScores {
        sentiment: rng.random_range(-1.0..=1.0),
        stress: rng.random_range(0.0..=1.0),
        emotion: *ExpressionClass::ALL.choose(rng).unwrap(),
    }
}

fn random_answers<R: Rng>(rng: &mut R) -> Answers {
    let feeling = [Feeling::Positive, Feeling::Neutral, Feeling::Negative];
    Answers {
        profession: rng.random_bool(0.3).then(|| "nurse".to_owned()),
        mood: rng.random_bool(0.8).then(|| *feeling.choose(rng).unwrap()),
        temperature_c: rng
            .random_bool(0.8)
            .then(|| (rng.random_range(35.0..40.0f64) * 10.0).round() / 10.0),
        short_of_breath: rng.random_bool(0.8).then(|| rng.random_bool(0.2)),
        gratitude: rng
            .random_bool(0.5)
            .then(|| "my family, \"always\"".to_owned()),
        activity: rng
            .random_bool(0.7)
            .then(|| *Activity::ALL.choose(rng).unwrap()),
        activity_feedback: rng.random_bool(0.5).then(|| *feeling.choose(rng).unwrap()),
    }
}

pub fn random_record<R: Rng>(
    rng: &mut R,
    user_id: &str,
    date: NaiveDate,
    kind: SessionKind,
) -> SessionRecord {
    let mut record = SessionRecord::new(user_id, date, kind);
    let mut t = 0u64;
    for _ in 0..rng.random_range(0..12) {
        t += rng.random_range(1..20_000);
        let user = rng.random_bool(0.5);
        record.push_turn(TurnRecord {
            speaker: if user { Speaker::User } else { Speaker::System },
            text: ["hi", "I feel fine", "été ✓", "tab\tand \"quote\"", ""]
                .choose(rng)
                .unwrap()
                .to_string(),
            timestamp: t,
            empathy: user.then(|| random_scores(rng)),
            expression: (!user).then(|| *ExpressionClass::ALL.choose(rng).unwrap()),
        });
    }
    record.answers = random_answers(rng);
    record
}

/// A store with `sessions` committed sessions spread over a few users, in
/// shuffled date order, plus some in-progress journal entries.
pub fn random_store<R: Rng>(rng: &mut R, sessions: usize) -> PersistedStore {
    let users: Vec<String> = (0..rng.random_range(1..8))
        .map(|i| format!("user{i}"))
        .collect();
    let mut slots: Vec<(String, u64)> = Vec::new();
    for i in 0..sessions {
        slots.push((users[i % users.len()].clone(), (i / users.len()) as u64));
    }
    // Commit out of date order now and then.
    for i in 0..slots.len() {
        if rng.random_bool(0.1) {
            let j = rng.random_range(0..slots.len());
            slots.swap(i, j);
        }
    }
    let mut store = Store::default();
    for (user, offset) in &slots {
        let kind = if store.data.sessions_of(user).next().is_none() {
            SessionKind::FirstDay
        } else {
            SessionKind::Daily
        };
        let record = random_record(rng, user, day(*offset), kind);
        store.commit(record).unwrap();
    }
    for user in &users {
        if rng.random_bool(0.5) {
            let date = day(1000);
            let record = random_record(rng, user, date, SessionKind::Daily);
            let state = DialogueState {
                kind: SessionKind::Daily,
                phase: *Phase::ALL.choose(rng).unwrap(),
                retries: rng.random_range(0..3),
                answers: record.answers.clone(),
                suggested_activity: Activity::Meditation,
                recent_sentiment: rng.random_bool(0.5).then(|| rng.random_range(-1.0..1.0)),
                health_escalated: rng.random_bool(0.5),
                support_offered: rng.random_bool(0.5),
            };
            store
                .journal(JournalEntry {
                    session_id: nora_core::session::store::session_id(user, date),
                    state,
                    record,
                })
                .unwrap();
        }
    }
    store.data
}

/// Drives the dialogue engine over `utterances` and returns every state
/// visited, starting with the opening state.
pub fn run_dialogue(
    utterances: &[&str],
    user_id: &str,
    date: NaiveDate,
    history: &[SessionRecord],
) -> Vec<DialogueState> {
    let (nlu, empathy) = (&*NLU, &*EMPATHY);
    let (mut state, _) = dialogue::start_session(user_id, date, history).unwrap();
    let mut states = vec![state.clone()];
    for text in utterances {
        if state.phase == Phase::Ended {
            break;
        }
        let (next, _) = dialogue::advance(
            &state,
            &nlu.understand(text, state.phase),
            &empathy.score_turn(text),
        );
        state = next;
        states.push(state.clone());
    }
    states
}
