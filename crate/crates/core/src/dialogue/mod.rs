//! Daily check-in dialogue manager.
//!
//! A session walks a fixed flow of phases. A user's first session adds a
//! profession question after the introduction; every session then covers
//! mood, body temperature, shortness of breath, gratitude, an activity
//! suggestion with a follow-up, and a goodbye that reminds the user to wash
//! their hands and wear a mask.
//!
//! The exact branch structure of the original flow chart is not available,
//! so the phase order here is a reconstruction from its prose description.

mod engine;
mod templates;

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::empathy::EmpathyScores;
use crate::expression::ExpressionClass;

pub use engine::{
    advance, escalation, next_phase, start_session, DialogueEngine, Escalation, ResponsePlan,
    FEVER_C, MAX_RETRIES,
};
pub use templates::{Family, RenderError, TemplateError, TemplateSet, COMFORT_SENTIMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionKind {
    FirstDay,
    Daily,
}

impl SessionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionKind::FirstDay => "first_day",
            SessionKind::Daily => "daily",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Intro,
    AskProfession,
    AskMood,
    AskTemperature,
    AskBreath,
    AskGratitude,
    RecommendActivity,
    ActivityFollowUp,
    Goodbye,
    Ended,
}

impl Phase {
    pub const ALL: [Phase; 10] = [
        Phase::Intro,
        Phase::AskProfession,
        Phase::AskMood,
        Phase::AskTemperature,
        Phase::AskBreath,
        Phase::AskGratitude,
        Phase::RecommendActivity,
        Phase::ActivityFollowUp,
        Phase::Goodbye,
        Phase::Ended,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Intro => "intro",
            Phase::AskProfession => "ask_profession",
            Phase::AskMood => "ask_mood",
            Phase::AskTemperature => "ask_temperature",
            Phase::AskBreath => "ask_breath",
            Phase::AskGratitude => "ask_gratitude",
            Phase::RecommendActivity => "recommend_activity",
            Phase::ActivityFollowUp => "activity_follow_up",
            Phase::Goodbye => "goodbye",
            Phase::Ended => "ended",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Phase::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

/// Activities offered near the end of a session, cycled day by day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Yoga,
    Exercise,
    Meditation,
}

impl Activity {
    pub const ALL: [Activity; 3] = [Activity::Yoga, Activity::Exercise, Activity::Meditation];

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Yoga => "yoga",
            Activity::Exercise => "exercise",
            Activity::Meditation => "meditation",
        }
    }

    /// Maps user wording ("meditate", "exercising") onto an activity.
    pub fn from_word(word: &str) -> Option<Activity> {
        let w = word.to_lowercase();
        if w.starts_with("yoga") {
            Some(Activity::Yoga)
        } else if w.starts_with("exercis") || w == "workout" {
            Some(Activity::Exercise)
        } else if w.starts_with("meditat") {
            Some(Activity::Meditation)
        } else {
            None
        }
    }
}

/// Coarse valence label stored for mood and activity feedback answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feeling {
    Positive,
    Neutral,
    Negative,
}

impl Feeling {
    /// Sentiment above +0.3 is positive, below -0.3 negative.
    pub fn from_sentiment(sentiment: f64) -> Feeling {
        if sentiment > 0.3 {
            Feeling::Positive
        } else if sentiment < -0.3 {
            Feeling::Negative
        } else {
            Feeling::Neutral
        }
    }

    /// Phrase used when a later greeting refers back to this mood.
    pub fn describe(self) -> &'static str {
        match self {
            Feeling::Positive => "in good spirits",
            Feeling::Neutral => "doing okay",
            Feeling::Negative => "feeling a bit down",
        }
    }
}

/// Answers collected during one session. Each field is written only by the
/// phase that asks for it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Answers {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profession: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mood: Option<Feeling>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_of_breath: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gratitude: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<Activity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity_feedback: Option<Feeling>,
}

/// Position in the flow plus everything the transition function needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueState {
    pub kind: SessionKind,
    pub phase: Phase,
    /// Failed attempts in the current phase.
    pub retries: u8,
    pub answers: Answers,
    /// Today's activity suggestion, fixed when the session starts.
    pub suggested_activity: Activity,
    /// Mean sentiment of up to the last three prior sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recent_sentiment: Option<f64>,
    #[serde(default)]
    pub health_escalated: bool,
    #[serde(default)]
    pub support_offered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    User,
    System,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub speaker: Speaker,
    pub text: String,
    /// Milliseconds since session start.
    pub timestamp: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empathy: Option<EmpathyScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<ExpressionClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub user_id: String,
    pub date: NaiveDate,
    pub kind: SessionKind,
    pub turns: Vec<TurnRecord>,
    pub answers: Answers,
}

impl SessionRecord {
    pub fn new(user_id: impl Into<String>, date: NaiveDate, kind: SessionKind) -> Self {
        Self {
            user_id: user_id.into(),
            date,
            kind,
            turns: Vec::new(),
            answers: Answers::default(),
        }
    }

    /// Appends a turn, bumping its timestamp if needed so timestamps stay
    /// strictly increasing.
    pub fn push_turn(&mut self, mut turn: TurnRecord) {
        if let Some(last) = self.turns.last() {
            if turn.timestamp <= last.timestamp {
                turn.timestamp = last.timestamp + 1;
            }
        }
        self.turns.push(turn);
    }

    pub fn user_scores(&self) -> impl Iterator<Item = &EmpathyScores> {
        self.turns
            .iter()
            .filter(|t| t.speaker == Speaker::User)
            .filter_map(|t| t.empathy.as_ref())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DialogueError {
    #[error("a session for user `{user_id}` on {date} already exists")]
    DuplicateSession { user_id: String, date: NaiveDate },
}
