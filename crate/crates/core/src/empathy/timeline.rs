//! Day-by-day mood tracking and extreme-condition flags.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{dominant, EmpathyScores};
use crate::dialogue::SessionRecord;
use crate::expression::ExpressionClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoodEntry {
    pub date: NaiveDate,
    pub mean_sentiment: f64,
    pub mean_stress: f64,
    pub dominant_emotion: ExpressionClass,
}

/// One entry per session date, dates strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoodTimeline {
    pub user_id: String,
    pub entries: Vec<MoodEntry>,
}

impl MoodTimeline {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            entries: Vec::new(),
        }
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.entries.last().map(|e| e.date)
    }

    /// Mean sentiment over the last `window` entries, `None` when empty.
    pub fn recent_sentiment(&self, window: usize) -> Option<f64> {
        let n = self.entries.len().min(window);
        if n == 0 {
            return None;
        }
        let tail = &self.entries[self.entries.len() - n..];
        Some(tail.iter().map(|e| e.mean_sentiment).sum::<f64>() / n as f64)
    }

    /// Rebuilds a timeline from finished sessions, oldest first. Sessions of
    /// other users are ignored.
    pub fn from_sessions<'a>(
        user_id: &str,
        sessions: impl IntoIterator<Item = &'a SessionRecord>,
    ) -> Result<Self, TimelineError> {
        let mut mine: Vec<&SessionRecord> = sessions
            .into_iter()
            .filter(|s| s.user_id == user_id)
            .collect();
        mine.sort_by_key(|s| s.date);
        let mut timeline = MoodTimeline::new(user_id);
        for s in mine {
            timeline = update_timeline(timeline, s)?;
        }
        Ok(timeline)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TimelineError {
    #[error("session date {date} is not after the last timeline date {last}")]
    OutOfOrderDate { date: NaiveDate, last: NaiveDate },
    #[error("session belongs to `{session}`, timeline to `{timeline}`")]
    UserMismatch { session: String, timeline: String },
}

/// Appends the aggregate of a finished session's user turns.
pub fn update_timeline(
    mut timeline: MoodTimeline,
    session: &SessionRecord,
) -> Result<MoodTimeline, TimelineError> {
    if session.user_id != timeline.user_id {
        return Err(TimelineError::UserMismatch {
            session: session.user_id.clone(),
            timeline: timeline.user_id.clone(),
        });
    }
    if let Some(last) = timeline.last_date() {
        if session.date <= last {
            return Err(TimelineError::OutOfOrderDate {
                date: session.date,
                last,
            });
        }
    }

    let scores: Vec<&EmpathyScores> = session.user_scores().collect();
    let n = scores.len().max(1) as f64;
    let mean_sentiment = scores.iter().map(|s| s.sentiment).sum::<f64>() / n;
    let mean_stress = scores.iter().map(|s| s.stress).sum::<f64>() / n;
    let counts = ExpressionClass::ALL
        .into_iter()
        .map(|c| (c, scores.iter().filter(|s| s.emotion == c).count()));

    timeline.entries.push(MoodEntry {
        date: session.date,
        mean_sentiment,
        mean_stress,
        dominant_emotion: dominant(counts),
    });
    Ok(timeline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFlag {
    None,
    Elevated,
    Extreme,
}

/// Thresholds for [`detect_extreme`]. These are tunable, not clinical values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpathyThresholds {
    /// Current-turn stress above this is extreme.
    pub extreme_stress: f64,
    /// Current-turn sentiment below this is extreme.
    pub extreme_sentiment: f64,
    /// Rolling mean sentiment below this is elevated.
    pub elevated_mean_sentiment: f64,
    /// Number of most recent timeline entries in the rolling mean.
    pub window: usize,
}

impl Default for EmpathyThresholds {
    fn default() -> Self {
        Self {
            extreme_stress: 0.7,
            extreme_sentiment: -0.6,
            elevated_mean_sentiment: -0.3,
            window: 3,
        }
    }
}

/// Flags the current turn against fixed thresholds and the recent timeline.
/// Extreme outranks elevated. When the timeline is shorter than the window,
/// the mean is over the entries that exist.
pub fn detect_extreme(
    timeline: &MoodTimeline,
    current: &EmpathyScores,
    thresholds: &EmpathyThresholds,
) -> ConditionFlag {
    flag_from(
        timeline.recent_sentiment(thresholds.window),
        current,
        thresholds,
    )
}

pub(crate) fn flag_from(
    recent_sentiment: Option<f64>,
    current: &EmpathyScores,
    thresholds: &EmpathyThresholds,
) -> ConditionFlag {
    if current.stress > thresholds.extreme_stress
        || current.sentiment < thresholds.extreme_sentiment
    {
        ConditionFlag::Extreme
    } else if recent_sentiment.is_some_and(|m| m < thresholds.elevated_mean_sentiment) {
        ConditionFlag::Elevated
    } else {
        ConditionFlag::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::{SessionKind, Speaker, TurnRecord};

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, d).unwrap()
    }

    fn session(d: u32, scores: &[(f64, ExpressionClass)]) -> SessionRecord {
        let mut s = SessionRecord::new("u1", day(d), SessionKind::Daily);
        for (i, &(sentiment, emotion)) in scores.iter().enumerate() {
            s.push_turn(TurnRecord {
                speaker: Speaker::User,
                text: String::new(),
                timestamp: i as u64 * 10,
                empathy: Some(EmpathyScores {
                    sentiment,
                    stress: 0.0,
                    emotion,
                }),
                expression: None,
            });
            s.push_turn(TurnRecord {
                speaker: Speaker::System,
                text: String::new(),
                timestamp: i as u64 * 10 + 5,
                empathy: None,
                expression: Some(ExpressionClass::Happiness),
            });
        }
        s
    }

    fn entry(d: u32, sentiment: f64) -> MoodEntry {
        MoodEntry {
            date: day(d),
            mean_sentiment: sentiment,
            mean_stress: 0.0,
            dominant_emotion: ExpressionClass::Neutral,
        }
    }

    #[test]
    fn mean_sentiment_of_session() {
        use ExpressionClass::*;
        let t = update_timeline(
            MoodTimeline::new("u1"),
            &session(1, &[(0.5, Neutral), (-0.5, Neutral)]),
        )
        .unwrap();
        assert_eq!(t.entries[0].mean_sentiment, 0.0);
    }

    #[test]
    fn dominant_emotion_by_count() {
        use ExpressionClass::*;
        let t = update_timeline(
            MoodTimeline::new("u1"),
            &session(1, &[(0.0, Sadness), (0.0, Sadness), (0.0, Neutral)]),
        )
        .unwrap();
        assert_eq!(t.entries[0].dominant_emotion, Sadness);
    }

    #[test]
    fn repeated_date_rejected() {
        let t = update_timeline(MoodTimeline::new("u1"), &session(2, &[])).unwrap();
        assert_eq!(
            update_timeline(t.clone(), &session(2, &[])).unwrap_err(),
            TimelineError::OutOfOrderDate {
                date: day(2),
                last: day(2)
            }
        );
        assert!(update_timeline(t, &session(1, &[])).is_err());
    }

    #[test]
    fn session_without_user_turns_is_neutral() {
        let t = update_timeline(MoodTimeline::new("u1"), &session(1, &[])).unwrap();
        assert_eq!(t.entries[0], entry(1, 0.0));
    }

    #[test]
    fn other_users_session_rejected() {
        let mut s = session(1, &[]);
        s.user_id = "u2".into();
        assert!(matches!(
            update_timeline(MoodTimeline::new("u1"), &s),
            Err(TimelineError::UserMismatch { .. })
        ));
    }

    #[test]
    fn flag_examples() {
        let th = EmpathyThresholds::default();
        let empty = MoodTimeline::new("u1");
        let current = EmpathyScores {
            sentiment: -0.9,
            stress: 0.1,
            emotion: ExpressionClass::Neutral,
        };
        assert_eq!(
            detect_extreme(&empty, &current, &th),
            ConditionFlag::Extreme
        );

        let mut three = MoodTimeline::new("u1");
        three.entries = vec![entry(1, -0.4), entry(2, -0.4), entry(3, -0.4)];
        assert_eq!(
            detect_extreme(&three, &EmpathyScores::neutral(), &th),
            ConditionFlag::Elevated
        );
        assert_eq!(
            detect_extreme(&empty, &EmpathyScores::neutral(), &th),
            ConditionFlag::None
        );
    }

    #[test]
    fn window_uses_latest_entries() {
        let th = EmpathyThresholds::default();
        let mut t = MoodTimeline::new("u1");
        t.entries = vec![entry(1, -1.0), entry(2, 0.0), entry(3, 0.0), entry(4, 0.0)];
        assert_eq!(
            detect_extreme(&t, &EmpathyScores::neutral(), &th),
            ConditionFlag::None
        );
    }

    #[test]
    fn high_stress_is_extreme() {
        let th = EmpathyThresholds::default();
        let s = EmpathyScores {
            sentiment: 0.5,
            stress: 0.75,
            emotion: ExpressionClass::Neutral,
        };
        assert_eq!(
            detect_extreme(&MoodTimeline::new("u"), &s, &th),
            ConditionFlag::Extreme
        );
    }
}
