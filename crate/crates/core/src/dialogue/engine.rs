//! Session start and the phase transition function.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    Activity, Answers, DialogueError, DialogueState, Family, Feeling, Phase, SessionKind,
    SessionRecord,
};
use crate::empathy::{flag_from, ConditionFlag, EmpathyScores, EmpathyThresholds, MoodTimeline};
use crate::nlu::{Intent, NluResult, Polarity};

/// Re-asks allowed per phase before it is skipped.
pub const MAX_RETRIES: u8 = 2;
/// Temperatures at or above this (°C) trigger the health-professional advice.
pub const FEVER_C: f64 = 37.5;

/// Sentences to say next, as template families in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsePlan {
    pub parts: Vec<Family>,
    /// Phase the flow moves to after the one now current.
    pub next_phase: Phase,
    pub activity: Option<Activity>,
    pub last_mood: Option<Feeling>,
}

/// Why a health-professional sentence was added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Escalation {
    Fever,
    ShortOfBreath,
}

/// Dialogue manager configuration. The transition functions are pure.
#[derive(Debug, Clone, Default)]
pub struct DialogueEngine {
    pub thresholds: EmpathyThresholds,
}

/// Starts a session with default thresholds. See [`DialogueEngine::start_session`].
pub fn start_session(
    user_id: &str,
    date: NaiveDate,
    history: &[SessionRecord],
) -> Result<(DialogueState, ResponsePlan), DialogueError> {
    DialogueEngine::default().start_session(user_id, date, history)
}

/// One transition with default thresholds. See [`DialogueEngine::advance`].
pub fn advance(
    state: &DialogueState,
    nlu: &NluResult,
    empathy: &EmpathyScores,
) -> (DialogueState, ResponsePlan) {
    DialogueEngine::default().advance(state, nlu, empathy)
}

impl DialogueEngine {
    pub fn new(thresholds: EmpathyThresholds) -> Self {
        Self { thresholds }
    }

    /// Opens the session for `(user_id, date)`.
    ///
    /// The session is a first-day session iff the user has no prior record.
    /// Daily greetings mention the most recent recorded mood, and today's
    /// activity suggestion cycles with the number of prior sessions.
    pub fn start_session(
        &self,
        user_id: &str,
        date: NaiveDate,
        history: &[SessionRecord],
    ) -> Result<(DialogueState, ResponsePlan), DialogueError> {
        let mut mine: Vec<&SessionRecord> =
            history.iter().filter(|s| s.user_id == user_id).collect();
        if mine.iter().any(|s| s.date == date) {
            return Err(DialogueError::DuplicateSession {
                user_id: user_id.to_owned(),
                date,
            });
        }
        mine.sort_by_key(|s| s.date);

        let kind = if mine.is_empty() {
            SessionKind::FirstDay
        } else {
            SessionKind::Daily
        };
        let suggested_activity = Activity::ALL[mine.len() % Activity::ALL.len()];
        let recent_sentiment = MoodTimeline::from_sessions(user_id, mine.iter().copied())
            .ok()
            .and_then(|t| t.recent_sentiment(self.thresholds.window));
        let last_mood = mine.iter().rev().find_map(|s| s.answers.mood);

        let mut parts = vec![match (kind, last_mood) {
            (SessionKind::FirstDay, _) => Family::GreetFirstDay,
            (SessionKind::Daily, Some(_)) => Family::GreetDailyMood,
            (SessionKind::Daily, None) => Family::GreetDaily,
        }];
        if flag_from(
            recent_sentiment,
            &EmpathyScores::neutral(),
            &self.thresholds,
        ) == ConditionFlag::Elevated
        {
            parts.push(Family::Concern);
        }

        let state = DialogueState {
            kind,
            phase: Phase::Intro,
            retries: 0,
            answers: Answers::default(),
            suggested_activity,
            recent_sentiment,
            health_escalated: false,
            support_offered: false,
        };
        let plan = ResponsePlan {
            parts,
            next_phase: next_phase(kind, Phase::Intro),
            activity: Some(suggested_activity),
            last_mood,
        };
        Ok((state, plan))
    }

    /// Moves the dialogue one user turn forward.
    ///
    /// An answer the current phase accepts moves to the next phase. Anything
    /// else is re-asked up to [`MAX_RETRIES`] times, after which the phase is
    /// skipped. A farewell jumps to `Goodbye`, and any input in `Goodbye`
    /// ends the session. `Ended` is absorbing.
    pub fn advance(
        &self,
        state: &DialogueState,
        nlu: &NluResult,
        empathy: &EmpathyScores,
    ) -> (DialogueState, ResponsePlan) {
        let mut next = state.clone();
        let mut parts = Vec::new();

        match state.phase {
            Phase::Ended => {}
            Phase::Goodbye => {
                next.phase = Phase::Ended;
                parts.push(Family::Closing);
            }
            _ if nlu.intent == Intent::Farewell => {
                next.phase = Phase::Goodbye;
                parts.push(Family::Goodbye);
            }
            phase => match accept(state, nlu, empathy, &mut next.answers) {
                Some(ack) => {
                    let target = next_phase(state.kind, phase);
                    parts.extend(ack);
                    self.add_side_sentences(&mut next, empathy, &mut parts);
                    next.phase = target;
                    if let Some(ask) = question(target) {
                        parts.push(ask);
                    }
                }
                None if state.retries < MAX_RETRIES => {
                    next.retries += 1;
                    parts.push(Family::Reask);
                    parts.extend(question(phase).or(Some(Family::AskStart)));
                }
                None => {
                    let target = skip_target(state.kind, phase);
                    parts.push(Family::Skip);
                    next.phase = target;
                    if let Some(ask) = question(target) {
                        parts.push(ask);
                    }
                }
            },
        }

        if next.phase != state.phase {
            next.retries = 0;
        }
        let plan = ResponsePlan {
            parts,
            next_phase: next_phase(next.kind, next.phase),
            activity: next.answers.activity.or(Some(next.suggested_activity)),
            last_mood: None,
        };
        (next, plan)
    }

    /// Health advice once per session on fever or breathlessness, and a
    /// support sentence once per session when the turn looks extreme.
    fn add_side_sentences(
        &self,
        state: &mut DialogueState,
        empathy: &EmpathyScores,
        parts: &mut Vec<Family>,
    ) {
        if !state.health_escalated && escalation(&state.answers).is_some() {
            state.health_escalated = true;
            parts.push(Family::Escalate);
        }
        if !state.support_offered
            && flag_from(state.recent_sentiment, empathy, &self.thresholds)
                == ConditionFlag::Extreme
        {
            state.support_offered = true;
            parts.push(Family::Support);
        }
    }
}

/// Reason to suggest contacting a health professional, if any.
pub fn escalation(answers: &Answers) -> Option<Escalation> {
    if answers.temperature_c.is_some_and(|t| t >= FEVER_C) {
        Some(Escalation::Fever)
    } else if answers.short_of_breath == Some(true) {
        Some(Escalation::ShortOfBreath)
    } else {
        None
    }
}

/// Acknowledgment families if `phase` accepts this answer, storing the
/// answer on the way. `None` means re-ask.
fn accept(
    state: &DialogueState,
    nlu: &NluResult,
    empathy: &EmpathyScores,
    answers: &mut Answers,
) -> Option<Vec<Family>> {
    let slots = &nlu.slots;
    match (state.phase, nlu.intent) {
        (_, Intent::Unknown) => None,
        (Phase::Intro, _) => Some(vec![]),
        (Phase::AskProfession, Intent::ProfessionReport) => {
            answers.profession = Some(slots.profession.clone()?);
            Some(vec![Family::AckProfession])
        }
        (Phase::AskProfession, Intent::Deny) => Some(vec![Family::Skip]),
        (Phase::AskMood, Intent::MoodReport) => {
            answers.mood = Some(Feeling::from_sentiment(empathy.sentiment));
            Some(vec![Family::AckMood])
        }
        (Phase::AskTemperature, Intent::TemperatureReport) => {
            answers.temperature_c = Some(slots.temperature_c?);
            Some(vec![Family::AckTemperature])
        }
        (Phase::AskBreath, Intent::BreathReport) => {
            answers.short_of_breath = Some(slots.polarity? == Polarity::Yes);
            Some(vec![Family::AckBreath])
        }
        (Phase::AskGratitude, Intent::GratitudeReport) => {
            answers.gratitude = slots.gratitude.clone();
            Some(vec![Family::AckGratitude])
        }
        (Phase::AskGratitude, Intent::Deny) => Some(vec![Family::AckGratitude]),
        (Phase::RecommendActivity, Intent::Affirm) => {
            answers.activity = Some(slots.activity.unwrap_or(state.suggested_activity));
            Some(vec![Family::AckActivityAccept])
        }
        (Phase::RecommendActivity, Intent::Deny) => {
            answers.activity = Some(state.suggested_activity);
            Some(vec![Family::AckActivityDecline])
        }
        (
            Phase::ActivityFollowUp,
            Intent::ActivityFeedback | Intent::MoodReport | Intent::Affirm | Intent::Deny,
        ) => {
            answers.activity_feedback = Some(Feeling::from_sentiment(empathy.sentiment));
            Some(vec![Family::AckFeedback])
        }
        _ => None,
    }
}

/// Next phase in the normal flow.
pub fn next_phase(kind: SessionKind, phase: Phase) -> Phase {
    match phase {
        Phase::Intro if kind == SessionKind::FirstDay => Phase::AskProfession,
        Phase::Intro | Phase::AskProfession => Phase::AskMood,
        Phase::AskMood => Phase::AskTemperature,
        Phase::AskTemperature => Phase::AskBreath,
        Phase::AskBreath => Phase::AskGratitude,
        Phase::AskGratitude => Phase::RecommendActivity,
        Phase::RecommendActivity => Phase::ActivityFollowUp,
        Phase::ActivityFollowUp => Phase::Goodbye,
        Phase::Goodbye | Phase::Ended => Phase::Ended,
    }
}

/// Where a phase goes when its retries run out. Without an accepted
/// suggestion there is nothing to follow up on.
fn skip_target(kind: SessionKind, phase: Phase) -> Phase {
    match phase {
        Phase::RecommendActivity => Phase::Goodbye,
        _ => next_phase(kind, phase),
    }
}

/// The family that asks a phase's question. The follow-up question is part
/// of the accept/decline acknowledgment, so it appears here only for re-asks.
fn question(phase: Phase) -> Option<Family> {
    match phase {
        Phase::Intro => None,
        Phase::AskProfession => Some(Family::AskProfession),
        Phase::AskMood => Some(Family::AskMood),
        Phase::AskTemperature => Some(Family::AskTemperature),
        Phase::AskBreath => Some(Family::AskBreath),
        Phase::AskGratitude => Some(Family::AskGratitude),
        Phase::RecommendActivity => Some(Family::RecommendActivity),
        Phase::ActivityFollowUp => None,
        Phase::Goodbye => Some(Family::Goodbye),
        Phase::Ended => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlu::Slots;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, d).unwrap()
    }

    fn state_at(phase: Phase) -> DialogueState {
        let (mut s, _) = start_session("u1", day(1), &[]).unwrap();
        s.phase = phase;
        s
    }

    fn nlu(intent: Intent, slots: Slots) -> NluResult {
        NluResult {
            intent,
            slots,
            confidence: if intent == Intent::Unknown { 0.0 } else { 1.0 },
        }
    }

    fn prior(d: u32, mood: Option<Feeling>) -> SessionRecord {
        let mut r = SessionRecord::new("u1", day(d), SessionKind::FirstDay);
        r.answers.mood = mood;
        r
    }

    #[test]
    fn new_user_gets_first_day() {
        let (s, plan) = start_session("u1", day(1), &[]).unwrap();
        assert_eq!(s.kind, SessionKind::FirstDay);
        assert_eq!(s.phase, Phase::Intro);
        assert_eq!(plan.next_phase, Phase::AskProfession);
        assert_eq!(plan.parts, vec![Family::GreetFirstDay]);
    }

    #[test]
    fn known_user_gets_daily_with_mood_reference() {
        let history = [prior(1, Some(Feeling::Negative))];
        let (s, plan) = start_session("u1", day(2), &history).unwrap();
        assert_eq!(s.kind, SessionKind::Daily);
        assert_eq!(s.phase, Phase::Intro);
        assert_eq!(plan.next_phase, Phase::AskMood);
        assert_eq!(plan.parts[0], Family::GreetDailyMood);
        assert_eq!(plan.last_mood, Some(Feeling::Negative));
    }

    #[test]
    fn other_users_history_does_not_count() {
        let mut other = prior(1, None);
        other.user_id = "u2".into();
        let (s, _) = start_session("u1", day(1), &[other]).unwrap();
        assert_eq!(s.kind, SessionKind::FirstDay);
    }

    #[test]
    fn duplicate_date_rejected() {
        let err = start_session("u1", day(1), &[prior(1, None)]).unwrap_err();
        assert_eq!(
            err,
            DialogueError::DuplicateSession {
                user_id: "u1".into(),
                date: day(1)
            }
        );
    }

    #[test]
    fn activity_cycles_by_day() {
        let mut history = Vec::new();
        let mut seen = Vec::new();
        for d in 1..=4 {
            let (s, _) = start_session("u1", day(d), &history).unwrap();
            seen.push(s.suggested_activity);
            history.push(prior(d, None));
        }
        assert_eq!(
            seen,
            vec![
                Activity::Yoga,
                Activity::Exercise,
                Activity::Meditation,
                Activity::Yoga
            ]
        );
    }

    #[test]
    fn temperature_reading_moves_to_breath() {
        let slots = Slots {
            temperature_c: Some(37.2),
            ..Slots::default()
        };
        let (s, plan) = advance(
            &state_at(Phase::AskTemperature),
            &nlu(Intent::TemperatureReport, slots),
            &EmpathyScores::neutral(),
        );
        assert_eq!(s.phase, Phase::AskBreath);
        assert_eq!(s.answers.temperature_c, Some(37.2));
        assert_eq!(plan.parts, vec![Family::AckTemperature, Family::AskBreath]);
    }

    #[test]
    fn fever_adds_escalation_once() {
        let slots = Slots {
            temperature_c: Some(38.0),
            ..Slots::default()
        };
        let (s, plan) = advance(
            &state_at(Phase::AskTemperature),
            &nlu(Intent::TemperatureReport, slots),
            &EmpathyScores::neutral(),
        );
        assert_eq!(
            plan.parts,
            vec![Family::AckTemperature, Family::Escalate, Family::AskBreath]
        );
        let yes = Slots {
            polarity: Some(Polarity::Yes),
            ..Slots::default()
        };
        let (s, plan) = advance(
            &s,
            &nlu(Intent::BreathReport, yes),
            &EmpathyScores::neutral(),
        );
        assert_eq!(s.answers.short_of_breath, Some(true));
        assert!(!plan.parts.contains(&Family::Escalate));
    }

    #[test]
    fn breathlessness_escalates() {
        let yes = Slots {
            polarity: Some(Polarity::Yes),
            ..Slots::default()
        };
        let (_, plan) = advance(
            &state_at(Phase::AskBreath),
            &nlu(Intent::BreathReport, yes),
            &EmpathyScores::neutral(),
        );
        assert!(plan.parts.contains(&Family::Escalate));
        assert_eq!(
            escalation(&Answers {
                temperature_c: Some(37.4),
                ..Answers::default()
            }),
            None
        );
    }

    #[test]
    fn unknown_retries_then_skips() {
        let unknown = NluResult::unknown();
        let neutral = EmpathyScores::neutral();
        let (s1, p1) = advance(&state_at(Phase::AskMood), &unknown, &neutral);
        assert_eq!((s1.phase, s1.retries), (Phase::AskMood, 1));
        assert_eq!(p1.parts, vec![Family::Reask, Family::AskMood]);
        let (s2, _) = advance(&s1, &unknown, &neutral);
        assert_eq!((s2.phase, s2.retries), (Phase::AskMood, 2));
        let (s3, p3) = advance(&s2, &unknown, &neutral);
        assert_eq!((s3.phase, s3.retries), (Phase::AskTemperature, 0));
        assert_eq!(p3.parts, vec![Family::Skip, Family::AskTemperature]);
        assert_eq!(s3.answers.mood, None);
    }

    #[test]
    fn farewell_short_circuits() {
        let (s, plan) = advance(
            &state_at(Phase::AskGratitude),
            &NluResult::with_intent(Intent::Farewell),
            &EmpathyScores::neutral(),
        );
        assert_eq!(s.phase, Phase::Goodbye);
        assert_eq!(plan.parts, vec![Family::Goodbye]);
        let (s, plan) = advance(&s, &NluResult::unknown(), &EmpathyScores::neutral());
        assert_eq!(s.phase, Phase::Ended);
        assert_eq!(plan.parts, vec![Family::Closing]);
    }

    #[test]
    fn ended_is_absorbing() {
        let s = state_at(Phase::Ended);
        let (next, plan) = advance(
            &s,
            &NluResult::with_intent(Intent::Affirm),
            &EmpathyScores::neutral(),
        );
        assert_eq!(next, s);
        assert!(plan.parts.is_empty());
    }

    #[test]
    fn declining_activity_still_follows_up() {
        let (s, plan) = advance(
            &state_at(Phase::RecommendActivity),
            &NluResult::with_intent(Intent::Deny),
            &EmpathyScores::neutral(),
        );
        assert_eq!(s.phase, Phase::ActivityFollowUp);
        assert_eq!(s.answers.activity, Some(Activity::Yoga));
        assert_eq!(plan.parts, vec![Family::AckActivityDecline]);
    }

    #[test]
    fn skipped_recommendation_goes_to_goodbye() {
        let mut s = state_at(Phase::RecommendActivity);
        s.retries = MAX_RETRIES;
        let (s, plan) = advance(&s, &NluResult::unknown(), &EmpathyScores::neutral());
        assert_eq!(s.phase, Phase::Goodbye);
        assert_eq!(plan.parts, vec![Family::Skip, Family::Goodbye]);
    }

    #[test]
    fn extreme_turn_adds_support_once() {
        let distressed = EmpathyScores {
            sentiment: -1.0,
            ..EmpathyScores::neutral()
        };
        let (s, plan) = advance(
            &state_at(Phase::AskMood),
            &NluResult::with_intent(Intent::MoodReport),
            &distressed,
        );
        assert_eq!(s.answers.mood, Some(Feeling::Negative));
        assert!(plan.parts.contains(&Family::Support));
        let slots = Slots {
            temperature_c: Some(36.5),
            ..Slots::default()
        };
        let (_, plan) = advance(&s, &nlu(Intent::TemperatureReport, slots), &distressed);
        assert!(!plan.parts.contains(&Family::Support));
    }

    #[test]
    fn elevated_history_adds_concern_to_greeting() {
        let mut history = Vec::new();
        for d in 1..=3 {
            let mut r = prior(d, None);
            r.turns.push(crate::dialogue::TurnRecord {
                speaker: crate::dialogue::Speaker::User,
                text: "sad".into(),
                timestamp: 1,
                empathy: Some(EmpathyScores {
                    sentiment: -0.5,
                    ..EmpathyScores::neutral()
                }),
                expression: None,
            });
            history.push(r);
        }
        let (_, plan) = start_session("u1", day(4), &history).unwrap();
        assert!(plan.parts.contains(&Family::Concern));
    }
}
