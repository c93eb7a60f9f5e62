//! Empathetic daily check-in dialogue system for people in self-quarantine.
//!
//! * [`nlu`]: rule-based intent and slot detection.
//! * [`empathy`]: lexicon sentiment, stress and emotion scores, mood timelines.
//! * [`expression`]: facial expression for each system utterance.
//! * [`dialogue`]: the check-in flow and response templates.
//! * [`behavior`]: gaze, nod, gesture and listening events on a tick clock.
//! * [`session`]: wire protocol, session hub, persistence, headless replay.
//! * [`stats`]: exact sign test for pairwise preference tallies.

pub mod behavior;
pub mod dialogue;
pub mod empathy;
pub mod expression;
pub mod nlu;
pub mod session;
pub mod stats;
pub(crate) mod text;
