//! Rule-based language understanding.
//!
//! Each user utterance gets exactly one intent plus the slots that intent
//! licenses. Matching is driven by an ordered rule file (see [`IntentLexicon`])
//! and biased by the dialogue phase: the intents a phase expects are tried
//! first, then every rule in file order. Farewells win in any phase.
//!
//! The intent inventory is inferred from the check-in flow; it is not a
//! published label set.

mod lexicon;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use crate::dialogue::{Activity, Phase};

pub use lexicon::{IntentLexicon, LexiconError, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Affirm,
    Deny,
    MoodReport,
    TemperatureReport,
    BreathReport,
    ProfessionReport,
    GratitudeReport,
    ActivityFeedback,
    Farewell,
    Unknown,
}

impl Intent {
    pub const ALL: [Intent; 10] = [
        Intent::Affirm,
        Intent::Deny,
        Intent::MoodReport,
        Intent::TemperatureReport,
        Intent::BreathReport,
        Intent::ProfessionReport,
        Intent::GratitudeReport,
        Intent::ActivityFeedback,
        Intent::Farewell,
        Intent::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Intent::Affirm => "Affirm",
            Intent::Deny => "Deny",
            Intent::MoodReport => "MoodReport",
            Intent::TemperatureReport => "TemperatureReport",
            Intent::BreathReport => "BreathReport",
            Intent::ProfessionReport => "ProfessionReport",
            Intent::GratitudeReport => "GratitudeReport",
            Intent::ActivityFeedback => "ActivityFeedback",
            Intent::Farewell => "Farewell",
            Intent::Unknown => "Unknown",
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Intent {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Intent::ALL.into_iter().find(|i| i.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Yes,
    No,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Slots {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarity: Option<Polarity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profession: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mood_word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity: Option<Activity>,
    /// Free-text answer to the gratitude question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gratitude: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluResult {
    pub intent: Intent,
    pub slots: Slots,
    /// 1.0 for any rule match, 0.0 for `Unknown`.
    pub confidence: f64,
}

impl NluResult {
    pub fn unknown() -> Self {
        Self::matched(Intent::Unknown, Slots::default())
    }

    fn matched(intent: Intent, slots: Slots) -> Self {
        let confidence = if intent == Intent::Unknown { 0.0 } else { 1.0 };
        Self {
            intent,
            slots,
            confidence,
        }
    }

    /// Builds a result directly, e.g. for scripted tests of the dialogue engine.
    pub fn with_intent(intent: Intent) -> Self {
        Self::matched(intent, Slots::default())
    }
}

/// Words that end a captured profession phrase ("a nurse *at* the clinic").
const PROFESSION_STOP: &[&str] = &[
    "at", "in", "for", "with", "and", "but", "from", "so", "because", "who", "since", "on", "by",
    "of",
];
const PROFESSION_MAX_WORDS: usize = 4;

fn number_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:\.\d+)?").expect("valid number pattern"))
}

/// Finds the first decimal number in `text` and reads it as a body
/// temperature in °C.
///
/// Values in [30, 45] are taken as Celsius. Values in [86, 113] are taken as
/// Fahrenheit and converted, rounded to one decimal. Anything else is not a
/// plausible body temperature.
pub fn extract_temperature(text: &str) -> Option<f64> {
    let m = number_pattern().find(text)?;
    let value: f64 = m.as_str().parse().ok()?;
    if (30.0..=45.0).contains(&value) {
        Some(value)
    } else if (86.0..=113.0).contains(&value) {
        let celsius = (value - 32.0) * 5.0 / 9.0;
        Some((celsius * 10.0).round() / 10.0)
    } else {
        None
    }
}

/// Intent detector over an [`IntentLexicon`]. Stateless once built.
#[derive(Debug, Clone)]
pub struct Understander {
    lexicon: IntentLexicon,
}

impl Default for Understander {
    fn default() -> Self {
        Self::new(IntentLexicon::builtin())
    }
}

impl Understander {
    pub fn new(lexicon: IntentLexicon) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &IntentLexicon {
        &self.lexicon
    }

    /// Classifies one user utterance in the context of `phase`.
    pub fn understand(&self, raw: &str, phase: Phase) -> NluResult {
        let text = crate::text::normalize(raw);
        if text.is_empty() {
            return NluResult::unknown();
        }
        if self.first_match(Intent::Farewell, &text).is_some() {
            return NluResult::matched(Intent::Farewell, Slots::default());
        }

        match phase {
            Phase::AskTemperature => {
                if let Some(t) = extract_temperature(&text) {
                    return temperature_result(t);
                }
            }
            Phase::AskBreath => {
                if let Some(p) = self.breath_polarity(&text) {
                    return breath_result(p);
                }
            }
            Phase::AskProfession => {
                if let Some(result) = self.try_intent(Intent::ProfessionReport, &text, raw) {
                    return result;
                }
                if let Some(result) = self.try_intent(Intent::Deny, &text, raw) {
                    return result;
                }
                if let Some(p) = clean_profession(&text) {
                    return profession_result(p);
                }
            }
            _ => {
                for &intent in preferred_intents(phase) {
                    if let Some(result) = self.try_intent(intent, &text, raw) {
                        return result;
                    }
                }
                if phase == Phase::AskGratitude {
                    // Free-form answers count as gratitude.
                    return gratitude_result(raw);
                }
            }
        }

        for rule in self.lexicon.rules() {
            if let Some(caps) = rule.pattern.captures(&text) {
                if let Some(result) = self.result_from(rule.intent, &caps, &text, raw) {
                    return result;
                }
            }
        }
        NluResult::unknown()
    }

    /// Yes/no reading of an answer. Negation outranks affirmation.
    pub fn parse_polarity(&self, text: &str) -> Option<Polarity> {
        let text = crate::text::normalize(text);
        if self.first_match(Intent::Deny, &text).is_some() {
            Some(Polarity::No)
        } else if self.first_match(Intent::Affirm, &text).is_some() {
            Some(Polarity::Yes)
        } else {
            None
        }
    }

    /// Answer to "are you short of breath?": negation first, then symptom or
    /// all-clear phrases, then plain affirmation.
    fn breath_polarity(&self, text: &str) -> Option<Polarity> {
        if self.first_match(Intent::Deny, text).is_some() {
            return Some(Polarity::No);
        }
        for rule in self.lexicon.rules_for(Intent::BreathReport) {
            if let Some(caps) = rule.pattern.captures(text) {
                if let Some(p) = polarity_group(&caps) {
                    return Some(p);
                }
            }
        }
        self.first_match(Intent::Affirm, text)
            .map(|_| Polarity::Yes)
    }

    fn first_match<'t>(&self, intent: Intent, text: &'t str) -> Option<Captures<'t>> {
        self.lexicon
            .rules_for(intent)
            .find_map(|r| r.pattern.captures(text))
    }

    fn try_intent(&self, intent: Intent, text: &str, raw: &str) -> Option<NluResult> {
        self.lexicon
            .rules_for(intent)
            .filter_map(|r| r.pattern.captures(text))
            .find_map(|caps| self.result_from(intent, &caps, text, raw))
    }

    /// Turns a rule hit into a result, or `None` when the intent's required
    /// slot is missing (a temperature rule without a plausible number).
    /// `raw` is the utterance before normalization, kept for free-text slots.
    fn result_from(
        &self,
        intent: Intent,
        caps: &Captures<'_>,
        text: &str,
        raw: &str,
    ) -> Option<NluResult> {
        let mut slots = Slots::default();
        match intent {
            Intent::TemperatureReport => return extract_temperature(text).map(temperature_result),
            Intent::BreathReport => return polarity_group(caps).map(breath_result),
            Intent::ProfessionReport => {
                let phrase = caps.name("profession")?.as_str();
                return clean_profession(phrase).map(profession_result);
            }
            Intent::MoodReport => {
                slots.mood_word = caps.name("mood").map(|m| m.as_str().to_owned());
            }
            Intent::Affirm => {
                slots.polarity = Some(Polarity::Yes);
                slots.activity = caps
                    .name("activity")
                    .and_then(|m| Activity::from_word(m.as_str()))
                    .or_else(|| mentioned_activity(text));
            }
            Intent::Deny => slots.polarity = Some(Polarity::No),
            Intent::GratitudeReport => return Some(gratitude_result(raw)),
            _ => {}
        }
        Some(NluResult::matched(intent, slots))
    }
}

fn preferred_intents(phase: Phase) -> &'static [Intent] {
    match phase {
        Phase::Intro => &[Intent::Affirm, Intent::MoodReport, Intent::Deny],
        Phase::AskMood => &[Intent::MoodReport],
        Phase::AskGratitude => &[Intent::GratitudeReport, Intent::Deny],
        Phase::RecommendActivity => &[Intent::Affirm, Intent::Deny],
        Phase::ActivityFollowUp => &[
            Intent::ActivityFeedback,
            Intent::MoodReport,
            Intent::Affirm,
            Intent::Deny,
        ],
        _ => &[],
    }
}

fn polarity_group(caps: &Captures<'_>) -> Option<Polarity> {
    if caps.name("yes").is_some() {
        Some(Polarity::Yes)
    } else if caps.name("no").is_some() {
        Some(Polarity::No)
    } else {
        None
    }
}

fn mentioned_activity(text: &str) -> Option<Activity> {
    crate::text::tokens(text)
        .iter()
        .find_map(|t| Activity::from_word(t))
}

fn temperature_result(t: f64) -> NluResult {
    NluResult::matched(
        Intent::TemperatureReport,
        Slots {
            temperature_c: Some(t),
            ..Slots::default()
        },
    )
}

fn gratitude_result(text: &str) -> NluResult {
    NluResult::matched(
        Intent::GratitudeReport,
        Slots {
            gratitude: Some(text.split_whitespace().collect::<Vec<_>>().join(" ")),
            ..Slots::default()
        },
    )
}

fn breath_result(p: Polarity) -> NluResult {
    NluResult::matched(
        Intent::BreathReport,
        Slots {
            polarity: Some(p),
            ..Slots::default()
        },
    )
}

fn profession_result(p: String) -> NluResult {
    NluResult::matched(
        Intent::ProfessionReport,
        Slots {
            profession: Some(p),
            ..Slots::default()
        },
    )
}

/// Trims a profession phrase to its head: stops at prepositions and
/// conjunctions, drops a leading article, caps the length at four words.
/// A phrase that is already longer than four words after trimming is
/// rejected rather than guessed at.
fn clean_profession(phrase: &str) -> Option<String> {
    let mut words: Vec<String> = Vec::new();
    for token in crate::text::tokens(phrase) {
        if PROFESSION_STOP.contains(&token.as_str()) {
            break;
        }
        words.push(token);
    }
    if matches!(words.first().map(String::as_str), Some("a" | "an" | "the")) {
        words.remove(0);
    }
    if words.is_empty() || words.len() > PROFESSION_MAX_WORDS {
        return None;
    }
    Some(words.join(" "))
}
