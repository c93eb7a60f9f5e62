//! Response templates.
//!
//! Asset format, one variant per line: `family<TAB>variant_index<TAB>text`,
//! with `{name}` placeholders and `#` comments. A family named `X.comfort`
//! holds the comforting variants of `X`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Answers, ResponsePlan};
use crate::empathy::EmpathyScores;

const BUILTIN: &str = include_str!("../../assets/templates.tsv");
const COMFORT_SUFFIX: &str = ".comfort";
/// Sentiment below this selects a family's comforting variants.
pub const COMFORT_SENTIMENT: f64 = -0.3;
pub const PLACEHOLDERS: [&str; 4] = ["profession", "temperature", "activity", "last_mood"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GreetFirstDay,
    GreetDaily,
    GreetDailyMood,
    Concern,
    AskStart,
    AskProfession,
    AckProfession,
    AskMood,
    AckMood,
    AskTemperature,
    AckTemperature,
    Escalate,
    AskBreath,
    AckBreath,
    AskGratitude,
    AckGratitude,
    RecommendActivity,
    AckActivityAccept,
    AckActivityDecline,
    AskFeedback,
    AckFeedback,
    Goodbye,
    Closing,
    Reask,
    Skip,
    Support,
}

impl Family {
    pub const ALL: [Family; 26] = [
        Family::GreetFirstDay,
        Family::GreetDaily,
        Family::GreetDailyMood,
        Family::Concern,
        Family::AskStart,
        Family::AskProfession,
        Family::AckProfession,
        Family::AskMood,
        Family::AckMood,
        Family::AskTemperature,
        Family::AckTemperature,
        Family::Escalate,
        Family::AskBreath,
        Family::AckBreath,
        Family::AskGratitude,
        Family::AckGratitude,
        Family::RecommendActivity,
        Family::AckActivityAccept,
        Family::AckActivityDecline,
        Family::AskFeedback,
        Family::AckFeedback,
        Family::Goodbye,
        Family::Closing,
        Family::Reask,
        Family::Skip,
        Family::Support,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::GreetFirstDay => "greet_first_day",
            Family::GreetDaily => "greet_daily",
            Family::GreetDailyMood => "greet_daily_mood",
            Family::Concern => "concern",
            Family::AskStart => "ask_start",
            Family::AskProfession => "ask_profession",
            Family::AckProfession => "ack_profession",
            Family::AskMood => "ask_mood",
            Family::AckMood => "ack_mood",
            Family::AskTemperature => "ask_temperature",
            Family::AckTemperature => "ack_temperature",
            Family::Escalate => "escalate",
            Family::AskBreath => "ask_breath",
            Family::AckBreath => "ack_breath",
            Family::AskGratitude => "ask_gratitude",
            Family::AckGratitude => "ack_gratitude",
            Family::RecommendActivity => "recommend_activity",
            Family::AckActivityAccept => "ack_activity_accept",
            Family::AckActivityDecline => "ack_activity_decline",
            Family::AskFeedback => "ask_feedback",
            Family::AckFeedback => "ack_feedback",
            Family::Goodbye => "goodbye",
            Family::Closing => "closing",
            Family::Reask => "reask",
            Family::Skip => "skip",
            Family::Support => "support",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("line {line}: expected `family<TAB>variant_index<TAB>text`")]
    MissingField { line: usize },
    #[error("line {line}: variant index `{index}` is not a number")]
    BadIndex { line: usize, index: String },
    #[error("line {line}: duplicate variant {index} of `{family}`")]
    DuplicateVariant {
        line: usize,
        family: String,
        index: usize,
    },
    #[error("line {line}: malformed or unknown placeholder in `{text}`")]
    BadPlaceholder { line: usize, text: String },
    #[error("family `{family}` has a gap before variant {missing}")]
    VariantGap { family: String, missing: usize },
    #[error("family `{family}` has no variants")]
    MissingFamily { family: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("template `{family}` needs `{{{placeholder}}}` but no value is available")]
    MissingSlot { family: String, placeholder: String },
    #[error("no template family `{family}`")]
    UnknownFamily { family: String },
}

/// All template variants keyed by family name (including `.comfort` keys).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    families: BTreeMap<String, Vec<String>>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let set = Self::parse(BUILTIN).expect("builtin templates parse");
        set.check_complete()
            .expect("builtin templates are complete");
        set
    }

    pub fn parse(source: &str) -> Result<Self, TemplateError> {
        let mut staged: BTreeMap<String, BTreeMap<usize, String>> = BTreeMap::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = raw.splitn(3, '\t');
            let (Some(family), Some(index), Some(text)) =
                (fields.next(), fields.next(), fields.next())
            else {
                return Err(TemplateError::MissingField { line });
            };
            let family = family.trim();
            if family.is_empty() {
                return Err(TemplateError::MissingField { line });
            }
            let index: usize = index.trim().parse().map_err(|_| TemplateError::BadIndex {
                line,
                index: index.to_owned(),
            })?;
            if placeholders(text).is_none() {
                return Err(TemplateError::BadPlaceholder {
                    line,
                    text: text.to_owned(),
                });
            }
            let variants = staged.entry(family.to_owned()).or_default();
            if variants.insert(index, text.trim().to_owned()).is_some() {
                return Err(TemplateError::DuplicateVariant {
                    line,
                    family: family.to_owned(),
                    index,
                });
            }
        }

        let mut families = BTreeMap::new();
        for (family, variants) in staged {
            if let Some(missing) = variants
                .keys()
                .enumerate()
                .find(|(i, k)| i != *k)
                .map(|(i, _)| i)
            {
                return Err(TemplateError::VariantGap { family, missing });
            }
            families.insert(family, variants.into_values().collect());
        }
        Ok(Self { families })
    }

    /// Errors unless every [`Family`] has at least one variant.
    pub fn check_complete(&self) -> Result<(), TemplateError> {
        for f in Family::ALL {
            if self.variants(f.name()).is_none() {
                return Err(TemplateError::MissingFamily {
                    family: f.name().to_owned(),
                });
            }
        }
        Ok(())
    }

    pub fn variants(&self, key: &str) -> Option<&[String]> {
        self.families
            .get(key)
            .map(Vec::as_slice)
            .filter(|v| !v.is_empty())
    }

    pub fn comfort_variants(&self, family: Family) -> Option<&[String]> {
        self.variants(&format!("{}{COMFORT_SUFFIX}", family.name()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.families.keys().map(String::as_str)
    }

    /// Renders a plan into one utterance.
    ///
    /// One variant per part is drawn uniformly with a generator seeded from
    /// `seed`; comforting variants replace the regular ones when the user's
    /// sentiment is below [`COMFORT_SENTIMENT`] and the family has them.
    pub fn render(
        &self,
        plan: &ResponsePlan,
        answers: &Answers,
        empathy: &EmpathyScores,
        seed: u64,
    ) -> Result<String, RenderError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comfort = empathy.sentiment < COMFORT_SENTIMENT;
        let mut sentences = Vec::with_capacity(plan.parts.len());
        for &family in &plan.parts {
            let variants = comfort
                .then(|| self.comfort_variants(family))
                .flatten()
                .or_else(|| self.variants(family.name()))
                .ok_or_else(|| RenderError::UnknownFamily {
                    family: family.name().to_owned(),
                })?;
            let pick = &variants[rng.random_range(0..variants.len())];
            sentences.push(fill(family, pick, plan, answers)?);
        }
        Ok(sentences.join(" "))
    }
}

/// Placeholder names in `text`, or `None` if braces are malformed or a name
/// is not one of [`PLACEHOLDERS`].
fn placeholders(text: &str) -> Option<Vec<&str>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find(['{', '}']) {
        if rest[open..].starts_with('}') {
            return None;
        }
        let after = &rest[open + 1..];
        let close = after.find('}')?;
        let name = &after[..close];
        if !PLACEHOLDERS.contains(&name) {
            return None;
        }
        out.push(name);
        rest = &after[close + 1..];
    }
    Some(out)
}

fn fill(
    family: Family,
    text: &str,
    plan: &ResponsePlan,
    answers: &Answers,
) -> Result<String, RenderError> {
    let mut out = text.to_owned();
    for name in placeholders(text).unwrap_or_default() {
        let value = match name {
            "profession" => answers.profession.clone(),
            "temperature" => answers.temperature_c.map(|t| format!("{t:.1}")),
            "activity" => plan
                .activity
                .or(answers.activity)
                .map(|a| a.as_str().to_owned()),
            "last_mood" => plan.last_mood.map(|m| m.describe().to_owned()),
            _ => None,
        }
        .ok_or_else(|| RenderError::MissingSlot {
            family: family.name().to_owned(),
            placeholder: name.to_owned(),
        })?;
        out = out.replace(&format!("{{{name}}}"), &value);
    }
    Ok(out)
}
