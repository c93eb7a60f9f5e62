//! Intent rule files: one `intent<TAB>pattern` per line, `#` comments.

use regex::{Regex, RegexBuilder};
use thiserror::Error;

use super::Intent;

const BUILTIN: &str = include_str!("../../assets/intents.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: expected `intent<TAB>pattern`")]
    MissingTab { line: usize },
    #[error("line {line}: unknown intent `{name}`")]
    UnknownIntent { line: usize, name: String },
    #[error("line {line}: Unknown cannot carry rules")]
    UnknownHasRules { line: usize },
    #[error("line {line}: bad pattern: {message}")]
    BadPattern { line: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub intent: Intent,
    pub pattern: Regex,
}

/// Ordered set of intent rules; earlier rules win.
#[derive(Debug, Clone)]
pub struct IntentLexicon {
    rules: Vec<Rule>,
}

impl IntentLexicon {
    pub fn parse(source: &str) -> Result<Self, LexiconError> {
        let mut rules = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let (name, pattern) = trimmed
                .split_once('\t')
                .ok_or(LexiconError::MissingTab { line })?;
            let intent: Intent = name
                .trim()
                .parse()
                .map_err(|_| LexiconError::UnknownIntent {
                    line,
                    name: name.trim().to_owned(),
                })?;
            if intent == Intent::Unknown {
                return Err(LexiconError::UnknownHasRules { line });
            }
            let pattern = RegexBuilder::new(pattern.trim())
                .case_insensitive(true)
                .size_limit(1 << 20)
                .build()
                .map_err(|e| LexiconError::BadPattern {
                    line,
                    message: e.to_string(),
                })?;
            rules.push(Rule { intent, pattern });
        }
        Ok(Self { rules })
    }

    /// The rule set shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin intent lexicon is valid")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rules_for(&self, intent: Intent) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(move |r| r.intent == intent)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}
