//! Per-turn empathy analysis from text: sentiment, stress, and emotion.
//!
//! Scores are lexicon counts so every number can be traced back to the
//! words that produced it:
//!
//! * sentiment = (positive hits - negative hits) / max(1, total hits)
//! * stress = stress hits / max(1, token count), clamped to [0, 1]
//! * emotion = category with the most hits; ties and no hits give neutral
//!
//! A sentiment word within two tokens after a negator ("not", "never", ...)
//! counts for the opposite polarity, and negated stress or emotion words are
//! not counted.

mod lexicon;
mod timeline;

use serde::{Deserialize, Serialize};

use crate::expression::ExpressionClass;

pub use lexicon::{parse_phrase_list, parse_word_list, EmpathyLexicon, EMOTION_FILES};
pub(crate) use timeline::flag_from;
pub use timeline::{
    detect_extreme, update_timeline, ConditionFlag, EmpathyThresholds, MoodEntry, MoodTimeline,
    TimelineError,
};

const NEGATION_REACH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpathyScores {
    /// In [-1, 1].
    pub sentiment: f64,
    /// In [0, 1].
    pub stress: f64,
    pub emotion: ExpressionClass,
}

impl Default for EmpathyScores {
    fn default() -> Self {
        Self::neutral()
    }
}

impl EmpathyScores {
    pub const fn neutral() -> Self {
        Self {
            sentiment: 0.0,
            stress: 0.0,
            emotion: ExpressionClass::Neutral,
        }
    }
}

/// Lexicon-backed scorer. Stateless once built.
#[derive(Debug, Clone)]
pub struct EmpathyAnalyzer {
    lexicon: EmpathyLexicon,
}

impl Default for EmpathyAnalyzer {
    fn default() -> Self {
        Self::new(EmpathyLexicon::builtin())
    }
}

impl EmpathyAnalyzer {
    pub fn new(lexicon: EmpathyLexicon) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &EmpathyLexicon {
        &self.lexicon
    }

    pub fn score_turn(&self, text: &str) -> EmpathyScores {
        let tokens = crate::text::tokens(text);
        if tokens.is_empty() {
            return EmpathyScores::neutral();
        }
        let lex = &self.lexicon;

        let mut positive = 0usize;
        let mut negative = 0usize;
        let mut stress = 0usize;
        let mut emotion_counts = vec![0usize; lex.emotions.len()];

        for (i, tok) in tokens.iter().enumerate() {
            let negated = tokens[i.saturating_sub(NEGATION_REACH)..i]
                .iter()
                .any(|t| lex.negation.contains(t));
            let is_pos = lex.positive.contains(tok);
            let is_neg = lex.negative.contains(tok);
            match (is_pos, is_neg, negated) {
                (true, false, false) | (false, true, true) => positive += 1,
                (false, true, false) | (true, false, true) => negative += 1,
                _ => {}
            }
            if negated {
                continue;
            }
            if lex.stress.contains(tok) {
                stress += 1;
            }
            for (count, (_, words)) in emotion_counts.iter_mut().zip(&lex.emotions) {
                if words.contains(tok) {
                    *count += 1;
                }
            }
        }

        let hits = positive + negative;
        let sentiment = (positive as f64 - negative as f64) / hits.max(1) as f64;
        let stress = (stress as f64 / tokens.len().max(1) as f64).clamp(0.0, 1.0);

        EmpathyScores {
            sentiment,
            stress,
            emotion: dominant(
                lex.emotions
                    .iter()
                    .map(|(c, _)| *c)
                    .zip(emotion_counts.iter().copied()),
            ),
        }
    }
}

/// Label with the strictly highest count; ties and all-zero give neutral.
pub(crate) fn dominant(
    counts: impl IntoIterator<Item = (ExpressionClass, usize)>,
) -> ExpressionClass {
    let mut best = (ExpressionClass::Neutral, 0usize);
    let mut tied = false;
    for (class, n) in counts {
        if n > best.1 {
            best = (class, n);
            tied = false;
        } else if n == best.1 && n > 0 {
            tied = true;
        }
    }
    if tied {
        ExpressionClass::Neutral
    } else {
        best.0
    }
}
