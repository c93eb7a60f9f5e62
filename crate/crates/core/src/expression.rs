//! Facial expression shown while the agent speaks.
//!
//! Rules, first match wins:
//! 1. laughter if the utterance contains a laughter token;
//! 2. sadness when the user sounds sad and the utterance is comforting
//!    (empathic mirroring);
//! 3. the emotion category with the most hits in the utterance;
//! 4. neutral.
//!
//! During user turns the renderer holds the neutral face; no expression is
//! predicted for them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::empathy::{dominant, EmpathyLexicon, EmpathyScores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpressionClass {
    Happiness,
    Sadness,
    Anger,
    Surprise,
    Laughter,
    Neutral,
}

impl ExpressionClass {
    pub const ALL: [ExpressionClass; 6] = [
        ExpressionClass::Happiness,
        ExpressionClass::Sadness,
        ExpressionClass::Anger,
        ExpressionClass::Surprise,
        ExpressionClass::Laughter,
        ExpressionClass::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExpressionClass::Happiness => "happiness",
            ExpressionClass::Sadness => "sadness",
            ExpressionClass::Anger => "anger",
            ExpressionClass::Surprise => "surprise",
            ExpressionClass::Laughter => "laughter",
            ExpressionClass::Neutral => "neutral",
        }
    }
}

impl fmt::Display for ExpressionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExpressionClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ExpressionClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or(())
    }
}

/// True if `text` contains one of the lexicon's comfort marker phrases.
pub fn is_comforting(lexicon: &EmpathyLexicon, text: &str) -> bool {
    let text = crate::text::normalize(text);
    lexicon.comfort.iter().any(|m| text.contains(m.as_str()))
}

pub fn predict_expression(
    lexicon: &EmpathyLexicon,
    system_text: &str,
    user_empathy: &EmpathyScores,
) -> ExpressionClass {
    let tokens = crate::text::tokens(system_text);
    let laughs = lexicon
        .emotion_words(ExpressionClass::Laughter)
        .is_some_and(|w| tokens.iter().any(|t| w.contains(t)));
    if laughs {
        return ExpressionClass::Laughter;
    }
    if user_empathy.emotion == ExpressionClass::Sadness && is_comforting(lexicon, system_text) {
        return ExpressionClass::Sadness;
    }
    dominant(
        lexicon
            .emotions
            .iter()
            .filter(|(c, _)| *c != ExpressionClass::Laughter)
            .map(|(c, words)| (*c, tokens.iter().filter(|t| words.contains(*t)).count())),
    )
}
