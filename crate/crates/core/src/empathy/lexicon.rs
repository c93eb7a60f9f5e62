use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use crate::expression::ExpressionClass;

/// Word lists backing the empathy scorers, one file per category.
#[derive(Debug, Clone, Default)]
pub struct EmpathyLexicon {
    pub positive: HashSet<String>,
    pub negative: HashSet<String>,
    pub stress: HashSet<String>,
    pub negation: HashSet<String>,
    /// Emotion word lists, in tie-breaking-irrelevant order (ties yield neutral).
    pub emotions: Vec<(ExpressionClass, HashSet<String>)>,
    /// Phrases that mark an utterance as comforting.
    pub comfort: Vec<String>,
}

/// Categories and their file names inside a lexicon directory.
pub const EMOTION_FILES: [(ExpressionClass, &str); 5] = [
    (ExpressionClass::Happiness, "happiness.txt"),
    (ExpressionClass::Sadness, "sadness.txt"),
    (ExpressionClass::Anger, "anger.txt"),
    (ExpressionClass::Surprise, "surprise.txt"),
    (ExpressionClass::Laughter, "laughter.txt"),
];

macro_rules! builtin_file {
    ($name:literal) => {
        include_str!(concat!("../../assets/empathy/", $name))
    };
}

/// Parses a word list: one token per line, `#` comments, case-folded.
/// Entries are normalized the same way the scorer normalizes text.
pub fn parse_word_list(source: &str) -> HashSet<String> {
    source
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| crate::text::tokens(l).into_iter().next())
        .collect()
}

/// Parses a phrase list: one phrase per line, `#` comments, lowercased.
pub fn parse_phrase_list(source: &str) -> Vec<String> {
    source
        .lines()
        .map(crate::text::normalize)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

impl EmpathyLexicon {
    pub fn builtin() -> Self {
        let emotions = vec![
            (
                ExpressionClass::Happiness,
                parse_word_list(builtin_file!("happiness.txt")),
            ),
            (
                ExpressionClass::Sadness,
                parse_word_list(builtin_file!("sadness.txt")),
            ),
            (
                ExpressionClass::Anger,
                parse_word_list(builtin_file!("anger.txt")),
            ),
            (
                ExpressionClass::Surprise,
                parse_word_list(builtin_file!("surprise.txt")),
            ),
            (
                ExpressionClass::Laughter,
                parse_word_list(builtin_file!("laughter.txt")),
            ),
        ];
        Self {
            positive: parse_word_list(builtin_file!("positive.txt")),
            negative: parse_word_list(builtin_file!("negative.txt")),
            stress: parse_word_list(builtin_file!("stress.txt")),
            negation: parse_word_list(builtin_file!("negation.txt")),
            emotions,
            comfort: parse_phrase_list(builtin_file!("comfort.txt")),
        }
    }

    /// Loads every category file from `dir`. Missing files fall back to the
    /// builtin list for that category.
    pub fn load_dir(dir: &Path) -> io::Result<Self> {
        let mut lex = Self::builtin();
        let read = |name: &str| -> io::Result<Option<String>> {
            match fs::read_to_string(dir.join(name)) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(e),
            }
        };
        if let Some(s) = read("positive.txt")? {
            lex.positive = parse_word_list(&s);
        }
        if let Some(s) = read("negative.txt")? {
            lex.negative = parse_word_list(&s);
        }
        if let Some(s) = read("stress.txt")? {
            lex.stress = parse_word_list(&s);
        }
        if let Some(s) = read("negation.txt")? {
            lex.negation = parse_word_list(&s);
        }
        if let Some(s) = read("comfort.txt")? {
            lex.comfort = parse_phrase_list(&s);
        }
        for (class, file) in EMOTION_FILES {
            if let Some(s) = read(file)? {
                let words = parse_word_list(&s);
                if let Some(slot) = lex.emotions.iter_mut().find(|(c, _)| *c == class) {
                    slot.1 = words;
                }
            }
        }
        Ok(lex)
    }

    pub fn emotion_words(&self, class: ExpressionClass) -> Option<&HashSet<String>> {
        self.emotions
            .iter()
            .find(|(c, _)| *c == class)
            .map(|(_, w)| w)
    }
}
