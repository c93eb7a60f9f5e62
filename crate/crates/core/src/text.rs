//! Tokenization shared by the lexicon-based analyzers.

/// Lowercases `text` and splits it into word tokens.
///
/// Tokens keep inner apostrophes and hyphens ("don't", "so-so") and lose any
/// leading or trailing punctuation. Typographic apostrophes are folded to `'`.
pub fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace(['\u{2019}', '\u{2018}'], "'")
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '-'))
        .map(|t| t.trim_matches(|c: char| c == '\'' || c == '-'))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Lowercases and folds typographic apostrophes, leaving punctuation intact.
pub fn normalize(text: &str) -> String {
    text.trim()
        .to_lowercase()
        .replace(['\u{2019}', '\u{2018}'], "'")
}
