#![no_main]

use std::sync::LazyLock;

use libfuzzer_sys::fuzz_target;
use nora_core::empathy::{parse_phrase_list, parse_word_list, EmpathyAnalyzer};

static EMPATHY: LazyLock<EmpathyAnalyzer> = LazyLock::new(EmpathyAnalyzer::default);

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let s = EMPATHY.score_turn(text);
    assert!((-1.0..=1.0).contains(&s.sentiment));
    assert!((0.0..=1.0).contains(&s.stress));
    let _ = parse_word_list(text);
    let _ = parse_phrase_list(text);
});
