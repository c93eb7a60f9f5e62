#![no_main]

use std::sync::LazyLock;

use libfuzzer_sys::fuzz_target;
use nora_core::dialogue::Phase;
use nora_core::nlu::{extract_temperature, Understander};

static NLU: LazyLock<Understander> = LazyLock::new(Understander::default);

// First byte picks the phase, the rest is the utterance.
fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let phase = Phase::ALL[selector as usize % Phase::ALL.len()];
    let a = NLU.understand(text, phase);
    assert_eq!(a, NLU.understand(text, phase));
    if let Some(t) = a.slots.temperature_c {
        assert!((30.0..=45.0).contains(&t));
    }
    if let Some(t) = extract_temperature(text) {
        assert!((30.0..=45.0).contains(&t));
    }
});
