#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::dialogue::Phase;
use nora_core::nlu::{IntentLexicon, Understander};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lexicon) = IntentLexicon::parse(text) {
        let nlu = Understander::new(lexicon);
        for phase in Phase::ALL {
            let _ = nlu.understand("yes, I'm a nurse and my temperature is 37.2", phase);
        }
    }
});
