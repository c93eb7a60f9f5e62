#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::dialogue::TemplateSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(set) = TemplateSet::parse(text) {
        let _ = set.check_complete();
        let keys: Vec<String> = set.keys().map(str::to_owned).collect();
        for key in keys {
            assert!(set.variants(&key).is_some_and(|v| !v.is_empty()));
        }
    }
});
