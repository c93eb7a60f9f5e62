#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::session::parse_script;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sessions) = parse_script(text) {
        for s in sessions {
            assert!(!s.user_id.is_empty());
        }
    }
});
