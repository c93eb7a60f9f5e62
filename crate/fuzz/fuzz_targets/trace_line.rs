#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::behavior::trace::{read_trace, TraceLine};
use nora_core::behavior::BehaviorEvent;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Some(first) = text.lines().next() {
        if let Ok(line) = TraceLine::parse(first, 1) {
            let again = TraceLine::parse(&line.format(), 1).expect("formatted line parses");
            assert_eq!(again, line);
            let _ = BehaviorEvent::try_from(&line);
        }
    }
    let _ = read_trace(data);
});
