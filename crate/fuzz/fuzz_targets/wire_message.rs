#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::session::WireMessage;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(msg) = WireMessage::from_json(text) {
        let again = WireMessage::from_json(&msg.to_json()).expect("re-encoded message decodes");
        assert_eq!(again.to_json(), msg.to_json());
    }
});
