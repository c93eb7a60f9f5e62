#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::session::ServerConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ServerConfig::parse(text) {
        config.behavior.validate().expect("parsed config is valid");
    }
});
