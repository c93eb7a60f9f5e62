#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::session::{replay, ServerConfig};

fuzz_target!(|data: &[u8]| {
    let mut out = Vec::new();
    let _ = replay(data, &mut out, ServerConfig::default());
});
