#![no_main]

use std::fs;

use libfuzzer_sys::fuzz_target;
use nora_core::session::store::{JOURNAL_FILE, SESSIONS_FILE, TIMELINES_FILE, USERS_FILE};
use nora_core::session::PersistedStore;

// Input is the four store files separated by NUL bytes.
fuzz_target!(|data: &[u8]| {
    let dir = tempfile::tempdir().expect("temp dir");
    let files = [USERS_FILE, SESSIONS_FILE, TIMELINES_FILE, JOURNAL_FILE];
    for (name, part) in files.iter().zip(data.split(|&b| b == 0)) {
        fs::write(dir.path().join(name), part).expect("write store file");
    }
    if let Ok((store, _)) = PersistedStore::load(dir.path()) {
        let out = tempfile::tempdir().expect("temp dir");
        store.save(out.path()).expect("save");
        let (again, corrupt) = PersistedStore::load(out.path()).expect("reload");
        assert!(corrupt.is_empty());
        assert_eq!(again, store);
    }
});
