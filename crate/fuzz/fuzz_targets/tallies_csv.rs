#![no_main]

use libfuzzer_sys::fuzz_target;
use nora_core::stats::{format_report, parse_tallies_csv, significance_table};

fuzz_target!(|data: &[u8]| {
    if let Ok(tallies) = parse_tallies_csv(data) {
        let rows = significance_table(&tallies, 0.1).expect("parsed tallies are valid");
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.p_value));
        }
        let _ = format_report(&rows, "A", "B", 0.1);
    }
});
