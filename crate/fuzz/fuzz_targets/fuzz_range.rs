#![no_main]

use libfuzzer_sys::fuzz_target;
use noisemod::harness::{parse_counts, parse_values, MAX_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_values(s) {
        assert!(!v.is_empty() && v.len() <= MAX_POINTS);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
    if let Ok(v) = parse_counts(s) {
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
});
