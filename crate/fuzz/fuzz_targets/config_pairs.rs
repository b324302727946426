#![no_main]

use ergoseq_cli::config::{parse_pairs, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(pairs) = parse_pairs(text) {
        for (k, v) in &pairs {
            assert!(!k.is_empty() && k.trim() == k && v.trim() == v);
        }
        let _ = RunConfig::from_pairs(&pairs);
    }
});
