#![no_main]

use ergoseq::sequence::parse_lines;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_lines(text) {
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let out: String = v.iter().map(|x| format!("{x}\n")).collect();
        assert_eq!(parse_lines(&out).unwrap(), v);
    }
});
