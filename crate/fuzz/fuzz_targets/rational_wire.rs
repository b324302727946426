#![no_main]

use ergoseq::rational::{parse_text, parse_wire, Rational};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (num, den) = text.split_once('\n').unwrap_or((text, "1"));
    if num.len() > 2000 || den.len() > 2000 {
        return;
    }
    if let Ok(r) = parse_wire(num, den) {
        let back: Rational = parse_wire(&r.numer().to_string(), &r.denom().to_string()).unwrap();
        assert_eq!(back, r);
    }
    let _ = parse_text(text);
});
