#![no_main]

use ergoseq::ledger::{check_constraints, Ledger};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(ledger) = serde_json::from_slice::<Ledger>(data) else { return };
    if ledger.validate().is_ok() {
        for m in 1..=ledger.last_m().min(8) {
            let _ = check_constraints(&ledger, m);
        }
        let again = serde_json::to_string(&ledger).unwrap();
        assert_eq!(serde_json::from_str::<Ledger>(&again).unwrap(), ledger);
    }
});
