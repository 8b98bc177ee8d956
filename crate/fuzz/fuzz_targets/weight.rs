#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::model::Weight;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(w) = text.parse::<Weight>() {
        assert!(w.numer() > 0 && w.denom() > 0);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Weight>(&json).unwrap(), w);
    }
    let _ = serde_json::from_slice::<Weight>(data);
});
