#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::experiments::SyntheticDatasetSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<SyntheticDatasetSpec>() {
        let again: SyntheticDatasetSpec = spec.to_string().parse().expect("display output parses");
        assert_eq!(again, spec);
    }
});
