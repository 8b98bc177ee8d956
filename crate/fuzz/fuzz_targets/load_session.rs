#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::persistence;

fuzz_target!(|data: &[u8]| {
    if let Ok(session) = persistence::load_session(data) {
        let text = persistence::save_session(&session);
        let again = persistence::load_session(text.as_bytes()).expect("saved session reloads");
        assert_eq!(again, session);
    }
});
