#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::persistence;

fuzz_target!(|data: &[u8]| {
    if let Ok(project) = persistence::load_project(data) {
        // anything accepted must survive a round trip unchanged
        let text = persistence::save_project(&project);
        let again = persistence::load_project(text.as_bytes()).expect("saved project reloads");
        assert_eq!(persistence::save_project(&again), text);
    }
});
