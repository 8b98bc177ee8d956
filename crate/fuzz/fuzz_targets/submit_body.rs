#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::elicitation::{ElicitationSession, SessionConfig};
use reqprio_core::persistence;
use reqprio_service::api::{ResponseItem, SubmitResponses};

fuzz_target!(|data: &[u8]| {
    let Ok(body) = serde_json::from_slice::<SubmitResponses>(data) else {
        return;
    };
    let Ok(responses) = body
        .responses
        .into_iter()
        .map(ResponseItem::into_response)
        .collect::<Result<Vec<_>, _>>()
    else {
        return;
    };
    let mut session = ElicitationSession::start(persistence::worked_example(), SessionConfig::default()).unwrap();
    let before = session.clone();
    if session.submit_responses(&responses).is_err() {
        assert_eq!(session, before);
    } else {
        assert_eq!(session.eli_pair(), responses.len() as u32);
    }
});
