#![no_main]

use libfuzzer_sys::fuzz_target;
use reqprio_core::solver::{self, SolverInstance};
use reqprio_service::api::CreateSession;

fuzz_target!(|data: &[u8]| {
    let Ok(body) = serde_json::from_slice::<CreateSession>(data) else {
        return;
    };
    let Ok(project) = body.project.into_project() else {
        return;
    };
    let inst = SolverInstance::from_graphs(project.ids().cloned(), project.source_graphs()).unwrap();
    // keep solves cheap; the size limit has its own error path
    if inst.requirement_ids().len() <= 7 && solver::find_hard_cycle(&inst).is_none() {
        let res = solver::solve(&inst, 5).unwrap();
        for s in &res.solutions {
            assert_eq!(solver::violation_cost(s, &inst).unwrap(), res.cost);
        }
    }
});
