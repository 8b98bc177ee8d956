//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Run with
//! `cargo test -p reqprio-cli --test acceptance`.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use reqprio_core::elicitation::{
    pairs_in_disagreement, AnalystResponse, ComparisonQuery, ElicitationSession, SessionConfig, SessionStatus,
    UnorderedPair,
};
use reqprio_core::experiments::{self, DatasetSource, ExperimentConfig, RunRecord, SyntheticDatasetSpec};
use reqprio_core::model::{Cost, Ranking, RequirementId, Weight};
use reqprio_core::persistence::{self, WORKED_EXAMPLE};
use reqprio_core::solver::{self, SoftEdge, SolverInstance};
use reqprio_service::{router, AppState, ServiceConfig};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ranking(ids: &[&str]) -> Ranking {
    Ranking::from_strs(ids).unwrap()
}

fn worked_instance() -> SolverInstance {
    let p = persistence::worked_example();
    SolverInstance::from_graphs(p.ids().cloned(), p.source_graphs()).unwrap()
}

fn encoding_fidelity() -> Outcome {
    let start = Instant::now();
    let inst = worked_instance();
    let got: Vec<(&str, &str, Weight)> = inst
        .soft_edges()
        .iter()
        .map(|e| (e.before.as_str(), e.after.as_str(), e.weight))
        .collect();
    // (before, after): the first must precede the second
    let expected: Vec<(&str, &str, Weight)> = [
        ("R1", "R4"),
        ("R1", "R5"),
        ("R2", "R1"),
        ("R2", "R3"),
        ("R2", "R4"),
        ("R2", "R5"),
        ("R3", "R4"),
        ("R3", "R5"),
        ("R4", "R5"),
        ("R1", "R5"),
        ("R2", "R3"),
        ("R4", "R2"),
        ("R4", "R3"),
    ]
    .into_iter()
    .map(|(b, a)| (b, a, Weight::ONE))
    .collect();
    ensure(got == expected, || format!("soft constraints {got:?}"))?;
    ensure(inst.hard_edges().is_empty(), || "unexpected hard edges".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("9 Prio + 4 Dep soft constraints in {elapsed:?}"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every minimum-cost order by exhaustive enumeration, sorted, with unit
/// or integer weights given as `(before, after, weight)` index triples.
fn oracle(ids: &[RequirementId], edges: &[(usize, usize, u64)]) -> (u64, Vec<Vec<RequirementId>>) {
    let mut best = u64::MAX;
    let mut optima = Vec::new();
    for perm in permutations(ids.len()) {
        let mut pos = vec![0; ids.len()];
        for (i, &x) in perm.iter().enumerate() {
            pos[x] = i;
        }
        let cost: u64 = edges.iter().filter(|(b, a, _)| pos[*b] > pos[*a]).map(|e| e.2).sum();
        let order: Vec<RequirementId> = perm.iter().map(|&i| ids[i].clone()).collect();
        if cost < best {
            best = cost;
            optima = vec![order];
        } else if cost == best {
            optima.push(order);
        }
    }
    optima.sort();
    (best, optima)
}

fn tied_optima() -> Outcome {
    let start = Instant::now();
    let inst = worked_instance();
    let res = solver::solve(&inst, 50).map_err(|e| e.to_string())?;
    ensure(res.cost == Cost::integer(2), || format!("cost {}", res.cost))?;
    for s in [
        ranking(&["R2", "R1", "R4", "R3", "R5"]),
        ranking(&["R2", "R3", "R1", "R4", "R5"]),
        ranking(&["R2", "R1", "R3", "R4", "R5"]),
    ] {
        ensure(res.solutions.contains(&s), || format!("{s} missing"))?;
    }
    let ids = inst.requirement_ids().to_vec();
    let index = |id: &RequirementId| ids.iter().position(|x| x == id).unwrap();
    let edges: Vec<_> = inst
        .soft_edges()
        .iter()
        .map(|e| (index(&e.before), index(&e.after), 1))
        .collect();
    let (cost, optima) = oracle(&ids, &edges);
    let got: Vec<Vec<RequirementId>> = res.solutions.iter().map(|s| s.order().to_vec()).collect();
    ensure(cost == 2 && got == optima, || {
        format!("oracle cost {cost}, optima {optima:?}")
    })?;
    ensure(res.exhausted, || "solution set not exhausted".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "cost 2, {} optima equal the 120-permutation enumeration, {elapsed:?}",
        res.solutions.len()
    ))
}

fn disagreement_pairs() -> Outcome {
    let pair = |a: &str, b: &str| UnorderedPair::new(a.into(), b.into()).unwrap();
    let pr1 = ranking(&["R2", "R1", "R4", "R3", "R5"]);
    let pr2 = ranking(&["R2", "R3", "R1", "R4", "R5"]);
    let pr3 = ranking(&["R2", "R1", "R3", "R4", "R5"]);
    let cases = [
        (&pr1, &pr2, BTreeSet::from([pair("R1", "R3"), pair("R3", "R4")])),
        (&pr1, &pr3, BTreeSet::from([pair("R3", "R4")])),
        (&pr2, &pr3, BTreeSet::from([pair("R1", "R3")])),
    ];
    for (a, b, want) in cases {
        let got = pairs_in_disagreement(a, b).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{a} vs {b}: {got:?}"))?;
    }
    Ok("{R1,R3}+{R3,R4}, {R3,R4}, {R1,R3}".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut checked = 0;
    let mut capped = 0;
    for round in 0..250 {
        let n = 2 + round % 7;
        let density = rng.random_range(0.10..=0.40);
        let ids: Vec<RequirementId> = (0..n).map(|i| RequirementId::new(format!("Q{i}"))).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && rng.random_bool(density) {
                    edges.push((a, b, rng.random_range(1..=3u64)));
                }
            }
        }
        let soft = edges
            .iter()
            .map(|&(b, a, w)| SoftEdge {
                before: ids[b].clone(),
                after: ids[a].clone(),
                weight: Weight::integer(w).unwrap(),
            })
            .collect();
        let inst = SolverInstance::new(ids.clone(), soft, Vec::new()).map_err(|e| e.to_string())?;
        let res = solver::solve(&inst, 50).map_err(|e| e.to_string())?;
        let (cost, optima) = oracle(&ids, &edges);
        ensure(res.cost == Cost::integer(cost), || {
            format!("round {round}: cost {} vs oracle {cost}", res.cost)
        })?;
        let got: Vec<Vec<RequirementId>> = res.solutions.iter().map(|s| s.order().to_vec()).collect();
        if optima.len() <= 50 {
            ensure(got == optima && res.exhausted, || {
                format!("round {round}: optimal set differs")
            })?;
        } else {
            capped += 1;
            ensure(got == optima[..50] && !res.exhausted, || {
                format!("round {round}: capped set differs")
            })?;
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    ensure(checked >= 200, || format!("only {checked} instances"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{checked} instances with N <= 8 ({capped} above cap), {elapsed:?}"
    ))
}

fn cell_median(records: &[RunRecord], budget: u32, error_rate: f64, f: impl Fn(&RunRecord) -> f64) -> f64 {
    let mut v: Vec<f64> = records
        .iter()
        .filter(|r| r.budget == budget && r.error_rate == error_rate)
        .map(f)
        .collect();
    experiments::median(&mut v).unwrap()
}

fn synthetic_config(budgets: Vec<u32>, error_rates: Vec<f64>) -> ExperimentConfig {
    ExperimentConfig {
        budgets,
        error_rates,
        repetitions: 20,
        ..ExperimentConfig::new(DatasetSource::Synthetic(SyntheticDatasetSpec::default()))
    }
}

fn budget_trend(records: &[RunRecord]) -> Outcome {
    let budgets = [0, 25, 50, 100];
    let dis: Vec<f64> = budgets
        .iter()
        .map(|&b| cell_median(records, b, 0.0, |r| r.disagreement_vs_gs as f64))
        .collect();
    let dist: Vec<f64> = budgets
        .iter()
        .map(|&b| cell_median(records, b, 0.0, |r| r.average_distance_vs_gs))
        .collect();
    ensure(dis.windows(2).all(|w| w[1] <= w[0]), || {
        format!("disagreement medians {dis:?}")
    })?;
    ensure(dist.windows(2).all(|w| w[1] <= w[0]), || {
        format!("distance medians {dist:?}")
    })?;
    let gain = 1.0 - dis[3] / dis[0];
    ensure(gain >= 0.20, || {
        format!("improvement {:.0}% from {dis:?}", gain * 100.0)
    })?;
    let dist: Vec<String> = dist.iter().map(|d| format!("{d:.2}")).collect();
    Ok(format!(
        "median disagreement {dis:?}, average distance [{}], {:.0}% better at budget 100",
        dist.join(", "),
        gain * 100.0
    ))
}

fn error_trend(records: &[RunRecord]) -> Outcome {
    let none = cell_median(records, 0, 0.0, |r| r.disagreement_vs_gs as f64);
    let noisy: Vec<f64> = experiments::DEFAULT_ERROR_RATES
        .iter()
        .map(|&e| cell_median(records, 50, e, |r| r.disagreement_vs_gs as f64))
        .collect();
    ensure(noisy[3] <= none, || {
        format!("20% error median {} vs budget 0 {none}", noisy[3])
    })?;
    Ok(format!(
        "budget 50 medians by error {noisy:?} vs budget 0 median {none}"
    ))
}

fn determinism() -> Outcome {
    let config = synthetic_config(vec![0, 25, 50], vec![0.0, 0.1]);
    let a = experiments::to_csv_string(&experiments::run_experiment(&config).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let b = experiments::to_csv_string(&experiments::run_experiment(&config).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(a == b, || "in-process CSV differs between runs".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["one.csv", "two.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_reqprio"))
            .args(["simulate", "--synthetic", "n=20,seed=3", "--budgets", "0,10,30"])
            .args(["--errors", "0,0.2", "--reps", "5", "--seed", "9", "--quiet", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("simulate exited {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "CLI CSV differs between runs".into())?;
    Ok(format!(
        "{} bytes in-process and {} bytes via CLI reproduced exactly",
        a.len(),
        outputs[0].len()
    ))
}

fn budget_accounting(records: &[RunRecord]) -> Outcome {
    for r in records {
        ensure(r.elicited_pairs_actual <= r.budget, || {
            format!("run {} over budget", r.run_id)
        })?;
    }
    let mut session = ElicitationSession::new(persistence::worked_example(), SessionConfig::with_budget(100));
    session
        .drive(|q| Ok(AnalystResponse::undecided(q.pair.clone())))
        .map_err(|e| e.to_string())?;
    ensure(session.status() == SessionStatus::Plateau, || {
        format!("undecided analyst ended {}", session.status())
    })?;
    ensure(session.eli_pair() < 100, || format!("elicited {}", session.eli_pair()))?;
    Ok(format!(
        "{} runs within budget; undecided analyst plateaus after {} of 100 pairs",
        records.len(),
        session.eli_pair()
    ))
}

/// Key presses an in-process session would consume under `policy`.
fn keys_for(budget: u32, mut policy: impl FnMut(&ComparisonQuery) -> char) -> Vec<char> {
    let mut keys = Vec::new();
    let mut session = ElicitationSession::new(persistence::worked_example(), SessionConfig::with_budget(budget));
    session
        .drive(|q| {
            let key = policy(q);
            keys.push(key);
            Ok(response_for(key, q))
        })
        .unwrap();
    keys
}

fn response_for(key: char, q: &ComparisonQuery) -> AnalystResponse {
    let (a, b) = (q.pair.first().clone(), q.pair.second().clone());
    match key {
        '1' => AnalystResponse::precedes(a, b).unwrap(),
        '2' => AnalystResponse::precedes(b, a).unwrap(),
        _ => AnalystResponse::undecided(q.pair.clone()),
    }
}

fn via_cli(budget: u32, keys: &[char]) -> Result<Value, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let project = dir.path().join("worked-example.project");
    std::fs::write(&project, WORKED_EXAMPLE).map_err(|e| e.to_string())?;
    let mut child = Command::new(env!("CARGO_BIN_EXE_reqprio"))
        .arg("elicit")
        .arg(&project)
        .args(["--budget", &budget.to_string(), "--json"])
        .env("NO_COLOR", "1")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let input: String = keys.iter().map(|k| format!("{k}\n")).collect();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("elicit exited {}", out.status))?;
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn via_http(budget: u32, keys: &[char]) -> Result<(Value, Value), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let app = router(AppState::new(ServiceConfig::default()).map_err(|e| e.to_string())?);
        let call = |method: &str, uri: String, body: Option<Value>| {
            let req = Request::builder()
                .method(method)
                .uri(uri)
                .header("content-type", "application/json")
                .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
                .unwrap();
            let app = app.clone();
            async move {
                let resp = app.oneshot(req).await.unwrap();
                let bytes = resp.into_body().collect().await.unwrap().to_bytes();
                serde_json::from_slice::<Value>(&bytes).unwrap()
            }
        };
        let project: Value = serde_json::from_str(WORKED_EXAMPLE).unwrap();
        let mut state = call(
            "POST",
            "/sessions".into(),
            Some(json!({ "project": project, "budget": budget })),
        )
        .await;
        let id = state["id"].as_str().unwrap().to_owned();
        for &key in keys {
            let next = &state["pending"][0];
            let verdict = match key {
                '1' => "FIRST_PRECEDES",
                '2' => "SECOND_PRECEDES",
                _ => "UNDECIDED",
            };
            let body =
                json!({ "responses": [{ "first": next["first"], "second": next["second"], "verdict": verdict }] });
            state = call("POST", format!("/sessions/{id}/responses"), Some(body)).await;
        }
        let ranking = call("GET", format!("/sessions/{id}/ranking"), None).await;
        Ok((state, ranking))
    })
}

fn cross_interface() -> Outcome {
    let gold = persistence::worked_example().gold_standard().unwrap().clone();
    let by_gold = |q: &ComparisonQuery| {
        if gold.position(q.pair.first()) < gold.position(q.pair.second()) {
            '1'
        } else {
            '2'
        }
    };
    // the analyst's two choices from the worked example, then gold
    let by_example = |q: &ComparisonQuery| match (q.pair.first().as_str(), q.pair.second().as_str()) {
        ("R1", "R3") => '2',
        ("R3", "R4") => '2',
        _ => by_gold(q),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let by_coin = move |_: &ComparisonQuery| ['1', '2', 'u'][rng.random_range(0..3)];
    let scenarios: Vec<(&str, u32, Vec<char>)> = vec![
        ("gold answers, budget 2", 2, keys_for(2, by_gold)),
        ("worked-example answers", 100, keys_for(100, by_example)),
        ("all undecided", 100, keys_for(100, |_| 'u')),
        ("random answers, budget 3", 3, keys_for(3, by_coin)),
    ];
    let mut lines = Vec::new();
    for (name, budget, keys) in scenarios {
        let cli = via_cli(budget, &keys)?;
        let (http, ranking) = via_http(budget, &keys)?;
        for field in ["status", "ranking", "cost", "eli_pair", "history"] {
            ensure(cli[field] == http[field], || {
                format!("{name}: {field} differs: CLI {} vs HTTP {}", cli[field], http[field])
            })?;
        }
        let listed: Vec<Value> = ranking["ranking"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["id"].clone())
            .collect();
        ensure(Value::Array(listed) == cli["ranking"], || {
            format!("{name}: ranking endpoint differs")
        })?;
        lines.push(format!(
            "{name} -> {} {}",
            cli["status"].as_str().unwrap(),
            cli["ranking"]
        ));
    }
    Ok(lines.join("; "))
}

fn main() -> std::process::ExitCode {
    let by_budget = experiments::run_experiment(&synthetic_config(vec![0, 25, 50, 100], vec![0.0])).unwrap();
    let by_error = experiments::run_experiment(&synthetic_config(
        vec![0, 50],
        experiments::DEFAULT_ERROR_RATES.to_vec(),
    ))
    .unwrap();
    let all: Vec<RunRecord> = by_budget.iter().chain(&by_error).cloned().collect();

    let results: Vec<(&str, Outcome)> = vec![
        ("encoding fidelity", encoding_fidelity()),
        ("tied optima of the worked example", tied_optima()),
        ("disagreement pairs of the tied optima", disagreement_pairs()),
        ("oracle equivalence", oracle_equivalence()),
        ("more budget, closer to gold", budget_trend(&by_budget)),
        ("noisy answers still beat none", error_trend(&by_error)),
        ("determinism", determinism()),
        ("budget accounting", budget_accounting(&all)),
        ("cross-interface equivalence", cross_interface()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
