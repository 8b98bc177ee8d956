//! `reqprio`: validate projects, rank them, run elicitation sessions and
//! simulation studies, or serve the HTTP API.
//!
//! Exit status: 0 success, 1 invalid input, 2 infeasible constraints,
//! 3 any other failure.

use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use reqprio_core::elicitation::{AnalystResponse, ElicitationSession, SessionConfig, DEFAULT_MAX_ELI_PAIR};
use reqprio_core::experiments::{
    self, DatasetSource, ExperimentConfig, RunRecord, SyntheticDatasetSpec, DEFAULT_REPETITIONS,
};
use reqprio_core::model::Project;
use reqprio_core::persistence::{self, SESSION_EXTENSION};
use reqprio_core::solver::{self, SolveOptions, SolverInstance, DEFAULT_SOLUTION_CAP};
use reqprio_core::{metrics, Error, Issue, Result};
use reqprio_service::api::SessionState;
use reqprio_service::{AppState, ServiceConfig, DEFAULT_TIME_BUDGET_MS};

#[derive(Parser)]
#[command(name = "reqprio", version, about = "Interactive requirements prioritization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a project file and report its constraint graphs.
    Check { project: PathBuf },
    /// Print every minimum-cost ranking of a project, up to the cap.
    Rank {
        project: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SOLUTION_CAP)]
        cap: usize,
        #[arg(long)]
        time_budget_ms: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Answer pairwise questions on the terminal until the ranking settles.
    Elicit(ElicitArgs),
    /// Run the simulated-analyst study and write one CSV row per run.
    Simulate(SimulateArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "REQPRIO_ADDR", default_value = "127.0.0.1:8080")]
        addr: String,
        /// Directory for session snapshots; sessions are in memory without it.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        solve_wait_ms: u64,
        #[arg(long, default_value_t = DEFAULT_TIME_BUDGET_MS)]
        time_budget_ms: u64,
    },
}

#[derive(Args)]
struct ElicitArgs {
    /// Project to start from; omit when resuming.
    #[arg(required_unless_present = "resume", conflicts_with = "resume")]
    project: Option<PathBuf>,
    /// Continue a saved session.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Where `q` saves the session. Defaults to the resumed file, or the
    /// project path with a `.session` extension.
    #[arg(long)]
    session: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_ELI_PAIR)]
    budget: u32,
    #[arg(long, default_value_t = DEFAULT_SOLUTION_CAP)]
    cap: usize,
    #[arg(long)]
    time_budget_ms: Option<u64>,
    /// Print the finished session as JSON, in the same shape the HTTP API uses.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Project with a gold standard.
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    project: Option<PathBuf>,
    /// Generated dataset: a preset (`fall`, `escape`, `monitor`, `all`) or
    /// `n=25,levels=5,density=0.1,seed=1`.
    #[arg(long)]
    synthetic: Option<SyntheticDatasetSpec>,
    #[arg(long, value_delimiter = ',', default_values_t = experiments::DEFAULT_BUDGETS)]
    budgets: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = experiments::DEFAULT_ERROR_RATES)]
    errors: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    reps: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SOLUTION_CAP)]
    cap: usize,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per run (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    /// Skip the per-cell summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check { project } => check(&project),
        Command::Rank {
            project,
            cap,
            time_budget_ms,
            json,
        } => rank(&project, cap, time_budget_ms, json),
        Command::Elicit(args) => elicit(args),
        Command::Simulate(args) => simulate(args),
        Command::Serve {
            addr,
            data,
            solve_wait_ms,
            time_budget_ms,
        } => serve(
            &addr,
            ServiceConfig {
                data_dir: data,
                solve_wait: Duration::from_millis(solve_wait_ms),
                time_budget_ms: Some(time_budget_ms),
            },
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::Parse(_)
        | Error::UnsupportedVersion { .. }
        | Error::UnknownRequirement(_)
        | Error::SelfLoop(_)
        | Error::UniverseMismatch(_)
        | Error::TooLarge(_) => 1,
        Error::Infeasible { .. } => 2,
        _ => 3,
    }
}

fn report(e: &Error) {
    let style = Style::stderr();
    eprintln!("{} {e}", style.red("error:"));
    if let Error::Validation(issues) = e {
        for issue in issues {
            eprintln!("  {issue}");
        }
    }
}

/// ANSI styling, off when `NO_COLOR` is set or stderr is not a terminal.
struct Style(bool);

impl Style {
    fn stderr() -> Self {
        Self(std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && io::stderr().is_terminal())
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.0 {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_owned()
        }
    }

    fn bold(&self, text: &str) -> String {
        self.paint("1", text)
    }

    fn red(&self, text: &str) -> String {
        self.paint("31", text)
    }

    fn dim(&self, text: &str) -> String {
        self.paint("2", text)
    }
}

fn feasible_instance(project: &Project) -> Result<SolverInstance> {
    let instance = SolverInstance::from_graphs(project.ids().cloned(), project.source_graphs())?;
    match solver::find_hard_cycle(&instance) {
        Some(cycle) => Err(Error::Infeasible { cycle }),
        None => Ok(instance),
    }
}

fn check(path: &Path) -> Result<()> {
    let project = persistence::load_project_file(path)?;
    let instance = feasible_instance(&project)?;
    let levels: std::collections::BTreeSet<u32> = project.requirements().iter().map(|r| r.priority_level).collect();
    println!("requirements:      {}", project.requirements().len());
    println!("priority levels:   {}", levels.len());
    println!("dependencies:      {}", project.dependencies().len());
    for g in project.source_graphs() {
        println!("graph {:<11} {} edges", format!("{}:", g.name()), g.len());
    }
    println!("soft constraints:  {}", instance.soft_edges().len());
    println!("hard constraints:  {}", instance.hard_edges().len());
    println!(
        "gold standard:     {}",
        if project.gold_standard().is_some() { "yes" } else { "no" }
    );
    if project.requirements().len() > solver::MAX_REQUIREMENTS {
        return Err(Error::TooLarge(format!(
            "{} requirements, the solver handles at most {}",
            project.requirements().len(),
            solver::MAX_REQUIREMENTS
        )));
    }
    Ok(())
}

fn rank(path: &Path, cap: usize, time_budget_ms: Option<u64>, json: bool) -> Result<()> {
    let project = persistence::load_project_file(path)?;
    let instance = feasible_instance(&project)?;
    let result = solver::solve_with(
        &instance,
        &SolveOptions {
            solution_cap: cap,
            deadline: time_budget_ms.map(|ms| std::time::Instant::now() + Duration::from_millis(ms)),
        },
    )?;
    if json {
        let body = serde_json::json!({
            "cost": result.cost,
            "exhausted": result.exhausted,
            "optimal": result.optimal,
            "solutions": result.solutions.iter().map(|s| s.order()).collect::<Vec<_>>(),
        });
        println!("{body:#}");
        return Ok(());
    }
    let more = if result.exhausted { "" } else { "+" };
    let best = result.solutions.first().expect("a feasible instance has an optimum");
    println!("ranking {best}");
    println!(
        "cost {}, {}{more} optimal rankings",
        result.cost,
        result.solutions.len()
    );
    if !result.optimal {
        println!("time budget reached: best found, not proven minimal");
    }
    if let Some(gold) = project.gold_standard() {
        println!(
            "disagreement with gold {}, average distance {:.3}",
            metrics::disagreement(best, gold)?,
            metrics::average_distance(best, gold)?
        );
    }
    if result.solutions.len() > 1 {
        println!("tied optima:");
        for (i, s) in result.solutions.iter().enumerate() {
            println!("{:>3}. {s}", i + 1);
        }
    }
    Ok(())
}

fn elicit(args: ElicitArgs) -> Result<()> {
    let (mut session, save_path) = match (&args.resume, &args.project) {
        (Some(path), _) => (
            persistence::load_session_file(path)?,
            args.session.clone().unwrap_or_else(|| path.clone()),
        ),
        (None, Some(path)) => {
            let project = persistence::load_project_file(path)?;
            feasible_instance(&project)?;
            if args.cap == 0 {
                return Err(Error::Validation(vec![Issue::new("cap", "must be positive")]));
            }
            let config = SessionConfig {
                max_eli_pair: args.budget,
                solution_cap: args.cap,
                time_budget_ms: args.time_budget_ms,
            };
            (
                ElicitationSession::new(project, config),
                args.session
                    .clone()
                    .unwrap_or_else(|| path.with_extension(SESSION_EXTENSION)),
            )
        }
        (None, None) => unreachable!("clap requires a project or --resume"),
    };

    let style = Style::stderr();
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut line = String::new();
    // a terminal echoes typed answers itself; piped input does not
    let echoes = io::stdin().is_terminal();
    while !session.status().is_terminal() {
        if session.pending_queries().is_empty() {
            session.step()?;
            continue;
        }
        let query = session.pending_queries()[0].clone();
        let (a, b) = (query.pair.first(), query.pair.second());
        let title = |id| {
            session
                .project()
                .requirement(id)
                .map(|r| r.title.as_str())
                .unwrap_or_default()
                .to_owned()
        };
        let result = session.last_result().expect("active session with queries was solved");
        let more = if result.exhausted { "" } else { "+" };
        eprintln!();
        eprintln!(
            "{}",
            style.dim(&format!(
                "iteration {} | budget {} of {} left | {}{more} tied rankings, cost {}",
                session.iteration(),
                session.budget_remaining(),
                session.max_eli_pair(),
                result.solutions.len(),
                result.cost
            ))
        );
        eprintln!(
            "Which should come first? ({} of the tied rankings disagree here)",
            query.frequency
        );
        eprintln!("  1) {}  {}", style.bold(a.as_str()), title(a));
        eprintln!("  2) {}  {}", style.bold(b.as_str()), title(b));
        eprint!("{} ", style.dim("[1/2/u=undecided/q=save and quit]>"));
        io::stderr().flush()?;

        line.clear();
        let read = input.read_line(&mut line)?;
        if !echoes {
            eprintln!("{}", line.trim());
        }
        let response = match line.trim() {
            _ if read == 0 => None,
            "1" => Some(AnalystResponse::precedes(a.clone(), b.clone())?),
            "2" => Some(AnalystResponse::precedes(b.clone(), a.clone())?),
            "u" | "U" => Some(AnalystResponse::undecided(query.pair.clone())),
            "q" | "Q" => None,
            other => {
                eprintln!("unrecognized answer {other:?}");
                continue;
            }
        };
        match response {
            Some(r) => session.submit_responses(&[r])?,
            None => {
                persistence::write_atomic(&save_path, persistence::save_session(&session).as_bytes())?;
                eprintln!("\nsession saved to {}", save_path.display());
                return Ok(());
            }
        }
    }

    if args.session.is_some() || args.resume.is_some() {
        persistence::write_atomic(&save_path, persistence::save_session(&session).as_bytes())?;
    }
    if args.json {
        let state = SessionState::new("cli", &session, false, None);
        println!(
            "{:#}",
            serde_json::to_value(&state).map_err(|e| Error::Parse(e.to_string()))?
        );
        return Ok(());
    }
    let ranking = session.final_ranking()?;
    let cost = session.last_result().expect("terminal session was solved").cost;
    println!(
        "{} after {} iterations, {} pairs elicited, cost {cost}",
        session.status(),
        session.iteration(),
        session.eli_pair()
    );
    for (i, id) in ranking.order().iter().enumerate() {
        let title = session
            .project()
            .requirement(id)
            .map(|r| r.title.as_str())
            .unwrap_or_default();
        println!("{:>3}. {id}  {title}", i + 1);
    }
    if let Some(gold) = session.project().gold_standard() {
        println!(
            "disagreement with gold {}, average distance {:.3}",
            metrics::disagreement(ranking, gold)?,
            metrics::average_distance(ranking, gold)?
        );
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let dataset = match (args.project, args.synthetic) {
        (Some(path), _) => DatasetSource::Project(persistence::load_project_file(path)?),
        (None, Some(spec)) => DatasetSource::Synthetic(spec),
        (None, None) => unreachable!("clap requires a project or --synthetic"),
    };
    let config = ExperimentConfig {
        budgets: args.budgets,
        error_rates: args.errors,
        repetitions: args.reps,
        base_seed: args.seed,
        solution_cap: args.cap,
        record_timing: args.timing,
        ..ExperimentConfig::new(dataset)
    };
    let records = experiments::run_experiment(&config)?;
    match &args.out {
        Some(path) => persistence::write_atomic(path, experiments::to_csv_string(&records)?.as_bytes())?,
        None => experiments::write_csv(&records, io::stdout().lock())?,
    }
    if !args.quiet {
        summarize(&config, &records);
    }
    Ok(())
}

fn summarize(config: &ExperimentConfig, records: &[RunRecord]) {
    eprintln!("budget  error  median_disagreement  median_avg_distance  mean_elicited");
    for &budget in &config.budgets {
        for &error_rate in &config.error_rates {
            let cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.budget == budget && r.error_rate == error_rate)
                .collect();
            let mut dis: Vec<f64> = cell.iter().map(|r| r.disagreement_vs_gs as f64).collect();
            let mut dist: Vec<f64> = cell.iter().map(|r| r.average_distance_vs_gs).collect();
            let elicited = cell.iter().map(|r| f64::from(r.elicited_pairs_actual)).sum::<f64>() / cell.len() as f64;
            eprintln!(
                "{budget:>6}  {error_rate:>5.2}  {:>19.1}  {:>19.3}  {elicited:>13.1}",
                experiments::median(&mut dis).unwrap_or(f64::NAN),
                experiments::median(&mut dist).unwrap_or(f64::NAN),
            );
        }
    }
}

fn serve(addr: &str, config: ServiceConfig) -> Result<()> {
    let state = AppState::new(config)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        reqprio_service::serve(listener, state).await
    })?;
    Ok(())
}
