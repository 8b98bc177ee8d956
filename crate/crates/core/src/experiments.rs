//! Batch runs of simulated elicitation sessions, exported as CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyst::SimulatedAnalyst;
use crate::elicitation::{ElicitationSession, SessionConfig, SessionStatus};
use crate::error::{Error, Issue, Result};
use crate::metrics;
use crate::model::{Dependency, Project, Ranking, Requirement, RequirementId};
use crate::solver::{self, DEFAULT_SOLUTION_CAP};

pub const DEFAULT_BUDGETS: [u32; 4] = [0, 25, 50, 100];
pub const DEFAULT_ERROR_RATES: [f64; 4] = [0.0, 0.05, 0.10, 0.20];
pub const DEFAULT_REPETITIONS: u32 = 20;

pub const CSV_HEADER: &str =
    "run_id,budget,error_rate,repetition,seed,elicited_pairs,final_cost,disagreement_gs,avg_distance_gs,status,wall_time_ms";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticDatasetSpec {
    pub n_requirements: usize,
    pub n_priority_levels: u32,
    pub dependency_density: f64,
    pub seed: u64,
}

impl Default for SyntheticDatasetSpec {
    fn default() -> Self {
        Self {
            n_requirements: 25,
            n_priority_levels: 5,
            dependency_density: 0.1,
            seed: 1,
        }
    }
}

impl SyntheticDatasetSpec {
    /// Sizes of the four healthcare scenarios the generator stands in for.
    pub fn preset(name: &str) -> Option<Self> {
        let n = match name {
            "monitor" => 21,
            "escape" => 23,
            "fall" => 26,
            "all" => 49,
            _ => return None,
        };
        Some(Self {
            n_requirements: n,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.n_requirements == 0 {
            issues.push(Issue::new("n", "must be positive"));
        }
        if self.n_requirements > solver::MAX_REQUIREMENTS {
            issues.push(Issue::new(
                "n",
                format!("at most {} requirements", solver::MAX_REQUIREMENTS),
            ));
        }
        if self.n_priority_levels == 0 || self.n_priority_levels as usize > self.n_requirements.max(1) {
            issues.push(Issue::new("levels", "must be between 1 and n"));
        }
        if !(0.0..=1.0).contains(&self.dependency_density) {
            issues.push(Issue::new("density", "must be a probability"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

/// Parses `n=25,levels=5,density=0.1,seed=7` (any subset, defaults for the
/// rest) or a scenario preset name optionally followed by overrides, as in
/// `fall,seed=3`.
impl FromStr for SyntheticDatasetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SyntheticDatasetSpec::default();
        let mut levels_given = false;
        for (i, part) in s.split(',').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
            let bad = |msg: String| Error::Validation(vec![Issue::new(part.to_owned(), msg)]);
            let Some((key, value)) = part.split_once('=') else {
                if i == 0 {
                    if let Some(p) = SyntheticDatasetSpec::preset(part) {
                        spec = p;
                        continue;
                    }
                }
                return Err(bad("expected key=value".into()));
            };
            let value = value.trim();
            match key.trim() {
                "n" => spec.n_requirements = value.parse().map_err(|_| bad(format!("invalid n `{value}`")))?,
                "levels" => {
                    spec.n_priority_levels = value.parse().map_err(|_| bad(format!("invalid levels `{value}`")))?;
                    levels_given = true;
                }
                "density" => {
                    spec.dependency_density = value.parse().map_err(|_| bad(format!("invalid density `{value}`")))?
                }
                "seed" => spec.seed = value.parse().map_err(|_| bad(format!("invalid seed `{value}`")))?,
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        if !levels_given {
            spec.n_priority_levels = spec.n_priority_levels.min(spec.n_requirements.max(1) as u32);
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for SyntheticDatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={},levels={},density={},seed={}",
            self.n_requirements, self.n_priority_levels, self.dependency_density, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub requirements: Vec<Requirement>,
    pub dependencies: Vec<Dependency>,
    pub gold: Ranking,
}

impl Dataset {
    pub fn into_project(self) -> Result<Project> {
        Project::new(self.requirements, self.dependencies, Some(self.gold), vec![])
    }
}

/// Random gold order, priority levels that follow gold positions with
/// noise, and a dependency DAG sampled forward along a noisy copy of gold.
pub fn generate_dataset(spec: &SyntheticDatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n_requirements;
    let levels = spec.n_priority_levels as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = n.to_string().len();
    let ids: Vec<RequirementId> = (1..=n).map(|i| format!("R{i:0width$}").into()).collect();

    let mut gold = ids.clone();
    gold.shuffle(&mut rng);

    // one level spans n / levels gold positions; noise shifts up to one span
    let span = n as f64 / levels as f64;
    let mut level_of = vec![0u32; n];
    for (pos, id) in gold.iter().enumerate() {
        let noisy = pos as f64 + 0.5 + rng.random_range(-span..=span);
        let level = ((noisy / span).floor().max(0.0) as usize).min(levels - 1);
        let idx = ids.iter().position(|x| x == id).expect("id from list");
        level_of[idx] = level as u32 + 1;
    }

    let mut keyed: Vec<(f64, usize)> = (0..n)
        .map(|pos| (pos as f64 + rng.random_range(-span..=span), pos))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let topo: Vec<&RequirementId> = keyed.iter().map(|&(_, pos)| &gold[pos]).collect();
    let mut dependencies = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.random_bool(spec.dependency_density) {
                dependencies.push(Dependency::new(topo[j].clone(), topo[i].clone()));
            }
        }
    }

    let requirements = ids
        .iter()
        .zip(&level_of)
        .map(|(id, &level)| Requirement::new(id.clone(), String::new(), level))
        .collect();
    Ok(Dataset {
        requirements,
        dependencies,
        gold: Ranking::new(gold)?,
    })
}

#[derive(Debug, Clone)]
pub enum DatasetSource {
    /// A fixed project; it must carry a gold standard.
    Project(Project),
    /// A fresh dataset per repetition, seeded `spec.seed + repetition`, so
    /// the same repetition index sees the same dataset in every cell.
    Synthetic(SyntheticDatasetSpec),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub budgets: Vec<u32>,
    pub error_rates: Vec<f64>,
    pub repetitions: u32,
    pub base_seed: u64,
    pub solution_cap: usize,
    /// Fill `wall_time_ms`; off by default so output is reproducible.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource) -> Self {
        Self {
            dataset,
            budgets: DEFAULT_BUDGETS.to_vec(),
            error_rates: DEFAULT_ERROR_RATES.to_vec(),
            repetitions: DEFAULT_REPETITIONS,
            base_seed: 0,
            solution_cap: DEFAULT_SOLUTION_CAP,
            record_timing: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.repetitions == 0 {
            issues.push(Issue::new("repetitions", "must be at least 1"));
        }
        if self.budgets.is_empty() {
            issues.push(Issue::new("budgets", "must not be empty"));
        }
        if self.error_rates.is_empty() {
            issues.push(Issue::new("error_rates", "must not be empty"));
        }
        for (i, e) in self.error_rates.iter().enumerate() {
            if !(0.0..=1.0).contains(e) {
                issues.push(Issue::new(format!("error_rates[{i}]"), "must be a probability"));
            }
        }
        if self.solution_cap == 0 {
            issues.push(Issue::new("solution_cap", "must be positive"));
        }
        match &self.dataset {
            DatasetSource::Project(p) if p.gold_standard().is_none() => {
                issues.push(Issue::new("dataset", "project has no gold standard"))
            }
            DatasetSource::Synthetic(spec) => {
                if let Err(Error::Validation(mut more)) = spec.validate() {
                    issues.append(&mut more);
                }
            }
            _ => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub budget: u32,
    pub error_rate: f64,
    pub repetition: u32,
    pub seed: u64,
    #[serde(rename = "elicited_pairs")]
    pub elicited_pairs_actual: u32,
    #[serde(serialize_with = "display")]
    pub final_cost: crate::model::Cost,
    #[serde(rename = "disagreement_gs")]
    pub disagreement_vs_gs: usize,
    #[serde(rename = "avg_distance_gs")]
    pub average_distance_vs_gs: f64,
    #[serde(serialize_with = "display")]
    pub status: SessionStatus,
    pub wall_time_ms: u64,
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `base_seed` xor a stable hash of the run coordinates.
pub fn derive_seed(base_seed: u64, budget: u32, error_rate: f64, repetition: u32) -> u64 {
    let h = splitmix64(budget as u64);
    let h = splitmix64(h ^ error_rate.to_bits());
    let h = splitmix64(h ^ repetition as u64);
    base_seed ^ h
}

struct RunKey {
    budget: u32,
    error_rate: f64,
    repetition: u32,
}

/// Runs every (budget, error rate, repetition) cell. Records come back in
/// configuration order regardless of how runs were scheduled.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;

    let projects: Vec<Project> = match &config.dataset {
        DatasetSource::Project(p) => vec![p.clone()],
        DatasetSource::Synthetic(spec) => (0..config.repetitions)
            .map(|rep| {
                let spec = SyntheticDatasetSpec {
                    seed: spec.seed.wrapping_add(rep as u64),
                    ..*spec
                };
                generate_dataset(&spec)?.into_project()
            })
            .collect::<Result<_>>()?,
    };
    for p in &projects {
        let instance = crate::solver::SolverInstance::from_graphs(p.ids().cloned(), p.source_graphs())?;
        if let Some(cycle) = solver::find_hard_cycle(&instance) {
            return Err(Error::Infeasible { cycle });
        }
    }

    let mut keys = Vec::new();
    for &budget in &config.budgets {
        for &error_rate in &config.error_rates {
            for repetition in 0..config.repetitions {
                keys.push(RunKey {
                    budget,
                    error_rate,
                    repetition,
                });
            }
        }
    }

    keys.par_iter()
        .enumerate()
        .map(|(run_id, key)| {
            let project = &projects[key.repetition as usize % projects.len()];
            run_one(run_id, key, project, config)
        })
        .collect()
}

fn run_one(run_id: usize, key: &RunKey, project: &Project, config: &ExperimentConfig) -> Result<RunRecord> {
    let started = Instant::now();
    let gold = project.gold_standard().expect("validated").clone();
    let seed = derive_seed(config.base_seed, key.budget, key.error_rate, key.repetition);
    let mut analyst = SimulatedAnalyst::new(gold.clone(), key.error_rate, seed)?;
    let mut session = ElicitationSession::new(
        project.clone(),
        SessionConfig {
            max_eli_pair: key.budget,
            solution_cap: config.solution_cap,
            time_budget_ms: None,
        },
    );
    session.drive(|q| analyst.answer(q))?;
    let ranking = session.final_ranking()?;
    let cost = session.last_result().expect("solved").cost;
    Ok(RunRecord {
        run_id,
        budget: key.budget,
        error_rate: key.error_rate,
        repetition: key.repetition,
        seed,
        elicited_pairs_actual: session.eli_pair(),
        final_cost: cost,
        disagreement_vs_gs: metrics::disagreement(ranking, &gold)?,
        average_distance_vs_gs: metrics::average_distance(ranking, &gold)?,
        status: session.status(),
        wall_time_ms: if config.record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in records {
        writer.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    if records.is_empty() {
        writer
            .write_record(CSV_HEADER.split(','))
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[RunRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Median of a non-empty sample; mean of the middle two for even sizes.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_has_no_dependencies() {
        let d = generate_dataset(&SyntheticDatasetSpec {
            n_requirements: 5,
            n_priority_levels: 4,
            dependency_density: 0.0,
            seed: 3,
        })
        .unwrap();
        assert!(d.dependencies.is_empty());
        assert_eq!(d.requirements.len(), 5);
        assert!(d.requirements.iter().all(|r| (1..=4).contains(&r.priority_level)));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticDatasetSpec::default();
        assert_eq!(generate_dataset(&spec).unwrap(), generate_dataset(&spec).unwrap());
        let other = SyntheticDatasetSpec { seed: 2, ..spec };
        assert_ne!(generate_dataset(&spec).unwrap(), generate_dataset(&other).unwrap());
    }

    #[test]
    fn dependencies_form_a_dag() {
        for seed in 0..20 {
            let d = generate_dataset(&SyntheticDatasetSpec {
                n_requirements: 20,
                n_priority_levels: 4,
                dependency_density: 0.3,
                seed,
            })
            .unwrap();
            let p = d.into_project().unwrap();
            let hard: Vec<_> = p.dep_graph().edges().map(|(b, a, _)| (b.clone(), a.clone())).collect();
            let inst = crate::solver::SolverInstance::new(p.ids().cloned(), vec![], hard).unwrap();
            assert!(solver::find_hard_cycle(&inst).is_none());
        }
    }

    #[test]
    fn spec_parsing() {
        let s: SyntheticDatasetSpec = "n=25".parse().unwrap();
        assert_eq!(s.n_requirements, 25);
        assert_eq!(s.n_priority_levels, 5);
        let s: SyntheticDatasetSpec = "n=3".parse().unwrap();
        assert_eq!(s.n_priority_levels, 3);
        let s: SyntheticDatasetSpec = "fall, seed=9".parse().unwrap();
        assert_eq!((s.n_requirements, s.seed), (26, 9));
        assert!("n=0".parse::<SyntheticDatasetSpec>().is_err());
        assert!("density=2".parse::<SyntheticDatasetSpec>().is_err());
        assert!("bogus=1".parse::<SyntheticDatasetSpec>().is_err());
        assert!("n=5,fall".parse::<SyntheticDatasetSpec>().is_err());
        assert!("n=4,levels=9".parse::<SyntheticDatasetSpec>().is_err());
        let round: SyntheticDatasetSpec = s.to_string().parse().unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn seeds_differ_per_cell() {
        let a = derive_seed(0, 25, 0.05, 3);
        assert_eq!(a, derive_seed(0, 25, 0.05, 3));
        assert_ne!(a, derive_seed(0, 25, 0.05, 4));
        assert_ne!(a, derive_seed(0, 50, 0.05, 3));
        assert_ne!(a, derive_seed(0, 25, 0.10, 3));
        assert_eq!(derive_seed(5, 25, 0.05, 3), a ^ 5);
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn csv_header_is_exact() {
        let text = to_csv_string(&[]).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn project_without_gold_is_rejected() {
        let p = Project::new(vec![Requirement::new("A", "", 1)], vec![], None, vec![]).unwrap();
        let cfg = ExperimentConfig::new(DatasetSource::Project(p));
        assert!(matches!(run_experiment(&cfg), Err(Error::Validation(_))));
    }
}
