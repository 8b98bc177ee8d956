//! Request and response bodies.

use serde::{Deserialize, Serialize};

use reqprio_core::elicitation::{AnalystResponse, ElicitationSession, HistoryEntry, UnorderedPair, Verdict};
use reqprio_core::metrics;
use reqprio_core::model::{Cost, RequirementId};
use reqprio_core::persistence::ProjectFile;
use reqprio_core::{Error, Issue};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub project: ProjectFile,
    #[serde(default)]
    pub budget: Option<u32>,
    #[serde(default)]
    pub solution_cap: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseItem {
    pub first: RequirementId,
    pub second: RequirementId,
    pub verdict: Verdict,
}

impl ResponseItem {
    /// Normalizes to canonical pair order, flipping the verdict if needed.
    pub fn into_response(self) -> Result<AnalystResponse, Error> {
        let swapped = self.first > self.second;
        let pair = UnorderedPair::new(self.first, self.second)?;
        let verdict = if swapped { self.verdict.flipped() } else { self.verdict };
        Ok(AnalystResponse { pair, verdict })
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitResponses {
    pub responses: Vec<ResponseItem>,
}

#[derive(Debug, Serialize)]
pub struct PendingPair {
    pub first: RequirementId,
    pub second: RequirementId,
    pub first_title: String,
    pub second_title: String,
    pub frequency: u32,
}

#[derive(Debug, Serialize)]
pub struct GoldMetrics {
    pub disagreement_gs: usize,
    pub avg_distance_gs: f64,
}

#[derive(Debug, Serialize)]
pub struct RankedItem {
    pub position: usize,
    pub id: RequirementId,
    pub title: String,
}

#[derive(Debug, Serialize)]
pub struct SessionState {
    pub id: String,
    /// One of the session statuses, or `SOLVING` while a solve is running.
    pub status: String,
    pub iteration: u32,
    pub cost: Option<Cost>,
    pub solution_count: usize,
    pub exhausted: Option<bool>,
    pub optimal: Option<bool>,
    pub solutions: Vec<Vec<RequirementId>>,
    pub pending: Vec<PendingPair>,
    pub eli_pair: u32,
    pub max_eli_pair: u32,
    pub budget_remaining: u32,
    pub history: Vec<HistoryEntry>,
    pub warnings: Vec<String>,
    /// Present once the session is terminal.
    pub ranking: Option<Vec<RequirementId>>,
    /// Current best ranking against the gold standard, if the project has one.
    pub metrics: Option<GoldMetrics>,
    pub error: Option<String>,
}

impl SessionState {
    pub fn new(id: &str, session: &ElicitationSession, solving: bool, error: Option<String>) -> Self {
        let project = session.project();
        let title = |id: &RequirementId| project.requirement(id).map(|r| r.title.clone()).unwrap_or_default();
        let result = session.last_result();
        let current = result.and_then(|r| r.solutions.first());
        let metrics = match (current, project.gold_standard()) {
            (Some(ranking), Some(gold)) => Some(GoldMetrics {
                disagreement_gs: metrics::disagreement(ranking, gold).unwrap_or_default(),
                avg_distance_gs: metrics::average_distance(ranking, gold).unwrap_or_default(),
            }),
            _ => None,
        };
        Self {
            id: id.to_owned(),
            status: if solving {
                "SOLVING".to_owned()
            } else {
                session.status().to_string()
            },
            iteration: session.iteration(),
            cost: result.map(|r| r.cost),
            solution_count: result.map_or(0, |r| r.solutions.len()),
            exhausted: result.map(|r| r.exhausted),
            optimal: result.map(|r| r.optimal),
            solutions: result
                .map(|r| r.solutions.iter().map(|s| s.order().to_vec()).collect())
                .unwrap_or_default(),
            pending: session
                .pending_queries()
                .iter()
                .map(|q| PendingPair {
                    first: q.pair.first().clone(),
                    second: q.pair.second().clone(),
                    first_title: title(q.pair.first()),
                    second_title: title(q.pair.second()),
                    frequency: q.frequency,
                })
                .collect(),
            eli_pair: session.eli_pair(),
            max_eli_pair: session.max_eli_pair(),
            budget_remaining: session.budget_remaining(),
            history: session.history().to_vec(),
            warnings: session.warnings().to_vec(),
            ranking: if solving {
                None
            } else {
                session.final_ranking().ok().map(|r| r.order().to_vec())
            },
            metrics,
            error,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RankingBody {
    pub id: String,
    pub status: String,
    pub cost: Cost,
    pub ranking: Vec<RankedItem>,
    pub metrics: Option<GoldMetrics>,
}

#[derive(Debug, Default, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub issues: Vec<Issue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cycle: Vec<RequirementId>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub retry: bool,
}
