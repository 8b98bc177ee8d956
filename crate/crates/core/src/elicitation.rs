//! The interactive solve / ask / re-solve loop.
//!
//! A session solves the current constraints, and while several rankings tie
//! at the minimum cost it asks about the requirement pairs those rankings
//! order differently. Each answer becomes a weight-1 edge in the `Eli`
//! graph. The loop stops when a single optimum remains, when the question
//! budget is spent, or when every disputed pair has already been asked.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Issue, Result};
use crate::model::{ConstraintGraph, EdgeWeight, Project, Ranking, RequirementId};
use crate::solver::{self, SolveOptions, SolverInstance, SolverResult, DEFAULT_SOLUTION_CAP};

pub const DEFAULT_MAX_ELI_PAIR: u32 = 100;

/// Two distinct requirement ids, stored in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnorderedPair {
    first: RequirementId,
    second: RequirementId,
}

impl UnorderedPair {
    pub fn new(a: RequirementId, b: RequirementId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self { first: a, second: b }),
            std::cmp::Ordering::Greater => Ok(Self { first: b, second: a }),
            std::cmp::Ordering::Equal => Err(Error::SelfLoop(a)),
        }
    }

    pub fn first(&self) -> &RequirementId {
        &self.first
    }

    pub fn second(&self) -> &RequirementId {
        &self.second
    }

    fn check(&self) -> Result<()> {
        if self.first < self.second {
            Ok(())
        } else {
            Err(Error::Parse(format!("pair {self} is not in canonical order")))
        }
    }
}

impl fmt::Display for UnorderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.first, self.second)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    FirstPrecedes,
    SecondPrecedes,
    Undecided,
}

impl Verdict {
    pub fn flipped(self) -> Self {
        match self {
            Verdict::FirstPrecedes => Verdict::SecondPrecedes,
            Verdict::SecondPrecedes => Verdict::FirstPrecedes,
            Verdict::Undecided => Verdict::Undecided,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonQuery {
    pub pair: UnorderedPair,
    /// Number of tied solution pairs that order this pair differently.
    pub frequency: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalystResponse {
    pub pair: UnorderedPair,
    pub verdict: Verdict,
}

impl AnalystResponse {
    /// Records that `winner` should come before `loser`.
    pub fn precedes(winner: impl Into<RequirementId>, loser: impl Into<RequirementId>) -> Result<Self> {
        let (winner, loser) = (winner.into(), loser.into());
        let pair = UnorderedPair::new(winner.clone(), loser)?;
        let verdict = if pair.first == winner {
            Verdict::FirstPrecedes
        } else {
            Verdict::SecondPrecedes
        };
        Ok(Self { pair, verdict })
    }

    pub fn undecided(pair: UnorderedPair) -> Self {
        Self {
            pair,
            verdict: Verdict::Undecided,
        }
    }

    /// `(before, after)` for a decided verdict.
    pub fn edge(&self) -> Option<(&RequirementId, &RequirementId)> {
        match self.verdict {
            Verdict::FirstPrecedes => Some((&self.pair.first, &self.pair.second)),
            Verdict::SecondPrecedes => Some((&self.pair.second, &self.pair.first)),
            Verdict::Undecided => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionStatus {
    Active,
    /// A single optimal ranking remains.
    Converged,
    BudgetExhausted,
    /// Rankings still tie but every disputed pair was already asked.
    Plateau,
}

impl SessionStatus {
    pub fn is_terminal(self) -> bool {
        self != SessionStatus::Active
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionStatus::Active => "ACTIVE",
            SessionStatus::Converged => "CONVERGED",
            SessionStatus::BudgetExhausted => "BUDGET_EXHAUSTED",
            SessionStatus::Plateau => "PLATEAU",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    /// Solve count at the time the question was asked.
    pub iteration: u32,
    pub pair: UnorderedPair,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub max_eli_pair: u32,
    pub solution_cap: usize,
    /// Wall-clock limit per solve; past it the best known result is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_ms: Option<u64>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            max_eli_pair: DEFAULT_MAX_ELI_PAIR,
            solution_cap: DEFAULT_SOLUTION_CAP,
            time_budget_ms: None,
        }
    }
}

impl SessionConfig {
    pub fn with_budget(max_eli_pair: u32) -> Self {
        Self {
            max_eli_pair,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElicitationSession {
    project: Project,
    config: SessionConfig,
    eli_graph: ConstraintGraph,
    eli_pair: u32,
    asked_pairs: BTreeSet<UnorderedPair>,
    pending_queries: Vec<ComparisonQuery>,
    last_result: Option<SolverResult>,
    status: SessionStatus,
    iteration: u32,
    history: Vec<HistoryEntry>,
    warnings: Vec<String>,
}

impl ElicitationSession {
    /// A session that has not been solved yet.
    pub fn new(project: Project, config: SessionConfig) -> Self {
        Self {
            project,
            config,
            eli_graph: ConstraintGraph::new("Eli"),
            eli_pair: 0,
            asked_pairs: BTreeSet::new(),
            pending_queries: Vec::new(),
            last_result: None,
            status: SessionStatus::Active,
            iteration: 0,
            history: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// Creates a session and runs the first solve.
    pub fn start(project: Project, config: SessionConfig) -> Result<Self> {
        let mut session = Self::new(project, config);
        session.step()?;
        Ok(session)
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn eli_graph(&self) -> &ConstraintGraph {
        &self.eli_graph
    }

    pub fn eli_pair(&self) -> u32 {
        self.eli_pair
    }

    pub fn max_eli_pair(&self) -> u32 {
        self.config.max_eli_pair
    }

    pub fn budget_remaining(&self) -> u32 {
        self.config.max_eli_pair.saturating_sub(self.eli_pair)
    }

    pub fn asked_pairs(&self) -> &BTreeSet<UnorderedPair> {
        &self.asked_pairs
    }

    pub fn pending_queries(&self) -> &[ComparisonQuery] {
        &self.pending_queries
    }

    pub fn last_result(&self) -> Option<&SolverResult> {
        self.last_result.as_ref()
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Source graphs followed by the `Eli` graph.
    pub fn instance(&self) -> Result<SolverInstance> {
        let mut graphs = self.project.source_graphs();
        graphs.push(&self.eli_graph);
        SolverInstance::from_graphs(self.project.ids().cloned(), graphs)
    }

    /// Re-solves and decides whether to stop or ask more questions.
    pub fn step(&mut self) -> Result<()> {
        if self.status.is_terminal() {
            return Err(Error::State(format!("session is {}", self.status)));
        }
        if !self.pending_queries.is_empty() {
            return Err(Error::State(format!(
                "{} pending queries must be answered first",
                self.pending_queries.len()
            )));
        }
        let instance = self.instance()?;
        let options = SolveOptions {
            solution_cap: self.config.solution_cap,
            deadline: self
                .config
                .time_budget_ms
                .map(|ms| Instant::now() + Duration::from_millis(ms)),
        };
        let result = solver::solve_with(&instance, &options)?;

        self.iteration += 1;
        if !result.optimal {
            self.warnings.push(format!(
                "iteration {}: time budget reached, cost {} is the best found, not proven minimal",
                self.iteration, result.cost
            ));
        } else if !result.exhausted {
            self.warnings.push(format!(
                "iteration {}: more than {} optimal rankings; questions drawn from the first {}",
                self.iteration,
                self.config.solution_cap,
                result.solutions.len()
            ));
        }
        let unique = result.solutions.len() == 1;
        self.last_result = Some(result);

        if unique {
            self.status = SessionStatus::Converged;
        } else if self.eli_pair >= self.config.max_eli_pair {
            self.status = SessionStatus::BudgetExhausted;
        } else {
            self.next_queries()?;
        }
        Ok(())
    }

    /// Collects the unasked pairs the tied optima disagree on, most disputed
    /// first, up to the remaining budget. No such pair means a plateau.
    pub fn next_queries(&mut self) -> Result<&[ComparisonQuery]> {
        if self.status.is_terminal() {
            return Err(Error::State(format!("session is {}", self.status)));
        }
        let result = self
            .last_result
            .as_ref()
            .ok_or_else(|| Error::State("session has not been solved".into()))?;
        if result.solutions.len() < 2 {
            return Err(Error::State("fewer than two tied solutions".into()));
        }
        let mut queries: Vec<ComparisonQuery> = disagreement_frequencies(&result.solutions)
            .into_iter()
            .filter(|(pair, _)| !self.asked_pairs.contains(pair))
            .map(|(pair, frequency)| ComparisonQuery { pair, frequency })
            .collect();
        queries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.pair.cmp(&b.pair)));
        queries.truncate(self.budget_remaining() as usize);
        if queries.is_empty() {
            self.status = SessionStatus::Plateau;
        }
        self.pending_queries = queries;
        Ok(&self.pending_queries)
    }

    /// Applies answers to pending queries. Answered pairs leave the pending
    /// set; any others stay pending. Each answer, undecided included, uses
    /// one unit of budget. On error the session is unchanged.
    pub fn submit_responses(&mut self, responses: &[AnalystResponse]) -> Result<()> {
        if self.status.is_terminal() {
            return Err(Error::State(format!("session is {}", self.status)));
        }
        let mut seen = BTreeSet::new();
        for r in responses {
            r.pair.check()?;
            if !self.pending_queries.iter().any(|q| q.pair == r.pair) {
                return Err(Error::Conflict(format!("pair {} is not pending", r.pair)));
            }
            if !seen.insert(&r.pair) {
                return Err(Error::Conflict(format!("pair {} answered twice", r.pair)));
            }
        }
        for r in responses {
            if let Some((before, after)) = r.edge() {
                // the analyst's latest word on this pair wins
                self.eli_graph.remove(after, before);
                self.eli_graph.set(before.clone(), after.clone(), EdgeWeight::default());
            }
            self.asked_pairs.insert(r.pair.clone());
            self.history.push(HistoryEntry {
                iteration: self.iteration,
                pair: r.pair.clone(),
                verdict: r.verdict,
            });
        }
        self.eli_pair += responses.len() as u32;
        self.pending_queries.retain(|q| !seen.contains(&q.pair));
        Ok(())
    }

    /// The ranking the session settles on: the first of the tied optima.
    pub fn final_ranking(&self) -> Result<&Ranking> {
        if !self.status.is_terminal() {
            return Err(Error::State("session is still active".into()));
        }
        self.last_result
            .as_ref()
            .and_then(|r| r.solutions.first())
            .ok_or_else(|| Error::State("session has never been solved".into()))
    }

    /// Runs the loop to a terminal state, answering every query with `answer`.
    pub fn drive<F>(&mut self, mut answer: F) -> Result<()>
    where
        F: FnMut(&ComparisonQuery) -> Result<AnalystResponse>,
    {
        if self.last_result.is_none() && self.status == SessionStatus::Active {
            self.step()?;
        }
        while self.status == SessionStatus::Active {
            if !self.pending_queries.is_empty() {
                let responses = self
                    .pending_queries
                    .iter()
                    .map(&mut answer)
                    .collect::<Result<Vec<_>>>()?;
                self.submit_responses(&responses)?;
            }
            self.step()?;
        }
        Ok(())
    }

    /// Checks invariants of a deserialized session against its project.
    pub(crate) fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let known: BTreeSet<&RequirementId> = self.project.ids().collect();
        let check_pair = |p: &UnorderedPair, path: String, issues: &mut Vec<Issue>| {
            if p.first >= p.second {
                issues.push(Issue::new(path.clone(), format!("pair {p} is not in canonical order")));
            }
            for id in [&p.first, &p.second] {
                if !known.contains(id) {
                    issues.push(Issue::new(path.clone(), format!("unknown requirement `{id}`")));
                }
            }
        };
        if self.eli_graph.name() != "Eli" {
            issues.push(Issue::new("session.eli_graph.name", "must be `Eli`"));
        }
        for (i, (b, a, w)) in self.eli_graph.edges().enumerate() {
            if !known.contains(b) || !known.contains(a) {
                issues.push(Issue::new(
                    format!("session.eli_graph.edges[{i}]"),
                    "unknown requirement",
                ));
            }
            if w != EdgeWeight::default() {
                issues.push(Issue::new(
                    format!("session.eli_graph.edges[{i}]"),
                    "elicited edges have weight 1",
                ));
            }
        }
        if self.eli_pair > self.config.max_eli_pair {
            issues.push(Issue::new("session.eli_pair", "exceeds max_eli_pair"));
        }
        if self.config.solution_cap == 0 {
            issues.push(Issue::new("session.config.solution_cap", "must be positive"));
        }
        for p in &self.asked_pairs {
            check_pair(p, "session.asked_pairs".into(), &mut issues);
        }
        for (i, q) in self.pending_queries.iter().enumerate() {
            check_pair(&q.pair, format!("session.pending_queries[{i}]"), &mut issues);
            if self.asked_pairs.contains(&q.pair) {
                issues.push(Issue::new(
                    format!("session.pending_queries[{i}]"),
                    "pair was already asked",
                ));
            }
        }
        if self.pending_queries.len() as u32 > self.budget_remaining() {
            issues.push(Issue::new(
                "session.pending_queries",
                "more queries than remaining budget",
            ));
        }
        for (i, h) in self.history.iter().enumerate() {
            check_pair(&h.pair, format!("session.history[{i}]"), &mut issues);
            if !self.asked_pairs.contains(&h.pair) {
                issues.push(Issue::new(
                    format!("session.history[{i}]"),
                    "pair missing from asked_pairs",
                ));
            }
        }
        if self.status.is_terminal() && !self.pending_queries.is_empty() {
            issues.push(Issue::new(
                "session.pending_queries",
                "terminal session has pending queries",
            ));
        }
        match &self.last_result {
            Some(result) => {
                if result.solutions.is_empty() {
                    issues.push(Issue::new("session.last_result.solutions", "must not be empty"));
                }
                for (i, s) in result.solutions.iter().enumerate() {
                    if let Err(e) = s.check_universe(known.iter().copied()) {
                        issues.push(Issue::new(format!("session.last_result.solutions[{i}]"), e.to_string()));
                    }
                }
            }
            None => {
                if self.status.is_terminal() || !self.pending_queries.is_empty() || self.iteration != 0 {
                    issues.push(Issue::new("session.last_result", "missing for a solved session"));
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

/// Pairs ordered differently by `a` and `b`.
pub fn pairs_in_disagreement(a: &Ranking, b: &Ranking) -> Result<BTreeSet<UnorderedPair>> {
    a.check_universe(b.order())?;
    let pos = b.positions();
    let order = a.order();
    let mut out = BTreeSet::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if pos[&order[i]] > pos[&order[j]] {
                out.insert(UnorderedPair::new(order[i].clone(), order[j].clone())?);
            }
        }
    }
    Ok(out)
}

/// For every pair, how many unordered pairs of `solutions` order it
/// differently. A pair split `k` / `m - k` across `m` solutions is disputed
/// by `k * (m - k)` solution pairs.
pub fn disagreement_frequencies(solutions: &[Ranking]) -> BTreeMap<UnorderedPair, u32> {
    let mut out = BTreeMap::new();
    let Some(first) = solutions.first() else {
        return out;
    };
    let mut ids: Vec<&RequirementId> = first.order().iter().collect();
    ids.sort();
    let positions: Vec<_> = solutions.iter().map(Ranking::positions).collect();
    let m = solutions.len() as u32;
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let ahead = positions.iter().filter(|p| p[ids[i]] < p[ids[j]]).count() as u32;
            let freq = ahead * (m - ahead);
            if freq > 0 {
                out.insert(
                    UnorderedPair {
                        first: ids[i].clone(),
                        second: ids[j].clone(),
                    },
                    freq,
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(ids: &[&str]) -> Ranking {
        Ranking::from_strs(ids).unwrap()
    }

    fn pair(a: &str, b: &str) -> UnorderedPair {
        UnorderedPair::new(a.into(), b.into()).unwrap()
    }

    #[test]
    fn pair_is_canonical() {
        let p = pair("R3", "R1");
        assert_eq!(p.first().as_str(), "R1");
        assert_eq!(p.second().as_str(), "R3");
        assert!(UnorderedPair::new("R1".into(), "R1".into()).is_err());
    }

    #[test]
    fn precedes_picks_verdict_side() {
        let a = AnalystResponse::precedes("R4", "R3").unwrap();
        assert_eq!(a.pair, pair("R3", "R4"));
        assert_eq!(a.verdict, Verdict::SecondPrecedes);
        assert_eq!(a.edge().map(|(b, a)| (b.as_str(), a.as_str())), Some(("R4", "R3")));
    }

    #[test]
    fn pairs_against_itself_are_empty() {
        let a = r(&["R2", "R1", "R3"]);
        assert!(pairs_in_disagreement(&a, &a).unwrap().is_empty());
        assert!(pairs_in_disagreement(&a, &r(&["R1", "R2"])).is_err());
    }

    #[test]
    fn frequencies_match_pairwise_definition() {
        let sols = vec![
            r(&["A", "B", "C", "D"]),
            r(&["B", "A", "D", "C"]),
            r(&["A", "C", "B", "D"]),
            r(&["D", "C", "B", "A"]),
        ];
        let mut expected: BTreeMap<UnorderedPair, u32> = BTreeMap::new();
        for i in 0..sols.len() {
            for j in i + 1..sols.len() {
                for p in pairs_in_disagreement(&sols[i], &sols[j]).unwrap() {
                    *expected.entry(p).or_default() += 1;
                }
            }
        }
        assert_eq!(disagreement_frequencies(&sols), expected);
    }

    #[test]
    fn unsolved_session_has_no_final_ranking() {
        let project = Project::new(vec![crate::model::Requirement::new("A", "", 1)], vec![], None, vec![]).unwrap();
        let mut s = ElicitationSession::new(project, SessionConfig::default());
        assert!(s.final_ranking().is_err());
        assert!(s.next_queries().is_err());
        s.step().unwrap();
        assert_eq!(s.status(), SessionStatus::Converged);
        assert_eq!(s.final_ranking().unwrap(), &r(&["A"]));
        assert!(s.step().is_err());
    }
}
