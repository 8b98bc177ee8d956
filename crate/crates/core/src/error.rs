use std::fmt;

use crate::model::RequirementId;

/// A single validation finding, located by a path into the input document
/// (for example `requirements[2].id`).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {}", join_issues(.0))]
    Validation(Vec<Issue>),

    #[error("unknown requirement `{0}`")]
    UnknownRequirement(RequirementId),

    #[error("self-loop on `{0}`")]
    SelfLoop(RequirementId),

    #[error("rankings or instance cover different requirement sets: {0}")]
    UniverseMismatch(String),

    #[error("hard constraints are cyclic: {}", format_cycle(.cycle))]
    Infeasible { cycle: Vec<RequirementId> },

    #[error("invalid session state: {0}")]
    State(String),

    #[error("conflicting response: {0}")]
    Conflict(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("weight arithmetic overflow")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join_issues(issues: &[Issue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn format_cycle(cycle: &[RequirementId]) -> String {
    let mut parts: Vec<&str> = cycle.iter().map(RequirementId::as_str).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.as_str());
    }
    parts.join(" -> ")
}
