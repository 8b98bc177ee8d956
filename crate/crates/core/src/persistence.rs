//! JSON project files (`.project`) and session snapshots (`.session`).
//!
//! Both formats carry a `schema_version` and reject unknown fields. Writes
//! go to a temporary sibling file that is then renamed over the target.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elicitation::ElicitationSession;
use crate::error::{Error, Issue, Result};
use crate::model::{ConstraintGraph, Dependency, PrecedenceEdge, Project, Ranking, Requirement, RequirementId};

pub const PROJECT_SCHEMA_VERSION: u64 = 1;
pub const SESSION_SCHEMA_VERSION: u64 = 1;

pub const PROJECT_EXTENSION: &str = "project";
pub const SESSION_EXTENSION: &str = "session";

/// The bundled five-requirement example.
pub const WORKED_EXAMPLE: &str = include_str!("../fixtures/worked-example.project");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub schema_version: u64,
    pub requirements: Vec<RequirementEntry>,
    #[serde(default)]
    pub dependencies: Vec<Dependency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_standard: Option<Vec<RequirementId>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_graphs: Vec<GraphEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequirementEntry {
    pub id: RequirementId,
    #[serde(default)]
    pub title: String,
    pub priority: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEntry {
    pub name: String,
    #[serde(default)]
    pub edges: Vec<PrecedenceEdge>,
}

impl From<&Project> for ProjectFile {
    fn from(p: &Project) -> Self {
        Self {
            schema_version: PROJECT_SCHEMA_VERSION,
            requirements: p
                .requirements()
                .iter()
                .map(|r| RequirementEntry {
                    id: r.id.clone(),
                    title: r.title.clone(),
                    priority: r.priority_level,
                })
                .collect(),
            dependencies: p.dependencies().to_vec(),
            gold_standard: p.gold_standard().map(|g| g.order().to_vec()),
            extra_graphs: p
                .extra_graphs()
                .iter()
                .map(|g| GraphEntry {
                    name: g.name().to_owned(),
                    edges: g.to_edge_list(),
                })
                .collect(),
        }
    }
}

impl ProjectFile {
    pub fn into_project(self) -> Result<Project> {
        if self.schema_version != PROJECT_SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: self.schema_version,
                expected: PROJECT_SCHEMA_VERSION,
            });
        }
        let mut issues = Vec::new();
        let gold = match self.gold_standard {
            Some(order) => match Ranking::new(order) {
                Ok(r) => Some(r),
                Err(e) => {
                    issues.push(Issue::new("gold_standard", e.to_string()));
                    None
                }
            },
            None => None,
        };
        let mut graphs = Vec::new();
        for (gi, g) in self.extra_graphs.into_iter().enumerate() {
            match ConstraintGraph::from_edge_list(g.name, g.edges) {
                Ok(graph) => graphs.push(graph),
                Err(e) => issues.push(Issue::new(format!("extra_graphs[{gi}].edges"), e.to_string())),
            }
        }
        let requirements = self
            .requirements
            .into_iter()
            .map(|r| Requirement {
                id: r.id,
                title: r.title,
                priority_level: r.priority,
            })
            .collect();
        match Project::new(requirements, self.dependencies, gold, graphs) {
            Ok(p) if issues.is_empty() => Ok(p),
            Ok(_) => Err(Error::Validation(issues)),
            Err(Error::Validation(mut more)) => {
                issues.append(&mut more);
                Err(Error::Validation(fix_priority_paths(issues)))
            }
            Err(e) => Err(e),
        }
    }
}

// the file calls the field `priority`
fn fix_priority_paths(issues: Vec<Issue>) -> Vec<Issue> {
    issues
        .into_iter()
        .map(|mut i| {
            if i.path.ends_with(".priority_level") {
                i.path = i.path.replace(".priority_level", ".priority");
            }
            i
        })
        .collect()
}

impl Serialize for Project {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProjectFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Project {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ProjectFile::deserialize(d)?
            .into_project()
            .map_err(serde::de::Error::custom)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn check_version(value: &serde_json::Value, expected: u64) -> Result<()> {
    let found = value
        .get("schema_version")
        .ok_or_else(|| Error::Validation(vec![Issue::new("schema_version", "missing")]))?
        .as_u64()
        .ok_or_else(|| Error::Validation(vec![Issue::new("schema_version", "must be a non-negative integer")]))?;
    if found != expected {
        return Err(Error::UnsupportedVersion { found, expected });
    }
    Ok(())
}

/// Parses and validates a project document.
pub fn load_project(bytes: &[u8]) -> Result<Project> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(parse_error)?;
    if !value.is_object() {
        return Err(Error::Parse("project must be a JSON object".into()));
    }
    check_version(&value, PROJECT_SCHEMA_VERSION)?;
    let file: ProjectFile = serde_json::from_value(value).map_err(parse_error)?;
    file.into_project()
}

pub fn load_project_file(path: impl AsRef<Path>) -> Result<Project> {
    load_project(&fs::read(path)?)
}

pub fn save_project(project: &Project) -> String {
    let mut text = serde_json::to_string_pretty(&ProjectFile::from(project)).expect("project serializes");
    text.push('\n');
    text
}

pub fn worked_example() -> Project {
    load_project(WORKED_EXAMPLE.as_bytes()).expect("bundled example is valid")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionSnapshot<S> {
    schema_version: u64,
    session: S,
}

pub fn save_session(session: &ElicitationSession) -> String {
    let snapshot = SessionSnapshot {
        schema_version: SESSION_SCHEMA_VERSION,
        session,
    };
    let mut text = serde_json::to_string_pretty(&snapshot).expect("session serializes");
    text.push('\n');
    text
}

/// Restores a session saved by [`save_session`].
pub fn load_session(bytes: &[u8]) -> Result<ElicitationSession> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(parse_error)?;
    if !value.is_object() {
        return Err(Error::Parse("snapshot must be a JSON object".into()));
    }
    check_version(&value, SESSION_SCHEMA_VERSION)?;
    let snapshot: SessionSnapshot<ElicitationSession> = serde_json::from_value(value).map_err(parse_error)?;
    snapshot.session.validate()?;
    Ok(snapshot.session)
}

pub fn load_session_file(path: impl AsRef<Path>) -> Result<ElicitationSession> {
    load_session(&fs::read(path)?)
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other("path has no file name")))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
