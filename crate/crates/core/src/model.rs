//! Requirements, precedence constraints and rankings.
//!
//! An edge `(before, after)` always means `before` must occupy an earlier
//! position than `after` in the final order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Issue, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequirementId(String);

impl RequirementId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RequirementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RequirementId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for RequirementId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl std::borrow::Borrow<str> for RequirementId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: RequirementId,
    #[serde(default)]
    pub title: String,
    /// 1 is the highest end-user priority.
    pub priority_level: u32,
}

impl Requirement {
    pub fn new(id: impl Into<RequirementId>, title: impl Into<String>, priority_level: u32) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            priority_level,
        }
    }
}

/// `requirement` cannot be implemented before `depends_on`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dependency {
    pub requirement: RequirementId,
    pub depends_on: RequirementId,
}

impl Dependency {
    pub fn new(requirement: impl Into<RequirementId>, depends_on: impl Into<RequirementId>) -> Self {
        Self {
            requirement: requirement.into(),
            depends_on: depends_on.into(),
        }
    }
}

/// A strictly positive exact rational weight.
///
/// Serialized as a JSON integer when integral and as a `"num/den"` string
/// otherwise. Floats are accepted on input and converted to the nearest
/// small rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Ratio<u64>);

impl Weight {
    pub const ONE: Weight = Weight(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Option<Self> {
        if numer == 0 || denom == 0 {
            return None;
        }
        Some(Self(Ratio::new(numer, denom)))
    }

    pub fn integer(value: u64) -> Option<Self> {
        Self::new(value, 1)
    }

    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() || value <= 0.0 {
            return None;
        }
        let r = Ratio::<i64>::approximate_float(value)?;
        Self::new(r.numer().to_u64()?, r.denom().to_u64()?)
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ratio(&self.0, f)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_ratio(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = deserialize_ratio(d)?;
        if r.is_zero() {
            return Err(serde::de::Error::custom("weight must be positive"));
        }
        Ok(Weight(r))
    }
}

/// Non-negative exact cost: a sum of violated soft weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(pub Ratio<u64>);

impl Cost {
    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn integer(value: u64) -> Self {
        Self(Ratio::from_integer(value))
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_ratio(&self.0, f)
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_ratio(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        deserialize_ratio(d).map(Cost)
    }
}

fn fmt_ratio(r: &Ratio<u64>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

fn serialize_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    if r.is_integer() {
        s.serialize_u64(*r.numer())
    } else {
        s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
    }
}

fn deserialize_ratio<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Ratio<u64>, D::Error> {
    use serde::de::Error as _;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Float(f64),
        Text(String),
    }

    match Raw::deserialize(d)? {
        Raw::Int(v) => Ok(Ratio::from_integer(v)),
        Raw::Float(v) => {
            if v == 0.0 {
                return Ok(Ratio::zero());
            }
            Weight::from_f64(v)
                .map(|w| w.0)
                .ok_or_else(|| D::Error::custom(format!("invalid weight {v}")))
        }
        Raw::Text(text) => parse_ratio(&text).map_err(D::Error::custom),
    }
}

fn parse_ratio(text: &str) -> std::result::Result<Ratio<u64>, String> {
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let n: u64 = n.parse().map_err(|_| format!("invalid ratio `{text}`"))?;
    let d: u64 = d.parse().map_err(|_| format!("invalid ratio `{text}`"))?;
    if d == 0 {
        return Err(format!("zero denominator in `{text}`"));
    }
    Ok(Ratio::new(n, d))
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if let Ok(r) = parse_ratio(s) {
            return Weight::new(*r.numer(), *r.denom()).ok_or_else(|| "weight must be positive".into());
        }
        let v: f64 = s.trim().parse().map_err(|_| format!("invalid weight `{s}`"))?;
        Weight::from_f64(v).ok_or_else(|| format!("invalid weight `{s}`"))
    }
}

/// Soft (retractable, weighted) or hard (must hold) precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeWeight {
    Soft(Weight),
    Hard,
}

impl EdgeWeight {
    pub fn is_hard(&self) -> bool {
        matches!(self, EdgeWeight::Hard)
    }

    fn max(self, other: EdgeWeight) -> EdgeWeight {
        match (self, other) {
            (EdgeWeight::Soft(a), EdgeWeight::Soft(b)) => EdgeWeight::Soft(a.max(b)),
            _ => EdgeWeight::Hard,
        }
    }
}

impl Default for EdgeWeight {
    fn default() -> Self {
        EdgeWeight::Soft(Weight::ONE)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecedenceEdge {
    pub before: RequirementId,
    pub after: RequirementId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Weight>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hard: bool,
}

impl PrecedenceEdge {
    pub fn soft(before: impl Into<RequirementId>, after: impl Into<RequirementId>, weight: Weight) -> Self {
        Self {
            before: before.into(),
            after: after.into(),
            weight: Some(weight),
            hard: false,
        }
    }

    pub fn hard(before: impl Into<RequirementId>, after: impl Into<RequirementId>) -> Self {
        Self {
            before: before.into(),
            after: after.into(),
            weight: None,
            hard: true,
        }
    }

    /// Hard wins over any weight; a missing weight defaults to 1.
    pub fn edge_weight(&self) -> EdgeWeight {
        if self.hard {
            EdgeWeight::Hard
        } else {
            EdgeWeight::Soft(self.weight.unwrap_or(Weight::ONE))
        }
    }

    fn from_parts(before: RequirementId, after: RequirementId, weight: EdgeWeight) -> Self {
        match weight {
            EdgeWeight::Hard => Self::hard(before, after),
            EdgeWeight::Soft(w) => Self::soft(before, after, w),
        }
    }
}

/// A named set of precedence edges with at most one edge per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintGraph {
    name: String,
    edges: BTreeMap<(RequirementId, RequirementId), EdgeWeight>,
}

impl ConstraintGraph {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            edges: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Adds an edge, collapsing a duplicate ordered pair to the larger weight.
    pub fn add(&mut self, before: RequirementId, after: RequirementId, weight: EdgeWeight) -> Result<()> {
        if before == after {
            return Err(Error::SelfLoop(before));
        }
        self.edges
            .entry((before, after))
            .and_modify(|w| *w = w.max(weight))
            .or_insert(weight);
        Ok(())
    }

    /// Adds an edge, replacing any existing edge for the same ordered pair.
    pub(crate) fn set(&mut self, before: RequirementId, after: RequirementId, weight: EdgeWeight) {
        self.edges.insert((before, after), weight);
    }

    pub(crate) fn remove(&mut self, before: &RequirementId, after: &RequirementId) -> Option<EdgeWeight> {
        self.edges.remove(&(before.clone(), after.clone()))
    }

    pub fn contains(&self, before: &RequirementId, after: &RequirementId) -> bool {
        self.edges.contains_key(&(before.clone(), after.clone()))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges sorted by `(before, after)`.
    pub fn edges(&self) -> impl Iterator<Item = (&RequirementId, &RequirementId, EdgeWeight)> + '_ {
        self.edges.iter().map(|((b, a), w)| (b, a, *w))
    }

    pub fn to_edge_list(&self) -> Vec<PrecedenceEdge> {
        self.edges()
            .map(|(b, a, w)| PrecedenceEdge::from_parts(b.clone(), a.clone(), w))
            .collect()
    }

    pub fn from_edge_list(name: impl Into<String>, edges: impl IntoIterator<Item = PrecedenceEdge>) -> Result<Self> {
        let mut graph = ConstraintGraph::new(name);
        for e in edges {
            let w = e.edge_weight();
            graph.add(e.before, e.after, w)?;
        }
        Ok(graph)
    }

    pub fn endpoints(&self) -> impl Iterator<Item = &RequirementId> + '_ {
        self.edges.keys().flat_map(|(b, a)| [b, a])
    }
}

impl Serialize for ConstraintGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            name: &'a str,
            edges: Vec<PrecedenceEdge>,
        }
        Repr {
            name: &self.name,
            edges: self.to_edge_list(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstraintGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            name: String,
            #[serde(default)]
            edges: Vec<PrecedenceEdge>,
        }
        let repr = Repr::deserialize(d)?;
        ConstraintGraph::from_edge_list(repr.name, repr.edges).map_err(serde::de::Error::custom)
    }
}

/// Checks that ids are non-empty and unique.
pub(crate) fn check_requirements(requirements: &[Requirement]) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for (i, r) in requirements.iter().enumerate() {
        if r.id.as_str().trim().is_empty() {
            issues.push(Issue::new(format!("requirements[{i}].id"), "id must be non-empty"));
        } else if r.id.as_str().chars().any(char::is_whitespace) {
            issues.push(Issue::new(
                format!("requirements[{i}].id"),
                format!("id `{}` must not contain whitespace", r.id),
            ));
        }
        if !seen.insert(&r.id) {
            issues.push(Issue::new(
                format!("requirements[{i}].id"),
                format!("duplicate id `{}`", r.id),
            ));
        }
        if r.priority_level == 0 {
            issues.push(Issue::new(
                format!("requirements[{i}].priority_level"),
                "priority level must be at least 1",
            ));
        }
    }
    issues
}

/// One weight-1 edge for every pair of requirements on different priority
/// levels, from the numerically lower (more important) level to the higher.
pub fn build_prio_graph(requirements: &[Requirement]) -> Result<ConstraintGraph> {
    let issues = check_requirements(requirements);
    if !issues.is_empty() {
        return Err(Error::Validation(issues));
    }
    if requirements.is_empty() {
        return Err(Error::Validation(vec![Issue::new(
            "requirements",
            "at least one requirement is required",
        )]));
    }
    let mut graph = ConstraintGraph::new("Prio");
    for x in requirements {
        for y in requirements {
            if x.priority_level < y.priority_level {
                graph.add(x.id.clone(), y.id.clone(), EdgeWeight::default())?;
            }
        }
    }
    Ok(graph)
}

/// One weight-1 edge per dependency, prerequisite first.
///
/// `known` is the set of valid requirement ids.
pub fn build_dep_graph<'a>(
    dependencies: &[Dependency],
    known: impl IntoIterator<Item = &'a RequirementId>,
) -> Result<ConstraintGraph> {
    let known: HashSet<&RequirementId> = known.into_iter().collect();
    let mut graph = ConstraintGraph::new("Dep");
    for d in dependencies {
        for id in [&d.requirement, &d.depends_on] {
            if !known.contains(id) {
                return Err(Error::UnknownRequirement(id.clone()));
            }
        }
        graph.add(d.depends_on.clone(), d.requirement.clone(), EdgeWeight::default())?;
    }
    Ok(graph)
}

/// All `(x, y)` connected by a directed path of length at least one.
///
/// Cycles are allowed, so self-pairs can appear in the result.
pub fn transitive_closure(graph: &ConstraintGraph) -> BTreeSet<(RequirementId, RequirementId)> {
    closure_of_edges(graph.edges().map(|(b, a, _)| (b, a)))
}

pub(crate) fn closure_of_edges<'a>(
    edges: impl IntoIterator<Item = (&'a RequirementId, &'a RequirementId)>,
) -> BTreeSet<(RequirementId, RequirementId)> {
    let mut adj: BTreeMap<&RequirementId, Vec<&RequirementId>> = BTreeMap::new();
    for (b, a) in edges {
        adj.entry(b).or_default().push(a);
    }
    let mut out = BTreeSet::new();
    for &start in adj.keys() {
        let mut seen: HashSet<&RequirementId> = HashSet::new();
        let mut stack: Vec<&RequirementId> = adj[start].clone();
        while let Some(node) = stack.pop() {
            if !seen.insert(node) {
                continue;
            }
            out.insert((start.clone(), node.clone()));
            if let Some(next) = adj.get(node) {
                stack.extend(next.iter().copied());
            }
        }
    }
    out
}

/// A total order over every requirement of a project.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking {
    order: Vec<RequirementId>,
}

impl Ranking {
    /// Builds a ranking, rejecting duplicate ids.
    pub fn new(order: Vec<RequirementId>) -> Result<Self> {
        let mut seen = HashSet::new();
        for id in &order {
            if !seen.insert(id) {
                return Err(Error::UniverseMismatch(format!("`{id}` appears more than once")));
            }
        }
        Ok(Self { order })
    }

    /// Builds a ranking and checks that it is a permutation of `universe`.
    pub fn over<'a>(order: Vec<RequirementId>, universe: impl IntoIterator<Item = &'a RequirementId>) -> Result<Self> {
        let ranking = Self::new(order)?;
        ranking.check_universe(universe)?;
        Ok(ranking)
    }

    pub fn from_strs(ids: &[&str]) -> Result<Self> {
        Self::new(ids.iter().map(|s| RequirementId::from(*s)).collect())
    }

    pub(crate) fn from_vec_unchecked(order: Vec<RequirementId>) -> Self {
        Self { order }
    }

    pub fn order(&self) -> &[RequirementId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based position of every id.
    pub fn positions(&self) -> HashMap<&RequirementId, usize> {
        self.order.iter().enumerate().map(|(i, id)| (id, i + 1)).collect()
    }

    pub fn position(&self, id: &RequirementId) -> Option<usize> {
        self.order.iter().position(|x| x == id).map(|i| i + 1)
    }

    pub fn check_universe<'a>(&self, universe: impl IntoIterator<Item = &'a RequirementId>) -> Result<()> {
        let mine: BTreeSet<&RequirementId> = self.order.iter().collect();
        let theirs: BTreeSet<&RequirementId> = universe.into_iter().collect();
        if mine == theirs {
            return Ok(());
        }
        let missing: Vec<_> = theirs.difference(&mine).map(|s| s.as_str()).collect();
        let extra: Vec<_> = mine.difference(&theirs).map(|s| s.as_str()).collect();
        Err(Error::UniverseMismatch(format!(
            "missing [{}], unexpected [{}]",
            missing.join(", "),
            extra.join(", ")
        )))
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, id) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(id.as_str())?;
        }
        f.write_str(">")
    }
}

/// A validated prioritization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Project {
    requirements: Vec<Requirement>,
    dependencies: Vec<Dependency>,
    gold_standard: Option<Ranking>,
    extra_graphs: Vec<ConstraintGraph>,
    prio: ConstraintGraph,
    dep: ConstraintGraph,
}

impl Project {
    pub fn new(
        requirements: Vec<Requirement>,
        dependencies: Vec<Dependency>,
        gold_standard: Option<Ranking>,
        extra_graphs: Vec<ConstraintGraph>,
    ) -> Result<Self> {
        let mut issues = check_requirements(&requirements);
        if requirements.is_empty() {
            issues.push(Issue::new("requirements", "at least one requirement is required"));
        }
        let known: HashSet<&RequirementId> = requirements.iter().map(|r| &r.id).collect();
        let mut seen_deps = HashSet::new();
        for (i, d) in dependencies.iter().enumerate() {
            for (field, id) in [("requirement", &d.requirement), ("depends_on", &d.depends_on)] {
                if !known.contains(id) {
                    issues.push(Issue::new(
                        format!("dependencies[{i}].{field}"),
                        format!("unknown requirement `{id}`"),
                    ));
                }
            }
            if d.requirement == d.depends_on {
                issues.push(Issue::new(
                    format!("dependencies[{i}]"),
                    format!("`{}` cannot depend on itself", d.requirement),
                ));
            }
            if !seen_deps.insert(d) {
                issues.push(Issue::new(format!("dependencies[{i}]"), "duplicate dependency"));
            }
        }
        if let Some(gold) = &gold_standard {
            if let Err(e) = gold.check_universe(known.iter().copied()) {
                issues.push(Issue::new("gold_standard", e.to_string()));
            }
        }
        let mut names = HashSet::new();
        for (gi, g) in extra_graphs.iter().enumerate() {
            if matches!(g.name(), "Prio" | "Dep" | "Eli") || !names.insert(g.name()) {
                issues.push(Issue::new(
                    format!("extra_graphs[{gi}].name"),
                    format!("graph name `{}` is reserved or duplicated", g.name()),
                ));
            }
            for (ei, (b, a, _)) in g.edges().enumerate() {
                for (field, id) in [("before", b), ("after", a)] {
                    if !known.contains(id) {
                        issues.push(Issue::new(
                            format!("extra_graphs[{gi}].edges[{ei}].{field}"),
                            format!("unknown requirement `{id}`"),
                        ));
                    }
                }
            }
        }
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let prio = build_prio_graph(&requirements)?;
        let dep = build_dep_graph(&dependencies, requirements.iter().map(|r| &r.id))?;
        Ok(Self {
            requirements,
            dependencies,
            gold_standard,
            extra_graphs,
            prio,
            dep,
        })
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn dependencies(&self) -> &[Dependency] {
        &self.dependencies
    }

    pub fn gold_standard(&self) -> Option<&Ranking> {
        self.gold_standard.as_ref()
    }

    pub fn extra_graphs(&self) -> &[ConstraintGraph] {
        &self.extra_graphs
    }

    pub fn ids(&self) -> impl Iterator<Item = &RequirementId> + '_ {
        self.requirements.iter().map(|r| &r.id)
    }

    pub fn requirement(&self, id: &RequirementId) -> Option<&Requirement> {
        self.requirements.iter().find(|r| &r.id == id)
    }

    pub fn prio_graph(&self) -> &ConstraintGraph {
        &self.prio
    }

    pub fn dep_graph(&self) -> &ConstraintGraph {
        &self.dep
    }

    /// Prio, Dep, then any extra graphs.
    pub fn source_graphs(&self) -> Vec<&ConstraintGraph> {
        let mut graphs = vec![&self.prio, &self.dep];
        graphs.extend(self.extra_graphs.iter());
        graphs
    }
}
