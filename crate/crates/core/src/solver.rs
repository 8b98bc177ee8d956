//! Exact minimum-violation ordering under soft and hard precedence edges.
//!
//! Search extends a prefix one position at a time. Placing requirement `j`
//! while the set `R` is still unplaced costs every soft edge `k -> j` with
//! `k` in `R`, which depends only on `R` and `j`. That makes the placed set a
//! sufficient search state: a transposition table keyed by the remaining
//! set prunes every prefix that reaches it no cheaper than before. The bound
//! on the unplaced part is the sum over its pairs of the cheaper of the two
//! relative orders.
//!
//! Optima are collected in a second pass at the proven cost, visiting
//! children in canonical id order so solutions come out lexicographically
//! sorted and a cap keeps the smallest ones.

use std::collections::HashMap;
use std::time::Instant;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintGraph, Cost, EdgeWeight, Ranking, RequirementId, Weight};

pub const DEFAULT_SOLUTION_CAP: usize = 50;

/// Largest instance the bitset search accepts.
pub const MAX_REQUIREMENTS: usize = 64;

const TABLE_LIMIT: usize = 1 << 21;
const DEADLINE_CHECK_INTERVAL: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftEdge {
    pub before: RequirementId,
    pub after: RequirementId,
    pub weight: Weight,
}

/// Flattened constraints for one solve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverInstance {
    requirement_ids: Vec<RequirementId>,
    soft_edges: Vec<SoftEdge>,
    hard_edges: Vec<(RequirementId, RequirementId)>,
}

impl SolverInstance {
    pub fn new(
        requirement_ids: impl IntoIterator<Item = RequirementId>,
        soft_edges: Vec<SoftEdge>,
        hard_edges: Vec<(RequirementId, RequirementId)>,
    ) -> Result<Self> {
        let mut ids: Vec<RequirementId> = requirement_ids.into_iter().collect();
        ids.sort();
        let before = ids.len();
        ids.dedup();
        if ids.len() != before {
            return Err(Error::UniverseMismatch("duplicate requirement ids".into()));
        }
        for (b, a) in soft_edges
            .iter()
            .map(|e| (&e.before, &e.after))
            .chain(hard_edges.iter().map(|(b, a)| (b, a)))
        {
            for id in [b, a] {
                if ids.binary_search(id).is_err() {
                    return Err(Error::UnknownRequirement(id.clone()));
                }
            }
            if b == a {
                return Err(Error::SelfLoop(b.clone()));
            }
        }
        Ok(Self {
            requirement_ids: ids,
            soft_edges,
            hard_edges,
        })
    }

    /// Flattens several graphs. The same soft pair in two graphs counts twice.
    pub fn from_graphs<'a>(
        requirement_ids: impl IntoIterator<Item = RequirementId>,
        graphs: impl IntoIterator<Item = &'a ConstraintGraph>,
    ) -> Result<Self> {
        let mut soft = Vec::new();
        let mut hard = Vec::new();
        for g in graphs {
            for (b, a, w) in g.edges() {
                match w {
                    EdgeWeight::Soft(weight) => soft.push(SoftEdge {
                        before: b.clone(),
                        after: a.clone(),
                        weight,
                    }),
                    EdgeWeight::Hard => hard.push((b.clone(), a.clone())),
                }
            }
        }
        Self::new(requirement_ids, soft, hard)
    }

    /// Ids in canonical (lexicographic) order.
    pub fn requirement_ids(&self) -> &[RequirementId] {
        &self.requirement_ids
    }

    pub fn soft_edges(&self) -> &[SoftEdge] {
        &self.soft_edges
    }

    pub fn hard_edges(&self) -> &[(RequirementId, RequirementId)] {
        &self.hard_edges
    }

    pub fn with_soft_edge(mut self, edge: SoftEdge) -> Result<Self> {
        self.soft_edges.push(edge);
        Self::new(self.requirement_ids, self.soft_edges, self.hard_edges)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverResult {
    pub cost: Cost,
    /// Distinct optimal rankings in lexicographic order.
    pub solutions: Vec<Ranking>,
    /// Every optimal ranking is listed.
    pub exhausted: bool,
    /// `cost` is proven minimal. False only when a deadline cut the search.
    #[serde(default = "yes")]
    pub optimal: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub solution_cap: usize,
    pub deadline: Option<Instant>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            solution_cap: DEFAULT_SOLUTION_CAP,
            deadline: None,
        }
    }
}

/// Total weight of soft edges whose `before` end sits after its `after` end.
pub fn violation_cost(ranking: &Ranking, instance: &SolverInstance) -> Result<Cost> {
    ranking.check_universe(instance.requirement_ids())?;
    let pos = ranking.positions();
    let mut total = Ratio::<u64>::from_integer(0);
    for e in &instance.soft_edges {
        if pos[&e.before] > pos[&e.after] {
            total = checked_add(total, e.weight.ratio())?;
        }
    }
    Ok(Cost(total))
}

fn checked_add(a: Ratio<u64>, b: Ratio<u64>) -> Result<Ratio<u64>> {
    let denom = a.denom().lcm(b.denom());
    let an = a.numer().checked_mul(denom / a.denom()).ok_or(Error::Overflow)?;
    let bn = b.numer().checked_mul(denom / b.denom()).ok_or(Error::Overflow)?;
    Ok(Ratio::new(an.checked_add(bn).ok_or(Error::Overflow)?, denom))
}

pub fn solve(instance: &SolverInstance, solution_cap: usize) -> Result<SolverResult> {
    solve_with(
        instance,
        &SolveOptions {
            solution_cap,
            deadline: None,
        },
    )
}

pub fn solve_with(instance: &SolverInstance, options: &SolveOptions) -> Result<SolverResult> {
    let n = instance.requirement_ids.len();
    if n == 0 {
        return Err(Error::UniverseMismatch("instance has no requirements".into()));
    }
    if n > MAX_REQUIREMENTS {
        return Err(Error::TooLarge(format!(
            "{n} requirements, at most {MAX_REQUIREMENTS} supported"
        )));
    }
    if options.solution_cap == 0 {
        return Err(Error::State("solution cap must be positive".into()));
    }
    if let Some(cycle) = find_hard_cycle(instance) {
        return Err(Error::Infeasible { cycle });
    }
    let problem = Compiled::new(instance)?;
    let mut search = Search::new(&problem, options.deadline);

    let (upper, incumbent) = problem.heuristic();
    let (best_cost, best_order, proven) = search.minimize(upper, incumbent);

    let (solutions, exhausted) = if proven {
        search.enumerate(best_cost, options.solution_cap)
    } else {
        (Vec::new(), false)
    };
    let truncated_by_deadline = search.timed_out;
    let mut solutions = solutions;
    if solutions.is_empty() {
        solutions.push(best_order);
    }

    let to_ranking = |order: &[usize]| {
        Ranking::from_vec_unchecked(order.iter().map(|&i| instance.requirement_ids[i].clone()).collect())
    };
    Ok(SolverResult {
        cost: Cost(Ratio::new(best_cost, problem.scale)),
        solutions: solutions.iter().map(|s| to_ranking(s)).collect(),
        exhausted: exhausted && !truncated_by_deadline,
        optimal: proven,
    })
}

/// Returns one cycle of hard edges, if any.
pub fn find_hard_cycle(instance: &SolverInstance) -> Option<Vec<RequirementId>> {
    let ids = &instance.requirement_ids;
    let index = |id: &RequirementId| ids.binary_search(id).ok();
    let mut adj = vec![Vec::new(); ids.len()];
    for (b, a) in &instance.hard_edges {
        if let (Some(b), Some(a)) = (index(b), index(a)) {
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; ids.len()];
    let mut parent = vec![usize::MAX; ids.len()];
    for root in 0..ids.len() {
        if color[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        color[root] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < adj[node].len() {
                let child = adj[node][*next];
                *next += 1;
                match color[child] {
                    0 => {
                        color[child] = 1;
                        parent[child] = node;
                        stack.push((child, 0));
                    }
                    1 => {
                        let mut cycle = vec![node];
                        let mut cur = node;
                        while cur != child {
                            cur = parent[cur];
                            cycle.push(cur);
                        }
                        cycle.reverse();
                        return Some(cycle.into_iter().map(|i| ids[i].clone()).collect());
                    }
                    _ => {}
                }
            } else {
                color[node] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Integer-scaled weight matrices.
struct Compiled {
    n: usize,
    /// `late[k * n + j]`: weight violated when `j` is placed before `k`
    /// (the soft weight of `k -> j`).
    late: Vec<u64>,
    /// Cheapest way to order each pair, respecting hard reachability.
    pair_min: Vec<u64>,
    /// Hard predecessors of each node.
    preds: Vec<u64>,
    scale: u64,
}

impl Compiled {
    fn new(instance: &SolverInstance) -> Result<Self> {
        let n = instance.requirement_ids.len();
        let idx = |id: &RequirementId| instance.requirement_ids.binary_search(id).expect("validated");

        let scale = instance
            .soft_edges
            .iter()
            .try_fold(1u64, |acc, e| {
                let d = e.weight.denom();
                let l = acc / acc.gcd(&d);
                l.checked_mul(d)
            })
            .ok_or(Error::Overflow)?;

        let mut late = vec![0u64; n * n];
        let mut total = 0u64;
        for e in &instance.soft_edges {
            let w = e
                .weight
                .numer()
                .checked_mul(scale / e.weight.denom())
                .ok_or(Error::Overflow)?;
            total = total.checked_add(w).ok_or(Error::Overflow)?;
            let cell = &mut late[idx(&e.before) * n + idx(&e.after)];
            *cell += w;
        }

        let mut preds = vec![0u64; n];
        for (b, a) in &instance.hard_edges {
            preds[idx(a)] |= 1 << idx(b);
        }
        // reach[i]: everything that must come after i
        let mut reach = vec![0u64; n];
        for (b, a) in &instance.hard_edges {
            reach[idx(b)] |= 1 << idx(a);
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = reach[i];
                let mut bits = reach[i];
                while bits != 0 {
                    let k = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    acc |= reach[k];
                }
                if acc != reach[i] {
                    reach[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut pair_min = vec![0u64; n * n];
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                // a before b violates b -> a; b before a violates a -> b
                let a_first = late[b * n + a];
                let b_first = late[a * n + b];
                pair_min[a * n + b] = if reach[a] >> b & 1 == 1 {
                    a_first
                } else if reach[b] >> a & 1 == 1 {
                    b_first
                } else {
                    a_first.min(b_first)
                };
            }
        }

        Ok(Self {
            n,
            late,
            pair_min,
            preds,
            scale,
        })
    }

    fn full(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Cost of placing `j` next while `remaining` (which contains `j`) is unplaced.
    fn placement_cost(&self, remaining: u64, j: usize) -> u64 {
        let mut bits = remaining & !(1 << j);
        let mut sum = 0;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum += self.late[k * self.n + j];
        }
        sum
    }

    /// Bound contribution of `j` against the rest of `remaining`.
    fn bound_share(&self, remaining: u64, j: usize) -> u64 {
        let mut bits = remaining & !(1 << j);
        let mut sum = 0;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum += self.pair_min[j * self.n + k];
        }
        sum
    }

    fn bound(&self, remaining: u64) -> u64 {
        let mut sum = 0;
        let mut bits = remaining;
        while bits != 0 {
            let a = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            sum += self.bound_share(bits, a);
        }
        sum
    }

    fn order_cost(&self, order: &[usize]) -> u64 {
        let mut remaining = self.full();
        let mut sum = 0;
        for &j in order {
            sum += self.placement_cost(remaining, j);
            remaining &= !(1 << j);
        }
        sum
    }

    fn can_place(&self, remaining: u64, j: usize) -> bool {
        self.preds[j] & remaining == 0
    }

    /// Greedy construction followed by feasible adjacent swaps and insertions.
    fn heuristic(&self) -> (u64, Vec<usize>) {
        let n = self.n;
        let mut remaining = self.full();
        let mut order = Vec::with_capacity(n);
        while remaining != 0 {
            let mut best: Option<(i128, usize)> = None;
            let mut bits = remaining;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if !self.can_place(remaining, j) {
                    continue;
                }
                // prefer nodes that are cheap now and expensive to defer
                let now = self.placement_cost(remaining, j) as i128;
                let later: i128 = {
                    let mut s = 0i128;
                    let mut b2 = remaining & !(1 << j);
                    while b2 != 0 {
                        let k = b2.trailing_zeros() as usize;
                        b2 &= b2 - 1;
                        s += self.late[j * n + k] as i128;
                    }
                    s
                };
                let score = now - later;
                if best.is_none_or(|(s, _)| score < s) {
                    best = Some((score, j));
                }
            }
            let (_, j) = best.expect("hard edges are acyclic");
            order.push(j);
            remaining &= !(1 << j);
        }

        let mut cost = self.order_cost(&order);
        loop {
            let mut improved = false;
            for from in 0..n {
                for to in 0..n {
                    if from == to {
                        continue;
                    }
                    let mut candidate = order.clone();
                    let item = candidate.remove(from);
                    candidate.insert(to, item);
                    if !self.feasible(&candidate) {
                        continue;
                    }
                    let c = self.order_cost(&candidate);
                    if c < cost {
                        cost = c;
                        order = candidate;
                        improved = true;
                    }
                }
            }
            if !improved || n > 40 {
                break;
            }
        }
        (cost, order)
    }

    fn feasible(&self, order: &[usize]) -> bool {
        let mut remaining = self.full();
        for &j in order {
            if !self.can_place(remaining, j) {
                return false;
            }
            remaining &= !(1 << j);
        }
        true
    }
}

struct Search<'a> {
    problem: &'a Compiled,
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    prefix: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a Compiled, deadline: Option<Instant>) -> Self {
        Self {
            problem,
            deadline,
            nodes: 0,
            timed_out: false,
            prefix: Vec::with_capacity(problem.n),
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.timed_out {
            return true;
        }
        if self.nodes.is_multiple_of(DEADLINE_CHECK_INTERVAL) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    /// Returns (cost, an optimal order, proven).
    fn minimize(&mut self, upper: u64, incumbent: Vec<usize>) -> (u64, Vec<usize>, bool) {
        let full = self.problem.full();
        let mut state = MinState {
            best: upper,
            best_order: incumbent,
            seen: HashMap::new(),
        };
        let h = self.problem.bound(full);
        if h < state.best {
            self.descend_min(full, 0, h, &mut state);
        }
        let proven = !self.timed_out;
        (state.best, state.best_order, proven)
    }

    fn descend_min(&mut self, remaining: u64, g: u64, h: u64, state: &mut MinState) {
        if self.tick() {
            return;
        }
        if remaining == 0 {
            if g < state.best {
                state.best = g;
                state.best_order = self.prefix.clone();
            }
            return;
        }
        match state.seen.get_mut(&remaining) {
            Some(prev) if *prev <= g => return,
            Some(prev) => *prev = g,
            None => {
                if state.seen.len() < TABLE_LIMIT {
                    state.seen.insert(remaining, g);
                }
            }
        }
        let p = self.problem;
        let mut children: Vec<(u64, u64, usize)> = Vec::new();
        let mut bits = remaining;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if !p.can_place(remaining, j) {
                continue;
            }
            let g2 = g + p.placement_cost(remaining, j);
            let h2 = h - p.bound_share(remaining, j);
            if g2 + h2 < state.best {
                children.push((g2 + h2, g2, j));
            }
        }
        children.sort_unstable();
        for (f, g2, j) in children {
            if f >= state.best {
                break;
            }
            let h2 = f - g2;
            self.prefix.push(j);
            self.descend_min(remaining & !(1 << j), g2, h2, state);
            self.prefix.pop();
            if self.timed_out {
                return;
            }
        }
    }

    /// Collects up to `cap` optimal orders; the flag is false when more exist.
    fn enumerate(&mut self, cost: u64, cap: usize) -> (Vec<Vec<usize>>, bool) {
        let full = self.problem.full();
        let mut state = EnumState {
            cost,
            limit: cap.saturating_add(1),
            found: Vec::new(),
            dead: HashMap::new(),
        };
        let h = self.problem.bound(full);
        self.prefix.clear();
        if h <= cost {
            self.descend_enum(full, 0, h, &mut state);
        }
        let mut found = state.found;
        let exhausted = found.len() <= cap;
        found.truncate(cap);
        (found, exhausted)
    }

    /// Returns true if at least one optimum lies below this prefix.
    fn descend_enum(&mut self, remaining: u64, g: u64, h: u64, state: &mut EnumState) -> bool {
        if self.tick() {
            return true;
        }
        if remaining == 0 {
            debug_assert_eq!(g, state.cost);
            state.found.push(self.prefix.clone());
            return true;
        }
        if let Some(&failed_at) = state.dead.get(&remaining) {
            if g >= failed_at {
                return false;
            }
        }
        let p = self.problem;
        let mut any = false;
        let mut bits = remaining;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if !p.can_place(remaining, j) {
                continue;
            }
            let g2 = g + p.placement_cost(remaining, j);
            let h2 = h - p.bound_share(remaining, j);
            if g2 + h2 > state.cost {
                continue;
            }
            self.prefix.push(j);
            any |= self.descend_enum(remaining & !(1 << j), g2, h2, state);
            self.prefix.pop();
            if state.found.len() >= state.limit || self.timed_out {
                return true;
            }
        }
        if !any && state.dead.len() < TABLE_LIMIT {
            let slot = state.dead.entry(remaining).or_insert(g);
            *slot = (*slot).min(g);
        }
        any
    }
}

struct MinState {
    best: u64,
    best_order: Vec<usize>,
    /// Cheapest prefix cost seen for each remaining set.
    seen: HashMap<u64, u64>,
}

struct EnumState {
    cost: u64,
    limit: usize,
    found: Vec<Vec<usize>>,
    /// Smallest prefix cost known to lead to no optimum, per remaining set.
    dead: HashMap<u64, u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> RequirementId {
        RequirementId::from(s)
    }

    fn soft(b: &str, a: &str, w: u64) -> SoftEdge {
        SoftEdge {
            before: id(b),
            after: id(a),
            weight: Weight::integer(w).unwrap(),
        }
    }

    fn ids(list: &[&str]) -> Vec<RequirementId> {
        list.iter().map(|s| id(s)).collect()
    }

    #[test]
    fn single_requirement() {
        let inst = SolverInstance::new(ids(&["R1"]), vec![], vec![]).unwrap();
        let res = solve(&inst, 50).unwrap();
        assert_eq!(res.cost, Cost::zero());
        assert_eq!(res.solutions, vec![Ranking::from_strs(&["R1"]).unwrap()]);
        assert!(res.exhausted);
    }

    #[test]
    fn no_edges_means_zero_cost() {
        let inst = SolverInstance::new(ids(&["A", "B", "C"]), vec![], vec![]).unwrap();
        let r = Ranking::from_strs(&["C", "A", "B"]).unwrap();
        assert_eq!(violation_cost(&r, &inst).unwrap(), Cost::zero());
        let res = solve(&inst, 50).unwrap();
        assert_eq!(res.solutions.len(), 6);
        assert!(res.exhausted);
        let res = solve(&inst, 4).unwrap();
        assert_eq!(res.solutions.len(), 4);
        assert!(!res.exhausted);
        assert_eq!(res.solutions[0], Ranking::from_strs(&["A", "B", "C"]).unwrap());
        assert_eq!(res.solutions[3], Ranking::from_strs(&["B", "C", "A"]).unwrap());
    }

    #[test]
    fn hard_edges_are_respected() {
        let inst = SolverInstance::new(
            ids(&["A", "B", "C"]),
            vec![soft("A", "B", 5), soft("C", "A", 1)],
            vec![(id("B"), id("A"))],
        )
        .unwrap();
        let res = solve(&inst, 50).unwrap();
        assert_eq!(res.cost, Cost::integer(5));
        for s in &res.solutions {
            assert!(s.position(&id("B")) < s.position(&id("A")));
        }
    }

    #[test]
    fn cyclic_hard_edges_are_infeasible() {
        let inst = SolverInstance::new(
            ids(&["A", "B", "C"]),
            vec![],
            vec![(id("A"), id("B")), (id("B"), id("C")), (id("C"), id("A"))],
        )
        .unwrap();
        match solve(&inst, 50) {
            Err(Error::Infeasible { cycle }) => {
                assert_eq!(cycle.len(), 3);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn fractional_weights_are_exact() {
        let third = Weight::new(1, 3).unwrap();
        let inst = SolverInstance::new(
            ids(&["A", "B"]),
            vec![
                SoftEdge {
                    before: id("A"),
                    after: id("B"),
                    weight: third,
                },
                SoftEdge {
                    before: id("B"),
                    after: id("A"),
                    weight: Weight::new(1, 2).unwrap(),
                },
            ],
            vec![],
        )
        .unwrap();
        let res = solve(&inst, 50).unwrap();
        assert_eq!(res.cost, Cost(Ratio::new(1, 3)));
        assert_eq!(res.solutions, vec![Ranking::from_strs(&["B", "A"]).unwrap()]);
    }

    #[test]
    fn mismatched_ranking_is_rejected() {
        let inst = SolverInstance::new(ids(&["A", "B"]), vec![], vec![]).unwrap();
        let r = Ranking::from_strs(&["A", "C"]).unwrap();
        assert!(matches!(violation_cost(&r, &inst), Err(Error::UniverseMismatch(_))));
    }

    #[test]
    fn unknown_edge_endpoint_is_rejected() {
        assert!(matches!(
            SolverInstance::new(ids(&["A"]), vec![soft("A", "Z", 1)], vec![]),
            Err(Error::UnknownRequirement(_))
        ));
    }

    #[test]
    fn expired_deadline_still_returns_a_ranking() {
        let names: Vec<String> = (0..30).map(|i| format!("N{i:02}")).collect();
        let mut edges = Vec::new();
        for i in 0..30 {
            for j in 0..30 {
                if (i * 7 + j * 3) % 5 == 0 && i != j {
                    edges.push(soft(&names[i], &names[j], 1));
                }
            }
        }
        let inst = SolverInstance::new(names.iter().map(|s| id(s)), edges, vec![]).unwrap();
        let res = solve_with(
            &inst,
            &SolveOptions {
                solution_cap: 10,
                deadline: Some(Instant::now()),
            },
        )
        .unwrap();
        assert!(!res.solutions.is_empty());
        let actual = violation_cost(&res.solutions[0], &inst).unwrap();
        assert_eq!(actual, res.cost);
    }
}
