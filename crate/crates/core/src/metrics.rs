//! Ranking quality measures against a gold standard or a constraint set.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{closure_of_edges, ConstraintGraph, Ranking, RequirementId};

/// Number of pairs ordered one way in `a` and the other way in `b`
/// (the Kendall inversion count).
pub fn disagreement(a: &Ranking, b: &Ranking) -> Result<usize> {
    a.check_universe(b.order())?;
    let pos = b.positions();
    let mapped: Vec<usize> = a.order().iter().map(|id| pos[id]).collect();
    let mut count = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Pairs of the transitive closure of each graph that `ranking` reverses,
/// summed over graphs: a pair implied by two graphs counts twice.
pub fn disagreement_with_graphs<'a>(
    graphs: impl IntoIterator<Item = &'a ConstraintGraph>,
    ranking: &Ranking,
) -> Result<usize> {
    let mut total = 0;
    for g in graphs {
        let closure = closure_of_edges(g.edges().map(|(b, a, _)| (b, a)));
        total += count_reversed(&closure, ranking)?;
    }
    Ok(total)
}

/// Like [`disagreement_with_graphs`] but over the union of closures, so each
/// ordered pair counts at most once.
pub fn disagreement_with_graph_union<'a>(
    graphs: impl IntoIterator<Item = &'a ConstraintGraph>,
    ranking: &Ranking,
) -> Result<usize> {
    let mut union = BTreeSet::new();
    for g in graphs {
        union.extend(closure_of_edges(g.edges().map(|(b, a, _)| (b, a))));
    }
    count_reversed(&union, ranking)
}

fn count_reversed(pairs: &BTreeSet<(RequirementId, RequirementId)>, ranking: &Ranking) -> Result<usize> {
    let pos = ranking.positions();
    let mut count = 0;
    for (x, y) in pairs {
        if x == y {
            continue;
        }
        let (Some(px), Some(py)) = (pos.get(x), pos.get(y)) else {
            let missing = if pos.contains_key(x) { y } else { x };
            return Err(Error::UniverseMismatch(format!("`{missing}` is not ranked")));
        };
        if py < px {
            count += 1;
        }
    }
    Ok(count)
}

/// Mean absolute displacement of each requirement relative to `gold`.
pub fn average_distance(ranking: &Ranking, gold: &Ranking) -> Result<f64> {
    ranking.check_universe(gold.order())?;
    if ranking.is_empty() {
        return Err(Error::UniverseMismatch("empty ranking".into()));
    }
    let gold_pos = gold.positions();
    let total: usize = ranking
        .order()
        .iter()
        .enumerate()
        .map(|(i, id)| (i + 1).abs_diff(gold_pos[id]))
        .sum();
    Ok(total as f64 / ranking.len() as f64)
}
