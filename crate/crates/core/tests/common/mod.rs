#![allow(dead_code)]

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reqprio_core::model::{Cost, Ranking, RequirementId, Weight};
use reqprio_core::solver::{SoftEdge, SolverInstance};

/// Every permutation of `items`, in no particular order.
pub fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    fn go<T: Clone>(k: usize, a: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            go(k - 1, a, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut a = items.to_vec();
    let mut out = Vec::new();
    go(a.len(), &mut a, &mut out);
    out
}

pub fn ranking_cost(order: &[RequirementId], soft: &[SoftEdge]) -> Ratio<u64> {
    let pos = |id: &RequirementId| order.iter().position(|x| x == id).unwrap();
    soft.iter()
        .filter(|e| pos(&e.before) > pos(&e.after))
        .fold(Ratio::from_integer(0), |acc, e| acc + e.weight.ratio())
}

pub fn respects_hard(order: &[RequirementId], hard: &[(RequirementId, RequirementId)]) -> bool {
    let pos = |id: &RequirementId| order.iter().position(|x| x == id).unwrap();
    hard.iter().all(|(b, a)| pos(b) < pos(a))
}

/// Exhaustive optimum: minimum cost and the sorted list of all optimal orders.
pub fn brute_force(instance: &SolverInstance) -> Option<(Cost, Vec<Ranking>)> {
    let mut best: Option<Ratio<u64>> = None;
    let mut optima: Vec<Vec<RequirementId>> = Vec::new();
    for perm in permutations(instance.requirement_ids()) {
        if !respects_hard(&perm, instance.hard_edges()) {
            continue;
        }
        let c = ranking_cost(&perm, instance.soft_edges());
        match best {
            Some(b) if c > b => {}
            Some(b) if c == b => optima.push(perm),
            _ => {
                best = Some(c);
                optima = vec![perm];
            }
        }
    }
    optima.sort();
    best.map(|b| (Cost(b), optima.into_iter().map(|o| Ranking::new(o).unwrap()).collect()))
}

pub fn ids(n: usize) -> Vec<RequirementId> {
    (0..n).map(|i| RequirementId::from(format!("R{i}"))).collect()
}

/// Random instance: each ordered pair gets an edge with probability
/// `density`, weight 1..=max_weight; optionally a few hard edges along a
/// hidden order so the instance stays feasible.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, density: f64, max_weight: u64, hard: bool) -> SolverInstance {
    let names = ids(n);
    let mut soft = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                soft.push(SoftEdge {
                    before: names[a].clone(),
                    after: names[b].clone(),
                    weight: Weight::integer(rng.random_range(1..=max_weight)).unwrap(),
                });
            }
        }
    }
    let mut hard_edges = Vec::new();
    if hard {
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.08) {
                    hard_edges.push((names[a].clone(), names[b].clone()));
                }
            }
        }
    }
    SolverInstance::new(names, soft, hard_edges).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
