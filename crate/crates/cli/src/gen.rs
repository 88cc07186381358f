//! Seeded demo-instance generators. Values are multiples of small powers of
//! two so planted targets are reachable with a zero error tolerance: sums of
//! such values are exact in f64 no matter the summation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dyadic(rng: &mut ChaCha8Rng, hi: u32, denom: f64) -> f64 {
    rng.gen_range(0..hi) as f64 / denom
}

pub struct GeneratedSubsetSum {
    pub superset: Vec<Vec<f64>>,
    pub len: Option<usize>,
    pub target: Vec<f64>,
    pub me: Vec<f64>,
}

/// Rows of dyadic uniforms with a planted subset. When `len` is given the
/// plant has that size; otherwise a size is drawn and left unset so 1-D
/// callers can exercise the variable-size path.
pub fn subset_sum(seed: u64, n_elems: usize, dims: usize, len: Option<usize>) -> GeneratedSubsetSum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let superset: Vec<Vec<f64>> = (0..n_elems)
        .map(|_| (0..dims).map(|_| dyadic(&mut rng, 160_000, 16.0)).collect())
        .collect();
    let plant = len.unwrap_or_else(|| rng.gen_range(1..=n_elems.div_ceil(3).max(1)));
    let plant = plant.min(n_elems);
    let mut picks: Vec<usize> = (0..n_elems).collect();
    picks.shuffle(&mut rng);
    let target: Vec<f64> = (0..dims)
        .map(|t| picks[..plant].iter().map(|&i| superset[i][t]).sum())
        .collect();
    GeneratedSubsetSum {
        superset,
        len: len.or(if dims > 1 { Some(plant) } else { None }),
        target,
        me: vec![0.0; dims],
    }
}

pub struct GeneratedMultiset {
    pub supersets: Vec<Vec<f64>>,
    pub lens: Vec<usize>,
    pub target: f64,
}

/// Several 1-D supersets with a planted pick of `lens[h]` elements in each.
pub fn multiset(seed: u64, per_superset: usize, parts: usize) -> GeneratedMultiset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut supersets = Vec::with_capacity(parts);
    let mut lens = Vec::with_capacity(parts);
    let mut target = 0.0;
    for _ in 0..parts {
        let values: Vec<f64> = (0..per_superset)
            .map(|_| dyadic(&mut rng, 160_000, 16.0))
            .collect();
        let k = rng.gen_range(1..=per_superset.div_ceil(2));
        let mut picks: Vec<usize> = (0..per_superset).collect();
        picks.shuffle(&mut rng);
        target += picks[..k].iter().map(|&i| values[i]).sum::<f64>();
        supersets.push(values);
        lens.push(k);
    }
    GeneratedMultiset {
        supersets,
        lens,
        target,
    }
}

pub struct GeneratedKnapsack {
    pub costs: Vec<Vec<f64>>,
    pub profits: Vec<f64>,
    pub budgets: Vec<f64>,
}

/// Nonnegative dyadic costs with budgets near 40% of each column total, so
/// typical instances are feasible but not trivially so.
pub fn knapsack(seed: u64, items: usize, dims: usize) -> GeneratedKnapsack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<Vec<f64>> = (0..items)
        .map(|_| (0..dims).map(|_| dyadic(&mut rng, 64, 4.0)).collect())
        .collect();
    let profits: Vec<f64> = (0..items)
        .map(|_| dyadic(&mut rng, 255, 8.0) + 0.125)
        .collect();
    let budgets: Vec<f64> = (0..dims)
        .map(|t| {
            let total: f64 = costs.iter().map(|r| r[t]).sum();
            (total * 0.4).floor()
        })
        .collect();
    GeneratedKnapsack {
        costs,
        profits,
        budgets,
    }
}

pub struct GeneratedGap {
    pub cost: Vec<Vec<f64>>,
    pub profit: Vec<Vec<f64>>,
    pub budgets: Vec<f64>,
}

/// Integer costs and profits; budgets sized so most instances admit a full
/// assignment.
pub fn gap(seed: u64, tasks: usize, agents: usize) -> GeneratedGap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost: Vec<Vec<f64>> = (0..tasks)
        .map(|_| (0..agents).map(|_| rng.gen_range(1..40) as f64).collect())
        .collect();
    let profit: Vec<Vec<f64>> = (0..tasks)
        .map(|_| (0..agents).map(|_| rng.gen_range(10..500) as f64).collect())
        .collect();
    let per_agent = (tasks as f64 / agents as f64).ceil();
    let budgets: Vec<f64> = (0..agents)
        .map(|_| per_agent * 24.0 + rng.gen_range(0..20) as f64)
        .collect();
    GeneratedGap {
        cost,
        profit,
        budgets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_reproduces_the_instance() {
        let a = subset_sum(9, 20, 3, Some(4));
        let b = subset_sum(9, 20, 3, Some(4));
        assert_eq!(a.superset, b.superset);
        assert_eq!(a.target, b.target);
        assert_eq!(a.len, b.len);
        assert_ne!(a.superset, subset_sum(10, 20, 3, Some(4)).superset);
    }

    #[test]
    fn planted_target_is_exactly_achievable() {
        // Dyadic values: the planted sum must be reproducible from some
        // subset of the emitted superset with zero tolerance.
        let g = subset_sum(3, 10, 1, Some(3));
        let values: Vec<f64> = g.superset.iter().map(|r| r[0]).collect();
        let hits = subsetsum::oracle::brute_1d(&values, 3, g.target[0], g.target[0]).unwrap();
        assert!(!hits.is_empty());
    }

    #[test]
    fn knapsack_budgets_are_column_fractions() {
        let g = knapsack(5, 12, 2);
        for (t, b) in g.budgets.iter().enumerate() {
            let total: f64 = g.costs.iter().map(|r| r[t]).sum();
            assert!(*b <= total);
            assert!(*b >= 0.0);
        }
        assert!(g.profits.iter().all(|p| *p > 0.0));
    }
}
