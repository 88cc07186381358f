//! Brute-force reference solvers. Each one enumerates its search space
//! directly and re-sums candidate subsets from scratch, sharing no logic with
//! the mining engines they cross-check. All are exponential and guarded.

use crate::error::{Error, Result};

/// Hard cap on enumerated candidates.
const GUARD: u128 = 10_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if r > GUARD {
            return r;
        }
    }
    r
}

/// Calls `visit` with every size-`k` index combination of `0..n`, in
/// lexicographic order. `visit` returns false to stop early.
fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[u32]) -> bool) {
    debug_assert!(k >= 1 && k <= n);
    let mut idx: Vec<u32> = (0..k as u32).collect();
    loop {
        if !visit(&idx) {
            return;
        }
        // Advance: rightmost position that can still move up.
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if idx[j] < (n - k + j) as u32 {
                break;
            }
        }
        idx[j] += 1;
        for t in j + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Every size-`n` subset of `values` (positions into the given order) whose
/// sum lies in `[min, max]`, in lexicographic order.
pub fn brute_1d(values: &[f64], n: usize, min: f64, max: f64) -> Result<Vec<Vec<u32>>> {
    if n == 0 || n > values.len() {
        return Err(Error::BadSubsetSize {
            n,
            len: values.len(),
        });
    }
    let count = binomial(values.len(), n);
    if count > GUARD {
        return Err(Error::OracleGuard(count));
    }
    let mut out = Vec::new();
    for_each_combination(values.len(), n, |idx| {
        let mut s = 0.0;
        for &i in idx {
            s += values[i as usize];
        }
        if min <= s && s <= max {
            out.push(idx.to_vec());
        }
        true
    });
    Ok(out)
}

/// Every size-`n` subset of the rows whose column sums lie in
/// `[min[t], max[t]]` for every `t`, in lexicographic order.
pub fn brute_md(rows: &[Vec<f64>], n: usize, min: &[f64], max: &[f64]) -> Result<Vec<Vec<u32>>> {
    if n == 0 || n > rows.len() {
        return Err(Error::BadSubsetSize { n, len: rows.len() });
    }
    let d = min.len();
    if max.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: max.len(),
        });
    }
    let count = binomial(rows.len(), n);
    if count > GUARD {
        return Err(Error::OracleGuard(count));
    }
    let mut sums = vec![0.0; d];
    let mut out = Vec::new();
    for_each_combination(rows.len(), n, |idx| {
        sums.fill(0.0);
        for &i in idx {
            for (s, v) in sums.iter_mut().zip(&rows[i as usize]) {
                *s += v;
            }
        }
        let ok = (0..d).all(|t| min[t] <= sums[t] && sums[t] <= max[t]);
        if ok {
            out.push(idx.to_vec());
        }
        true
    });
    Ok(out)
}

/// Profit-maximal feasible item set. `size` restricts to exactly that many
/// items; `None` tries every size `1..=N`. Ties keep the first subset in
/// (size ascending, lexicographic) order. `None` result means no feasible
/// nonempty subset exists.
pub fn brute_knapsack(
    costs: &[Vec<f64>],
    profits: &[f64],
    budgets: &[f64],
    size: Option<usize>,
) -> Result<Option<(f64, Vec<u32>)>> {
    let n_items = costs.len();
    if n_items == 0 || profits.len() != n_items {
        return Err(Error::BadInstance("costs/profits length mismatch".into()));
    }
    let d = budgets.len();
    if costs.iter().any(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: costs[0].len(),
        });
    }
    let sizes: Vec<usize> = match size {
        Some(k) => {
            if k == 0 || k > n_items {
                return Err(Error::BadSubsetSize { n: k, len: n_items });
            }
            vec![k]
        }
        None => (1..=n_items).collect(),
    };
    let total: u128 = sizes.iter().map(|&k| binomial(n_items, k)).sum();
    if total > GUARD {
        return Err(Error::OracleGuard(total));
    }
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut loads = vec![0.0; d];
    for &k in &sizes {
        for_each_combination(n_items, k, |idx| {
            loads.fill(0.0);
            for &i in idx {
                for (s, c) in loads.iter_mut().zip(&costs[i as usize]) {
                    *s += c;
                }
            }
            if loads.iter().zip(budgets).all(|(s, b)| s <= b) {
                let p: f64 = idx.iter().map(|&i| profits[i as usize]).sum();
                if best.as_ref().map_or(true, |(bp, _)| p > *bp) {
                    best = Some((p, idx.to_vec()));
                }
            }
            true
        });
    }
    Ok(best)
}

/// Profit-maximal assignment of every task to one agent under per-agent
/// budget sums. `cost[task][agent]`, `profit[task][agent]`. Ties keep the
/// first assignment in lexicographic (agent-index) order.
pub fn brute_gap(
    cost: &[Vec<f64>],
    profit: &[Vec<f64>],
    budgets: &[f64],
) -> Result<Option<(f64, Vec<u32>)>> {
    let tasks = cost.len();
    let agents = budgets.len();
    if tasks == 0 || agents == 0 {
        return Err(Error::EmptyInput);
    }
    if profit.len() != tasks
        || cost.iter().any(|r| r.len() != agents)
        || profit.iter().any(|r| r.len() != agents)
    {
        return Err(Error::BadInstance("cost/profit shape mismatch".into()));
    }
    let space = (agents as u128).checked_pow(tasks as u32).unwrap_or(u128::MAX);
    if space > GUARD {
        return Err(Error::OracleGuard(space));
    }
    let mut pick = vec![0u32; tasks];
    let mut loads = vec![0.0; agents];
    let mut best: Option<(f64, Vec<u32>)> = None;
    loop {
        loads.fill(0.0);
        for (task, &a) in pick.iter().enumerate() {
            loads[a as usize] += cost[task][a as usize];
        }
        if loads.iter().zip(budgets).all(|(s, b)| s <= b) {
            let p: f64 = pick
                .iter()
                .enumerate()
                .map(|(task, &a)| profit[task][a as usize])
                .sum();
            if best.as_ref().map_or(true, |(bp, _)| p > *bp) {
                best = Some((p, pick.clone()));
            }
        }
        // Odometer step over agent choices, last task fastest.
        let mut t = tasks;
        loop {
            if t == 0 {
                return Ok(best);
            }
            t -= 1;
            pick[t] += 1;
            if (pick[t] as usize) < agents {
                break;
            }
            pick[t] = 0;
        }
    }
}
