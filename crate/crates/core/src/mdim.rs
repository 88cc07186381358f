//! Multidimensional fixed-size subset mining.
//!
//! Rows of the superset are made component-wise nondecreasing by appending
//! an integer key column and lifting every other column by a per-column
//! multiple of it (comonotonization). Each achievable size-n key sum then
//! yields one (d+1)-dimensional target row, and the 1-D engine mines each
//! row over vector-valued elements. Rows are independent, so workers claim
//! them from a shared counter.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::algebra::VecAlgebra;
use crate::contraction::{Contractor, WindowSums};
use crate::error::{Error, Result};
use crate::model::{MineResult, MineStatus, MiningConfig, Solution};
use crate::subspacing::{Driver, Engine, Task, Walk};

#[derive(Debug, Clone)]
pub struct SupersetMD {
    rows: Vec<Vec<f64>>,
    dims: usize,
}

impl SupersetMD {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let dims = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self {
            rows: rows.to_vec(),
            dims,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Whether comonotonization may reorder rows by the leader column first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrder {
    /// Sort rows by the most-correlated column (stable on ties). Default.
    LeaderSorted,
    /// Keep the caller's row order (used when rows arrive pre-sorted by an
    /// external criterion, e.g. item profit).
    Keep,
}

#[derive(Debug, Clone)]
pub struct Comonotonized {
    /// N x (d+1) matrix; column d is the integer key column. Rows are
    /// component-wise nondecreasing.
    pub star: Vec<Vec<f64>>,
    /// Per-column lift multipliers.
    pub theta: Vec<f64>,
    /// Column whose ranks correlate the rest the most.
    pub leader: usize,
    /// row_perm[sorted_row] = caller's original row index.
    pub row_perm: Vec<u32>,
    /// Original-domain rows in the mined order.
    pub sorted_rows: Vec<Vec<f64>>,
}

/// 0-based ranks with ties sharing their average rank.
fn average_ranks(vals: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut ranks = vec![0.0; vals.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && vals[idx[j + 1]] == vals[idx[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; 0 when either side is constant.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Rank-correlation leader: the column maximizing the summed Spearman
/// correlation with all other columns; lowest index on ties.
pub(crate) fn leader_column(rows: &[Vec<f64>], dims: usize) -> usize {
    if dims == 1 {
        return 0;
    }
    let ranks: Vec<Vec<f64>> = (0..dims)
        .map(|t| average_ranks(&rows.iter().map(|r| r[t]).collect::<Vec<_>>()))
        .collect();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for t in 0..dims {
        let score: f64 = (0..dims)
            .filter(|&u| u != t)
            .map(|u| correlation(&ranks[t], &ranks[u]))
            .sum();
        if score > best_score {
            best_score = score;
            best = t;
        }
    }
    best
}

/// Appends the key column and lifts the others so rows become component-wise
/// nondecreasing.
pub fn comonotonize(x: &SupersetMD, order: RowOrder) -> Comonotonized {
    let d = x.dims();
    let n = x.len();
    let leader = leader_column(&x.rows, d);
    let mut row_perm: Vec<u32> = (0..n as u32).collect();
    if order == RowOrder::LeaderSorted {
        row_perm.sort_by(|&a, &b| {
            x.rows[a as usize][leader].total_cmp(&x.rows[b as usize][leader])
        });
    }
    let sorted_rows: Vec<Vec<f64>> = row_perm.iter().map(|&r| x.rows[r as usize].clone()).collect();

    // Key increments wherever the previous row fails to dominate.
    let mut key = vec![0i64; n];
    for s in 1..n {
        let dominated = sorted_rows[s - 1]
            .iter()
            .zip(&sorted_rows[s])
            .all(|(a, b)| a <= b);
        key[s] = key[s - 1] + if dominated { 0 } else { 1 };
    }

    let mut theta = vec![0.0; d];
    for t in 0..d {
        let mut worst = 0.0f64;
        for s in 1..n {
            worst = worst.min(sorted_rows[s][t] - sorted_rows[s - 1][t]);
        }
        theta[t] = worst.abs();
    }

    let mut star: Vec<Vec<f64>> = sorted_rows
        .iter()
        .zip(&key)
        .map(|(row, &v)| {
            let mut out = Vec::with_capacity(d + 1);
            out.extend(row.iter().zip(&theta).map(|(x, th)| x + v as f64 * th));
            out.push(v as f64);
            out
        })
        .collect();
    // The lift is nondecreasing in exact arithmetic but x + v*theta rounds
    // per entry, which can invert neighbors by an ulp. Clamp to a running
    // max: a no-op on exact inputs, and reported solutions are re-checked
    // against original values either way.
    for s in 1..n {
        for t in 0..d {
            if star[s][t] < star[s - 1][t] {
                star[s][t] = star[s - 1][t];
            }
        }
    }
    debug_assert!(star
        .windows(2)
        .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b)));

    Comonotonized {
        star,
        theta,
        leader,
        row_perm,
        sorted_rows,
    }
}

/// One (d+1)-dimensional target row per achievable size-n key sum.
#[derive(Debug, Clone)]
pub struct TargetTable {
    pub rows_lower: Vec<Vec<f64>>,
    pub rows_upper: Vec<Vec<f64>>,
    pub key_sums: Vec<i64>,
}

impl TargetTable {
    pub fn len(&self) -> usize {
        self.key_sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key_sums.is_empty()
    }
}

/// Enumerates the contiguous range of size-n key sums and builds one lifted
/// copy of the target range per sum.
pub fn build_targets(
    c: &Comonotonized,
    n: usize,
    s_l: &[f64],
    s_u: &[f64],
    max_rows: usize,
) -> Result<TargetTable> {
    let n_rows = c.star.len();
    let d = c.theta.len();
    if s_l.len() != d || s_u.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s_l.len().max(s_u.len()),
        });
    }
    if n == 0 || n > n_rows {
        return Err(Error::BadSubsetSize { n, len: n_rows });
    }
    let key_at = |s: usize| c.star[s][d] as i64;
    let lo: i64 = (0..n).map(key_at).sum();
    let hi: i64 = (n_rows - n..n_rows).map(key_at).sum();
    let count = (hi - lo + 1) as u128;
    if count > max_rows as u128 {
        return Err(Error::TargetRowCap {
            rows: count,
            cap: max_rows,
        });
    }
    // Keys step by at most 1, so v(N-n+j) - v(j) <= N-n for each of the n
    // paired positions.
    debug_assert!(count <= (n * (n_rows - n) + 1) as u128);
    let mut rows_lower = Vec::with_capacity(count as usize);
    let mut rows_upper = Vec::with_capacity(count as usize);
    let mut key_sums = Vec::with_capacity(count as usize);
    for ks in lo..=hi {
        let lift = |base: &[f64]| {
            let mut row: Vec<f64> = base
                .iter()
                .zip(&c.theta)
                .map(|(b, th)| ks as f64 * th + b)
                .collect();
            row.push(ks as f64);
            row
        };
        rows_lower.push(lift(s_l));
        rows_upper.push(lift(s_u));
        key_sums.push(ks);
    }
    Ok(TargetTable {
        rows_lower,
        rows_upper,
        key_sums,
    })
}

/// Percentile-guided mining order: rows whose normalized key position sits
/// closest to where the leader-column target sits between the extreme
/// achievable leader sums come first; ties prefer the lower key sum.
pub fn order_targets(
    tt: &TargetTable,
    c: &Comonotonized,
    n: usize,
    s_l: &[f64],
    s_u: &[f64],
) -> Vec<u32> {
    let n_s = tt.len();
    let natural: Vec<u32> = (0..n_s as u32).collect();
    if n_s <= 1 {
        return natural;
    }
    let t = c.leader;
    let n_rows = c.sorted_rows.len();
    let low_sum: f64 = c.sorted_rows[..n].iter().map(|r| r[t]).sum();
    let high_sum: f64 = c.sorted_rows[n_rows - n..].iter().map(|r| r[t]).sum();
    let span = high_sum - low_sum;
    if span <= 0.0 {
        return natural;
    }
    let mid = (s_l[t] + s_u[t]) / 2.0;
    let p = (mid - low_sum) / span;
    if !p.is_finite() {
        return natural;
    }
    let denom = (n_s - 1) as f64;
    let mut order = natural;
    order.sort_by(|&a, &b| {
        let da = (a as f64 / denom - p).abs();
        let db = (b as f64 / denom - p).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    order
}

struct RowResult {
    seq: usize,
    solutions: Vec<Solution>,
}

struct MdDriver<'a> {
    x: &'a SupersetMD,
    row_perm: &'a [u32],
    s_l: &'a [f64],
    s_u: &'a [f64],
    quota: usize,
    deadline: Instant,
    cancel: &'a AtomicBool,
    timed_out: &'a AtomicBool,
    found: &'a AtomicUsize,
    out: Vec<Solution>,
    polls: u32,
}

impl Driver<Vec<f64>> for MdDriver<'_> {
    fn solution(&mut self, members: &[u32]) -> bool {
        let mut indexes: Vec<u32> = members
            .iter()
            .map(|&p| self.row_perm[p as usize])
            .collect();
        indexes.sort_unstable();
        let d = self.x.dims();
        let mut sums = vec![0.0; d];
        for &r in &indexes {
            for (t, acc) in sums.iter_mut().enumerate() {
                *acc += self.x.rows()[r as usize][t];
            }
        }
        let inside = sums
            .iter()
            .zip(self.s_l.iter().zip(self.s_u))
            .all(|(s, (lo, hi))| s >= lo && s <= hi);
        if inside {
            self.out.push(Solution {
                indexes,
                achieved_sum: sums,
            });
            let total = self.found.fetch_add(1, Ordering::Relaxed) + 1;
            if total >= self.quota {
                self.cancel.store(true, Ordering::Relaxed);
                return false;
            }
        }
        true
    }

    fn stopped(&mut self) -> bool {
        self.polls = self.polls.wrapping_add(1);
        if self.polls & 0x3f != 0 {
            return false;
        }
        if self.cancel.load(Ordering::Relaxed) {
            return true;
        }
        if Instant::now() >= self.deadline {
            self.timed_out.store(true, Ordering::Relaxed);
            self.cancel.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }
}

/// Mines subsets of `n` rows whose per-dimension sums land within `m_me` of
/// `m_target`. Solutions carry original row numbers and original-domain sums.
pub fn solve_md(
    x: &SupersetMD,
    n: usize,
    m_target: &[f64],
    m_me: &[f64],
    config: &MiningConfig,
) -> Result<MineResult> {
    solve_md_with_row_order(x, n, m_target, m_me, RowOrder::LeaderSorted, config)
}

/// Same as [`solve_md`] but with an explicit row-order policy. Keeping the
/// input order disables the leader sort; the answer set is unchanged, only
/// the amount of pruning differs.
pub fn solve_md_with_row_order(
    x: &SupersetMD,
    n: usize,
    m_target: &[f64],
    m_me: &[f64],
    order: RowOrder,
    config: &MiningConfig,
) -> Result<MineResult> {
    let d = x.dims();
    if m_target.len() != d || m_me.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m_target.len().max(m_me.len()),
        });
    }
    if m_me.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::BadBounds("per-dimension tolerance must be >= 0".into()));
    }
    let s_l: Vec<f64> = m_target.iter().zip(m_me).map(|(t, e)| t - e).collect();
    let s_u: Vec<f64> = m_target.iter().zip(m_me).map(|(t, e)| t + e).collect();

    let c = comonotonize(x, order);
    let tt = build_targets(&c, n, &s_l, &s_u, config.max_target_rows)?;
    let row_seq: Vec<u32> = if config.order_targets {
        order_targets(&tt, &c, n, &s_l, &s_u)
    } else {
        (0..tt.len() as u32).collect()
    };

    let alg = VecAlgebra::new(d + 1);
    let windows = WindowSums::build(&alg, &c.star, n);
    let deadline = Instant::now() + config.time_limit;
    let cancel = AtomicBool::new(false);
    let timed_out = AtomicBool::new(false);
    let found = AtomicUsize::new(0);
    let next_row = AtomicUsize::new(0);
    let results: Mutex<Vec<RowResult>> = Mutex::new(Vec::new());
    let exhausted_all = AtomicBool::new(true);

    let worker = || {
        let mut engine = Engine::new(Contractor::new(&alg, &c.star, &windows));
        engine.contractor.use_binary_search = config.use_binary_search;
        engine.variable_tree = config.variable_tree;
        loop {
            let seq = next_row.fetch_add(1, Ordering::Relaxed);
            if seq >= row_seq.len() || cancel.load(Ordering::Relaxed) {
                break;
            }
            let row = row_seq[seq] as usize;
            let task = Task::root(
                &alg,
                &c.star,
                (0..n as u32).collect(),
                ((c.star.len() - n) as u32..c.star.len() as u32).collect(),
                tt.rows_lower[row].clone(),
                tt.rows_upper[row].clone(),
            );
            let mut driver = MdDriver {
                x,
                row_perm: &c.row_perm,
                s_l: &s_l,
                s_u: &s_u,
                quota: config.max_solutions,
                deadline,
                cancel: &cancel,
                timed_out: &timed_out,
                found: &found,
                out: Vec::new(),
                polls: 0,
            };
            let walk = engine.mine(task, &mut driver);
            if walk == Walk::Stopped {
                exhausted_all.store(false, Ordering::Relaxed);
            }
            if !driver.out.is_empty() {
                results.lock().unwrap().push(RowResult {
                    seq,
                    solutions: driver.out,
                });
            }
        }
    };

    let workers = config.threads.max(1).min(row_seq.len().max(1));
    if workers <= 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(worker);
            }
        });
    }

    let mut rows = results.into_inner().unwrap();
    rows.sort_by_key(|r| r.seq);
    let mut solutions: Vec<Solution> = rows.into_iter().flat_map(|r| r.solutions).collect();
    solutions.truncate(config.max_solutions);
    let status = if timed_out.load(Ordering::Relaxed) {
        MineStatus::Timeout
    } else if !exhausted_all.load(Ordering::Relaxed) || solutions.len() >= config.max_solutions {
        MineStatus::Quota
    } else {
        MineStatus::Exhausted
    };
    Ok(MineResult { solutions, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy() -> SupersetMD {
        SupersetMD::new(&[vec![4.0, 10.0], vec![2.0, 25.0], vec![8.0, 17.0]]).unwrap()
    }

    #[test]
    fn comonotonize_matches_worked_example_in_kept_order() {
        let c = comonotonize(&toy(), RowOrder::Keep);
        assert_eq!(c.theta, vec![2.0, 8.0]);
        assert_eq!(
            c.star,
            vec![
                vec![4.0, 10.0, 0.0],
                vec![4.0, 33.0, 1.0],
                vec![12.0, 33.0, 2.0],
            ]
        );
        assert_eq!(c.row_perm, vec![0, 1, 2]);
    }

    #[test]
    fn already_monotone_rows_need_no_lift() {
        let x = SupersetMD::new(&[vec![1.0, 1.0], vec![2.0, 3.0], vec![5.0, 3.0]]).unwrap();
        let c = comonotonize(&x, RowOrder::Keep);
        assert_eq!(c.theta, vec![0.0, 0.0]);
        assert!(c.star.iter().all(|r| r[2] == 0.0));
        assert_eq!(c.star[1][..2], [2.0, 3.0]);
    }

    #[test]
    fn dominance_chain_holds_on_random_supersets() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| (0..5).map(|_| rng.gen_range(-1000..1000) as f64 / 16.0).collect())
                .collect();
            let x = SupersetMD::new(&rows).unwrap();
            let c = comonotonize(&x, RowOrder::LeaderSorted);
            for w in c.star.windows(2) {
                assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
            }
            let keys: Vec<i64> = c.star.iter().map(|r| r[5] as i64).collect();
            assert_eq!(keys[0], 0);
            assert!(keys.windows(2).all(|w| w[1] - w[0] == 0 || w[1] - w[0] == 1));
        }
    }

    #[test]
    fn target_table_matches_worked_example() {
        let c = comonotonize(&toy(), RowOrder::Keep);
        let tt = build_targets(&c, 2, &[11.0, 26.0], &[12.0, 28.0], 1 << 20).unwrap();
        assert_eq!(tt.key_sums, vec![1, 2, 3]);
        assert_eq!(
            tt.rows_lower,
            vec![
                vec![13.0, 34.0, 1.0],
                vec![15.0, 42.0, 2.0],
                vec![17.0, 50.0, 3.0],
            ]
        );
        assert_eq!(
            tt.rows_upper,
            vec![
                vec![14.0, 36.0, 1.0],
                vec![16.0, 44.0, 2.0],
                vec![18.0, 52.0, 3.0],
            ]
        );
    }

    #[test]
    fn constant_key_collapses_table_to_single_row() {
        let x = SupersetMD::new(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let c = comonotonize(&x, RowOrder::LeaderSorted);
        let tt = build_targets(&c, 2, &[3.0], &[5.0], 1 << 20).unwrap();
        assert_eq!(tt.key_sums, vec![0]);
        assert_eq!(tt.rows_lower, vec![vec![3.0, 0.0]]);
        assert_eq!(tt.rows_upper, vec![vec![5.0, 0.0]]);
    }

    #[test]
    fn table_size_matches_key_sum_enumeration_and_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..40 {
            let n_rows = rng.gen_range(3..=10);
            let d = rng.gen_range(1..=3);
            let rows: Vec<Vec<f64>> = (0..n_rows)
                .map(|_| (0..d).map(|_| rng.gen_range(-40..40) as f64).collect())
                .collect();
            let n = rng.gen_range(1..=n_rows);
            let x = SupersetMD::new(&rows).unwrap();
            let c = comonotonize(&x, RowOrder::LeaderSorted);
            let tt =
                build_targets(&c, n, &vec![0.0; d], &vec![0.0; d], 1 << 20).unwrap();
            // Independent count: all size-n key sums, by combination walk.
            let keys: Vec<i64> = c.star.iter().map(|r| r[d] as i64).collect();
            let mut sums = std::collections::BTreeSet::new();
            let mut pick = vec![0u32; n];
            fn walk(
                keys: &[i64],
                pick: &mut Vec<u32>,
                depth: usize,
                start: usize,
                sums: &mut std::collections::BTreeSet<i64>,
            ) {
                if depth == pick.len() {
                    sums.insert(pick.iter().map(|&i| keys[i as usize]).sum());
                    return;
                }
                for i in start..keys.len() - (pick.len() - depth - 1) {
                    pick[depth] = i as u32;
                    walk(keys, pick, depth + 1, i + 1, sums);
                }
            }
            walk(&keys, &mut pick, 0, 0, &mut sums);
            assert_eq!(tt.len(), sums.len(), "contiguity of achievable key sums");
            assert!(tt.len() <= n * (n_rows - n) + 1);
        }
    }

    #[test]
    fn ordering_is_permutation_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let n_rows = rng.gen_range(4..=12);
            let d = rng.gen_range(2..=4);
            let rows: Vec<Vec<f64>> = (0..n_rows)
                .map(|_| (0..d).map(|_| rng.gen_range(-500..500) as f64 / 8.0).collect())
                .collect();
            let n = rng.gen_range(1..=n_rows / 2 + 1);
            let x = SupersetMD::new(&rows).unwrap();
            let c = comonotonize(&x, RowOrder::LeaderSorted);
            let target: Vec<f64> = (0..d).map(|t| c.sorted_rows[..n].iter().map(|r| r[t]).sum()).collect();
            let me = vec![1.0; d];
            let s_l: Vec<f64> = target.iter().zip(&me).map(|(t, e)| t - e).collect();
            let s_u: Vec<f64> = target.iter().zip(&me).map(|(t, e)| t + e).collect();
            let tt = build_targets(&c, n, &s_l, &s_u, 1 << 20).unwrap();
            let order = order_targets(&tt, &c, n, &s_l, &s_u);
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..tt.len() as u32).collect::<Vec<_>>());

            // Scaling the whole instance by a positive factor preserves it.
            let scaled_rows: Vec<Vec<f64>> =
                rows.iter().map(|r| r.iter().map(|v| v * 4.0).collect()).collect();
            let xs = SupersetMD::new(&scaled_rows).unwrap();
            let cs = comonotonize(&xs, RowOrder::LeaderSorted);
            let s_l2: Vec<f64> = s_l.iter().map(|v| v * 4.0).collect();
            let s_u2: Vec<f64> = s_u.iter().map(|v| v * 4.0).collect();
            let tt2 = build_targets(&cs, n, &s_l2, &s_u2, 1 << 20).unwrap();
            let order2 = order_targets(&tt2, &cs, n, &s_l2, &s_u2);
            assert_eq!(order, order2);
        }
    }

    #[test]
    fn single_row_table_orders_trivially() {
        let x = SupersetMD::new(&[vec![1.0], vec![2.0]]).unwrap();
        let c = comonotonize(&x, RowOrder::LeaderSorted);
        let tt = build_targets(&c, 1, &[1.0], &[2.0], 1 << 20).unwrap();
        assert_eq!(order_targets(&tt, &c, 1, &[1.0], &[2.0]), vec![0]);
    }

    #[test]
    fn minimum_target_orders_rows_by_ascending_key() {
        let c = comonotonize(&toy(), RowOrder::Keep);
        // Target pinned at the minimum achievable leader sums => p = 0.
        let s_l = vec![6.0, 27.0];
        let s_u = vec![6.0, 27.0];
        let tt = build_targets(&c, 2, &s_l, &s_u, 1 << 20).unwrap();
        let order = order_targets(&tt, &c, 2, &s_l, &s_u);
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn toy_solve_finds_the_single_qualifying_pair() {
        let r = solve_md(&toy(), 2, &[11.5, 27.0], &[0.5, 1.0], &MiningConfig::default()).unwrap();
        assert_eq!(r.status, MineStatus::Exhausted);
        assert_eq!(r.solutions.len(), 1);
        assert_eq!(r.solutions[0].indexes, vec![0, 2]);
        assert_eq!(r.solutions[0].achieved_sum, vec![12.0, 27.0]);
    }

    #[test]
    fn all_zero_superset_returns_every_combination() {
        let x = SupersetMD::new(&vec![vec![0.0, 0.0]; 6]).unwrap();
        let r = solve_md(&x, 3, &[0.0, 0.0], &[0.0, 0.0], &MiningConfig::default()).unwrap();
        assert_eq!(r.solutions.len(), 20);
    }

    #[test]
    fn random_instances_match_oracle_for_both_thread_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        for case in 0..30 {
            let n_rows = rng.gen_range(6..=12);
            let d = rng.gen_range(1..=4);
            let rows: Vec<Vec<f64>> = (0..n_rows)
                .map(|_| (0..d).map(|_| rng.gen_range(-512..512) as f64 / 8.0).collect())
                .collect();
            let n = rng.gen_range(1..=5.min(n_rows));
            let planted: Vec<f64> = (0..d)
                .map(|t| rows.iter().take(n).map(|r| r[t]).sum())
                .collect();
            let me = vec![0.0; d];
            let x = SupersetMD::new(&rows).unwrap();
            let want = {
                let mut v = oracle::brute_md(&rows, n, &planted, &planted).unwrap();
                v.sort();
                v
            };
            for threads in [1, 4] {
                let mut cfg = MiningConfig::default();
                cfg.threads = threads;
                let got = solve_md(&x, n, &planted, &me, &cfg).unwrap();
                let mut sets: Vec<Vec<u32>> =
                    got.solutions.iter().map(|s| s.indexes.clone()).collect();
                sets.sort();
                assert_eq!(sets, want, "case {case} threads {threads}");
            }
            assert!(!want.is_empty(), "planted, case {case}");
        }
    }

    #[test]
    fn larger_planted_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31337);
        for case in 0..100 {
            let rows: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..4).map(|_| rng.gen_range(-2048..2048) as f64 / 16.0).collect())
                .collect();
            let n = 5;
            let mut picked: Vec<usize> = (0..30).collect();
            for i in 0..n {
                let j = rng.gen_range(i..30);
                picked.swap(i, j);
            }
            let planted: Vec<f64> = (0..4)
                .map(|t| picked[..n].iter().map(|&r| rows[r][t]).sum())
                .collect();
            let x = SupersetMD::new(&rows).unwrap();
            let want = {
                let mut v = oracle::brute_md(&rows, n, &planted, &planted).unwrap();
                v.sort();
                v
            };
            let got = solve_md(&x, n, &planted, &vec![0.0; 4], &MiningConfig::default()).unwrap();
            let mut sets: Vec<Vec<u32>> = got.solutions.iter().map(|s| s.indexes.clone()).collect();
            sets.sort();
            assert_eq!(sets, want, "case {case}");
        }
    }

    #[test]
    fn row_cap_fails_fast_with_diagnostic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.gen_range(-1000..1000) as f64).collect())
            .collect();
        let x = SupersetMD::new(&rows).unwrap();
        let mut cfg = MiningConfig::default();
        cfg.max_target_rows = 3;
        let err = solve_md(&x, 10, &[0.0; 3], &[1.0; 3], &cfg).unwrap_err();
        assert!(matches!(err, Error::TargetRowCap { cap: 3, .. }));
    }
}
