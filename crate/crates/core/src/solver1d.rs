//! One-dimensional solving surface: fixed subset size, variable subset size,
//! and caller-supplied index bounds.
//!
//! Every solution is re-summed independently over the caller's input order
//! before it is reported, so the returned `achieved_sum` always matches what
//! a plain loop over the original slice would compute.

use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::algebra::ScalarAlgebra;
use crate::contraction::{Contractor, WindowSums};
use crate::error::{Error, Result};
use crate::model::{
    IndexBounds, MineResult, MineStatus, MiningConfig, Solution, Superset1D, TargetRange,
};
use crate::subspacing::{Driver, Engine, Task, Walk};

/// How `solve_variable` covers all subset sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableStrategy {
    /// Run one fixed-size solve per size 1..=N. Usually faster; the default.
    LoopSizes,
    /// Append N zero elements and mine size-N subsets of the padded
    /// superset; strip the padding and deduplicate.
    PadZeros,
}

/// Fixed-size solve over the whole hypercube: subsets of exactly `n`
/// elements whose sum lies within `me` of `target`.
pub fn solve_fixed(
    s: &Superset1D,
    n: usize,
    target: f64,
    me: f64,
    config: &MiningConfig,
) -> Result<MineResult> {
    let range = TargetRange::around(&[target], &[me])?;
    let bounds = IndexBounds::initial(s.len(), n)?;
    solve_bounded(s, n, &range, bounds, config)
}

/// Fixed-size solve restricted to a caller-supplied hyperrectangle of index
/// bounds (positions refer to the sorted superset).
pub fn solve_bounded(
    s: &Superset1D,
    n: usize,
    range: &TargetRange,
    initial: IndexBounds,
    config: &MiningConfig,
) -> Result<MineResult> {
    if range.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: range.dims(),
        });
    }
    if initial.len() != n {
        return Err(Error::BadBounds(format!(
            "bounds describe {} positions but the subset size is {n}",
            initial.len()
        )));
    }
    initial.validate(s.len())?;
    let deadline = Instant::now() + config.time_limit;
    let emit = PlainEmit { sup: s };
    let (solutions, status) = mine_one(
        s.elems(),
        initial,
        (range.min[0], range.max[0]),
        config,
        deadline,
        &emit,
        config.max_solutions,
    );
    Ok(MineResult { solutions, status })
}

/// Variable-size solve: subsets of any size 1..=N whose sum lies within
/// `me` of `target`. Both strategies return the same solution set.
pub fn solve_variable(
    s: &Superset1D,
    target: f64,
    me: f64,
    config: &MiningConfig,
    strategy: VariableStrategy,
) -> Result<MineResult> {
    let range = TargetRange::around(&[target], &[me])?;
    match strategy {
        VariableStrategy::LoopSizes => solve_all_sizes(s, &range, config),
        VariableStrategy::PadZeros => solve_padded(s, &range, config),
    }
}

/// Maps engine output (sorted-superset positions) to a reported solution, or
/// rejects it. Shared by the worker drivers.
trait Emit: Sync {
    fn emit(&self, members: &[u32], range: (f64, f64)) -> Option<Solution>;
}

/// Re-sums members over the input order and enforces the range.
fn rebuild_solution(sup: &Superset1D, members: &[u32], range: (f64, f64)) -> Option<Solution> {
    let mut picked: Vec<(u32, f64)> = members
        .iter()
        .map(|&p| (sup.input_position(p as usize), sup.elems()[p as usize]))
        .collect();
    picked.sort_unstable_by_key(|&(i, _)| i);
    let sum: f64 = picked.iter().map(|&(_, v)| v).sum();
    if sum < range.0 || sum > range.1 {
        return None;
    }
    Some(Solution {
        indexes: picked.iter().map(|&(i, _)| i).collect(),
        achieved_sum: vec![sum],
    })
}

struct PlainEmit<'a> {
    sup: &'a Superset1D,
}

impl Emit for PlainEmit<'_> {
    fn emit(&self, members: &[u32], range: (f64, f64)) -> Option<Solution> {
        rebuild_solution(self.sup, members, range)
    }
}

/// Strips padding positions, deduplicates by the surviving index set, and
/// re-sums over the real members only.
struct PadEmit<'a> {
    padded: &'a Superset1D,
    real_len: u32,
    seen: Mutex<HashSet<Vec<u32>>>,
}

impl Emit for PadEmit<'_> {
    fn emit(&self, members: &[u32], range: (f64, f64)) -> Option<Solution> {
        let mut picked: Vec<(u32, f64)> = members
            .iter()
            .map(|&p| {
                (
                    self.padded.input_position(p as usize),
                    self.padded.elems()[p as usize],
                )
            })
            .filter(|&(i, _)| i < self.real_len)
            .collect();
        if picked.is_empty() {
            return None;
        }
        picked.sort_unstable_by_key(|&(i, _)| i);
        let indexes: Vec<u32> = picked.iter().map(|&(i, _)| i).collect();
        if !self.seen.lock().unwrap().insert(indexes.clone()) {
            return None;
        }
        let sum: f64 = picked.iter().map(|&(_, v)| v).sum();
        if sum < range.0 || sum > range.1 {
            return None;
        }
        Some(Solution {
            indexes,
            achieved_sum: vec![sum],
        })
    }
}

struct SinkDriver<'a, E: Emit> {
    emit: &'a E,
    range: (f64, f64),
    quota: usize,
    deadline: Instant,
    cancel: Option<&'a AtomicBool>,
    shared_found: Option<&'a AtomicUsize>,
    out: Vec<Solution>,
    timed_out: bool,
    polls: u32,
}

impl<E: Emit> Driver<f64> for SinkDriver<'_, E> {
    fn solution(&mut self, members: &[u32]) -> bool {
        let Some(sol) = self.emit.emit(members, self.range) else {
            return true;
        };
        self.out.push(sol);
        let total = match self.shared_found {
            Some(c) => c.fetch_add(1, Ordering::Relaxed) + 1,
            None => self.out.len(),
        };
        total < self.quota
    }

    fn stopped(&mut self) -> bool {
        self.polls = self.polls.wrapping_add(1);
        if self.polls & 0x3f != 0 {
            return false;
        }
        if let Some(flag) = self.cancel {
            if flag.load(Ordering::Relaxed) {
                return true;
            }
        }
        if Instant::now() >= self.deadline {
            self.timed_out = true;
            return true;
        }
        false
    }
}

/// Runs one engine walk over `elems` restricted to `initial`. Returns the
/// solutions in discovery order, truncated to `quota`.
#[allow(clippy::too_many_arguments)]
fn mine_one<E: Emit>(
    elems: &[f64],
    initial: IndexBounds,
    range: (f64, f64),
    config: &MiningConfig,
    deadline: Instant,
    emit: &E,
    quota: usize,
) -> (Vec<Solution>, MineStatus) {
    let n = initial.len();
    let alg = ScalarAlgebra;
    let windows = WindowSums::build(&alg, elems, n);
    let mut engine = Engine::new(Contractor::new(&alg, elems, &windows));
    engine.contractor.use_binary_search = config.use_binary_search;
    engine.variable_tree = config.variable_tree;
    let task = Task::root(
        &alg,
        elems,
        initial.lower,
        initial.upper,
        range.0,
        range.1,
    );
    let mut driver = SinkDriver {
        emit,
        range,
        quota,
        deadline,
        cancel: None,
        shared_found: None,
        out: Vec::new(),
        timed_out: false,
        polls: 0,
    };
    let walk = engine.mine(task, &mut driver);
    let status = match walk {
        Walk::Exhausted => MineStatus::Exhausted,
        Walk::Stopped if driver.timed_out => MineStatus::Timeout,
        Walk::Stopped => MineStatus::Quota,
    };
    let mut out = driver.out;
    out.truncate(quota);
    (out, status)
}

/// Loop-sizes strategy: one fixed-size job per subset size, sizes handed to
/// workers through a shared counter, results merged in size order.
fn solve_all_sizes(s: &Superset1D, range: &TargetRange, config: &MiningConfig) -> Result<MineResult> {
    let n_max = s.len();
    let deadline = Instant::now() + config.time_limit;
    let rng = (range.min[0], range.max[0]);
    let workers = config.threads.max(1).min(n_max);
    let emit = PlainEmit { sup: s };

    let next_size = AtomicUsize::new(1);
    let found = AtomicUsize::new(0);
    let cancel = AtomicBool::new(false);
    let timed_out = AtomicBool::new(false);
    let buckets: Mutex<Vec<(usize, Vec<Solution>, MineStatus)>> = Mutex::new(Vec::new());

    let run_worker = || {
        loop {
            let n = next_size.fetch_add(1, Ordering::Relaxed);
            if n > n_max || cancel.load(Ordering::Relaxed) {
                break;
            }
            let initial = IndexBounds::initial(n_max, n).expect("size within superset");
            let quota = config.max_solutions;
            let alg = ScalarAlgebra;
            let windows = WindowSums::build(&alg, s.elems(), n);
            let mut engine = Engine::new(Contractor::new(&alg, s.elems(), &windows));
            engine.contractor.use_binary_search = config.use_binary_search;
            engine.variable_tree = config.variable_tree;
            let task = Task::root(
                &alg,
                s.elems(),
                initial.lower,
                initial.upper,
                rng.0,
                rng.1,
            );
            let mut driver = SinkDriver {
                emit: &emit,
                range: rng,
                quota,
                deadline,
                cancel: Some(&cancel),
                shared_found: Some(&found),
                out: Vec::new(),
                timed_out: false,
                polls: 0,
            };
            let walk = engine.mine(task, &mut driver);
            let status = match walk {
                Walk::Exhausted => MineStatus::Exhausted,
                Walk::Stopped if driver.timed_out => MineStatus::Timeout,
                Walk::Stopped => MineStatus::Quota,
            };
            if status != MineStatus::Exhausted {
                cancel.store(true, Ordering::Relaxed);
                if status == MineStatus::Timeout {
                    timed_out.store(true, Ordering::Relaxed);
                }
            }
            buckets.lock().unwrap().push((n, driver.out, status));
        }
    };

    if workers <= 1 {
        run_worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(run_worker);
            }
        });
    }

    let mut buckets = buckets.into_inner().unwrap();
    buckets.sort_by_key(|(n, _, _)| *n);
    let mut solutions = Vec::new();
    let mut exhausted = true;
    for (_, sols, status) in buckets {
        solutions.extend(sols);
        if status != MineStatus::Exhausted {
            exhausted = false;
        }
    }
    solutions.truncate(config.max_solutions);
    let status = if timed_out.load(Ordering::Relaxed) {
        MineStatus::Timeout
    } else if !exhausted || solutions.len() >= config.max_solutions {
        MineStatus::Quota
    } else {
        MineStatus::Exhausted
    };
    Ok(MineResult { solutions, status })
}

/// Pad-zeros strategy: one size-N mine over the zero-padded superset.
fn solve_padded(s: &Superset1D, range: &TargetRange, config: &MiningConfig) -> Result<MineResult> {
    let real_len = s.len();
    // Restore input order before padding so pad identities stay at the tail.
    let mut values = vec![0.0; real_len];
    for (pos, &v) in s.elems().iter().enumerate() {
        values[s.input_position(pos) as usize] = v;
    }
    values.extend(std::iter::repeat(0.0).take(real_len));
    let padded = Superset1D::new(&values)?;
    let initial = IndexBounds::initial(padded.len(), real_len)?;
    let emit = PadEmit {
        padded: &padded,
        real_len: real_len as u32,
        seen: Mutex::new(HashSet::new()),
    };
    let deadline = Instant::now() + config.time_limit;
    let (solutions, status) = mine_one(
        padded.elems(),
        initial,
        (range.min[0], range.max[0]),
        config,
        deadline,
        &emit,
        config.max_solutions,
    );
    Ok(MineResult { solutions, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canon(mut sols: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
        sols.sort();
        sols
    }

    fn solver_sets(result: &MineResult) -> Vec<Vec<u32>> {
        canon(result.solutions.iter().map(|s| s.indexes.clone()).collect())
    }

    #[test]
    fn fixed_size_matches_oracle_on_pairs() {
        let s = Superset1D::new(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = solve_fixed(&s, 2, 5.0, 0.0, &MiningConfig::default()).unwrap();
        assert_eq!(r.status, MineStatus::Exhausted);
        assert_eq!(solver_sets(&r), vec![vec![0, 3], vec![1, 2]]);
        assert!(r.solutions.iter().all(|s| s.achieved_sum == vec![5.0]));
    }

    #[test]
    fn whole_set_qualifies_only_when_total_in_range() {
        let s = Superset1D::new(&[2.0, 4.0, 8.0]).unwrap();
        let hit = solve_fixed(&s, 3, 14.0, 0.0, &MiningConfig::default()).unwrap();
        assert_eq!(solver_sets(&hit), vec![vec![0, 1, 2]]);
        let miss = solve_fixed(&s, 3, 13.0, 0.5, &MiningConfig::default()).unwrap();
        assert!(miss.solutions.is_empty());
    }

    #[test]
    fn variable_strategies_agree_and_find_both_shapes() {
        let s = Superset1D::new(&[1.0, 2.0, 3.0]).unwrap();
        let cfg = MiningConfig::default();
        let loops = solve_variable(&s, 3.0, 0.0, &cfg, VariableStrategy::LoopSizes).unwrap();
        let pads = solve_variable(&s, 3.0, 0.0, &cfg, VariableStrategy::PadZeros).unwrap();
        let want = vec![vec![0, 1], vec![2]];
        assert_eq!(solver_sets(&loops), want);
        assert_eq!(solver_sets(&pads), want);
    }

    #[test]
    fn variable_strategies_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let n_elems = rng.gen_range(2..=9);
            let values: Vec<f64> = (0..n_elems)
                .map(|_| rng.gen_range(-64i32..=64) as f64 / 8.0)
                .collect();
            let k = rng.gen_range(1..=n_elems);
            let target: f64 = values
                .iter()
                .take(k)
                .sum();
            let s = Superset1D::new(&values).unwrap();
            let cfg = MiningConfig::default();
            let a = solve_variable(&s, target, 0.0, &cfg, VariableStrategy::LoopSizes).unwrap();
            let b = solve_variable(&s, target, 0.0, &cfg, VariableStrategy::PadZeros).unwrap();
            assert_eq!(solver_sets(&a), solver_sets(&b), "case {case}");
            assert!(!a.solutions.is_empty(), "planted target, case {case}");
        }
    }

    #[test]
    fn loop_sizes_distributes_across_threads() {
        let values: Vec<f64> = (1..=12).map(|v| v as f64).collect();
        let s = Superset1D::new(&values).unwrap();
        let mut cfg = MiningConfig::default();
        let single = solve_variable(&s, 18.0, 0.0, &cfg, VariableStrategy::LoopSizes).unwrap();
        cfg.threads = 4;
        let multi = solve_variable(&s, 18.0, 0.0, &cfg, VariableStrategy::LoopSizes).unwrap();
        assert_eq!(solver_sets(&single), solver_sets(&multi));
        assert_eq!(single.status, MineStatus::Exhausted);
        assert_eq!(multi.status, MineStatus::Exhausted);
    }

    #[test]
    fn bounded_full_hypercube_equals_fixed_and_tight_bounds_exclude() {
        let values = [3.0, 5.0, 9.0, 14.0, 20.0];
        let s = Superset1D::new(&values).unwrap();
        let cfg = MiningConfig::default();
        let range = TargetRange::new(vec![17.0], vec![17.0]).unwrap();
        let full = solve_bounded(
            &s,
            2,
            &range,
            IndexBounds::initial(5, 2).unwrap(),
            &cfg,
        )
        .unwrap();
        let fixed = solve_fixed(&s, 2, 17.0, 0.0, &cfg).unwrap();
        assert_eq!(solver_sets(&full), solver_sets(&fixed));
        assert_eq!(solver_sets(&full), vec![vec![0, 3]]);
        // Position 0 forced to index >= 1 excludes the only solution.
        let excl = solve_bounded(
            &s,
            2,
            &range,
            IndexBounds {
                lower: vec![1, 2],
                upper: vec![3, 4],
            },
            &cfg,
        )
        .unwrap();
        assert!(excl.solutions.is_empty());
    }

    #[test]
    fn quota_truncates_and_reports_quota_status() {
        let values: Vec<f64> = vec![1.0; 10];
        let s = Superset1D::new(&values).unwrap();
        let mut cfg = MiningConfig::default();
        cfg.max_solutions = 3;
        let r = solve_fixed(&s, 2, 2.0, 0.0, &cfg).unwrap();
        assert_eq!(r.solutions.len(), 3);
        assert_eq!(r.status, MineStatus::Quota);
    }

    #[test]
    fn random_instances_match_oracle_both_modes_and_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..60 {
            let n_elems = rng.gen_range(3..=11);
            let values: Vec<f64> = (0..n_elems)
                .map(|_| rng.gen_range(-1024i32..=1024) as f64 / 16.0)
                .collect();
            let n = rng.gen_range(1..=n_elems.min(5));
            let planted: f64 = {
                let mut idx: Vec<usize> = (0..n_elems).collect();
                for i in 0..n {
                    let j = rng.gen_range(i..n_elems);
                    idx.swap(i, j);
                }
                idx[..n].iter().map(|&i| values[i]).sum()
            };
            let me = if case % 2 == 0 { 0.0 } else { 0.03125 };
            let want = canon(
                oracle::brute_1d(&values, n, planted - me, planted + me).unwrap(),
            );
            let s = Superset1D::new(&values).unwrap();
            for (bisect, variable) in [(false, false), (true, false), (false, true), (true, true)]
            {
                let mut cfg = MiningConfig::default();
                cfg.use_binary_search = bisect;
                cfg.variable_tree = variable;
                let got = solve_fixed(&s, n, planted, me, &cfg).unwrap();
                assert_eq!(
                    solver_sets(&got),
                    want,
                    "case {case} bisect {bisect} variable {variable}"
                );
            }
        }
    }
}
