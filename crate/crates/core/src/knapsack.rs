//! Exact multidimensional 0-1 knapsack via subset mining.
//!
//! Items are sorted by profit ascending and their cost rows comonotonized.
//! Profit rides along as one extra element dimension whose target range is
//! unbounded, so the engine's running upper bound already carries "total
//! profit if we pick everything at the current upper indexes"; a branch
//! whose profit bound cannot beat the incumbent is pruned. Key-sum target
//! rows are mined from the highest key sum down, which tends to raise the
//! incumbent early. Workers consume a shared task queue seeded by
//! breadth-first expansion and refilled by donations from busy workers.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use crate::algebra::VecAlgebra;
use crate::contraction::{Contractor, WindowSums};
use crate::error::{Error, Result};
use crate::mdim::{build_targets, comonotonize, RowOrder, SupersetMD};
use crate::model::MiningConfig;
use crate::subspacing::{Driver, Engine, Task};

#[derive(Debug, Clone)]
pub struct KnapsackInstance {
    costs: Vec<Vec<f64>>,
    profits: Vec<f64>,
    budgets: Vec<f64>,
}

impl KnapsackInstance {
    pub fn new(costs: &[Vec<f64>], profits: &[f64], budgets: &[f64]) -> Result<Self> {
        if costs.is_empty() || costs[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let d = costs[0].len();
        if budgets.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: budgets.len(),
            });
        }
        if profits.len() != costs.len() {
            return Err(Error::DimensionMismatch {
                expected: costs.len(),
                got: profits.len(),
            });
        }
        for (i, r) in costs.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        if profits.iter().any(|v| !v.is_finite()) || budgets.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadInstance(
                "profits and budgets must be finite".into(),
            ));
        }
        Ok(Self {
            costs: costs.to_vec(),
            profits: profits.to_vec(),
            budgets: budgets.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.budgets.len()
    }

    pub fn costs(&self) -> &[Vec<f64>] {
        &self.costs
    }

    pub fn profits(&self) -> &[f64] {
        &self.profits
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    /// Item numbers in the caller's order, ascending.
    pub items: Vec<u32>,
    pub profit: f64,
    /// Per-dimension summed costs.
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct KnapsackOutcome {
    pub best: Option<KnapsackSolution>,
    /// False when the time limit cut the search; `best` is then only the
    /// best found so far.
    pub proven: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct KnapsackOptions {
    /// Task queue is kept at roughly threads * phi entries.
    pub phi: usize,
    /// Incumbent-based branch pruning; disabling it never changes the
    /// result, only the work done.
    pub pruning: bool,
}

impl Default for KnapsackOptions {
    fn default() -> Self {
        Self {
            phi: 16,
            pruning: true,
        }
    }
}

/// Shared best-so-far. The packed f64 mirror lets prune checks skip the lock.
pub(crate) struct Incumbent {
    profit_bits: AtomicU64,
    pub(crate) best: Mutex<Option<(f64, Vec<u32>)>>,
}

impl Incumbent {
    pub(crate) fn new() -> Self {
        Self {
            profit_bits: AtomicU64::new(f64::NEG_INFINITY.to_bits()),
            best: Mutex::new(None),
        }
    }

    pub(crate) fn profit(&self) -> f64 {
        f64::from_bits(self.profit_bits.load(Ordering::Relaxed))
    }

    pub(crate) fn offer(&self, profit: f64, items: Vec<u32>) {
        let mut guard = self.best.lock().unwrap();
        let better = match &*guard {
            Some((p, _)) => profit > *p,
            None => true,
        };
        if better {
            *guard = Some((profit, items));
            self.profit_bits.store(profit.to_bits(), Ordering::Relaxed);
        }
    }
}

struct QueueState {
    tasks: VecDeque<Task<Vec<f64>>>,
    active: usize,
}

struct SharedQueue {
    state: Mutex<QueueState>,
    wakeup: Condvar,
    hungry: AtomicUsize,
}

struct KnapDriver<'a> {
    perm: &'a [u32],
    sorted_profits: &'a [f64],
    sorted_costs: &'a [Vec<f64>],
    budgets: &'a [f64],
    profit_dim: usize,
    pruning: bool,
    incumbent: &'a Incumbent,
    queue: &'a SharedQueue,
    deadline: Instant,
    cancel: &'a AtomicBool,
    timed_out: &'a AtomicBool,
    polls: u32,
}

impl Driver<Vec<f64>> for KnapDriver<'_> {
    fn solution(&mut self, members: &[u32]) -> bool {
        let d = self.budgets.len();
        let mut costs = vec![0.0; d];
        let mut profit = 0.0;
        for &p in members {
            profit += self.sorted_profits[p as usize];
            for (t, acc) in costs.iter_mut().enumerate() {
                *acc += self.sorted_costs[p as usize][t];
            }
        }
        // Independent budget re-check in the caller's cost domain.
        if costs.iter().zip(self.budgets).all(|(c, b)| c <= b) && profit > self.incumbent.profit()
        {
            let mut items: Vec<u32> = members.iter().map(|&p| self.perm[p as usize]).collect();
            items.sort_unstable();
            self.incumbent.offer(profit, items);
        }
        true
    }

    fn prune(&mut self, upper_total: &Vec<f64>) -> bool {
        self.pruning && upper_total[self.profit_dim] <= self.incumbent.profit()
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

    fn donation_wanted(&mut self) -> bool {
        self.queue.hungry.load(Ordering::Relaxed) > 0
    }

    fn donate(&mut self, task: Task<Vec<f64>>) {
        let mut state = self.queue.state.lock().unwrap();
        state.tasks.push_back(task);
        self.queue.wakeup.notify_one();
    }
}

/// Per-column sums of the n smallest entries: the tight lower cost target.
fn n_smallest_sums(costs: &[Vec<f64>], n: usize) -> Vec<f64> {
    let d = costs[0].len();
    (0..d)
        .map(|t| {
            let mut col: Vec<f64> = costs.iter().map(|r| r[t]).collect();
            col.sort_by(f64::total_cmp);
            col[..n].iter().sum()
        })
        .collect()
}

fn mine_fixed(
    inst: &KnapsackInstance,
    n: usize,
    config: &MiningConfig,
    opts: &KnapsackOptions,
    deadline: Instant,
    incumbent: &Incumbent,
) -> Result<bool> {
    let n_items = inst.len();
    let d = inst.dims();
    if n == 0 || n > n_items {
        return Err(Error::BadSubsetSize { n, len: n_items });
    }
    let floor = n_smallest_sums(&inst.costs, n);
    if floor.iter().zip(&inst.budgets).any(|(f, b)| f > b) {
        // No n-subset fits the budgets at all.
        return Ok(true);
    }

    let mut perm: Vec<u32> = (0..n_items as u32).collect();
    perm.sort_by(|&a, &b| inst.profits[a as usize].total_cmp(&inst.profits[b as usize]));
    let sorted_costs: Vec<Vec<f64>> =
        perm.iter().map(|&i| inst.costs[i as usize].clone()).collect();
    let sorted_profits: Vec<f64> = perm.iter().map(|&i| inst.profits[i as usize]).collect();

    let md = SupersetMD::new(&sorted_costs)?;
    let c = comonotonize(&md, RowOrder::Keep);
    let tt = build_targets(&c, n, &floor, &inst.budgets, config.max_target_rows)?;

    // Element rows: lifted costs, then profit, then the key. Profit is
    // nondecreasing by the sort, so rows stay component-wise ordered.
    let elems: Vec<Vec<f64>> = c
        .star
        .iter()
        .zip(&sorted_profits)
        .map(|(row, &p)| {
            let mut e = row[..d].to_vec();
            e.push(p);
            e.push(row[d]);
            e
        })
        .collect();
    let splice = |row: &[f64], profit_bound: f64| {
        let mut out = row[..d].to_vec();
        out.push(profit_bound);
        out.push(row[d]);
        out
    };

    let alg = VecAlgebra::new(d + 2);
    let windows = WindowSums::build(&alg, &elems, n);
    let cancel = AtomicBool::new(false);
    let timed_out = AtomicBool::new(false);
    let queue = SharedQueue {
        state: Mutex::new(QueueState {
            tasks: VecDeque::new(),
            active: 0,
        }),
        wakeup: Condvar::new(),
        hungry: AtomicUsize::new(0),
    };
    let threads = config.threads.max(1);
    let want = threads * opts.phi.max(1);

    let make_driver = || KnapDriver {
        perm: &perm,
        sorted_profits: &sorted_profits,
        sorted_costs: &sorted_costs,
        budgets: &inst.budgets,
        profit_dim: d,
        pruning: opts.pruning,
        incumbent,
        queue: &queue,
        deadline,
        cancel: &cancel,
        timed_out: &timed_out,
        polls: 0,
    };

    // Seed the queue: highest key sums first, each root expanded
    // breadth-first until enough same-depth tasks exist.
    {
        let mut engine = Engine::new(Contractor::new(&alg, &elems, &windows));
        engine.contractor.use_binary_search = config.use_binary_search;
        let mut driver = make_driver();
        let mut seeded = VecDeque::new();
        for row in (0..tt.len()).rev() {
            let root = Task::root(
                &alg,
                &elems,
                (0..n as u32).collect(),
                ((n_items - n) as u32..n_items as u32).collect(),
                splice(&tt.rows_lower[row], f64::NEG_INFINITY),
                splice(&tt.rows_upper[row], f64::INFINITY),
            );
            for task in engine.expand_tasks(root, want, &mut driver) {
                seeded.push_back(task);
            }
        }
        queue.state.lock().unwrap().tasks = seeded;
    }

    let worker = || {
        let mut engine = Engine::new(Contractor::new(&alg, &elems, &windows));
        engine.contractor.use_binary_search = config.use_binary_search;
        let mut driver = make_driver();
        loop {
            let task = {
                let mut state = queue.state.lock().unwrap();
                loop {
                    if let Some(t) = state.tasks.pop_front() {
                        state.active += 1;
                        break Some(t);
                    }
                    if state.active == 0 || cancel.load(Ordering::Relaxed) {
                        break None;
                    }
                    queue.hungry.fetch_add(1, Ordering::Relaxed);
                    state = queue.wakeup.wait(state).unwrap();
                    queue.hungry.fetch_sub(1, Ordering::Relaxed);
                }
            };
            let Some(task) = task else { break };
            let _ = engine.mine(task, &mut driver);
            let mut state = queue.state.lock().unwrap();
            state.active -= 1;
            if state.active == 0 {
                // Nobody left to donate; wake idlers so they can exit.
                queue.wakeup.notify_all();
            }
        }
    };

    if threads <= 1 {
        worker();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..threads {
                scope.spawn(worker);
            }
        });
    }
    Ok(!timed_out.load(Ordering::Relaxed))
}

fn finish(inst: &KnapsackInstance, incumbent: Incumbent, proven: bool) -> KnapsackOutcome {
    let best = incumbent.best.into_inner().unwrap().map(|(profit, items)| {
        let costs = (0..inst.dims())
            .map(|t| items.iter().map(|&i| inst.costs[i as usize][t]).sum())
            .collect();
        KnapsackSolution {
            items,
            profit,
            costs,
        }
    });
    KnapsackOutcome { best, proven }
}

/// Profit-maximal subset of exactly `n` items within all budgets.
pub fn solve_mf01k(
    inst: &KnapsackInstance,
    n: usize,
    config: &MiningConfig,
    opts: &KnapsackOptions,
) -> Result<KnapsackOutcome> {
    let incumbent = Incumbent::new();
    let deadline = Instant::now() + config.time_limit;
    let proven = mine_fixed(inst, n, config, opts, deadline, &incumbent)?;
    Ok(finish(inst, incumbent, proven))
}

/// Profit-maximal nonempty subset within all budgets: tries every size,
/// carrying the incumbent so later sizes start pre-pruned.
pub fn solve_01(
    inst: &KnapsackInstance,
    config: &MiningConfig,
    opts: &KnapsackOptions,
) -> Result<KnapsackOutcome> {
    let incumbent = Incumbent::new();
    let deadline = Instant::now() + config.time_limit;
    let mut proven = true;
    for n in 1..=inst.len() {
        if Instant::now() >= deadline {
            proven = false;
            break;
        }
        proven &= mine_fixed(inst, n, config, opts, deadline, &incumbent)?;
    }
    Ok(finish(inst, incumbent, proven))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cols(vals: &[f64]) -> Vec<Vec<f64>> {
        vals.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn tie_between_two_pairs_still_reports_the_optimal_profit() {
        let inst = KnapsackInstance::new(
            &cols(&[1.0, 2.0, 3.0, 4.0]),
            &[1.0, 2.0, 3.0, 4.0],
            &[5.0],
        )
        .unwrap();
        let got = solve_mf01k(&inst, 2, &MiningConfig::default(), &KnapsackOptions::default())
            .unwrap();
        let best = got.best.unwrap();
        assert_eq!(best.profit, 5.0);
        assert!(best.items == vec![1, 2] || best.items == vec![0, 3]);
        assert!(got.proven);
    }

    #[test]
    fn loose_budgets_select_the_whole_set() {
        let costs = vec![vec![2.0, 1.0], vec![3.0, 5.0], vec![4.0, 2.0]];
        let total: Vec<f64> = (0..2).map(|t| costs.iter().map(|r| r[t]).sum()).collect();
        let inst = KnapsackInstance::new(&costs, &[1.0, 2.0, 3.0], &total).unwrap();
        let got = solve_mf01k(&inst, 3, &MiningConfig::default(), &KnapsackOptions::default())
            .unwrap();
        assert_eq!(got.best.unwrap().items, vec![0, 1, 2]);
    }

    #[test]
    fn classic_small_instance_maximizes_value() {
        let inst = KnapsackInstance::new(
            &cols(&[2.0, 3.0, 4.0, 5.0]),
            &[3.0, 4.0, 5.0, 6.0],
            &[5.0],
        )
        .unwrap();
        let got = solve_01(&inst, &MiningConfig::default(), &KnapsackOptions::default()).unwrap();
        let best = got.best.unwrap();
        assert_eq!(best.profit, 7.0);
        assert_eq!(best.items, vec![0, 1]);
    }

    #[test]
    fn zero_budget_with_positive_costs_is_infeasible() {
        let inst =
            KnapsackInstance::new(&cols(&[1.0, 2.0]), &[10.0, 20.0], &[0.0]).unwrap();
        let got = solve_01(&inst, &MiningConfig::default(), &KnapsackOptions::default()).unwrap();
        assert!(got.best.is_none());
        assert!(got.proven);
    }

    #[test]
    fn random_instances_match_oracle_across_knobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8080);
        for case in 0..60 {
            let n_items = rng.gen_range(4..=12);
            let d = rng.gen_range(1..=3);
            let costs: Vec<Vec<f64>> = (0..n_items)
                .map(|_| (0..d).map(|_| rng.gen_range(0..64) as f64 / 4.0).collect())
                .collect();
            let profits: Vec<f64> =
                (0..n_items).map(|_| rng.gen_range(1..128) as f64 / 8.0).collect();
            let budgets: Vec<f64> = (0..d)
                .map(|t| {
                    let total: f64 = costs.iter().map(|r| r[t]).sum();
                    total * rng.gen_range(3..=7) as f64 / 10.0
                })
                .collect();
            let n = rng.gen_range(1..=n_items / 2 + 1);
            let want = oracle::brute_knapsack(&costs, &profits, &budgets, Some(n)).unwrap();
            let inst = KnapsackInstance::new(&costs, &profits, &budgets).unwrap();
            for (pruning, phi, threads) in
                [(true, 16, 1), (true, 1, 1), (false, 16, 1), (true, 16, 2)]
            {
                let mut cfg = MiningConfig::default();
                cfg.threads = threads;
                let opts = KnapsackOptions { phi, pruning };
                let got = solve_mf01k(&inst, n, &cfg, &opts).unwrap();
                assert!(got.proven);
                match (&want, &got.best) {
                    (None, None) => {}
                    (Some((wp, _)), Some(best)) => {
                        assert_eq!(best.profit, *wp, "case {case} pruning {pruning} phi {phi}");
                        assert!(best
                            .costs
                            .iter()
                            .zip(&budgets)
                            .all(|(c, b)| c <= b));
                        let re: f64 =
                            best.items.iter().map(|&i| profits[i as usize]).sum();
                        assert_eq!(re, best.profit);
                    }
                    (w, g) => panic!("case {case}: oracle {w:?} vs solver {g:?}"),
                }
            }
        }
    }

    #[test]
    fn variable_size_agrees_with_best_fixed_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(9090);
        for case in 0..30 {
            let n_items = rng.gen_range(3..=10);
            let costs: Vec<Vec<f64>> = (0..n_items)
                .map(|_| vec![rng.gen_range(0..32) as f64 / 2.0, rng.gen_range(0..32) as f64 / 2.0])
                .collect();
            let profits: Vec<f64> =
                (0..n_items).map(|_| rng.gen_range(1..64) as f64 / 4.0).collect();
            let budgets = vec![
                rng.gen_range(5..40) as f64,
                rng.gen_range(5..40) as f64,
            ];
            let inst = KnapsackInstance::new(&costs, &profits, &budgets).unwrap();
            let all = solve_01(&inst, &MiningConfig::default(), &KnapsackOptions::default())
                .unwrap();
            let mut best_fixed: Option<f64> = None;
            for n in 1..=n_items {
                let got =
                    solve_mf01k(&inst, n, &MiningConfig::default(), &KnapsackOptions::default())
                        .unwrap();
                if let Some(b) = got.best {
                    best_fixed = Some(best_fixed.map_or(b.profit, |p: f64| p.max(b.profit)));
                }
            }
            let want = oracle::brute_knapsack(&costs, &profits, &budgets, None).unwrap();
            match (&want, &all.best, best_fixed) {
                (None, None, None) => {}
                (Some((wp, _)), Some(b), Some(bf)) => {
                    assert_eq!(b.profit, *wp, "case {case}");
                    assert_eq!(bf, *wp, "case {case}");
                }
                other => panic!("case {case}: mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn infeasible_size_reports_clean_none() {
        let inst = KnapsackInstance::new(&cols(&[3.0, 4.0, 5.0]), &[1.0, 2.0, 3.0], &[6.0])
            .unwrap();
        let got = solve_mf01k(&inst, 3, &MiningConfig::default(), &KnapsackOptions::default())
            .unwrap();
        assert!(got.best.is_none());
        assert!(got.proven);
    }
}
