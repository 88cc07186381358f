//! Exact Generalized Assignment: T tasks, A agents, maximize total profit
//! under per-agent budgets, every task assigned to exactly one agent.
//!
//! Each task becomes a block of A rows sorted by profit ascending, the
//! profit replaced by its rank (the key). A universal multiplier M_u, an
//! integer larger than every cost, folds cost and key into one scaled value
//! per row: rank * M_u + cost at the agent's own column. Scaled values rise
//! strictly with rank, so interval endpoints give per-block extremes and
//! bound propagation stays exact. One index per block replaces the sorted
//! superset; bounds contract block-locally instead of through consecutive
//! window sums.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::knapsack::Incumbent;
use crate::model::MiningConfig;

#[derive(Debug, Clone)]
pub struct GapInstance {
    cost: Vec<Vec<f64>>,
    profit: Vec<Vec<f64>>,
    budgets: Vec<f64>,
}

impl GapInstance {
    pub fn new(cost: &[Vec<f64>], profit: &[Vec<f64>], budgets: &[f64]) -> Result<Self> {
        if cost.is_empty() || cost[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let agents = cost[0].len();
        if budgets.len() != agents {
            return Err(Error::DimensionMismatch {
                expected: agents,
                got: budgets.len(),
            });
        }
        if profit.len() != cost.len() {
            return Err(Error::DimensionMismatch {
                expected: cost.len(),
                got: profit.len(),
            });
        }
        for (i, (c, p)) in cost.iter().zip(profit).enumerate() {
            if c.len() != agents || p.len() != agents {
                return Err(Error::DimensionMismatch {
                    expected: agents,
                    got: c.len().min(p.len()),
                });
            }
            if c.iter().chain(p.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            if c.iter().any(|v| *v < 0.0) {
                return Err(Error::BadInstance(format!(
                    "negative cost in task {i}; costs must be >= 0"
                )));
            }
        }
        if budgets.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadInstance("budgets must be finite".into()));
        }
        Ok(Self {
            cost: cost.to_vec(),
            profit: profit.to_vec(),
            budgets: budgets.to_vec(),
        })
    }

    pub fn tasks(&self) -> usize {
        self.cost.len()
    }

    pub fn agents(&self) -> usize {
        self.budgets.len()
    }

    pub fn cost(&self) -> &[Vec<f64>] {
        &self.cost
    }

    pub fn profit(&self) -> &[Vec<f64>] {
        &self.profit
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }
}

/// One block row: the cost value, the agent column it belongs to, and the
/// profit rank within the block. Dense semantics: column `col` holds
/// (cost + key * M_u) / M_u, every other column holds `key`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactRow {
    pub cost: f64,
    pub col: u32,
    pub key: u32,
}

#[derive(Debug, Clone)]
pub struct GapSuperset {
    /// blocks[task][rank], ranks 0..A-1 by ascending profit.
    pub blocks: Vec<Vec<CompactRow>>,
    /// Integer strictly above every cost entry.
    pub m_u: f64,
    /// agent_perm[task][rank] = agent.
    pub agent_perm: Vec<Vec<u32>>,
    /// profit_by_rank[task][rank], nondecreasing per task.
    pub profit_by_rank: Vec<Vec<f64>>,
}

impl GapSuperset {
    /// Reconstructs the dense scaled row for tests and cross-checks.
    pub fn dense_row(&self, task: usize, rank: usize) -> Vec<f64> {
        let row = self.blocks[task][rank];
        (0..self.agent_perm[0].len() as u32)
            .map(|j| {
                if j == row.col {
                    (row.cost + row.key as f64 * self.m_u) / self.m_u
                } else {
                    row.key as f64
                }
            })
            .collect()
    }
}

/// Sorts each task's agents by profit ascending, ranks them, and fixes the
/// universal multiplier.
pub fn build_gap_superset(g: &GapInstance) -> GapSuperset {
    let agents = g.agents();
    let max_cost = g
        .cost
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let m_u = max_cost.floor() + 1.0;
    let mut blocks = Vec::with_capacity(g.tasks());
    let mut agent_perm = Vec::with_capacity(g.tasks());
    let mut profit_by_rank = Vec::with_capacity(g.tasks());
    for t in 0..g.tasks() {
        let mut order: Vec<u32> = (0..agents as u32).collect();
        order.sort_by(|&a, &b| g.profit[t][a as usize].total_cmp(&g.profit[t][b as usize]));
        let rows: Vec<CompactRow> = order
            .iter()
            .enumerate()
            .map(|(rank, &a)| CompactRow {
                cost: g.cost[t][a as usize],
                col: a,
                key: rank as u32,
            })
            .collect();
        profit_by_rank.push(order.iter().map(|&a| g.profit[t][a as usize]).collect());
        agent_perm.push(order);
        blocks.push(rows);
    }
    GapSuperset {
        blocks,
        m_u,
        agent_perm,
        profit_by_rank,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSolution {
    /// assignment[task] = agent.
    pub assignment: Vec<u32>,
    pub profit: f64,
    /// Summed cost per agent.
    pub agent_loads: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GapOutcome {
    pub best: Option<GapSolution>,
    /// False when the time limit cut the search.
    pub proven: bool,
}

#[derive(Clone)]
struct Node {
    sigma: u32,
    lo: Vec<u32>,
    hi: Vec<u32>,
}

enum Contracted {
    Dead,
    Leaf,
    Open,
}

struct Search<'a> {
    g: &'a GapInstance,
    sup: &'a GapSuperset,
    /// Scaled row value at its own column: key * M_u + cost.
    scaled: Vec<Vec<f64>>,
    incumbent: &'a Incumbent,
}

impl Search<'_> {
    /// Scaled contribution of (task, rank) to agent column t.
    fn contrib(&self, k: usize, rank: u32, t: usize) -> f64 {
        let row = self.sup.blocks[k][rank as usize];
        if row.col as usize == t {
            self.scaled[k][rank as usize]
        } else {
            rank as f64 * self.sup.m_u
        }
    }

    /// Block-local fixpoint: key-sum tightening, per-column budget endpoint
    /// shrinking, and the incumbent profit bound. Never discards a feasible
    /// completion.
    fn contract(&self, node: &mut Node) -> Contracted {
        let blocks = self.g.tasks();
        let agents = self.g.agents();
        let sigma = node.sigma as i64;
        loop {
            let mut changed = false;
            let low_sum: i64 = node.lo.iter().map(|&v| v as i64).sum();
            let high_sum: i64 = node.hi.iter().map(|&v| v as i64).sum();
            if sigma < low_sum || sigma > high_sum {
                return Contracted::Dead;
            }
            for k in 0..blocks {
                let floor = sigma - (high_sum - node.hi[k] as i64);
                let ceil = sigma - (low_sum - node.lo[k] as i64);
                if floor > node.lo[k] as i64 {
                    node.lo[k] = floor as u32;
                    changed = true;
                }
                if ceil < node.hi[k] as i64 {
                    node.hi[k] = ceil as u32;
                    changed = true;
                }
                if node.lo[k] > node.hi[k] {
                    return Contracted::Dead;
                }
            }
            // Scaled values rise strictly with rank, so the interval minimum
            // per column sits at lo and admissibility is downward-closed:
            // only upper endpoints ever shrink here.
            for t in 0..agents {
                let cap = self.g.budgets[t] + sigma as f64 * self.sup.m_u;
                let base: f64 = (0..blocks).map(|k| self.contrib(k, node.lo[k], t)).sum();
                if base > cap {
                    return Contracted::Dead;
                }
                for k in 0..blocks {
                    let slack = cap - (base - self.contrib(k, node.lo[k], t));
                    while node.hi[k] > node.lo[k] && self.contrib(k, node.hi[k], t) > slack {
                        node.hi[k] -= 1;
                        changed = true;
                    }
                    if self.contrib(k, node.hi[k], t) > slack {
                        return Contracted::Dead;
                    }
                }
            }
            let profit_cap: f64 = (0..blocks)
                .map(|k| self.sup.profit_by_rank[k][node.hi[k] as usize])
                .sum();
            if profit_cap <= self.incumbent.profit() {
                return Contracted::Dead;
            }
            if !changed {
                break;
            }
        }
        if node.lo == node.hi {
            Contracted::Leaf
        } else {
            Contracted::Open
        }
    }

    /// Exact original-domain acceptance of a fully pinned node.
    fn offer_leaf(&self, node: &Node) {
        let key_sum: u32 = node.lo.iter().sum();
        if key_sum != node.sigma {
            return;
        }
        let mut loads = vec![0.0; self.g.agents()];
        let mut profit = 0.0;
        let mut assignment = vec![0u32; self.g.tasks()];
        for (k, &rank) in node.lo.iter().enumerate() {
            let agent = self.sup.agent_perm[k][rank as usize];
            assignment[k] = agent;
            loads[agent as usize] += self.g.cost[k][agent as usize];
            profit += self.g.profit[k][agent as usize];
        }
        if loads.iter().zip(&self.g.budgets).all(|(l, b)| l <= b) {
            self.incumbent.offer(profit, assignment);
        }
    }

    /// Narrowest splittable block, midpoint split.
    fn split(&self, node: &Node) -> (Node, Node) {
        let mut pick = usize::MAX;
        let mut width = u32::MAX;
        for k in 0..self.g.tasks() {
            let w = node.hi[k] - node.lo[k];
            if w >= 1 && w < width {
                width = w;
                pick = k;
            }
        }
        let mid = (node.lo[pick] + node.hi[pick]) / 2;
        let mut left = node.clone();
        left.hi[pick] = mid;
        let mut right = node.clone();
        right.lo[pick] = mid + 1;
        (left, right)
    }
}

struct GapQueue {
    state: Mutex<(VecDeque<Node>, usize)>,
    wakeup: Condvar,
    hungry: AtomicUsize,
}

/// Maximizes total profit over all full assignments within budgets.
pub fn solve_gap(
    inst: &GapInstance,
    config: &MiningConfig,
    phi: usize,
) -> Result<GapOutcome> {
    if phi == 0 {
        return Err(Error::BadInstance("task expansion factor must be >= 1".into()));
    }
    let sup = build_gap_superset(inst);
    let blocks = inst.tasks();
    let agents = inst.agents();
    let scaled: Vec<Vec<f64>> = sup
        .blocks
        .iter()
        .map(|rows| {
            rows.iter()
                .map(|r| r.key as f64 * sup.m_u + r.cost)
                .collect()
        })
        .collect();
    let incumbent = Incumbent::new();
    let search = Search {
        g: inst,
        sup: &sup,
        scaled,
        incumbent: &incumbent,
    };
    let max_sigma = (blocks * (agents - 1)) as u32;
    if max_sigma as u128 + 1 > config.max_target_rows as u128 {
        return Err(Error::TargetRowCap {
            rows: max_sigma as u128 + 1,
            cap: config.max_target_rows,
        });
    }

    let deadline = Instant::now() + config.time_limit;
    let timed_out = AtomicBool::new(false);
    let cancel = AtomicBool::new(false);
    let threads = config.threads.max(1);
    let want = threads * phi;

    // Seed: high key sums first (profit-rich ranks), each expanded
    // breadth-first until the queue holds enough nodes.
    let mut seeded: VecDeque<Node> = VecDeque::new();
    for sigma in (0..=max_sigma).rev() {
        let mut frontier = VecDeque::new();
        frontier.push_back(Node {
            sigma,
            lo: vec![0; blocks],
            hi: vec![(agents - 1) as u32; blocks],
        });
        while let Some(mut node) = frontier.pop_front() {
            if frontier.len() + seeded.len() >= want {
                frontier.push_front(node);
                break;
            }
            match search.contract(&mut node) {
                Contracted::Dead => {}
                Contracted::Leaf => search.offer_leaf(&node),
                Contracted::Open => {
                    let (left, right) = search.split(&node);
                    frontier.push_back(left);
                    frontier.push_back(right);
                }
            }
        }
        seeded.extend(frontier);
    }

    let queue = GapQueue {
        state: Mutex::new((seeded, 0)),
        wakeup: Condvar::new(),
        hungry: AtomicUsize::new(0),
    };

    let worker = || {
        let mut pending: Vec<Node> = Vec::new();
        loop {
            let task = {
                let mut state = queue.state.lock().unwrap();
                loop {
                    if let Some(t) = state.0.pop_front() {
                        state.1 += 1;
                        break Some(t);
                    }
                    if state.1 == 0 || cancel.load(Ordering::Relaxed) {
                        break None;
                    }
                    queue.hungry.fetch_add(1, Ordering::Relaxed);
                    state = queue.wakeup.wait(state).unwrap();
                    queue.hungry.fetch_sub(1, Ordering::Relaxed);
                }
            };
            let Some(top) = task else { break };
            pending.clear();
            pending.push(top);
            let mut polls = 0u32;
            while let Some(mut node) = pending.pop() {
                polls = polls.wrapping_add(1);
                if polls & 0x3f == 0 {
                    if cancel.load(Ordering::Relaxed) {
                        break;
                    }
                    if Instant::now() >= deadline {
                        timed_out.store(true, Ordering::Relaxed);
                        cancel.store(true, Ordering::Relaxed);
                        break;
                    }
                }
                if queue.hungry.load(Ordering::Relaxed) > 0 && !pending.is_empty() {
                    // Donate the oldest (largest) unexplored half.
                    let give = pending.remove(0);
                    let mut state = queue.state.lock().unwrap();
                    state.0.push_back(give);
                    queue.wakeup.notify_one();
                }
                match search.contract(&mut node) {
                    Contracted::Dead => {}
                    Contracted::Leaf => search.offer_leaf(&node),
                    Contracted::Open => {
                        let (left, right) = search.split(&node);
                        pending.push(right);
                        pending.push(left);
                    }
                }
            }
            let mut state = queue.state.lock().unwrap();
            state.1 -= 1;
            if state.1 == 0 {
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

    let proven = !timed_out.load(Ordering::Relaxed);
    let best = incumbent
        .best
        .into_inner()
        .unwrap()
        .map(|(profit, assignment)| {
            let mut loads = vec![0.0; agents];
            for (k, &a) in assignment.iter().enumerate() {
                loads[a as usize] += inst.cost[k][a as usize];
            }
            GapSolution {
                assignment,
                profit,
                agent_loads: loads,
            }
        });
    Ok(GapOutcome { best, proven })
}
