//! Depth-first subspace search over contracted hyperrectangles.
//!
//! Each node is contracted, its collapsed dimensions are moved into a fixed
//! buffer (shrinking the problem and its target range), and the survivor is
//! split at the narrowest dimension into a left half (indexes up to the
//! midpoint) and a right half. Frames live on an explicit stack; the right
//! half of a frame is materialized lazily by restoring the saved upper-bound
//! prefix and raising the lower bounds past the midpoint. A frame whose right
//! half is still pending can donate that half to an idle worker as a
//! self-contained task.

use crate::algebra::Algebra;
use crate::contraction::{Contractor, RunningSums, Side};

/// A self-contained unit of search: bounds plus the (already reduced) target
/// range and running sums, and the superset positions fixed on the path that
/// produced it.
#[derive(Debug, Clone)]
pub struct Task<E> {
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
    pub min: E,
    pub max: E,
    pub sums: RunningSums<E>,
    pub fixed: Vec<u32>,
}

impl<E> Task<E> {
    /// Root task over explicit bounds and range element values.
    pub fn root<A: Algebra<Elem = E>>(
        alg: &A,
        elems: &[E],
        lower: Vec<u32>,
        upper: Vec<u32>,
        min: E,
        max: E,
    ) -> Self {
        let sums = RunningSums::compute(alg, elems, &lower, &upper);
        Self {
            lower,
            upper,
            min,
            max,
            sums,
            fixed: Vec::new(),
        }
    }
}

/// How a walk ended: search space exhausted, or stopped early by the driver
/// (quota, deadline, cancellation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Walk {
    Exhausted,
    Stopped,
}

/// Callbacks a solver layers on top of the walk. `members` passed to
/// `solution` are superset positions in fixing order, not sorted.
pub trait Driver<E> {
    /// Receive one complete solution; return false to stop the walk.
    fn solution(&mut self, members: &[u32]) -> bool;
    /// Inspect the node's total upper-bound sum (fixed members included)
    /// right after contraction; return true to discard the node.
    fn prune(&mut self, _upper_total: &E) -> bool {
        false
    }
    /// Polled once per contraction; return true to stop the walk.
    fn stopped(&mut self) -> bool {
        false
    }
    /// Whether an idle co-worker is asking for a share of this walk.
    fn donation_wanted(&mut self) -> bool {
        false
    }
    fn donate(&mut self, _task: Task<E>) {}
}

struct Frame<E> {
    branch: u8,
    kappa: usize,
    mid: u32,
    n_fixed: usize,
    lower: Vec<u32>,
    upper: Vec<u32>,
    min: E,
    max: E,
    sums: RunningSums<E>,
    u_saved: Vec<u32>,
    sum_u_saved: E,
}

struct Node<E> {
    lower: Vec<u32>,
    upper: Vec<u32>,
    min: E,
    max: E,
    sums: RunningSums<E>,
}

pub struct Engine<'a, A: Algebra> {
    pub contractor: Contractor<'a, A>,
    /// Branch into one child per candidate index of the narrowest dimension
    /// instead of two halves. Benchmark arm; donation is not supported.
    pub variable_tree: bool,
}

impl<'a, A: Algebra> Engine<'a, A> {
    pub fn new(contractor: Contractor<'a, A>) -> Self {
        Self {
            contractor,
            variable_tree: false,
        }
    }

    fn alg(&self) -> &'a A {
        self.contractor.alg
    }

    fn elems(&self) -> &'a [A::Elem] {
        self.contractor.elems
    }

    /// Narrowest dimension, lowest index on ties.
    fn pick_kappa(lower: &[u32], upper: &[u32]) -> usize {
        let mut best = 0;
        let mut width = u32::MAX;
        for (t, (l, u)) in lower.iter().zip(upper).enumerate() {
            let w = u - l;
            if w < width {
                width = w;
                best = t;
            }
        }
        best
    }

    /// Caps the upper bounds of dimensions 0..=kappa so the split dimension
    /// stays at or below `mid`. Walks downward and stops at the first bound
    /// already inside the cap.
    fn cap_left(&self, upper: &mut [u32], sums: &mut RunningSums<A::Elem>, kappa: usize, mid: u32) {
        let alg = self.alg();
        let elems = self.elems();
        for t in (0..=kappa).rev() {
            let cap = mid - (kappa - t) as u32;
            if upper[t] <= cap {
                break;
            }
            alg.sub_assign(&mut sums.upper, &elems[upper[t] as usize]);
            upper[t] = cap;
            alg.add_assign(&mut sums.upper, &elems[cap as usize]);
        }
    }

    /// Raises the lower bounds of dimensions kappa.. past `mid`. Walks upward
    /// and stops at the first bound already above the raise.
    fn raise_right(&self, lower: &mut [u32], sums: &mut RunningSums<A::Elem>, kappa: usize, mid: u32) {
        let alg = self.alg();
        let elems = self.elems();
        for t in kappa..lower.len() {
            let raise = mid + 1 + (t - kappa) as u32;
            if lower[t] >= raise {
                break;
            }
            alg.sub_assign(&mut sums.lower, &elems[lower[t] as usize]);
            lower[t] = raise;
            alg.add_assign(&mut sums.lower, &elems[raise as usize]);
        }
    }

    /// Moves collapsed dimensions of `node` into `fixed`, shrinking the
    /// target range and running sums by the fixed elements. Returns how many
    /// dimensions were dropped plus whether the shrunk range is still
    /// satisfiable.
    fn collect_fixed(
        &self,
        node: &mut Node<A::Elem>,
        fixed: &mut Vec<u32>,
        fixed_sum: &mut A::Elem,
    ) -> (usize, bool) {
        let alg = self.alg();
        let elems = self.elems();
        let n = node.lower.len();
        let mut w = 0;
        let mut dropped = 0;
        for t in 0..n {
            let (l, u) = (node.lower[t], node.upper[t]);
            if l == u {
                let e = &elems[l as usize];
                fixed.push(l);
                alg.add_assign(fixed_sum, e);
                alg.sub_assign(&mut node.min, e);
                alg.sub_assign(&mut node.max, e);
                alg.sub_assign(&mut node.sums.lower, e);
                alg.sub_assign(&mut node.sums.upper, e);
                dropped += 1;
            } else {
                node.lower[w] = l;
                node.upper[w] = u;
                w += 1;
            }
        }
        let mut alive = true;
        if dropped > 0 {
            node.lower.truncate(w);
            node.upper.truncate(w);
            alive = alg.clamp_range(&mut node.min, &mut node.max);
        }
        (dropped, alive)
    }

    fn pop_fixed(&self, fixed: &mut Vec<u32>, fixed_sum: &mut A::Elem, count: usize) {
        let alg = self.alg();
        let elems = self.elems();
        let keep = fixed.len() - count;
        for &i in &fixed[keep..] {
            alg.sub_assign(fixed_sum, &elems[i as usize]);
        }
        fixed.truncate(keep);
    }

    /// Depth-first mining of one task. Solutions reach the driver through
    /// `Driver::solution`; the walk ends when the space is exhausted or the
    /// driver stops it.
    pub fn mine(&self, task: Task<A::Elem>, driver: &mut impl Driver<A::Elem>) -> Walk {
        let alg = self.alg();
        let mut fixed = task.fixed;
        let mut fixed_sum = alg.zero();
        for &i in &fixed {
            alg.add_assign(&mut fixed_sum, &self.elems()[i as usize]);
        }
        let base_fixed = fixed.len();
        let mut cur = Node {
            lower: task.lower,
            upper: task.upper,
            min: task.min,
            max: task.max,
            sums: task.sums,
        };
        if self.variable_tree {
            let mut scratch = alg.zero();
            return match self.mine_variable(&mut cur, driver, &mut fixed, &mut fixed_sum, &mut scratch)
            {
                Ok(()) => Walk::Exhausted,
                Err(()) => Walk::Stopped,
            };
        }

        let n0 = cur.lower.len();
        let depth_cap = n0 * (usize::BITS - (self.elems().len().max(2) - 1).leading_zeros()) as usize + n0;
        let mut stack: Vec<Frame<A::Elem>> = Vec::with_capacity(depth_cap);
        let mut scratch = alg.zero();

        'outer: loop {
            if driver.stopped() {
                return Walk::Stopped;
            }
            if driver.donation_wanted() {
                if let Some(t) = self.split_off_task(&mut stack, &fixed, base_fixed) {
                    driver.donate(t);
                }
            }
            let feasible = self
                .contractor
                .contract(
                    &mut cur.lower,
                    &mut cur.upper,
                    &cur.min,
                    &cur.max,
                    &mut cur.sums,
                    Side::Lower,
                )
                .is_ok();
            let mut dropped = 0;
            let mut dead = !feasible;
            if feasible {
                let (d, alive) = self.collect_fixed(&mut cur, &mut fixed, &mut fixed_sum);
                dropped = d;
                alg.assign(&mut scratch, &fixed_sum);
                alg.add_assign(&mut scratch, &cur.sums.upper);
                if !alive || driver.prune(&scratch) {
                    dead = true;
                } else if cur.lower.is_empty() {
                    if !driver.solution(&fixed) {
                        return Walk::Stopped;
                    }
                    dead = true;
                }
            }
            if !dead {
                // Split: remember how to build the right half, keep the left.
                let kappa = Self::pick_kappa(&cur.lower, &cur.upper);
                let mid = (cur.lower[kappa] + cur.upper[kappa]) / 2;
                let u_saved = cur.upper[..=kappa].to_vec();
                let sum_u_saved = cur.sums.upper.clone();
                self.cap_left(&mut cur.upper, &mut cur.sums, kappa, mid);
                stack.push(Frame {
                    branch: 0,
                    kappa,
                    mid,
                    n_fixed: dropped,
                    lower: cur.lower.clone(),
                    upper: cur.upper.clone(),
                    min: cur.min.clone(),
                    max: cur.max.clone(),
                    sums: cur.sums.clone(),
                    u_saved,
                    sum_u_saved,
                });
                continue 'outer;
            }
            self.pop_fixed(&mut fixed, &mut fixed_sum, dropped);
            // Unwind to the nearest frame with an unexplored right half.
            loop {
                let Some(top) = stack.last_mut() else {
                    return Walk::Exhausted;
                };
                if top.branch == 0 {
                    top.branch = 1;
                    let kappa = top.kappa;
                    top.upper[..=kappa].copy_from_slice(&top.u_saved);
                    alg.assign(&mut top.sums.upper, &top.sum_u_saved);
                    let mid = top.mid;
                    self.raise_right(&mut top.lower, &mut top.sums, kappa, mid);
                    cur = Node {
                        lower: top.lower.clone(),
                        upper: top.upper.clone(),
                        min: top.min.clone(),
                        max: top.max.clone(),
                        sums: top.sums.clone(),
                    };
                    continue 'outer;
                }
                let count = top.n_fixed;
                self.pop_fixed(&mut fixed, &mut fixed_sum, count);
                stack.pop();
            }
        }
    }

    /// Hands out the right half of the bottommost frame still holding one.
    /// The donated task is self-contained; the local walk keeps the left
    /// subtree it is currently inside.
    fn split_off_task(
        &self,
        stack: &mut [Frame<A::Elem>],
        fixed: &[u32],
        base_fixed: usize,
    ) -> Option<Task<A::Elem>> {
        let mut prefix = base_fixed;
        for frame in stack.iter_mut() {
            prefix += frame.n_fixed;
            if frame.branch != 0 {
                continue;
            }
            frame.branch = 1;
            let kappa = frame.kappa;
            let mut lower = frame.lower.clone();
            let mut upper = frame.upper.clone();
            upper[..=kappa].copy_from_slice(&frame.u_saved);
            let mut sums = RunningSums {
                lower: frame.sums.lower.clone(),
                upper: frame.sum_u_saved.clone(),
            };
            self.raise_right(&mut lower, &mut sums, kappa, frame.mid);
            // The frame keeps mining its left subtree; only metadata changed.
            return Some(Task {
                lower,
                upper,
                min: frame.min.clone(),
                max: frame.max.clone(),
                sums,
                fixed: fixed[..prefix].to_vec(),
            });
        }
        None
    }

    fn mine_variable(
        &self,
        node: &mut Node<A::Elem>,
        driver: &mut impl Driver<A::Elem>,
        fixed: &mut Vec<u32>,
        fixed_sum: &mut A::Elem,
        scratch: &mut A::Elem,
    ) -> Result<(), ()> {
        let alg = self.alg();
        if driver.stopped() {
            return Err(());
        }
        if self
            .contractor
            .contract(
                &mut node.lower,
                &mut node.upper,
                &node.min,
                &node.max,
                &mut node.sums,
                Side::Lower,
            )
            .is_err()
        {
            return Ok(());
        }
        let (dropped, alive) = self.collect_fixed(node, fixed, fixed_sum);
        alg.assign(scratch, fixed_sum);
        alg.add_assign(scratch, &node.sums.upper);
        let mut out = Ok(());
        if !alive || driver.prune(scratch) {
            // discarded
        } else if node.lower.is_empty() {
            if !driver.solution(fixed) {
                out = Err(());
            }
        } else {
            let kappa = Self::pick_kappa(&node.lower, &node.upper);
            let (lo, hi) = (node.lower[kappa], node.upper[kappa]);
            'vals: for val in lo..=hi {
                let mut child = Node {
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    min: node.min.clone(),
                    max: node.max.clone(),
                    sums: node.sums.clone(),
                };
                // Pin dimension kappa at val; neighbors shift to keep strict
                // ordering. Contraction will collapse and drop it. val == 0
                // leaves lower bounds untouched (they are already >= 0).
                if val > 0 {
                    self.raise_right(&mut child.lower, &mut child.sums, kappa, val - 1);
                }
                self.cap_left(&mut child.upper, &mut child.sums, kappa, val);
                if self
                    .mine_variable(&mut child, driver, fixed, fixed_sum, scratch)
                    .is_err()
                {
                    out = Err(());
                    break 'vals;
                }
            }
        }
        self.pop_fixed(fixed, fixed_sum, dropped);
        out
    }

    /// Breadth-first expansion of a root task into at least `want` leaves of
    /// the same depth (or until the space is exhausted). Solutions discovered
    /// along the way reach the driver. The returned tasks partition the
    /// unexplored remainder of the root.
    pub fn expand_tasks(
        &self,
        root: Task<A::Elem>,
        want: usize,
        driver: &mut impl Driver<A::Elem>,
    ) -> Vec<Task<A::Elem>> {
        let alg = self.alg();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(root);
        let mut scratch = alg.zero();
        while queue.len() < want {
            let Some(mut task) = queue.pop_front() else {
                break;
            };
            if driver.stopped() {
                queue.push_front(task);
                break;
            }
            let feasible = self
                .contractor
                .contract(
                    &mut task.lower,
                    &mut task.upper,
                    &task.min,
                    &task.max,
                    &mut task.sums,
                    Side::Lower,
                )
                .is_ok();
            if !feasible {
                continue;
            }
            let mut node = Node {
                lower: task.lower,
                upper: task.upper,
                min: task.min,
                max: task.max,
                sums: task.sums,
            };
            let mut fixed = task.fixed;
            let mut fixed_sum = alg.zero();
            for &i in &fixed {
                alg.add_assign(&mut fixed_sum, &self.elems()[i as usize]);
            }
            let (_, alive) = self.collect_fixed(&mut node, &mut fixed, &mut fixed_sum);
            alg.assign(&mut scratch, &fixed_sum);
            alg.add_assign(&mut scratch, &node.sums.upper);
            if !alive || driver.prune(&scratch) {
                continue;
            }
            if node.lower.is_empty() {
                if !driver.solution(&fixed) {
                    break;
                }
                continue;
            }
            let kappa = Self::pick_kappa(&node.lower, &node.upper);
            let mid = (node.lower[kappa] + node.upper[kappa]) / 2;
            let mut left = Task {
                lower: node.lower.clone(),
                upper: node.upper.clone(),
                min: node.min.clone(),
                max: node.max.clone(),
                sums: node.sums.clone(),
                fixed: fixed.clone(),
            };
            self.cap_left(&mut left.upper, &mut left.sums, kappa, mid);
            let mut right = Task {
                lower: node.lower,
                upper: node.upper,
                min: node.min,
                max: node.max,
                sums: node.sums,
                fixed,
            };
            self.raise_right(&mut right.lower, &mut right.sums, kappa, mid);
            queue.push_back(left);
            queue.push_back(right);
        }
        queue.into()
    }
}
