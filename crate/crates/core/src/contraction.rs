//! Hyperrectangle contraction: squeeze per-dimension index bounds against the
//! target range until they stop moving.
//!
//! For a sorted superset and bounds `l[k] <= i_k <= u[k]` (indexes strictly
//! increasing across dimensions), a lower sweep raises each `l[k]` to the
//! smallest index that can still reach the range minimum when every other
//! dimension is as large as its bounds allow; an upper sweep mirrors it
//! against the range maximum. Each update decomposes the extremal
//! configuration at a crossover dimension (the cursor), so the candidate sums
//! are sums of consecutive elements and come from a precomputed window table
//! in O(1).

use crate::algebra::Algebra;

/// Sums of consecutive element runs, column-major: `window(r, c)` is the sum
/// of the `c + 1` elements starting at position `r`. Column `c` is built from
/// column `c - 1` by one add, so a lookup equals the left-to-right
/// accumulation of its run. Within a column, entries are nondecreasing in
/// `r`, which makes bisection over window starts sound.
pub struct WindowSums<E> {
    cols: Vec<Vec<E>>,
}

impl<E: Clone> WindowSums<E> {
    /// Builds windows of 1..=`max_window` elements over `elems`.
    pub fn build<A: Algebra<Elem = E>>(alg: &A, elems: &[E], max_window: usize) -> Self {
        assert!(max_window >= 1 && max_window <= elems.len());
        let n = elems.len();
        let mut cols = Vec::with_capacity(max_window);
        cols.push(elems.to_vec());
        for c in 1..max_window {
            let mut col = Vec::with_capacity(n - c);
            for r in 0..n - c {
                let mut e = cols[c - 1][r].clone();
                alg.add_assign(&mut e, &elems[r + c]);
                col.push(e);
            }
            cols.push(col);
        }
        Self { cols }
    }

    /// Sum of the `extra + 1` consecutive elements starting at `start`.
    pub fn window(&self, start: usize, extra: usize) -> &E {
        &self.cols[extra][start]
    }

    pub fn max_window(&self) -> usize {
        self.cols.len()
    }
}

/// Contraction failed: no index array inside the bounds can reach the range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infeasible;

/// Which side a sweep tightens first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Running sums of the bound elements, `lower = sum of elems[l[k]]` and
/// `upper = sum of elems[u[k]]`, kept incrementally as bounds move.
#[derive(Debug, Clone)]
pub struct RunningSums<E> {
    pub lower: E,
    pub upper: E,
}

impl<E> RunningSums<E> {
    pub fn compute<A: Algebra<Elem = E>>(alg: &A, elems: &[E], l: &[u32], u: &[u32]) -> Self {
        let mut lower = alg.zero();
        let mut upper = alg.zero();
        for &i in l {
            alg.add_assign(&mut lower, &elems[i as usize]);
        }
        for &i in u {
            alg.add_assign(&mut upper, &elems[i as usize]);
        }
        Self { lower, upper }
    }
}

/// Crossover cursor of one sweep. `pos` only advances toward the dimension
/// being tightened as the sweep proceeds, and `head`/`tail` carry the bound
/// element sums on the settled side of the crossover.
pub struct SweepCursor<E> {
    pub pos: usize,
    head: E,
    tail: E,
}

/// Borrowed contraction context over one superset.
pub struct Contractor<'a, A: Algebra> {
    pub alg: &'a A,
    pub elems: &'a [A::Elem],
    pub windows: &'a WindowSums<A::Elem>,
    /// Resolve bound updates by bisection over window starts instead of a
    /// linear scan. Both produce identical bounds: the tested predicate is
    /// monotone in the window start even under floating-point rounding.
    pub use_binary_search: bool,
}

impl<'a, A: Algebra> Contractor<'a, A> {
    pub fn new(alg: &'a A, elems: &'a [A::Elem], windows: &'a WindowSums<A::Elem>) -> Self {
        Self {
            alg,
            elems,
            windows,
            use_binary_search: false,
        }
    }

    /// Cursor for a lower sweep: crossover at dimension 0, tail holding
    /// `sum of elems[u[t]] for t >= 1`.
    pub fn lower_cursor(&self, u: &[u32]) -> SweepCursor<A::Elem> {
        let mut tail = self.alg.zero();
        for &i in &u[1..] {
            self.alg.add_assign(&mut tail, &self.elems[i as usize]);
        }
        SweepCursor {
            pos: 0,
            head: self.alg.zero(),
            tail,
        }
    }

    /// Cursor for an upper sweep: crossover at the last dimension, head
    /// holding `sum of elems[l[t]] for t < n - 1`.
    pub fn upper_cursor(&self, l: &[u32]) -> SweepCursor<A::Elem> {
        let n = l.len();
        let mut head = self.alg.zero();
        for &i in &l[..n - 1] {
            self.alg.add_assign(&mut head, &self.elems[i as usize]);
        }
        SweepCursor {
            pos: n - 1,
            head,
            tail: self.alg.zero(),
        }
    }

    fn le3(&self, lhs: &A::Elem, a: &A::Elem, w: &A::Elem, b: &A::Elem, tmp: &mut A::Elem) -> bool {
        self.alg.assign(tmp, a);
        self.alg.add_assign(tmp, w);
        self.alg.add_assign(tmp, b);
        self.alg.le(lhs, tmp)
    }

    fn ge3(&self, rhs: &A::Elem, a: &A::Elem, w: &A::Elem, b: &A::Elem, tmp: &mut A::Elem) -> bool {
        self.alg.assign(tmp, a);
        self.alg.add_assign(tmp, w);
        self.alg.add_assign(tmp, b);
        self.alg.le(tmp, rhs)
    }

    /// Raises `l[k]` to the smallest index whose best completion still
    /// reaches `min`. Writes and returns the new bound. The cursor must come
    /// from `lower_cursor` with `tail` advanced to `sum of elems[u[t]], t > k`.
    pub fn tighten_lower(
        &self,
        k: usize,
        l: &mut [u32],
        u: &[u32],
        min: &A::Elem,
        cur: &mut SweepCursor<A::Elem>,
        tmp: &mut A::Elem,
    ) -> Result<u32, Infeasible> {
        let mut lk = l[k];
        if k > 0 {
            lk = lk.max(l[k - 1] + 1);
        }
        if lk > u[k] {
            return Err(Infeasible);
        }
        // Advance the crossover until the best configuration that crosses
        // there reaches `min` and its top index clears the new lower bound.
        loop {
            if cur.pos > k {
                return Err(Infeasible);
            }
            let extra = k - cur.pos;
            let cap = u[cur.pos] + extra as u32;
            if cap >= lk
                && self.le3(
                    min,
                    &cur.head,
                    self.windows.window(u[cur.pos] as usize, extra),
                    &cur.tail,
                    tmp,
                )
            {
                break;
            }
            self.alg
                .add_assign(&mut cur.head, &self.elems[u[cur.pos] as usize]);
            cur.pos += 1;
        }
        let extra = k - cur.pos;
        let cap = u[cur.pos] + extra as u32;
        let start = if cur.pos > 0 {
            lk.max(u[cur.pos - 1] + extra as u32 + 1)
        } else {
            lk
        };
        debug_assert!(start <= cap);
        let alpha = if self.use_binary_search {
            let (mut lo, mut hi) = (start, cap);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                let row = (mid - extra as u32) as usize;
                if self.le3(min, &cur.head, self.windows.window(row, extra), &cur.tail, tmp) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo
        } else {
            let mut a = start;
            loop {
                let row = (a - extra as u32) as usize;
                if self.le3(min, &cur.head, self.windows.window(row, extra), &cur.tail, tmp) {
                    break a;
                }
                debug_assert!(a < cap);
                a += 1;
            }
        };
        l[k] = alpha;
        Ok(alpha)
    }

    /// Lowers `u[k]` to the largest index whose leanest completion still
    /// stays under `max`. Mirror of `tighten_lower`; the cursor must come
    /// from `upper_cursor` with `head` advanced to `sum of elems[l[t]], t < k`.
    pub fn tighten_upper(
        &self,
        k: usize,
        l: &[u32],
        u: &mut [u32],
        max: &A::Elem,
        cur: &mut SweepCursor<A::Elem>,
        tmp: &mut A::Elem,
    ) -> Result<u32, Infeasible> {
        let n = u.len();
        let mut uk = u[k];
        if k + 1 < n {
            uk = uk.min(u[k + 1] - 1);
        }
        if uk < l[k] {
            return Err(Infeasible);
        }
        loop {
            let extra = cur.pos - k;
            let floor = l[cur.pos] - extra as u32;
            if floor <= uk
                && self.ge3(
                    max,
                    &cur.head,
                    self.windows.window(floor as usize, extra),
                    &cur.tail,
                    tmp,
                )
            {
                break;
            }
            self.alg
                .add_assign(&mut cur.tail, &self.elems[l[cur.pos] as usize]);
            if cur.pos == k {
                return Err(Infeasible);
            }
            cur.pos -= 1;
        }
        let extra = cur.pos - k;
        let floor = l[cur.pos] - extra as u32;
        let ceil = if cur.pos + 1 < n {
            // Keep the next dimension's bound element strictly above the run.
            let lim = l[cur.pos + 1] as i64 - extra as i64 - 2;
            uk.min(lim.max(floor as i64) as u32)
        } else {
            uk
        };
        let alpha = if self.use_binary_search {
            let (mut lo, mut hi) = (floor, ceil);
            while lo < hi {
                let mid = lo + (hi - lo).div_ceil(2);
                if self.ge3(
                    max,
                    &cur.head,
                    self.windows.window(mid as usize, extra),
                    &cur.tail,
                    tmp,
                ) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        } else {
            let mut a = ceil;
            loop {
                if self.ge3(
                    max,
                    &cur.head,
                    self.windows.window(a as usize, extra),
                    &cur.tail,
                    tmp,
                ) {
                    break a;
                }
                debug_assert!(a > floor);
                a -= 1;
            }
        };
        u[k] = alpha;
        Ok(alpha)
    }

    /// One full lower pass, k ascending. Returns whether any bound moved.
    pub fn lower_sweep(
        &self,
        l: &mut [u32],
        u: &[u32],
        min: &A::Elem,
        sums: &mut RunningSums<A::Elem>,
    ) -> Result<bool, Infeasible> {
        let n = l.len();
        let mut cur = self.lower_cursor(u);
        let mut tmp = self.alg.zero();
        let mut changed = false;
        for k in 0..n {
            let old = l[k];
            let new = self.tighten_lower(k, l, u, min, &mut cur, &mut tmp)?;
            if new != old {
                changed = true;
                self.alg.sub_assign(&mut sums.lower, &self.elems[old as usize]);
                self.alg.add_assign(&mut sums.lower, &self.elems[new as usize]);
            }
            if k + 1 < n {
                self.alg
                    .sub_assign(&mut cur.tail, &self.elems[u[k + 1] as usize]);
            }
        }
        Ok(changed)
    }

    /// One full upper pass, k descending. Returns whether any bound moved.
    pub fn upper_sweep(
        &self,
        l: &[u32],
        u: &mut [u32],
        max: &A::Elem,
        sums: &mut RunningSums<A::Elem>,
    ) -> Result<bool, Infeasible> {
        let n = l.len();
        let mut cur = self.upper_cursor(l);
        let mut tmp = self.alg.zero();
        let mut changed = false;
        for k in (0..n).rev() {
            let old = u[k];
            let new = self.tighten_upper(k, l, u, max, &mut cur, &mut tmp)?;
            if new != old {
                changed = true;
                self.alg.sub_assign(&mut sums.upper, &self.elems[old as usize]);
                self.alg.add_assign(&mut sums.upper, &self.elems[new as usize]);
            }
            if k > 0 {
                self.alg
                    .sub_assign(&mut cur.head, &self.elems[l[k - 1] as usize]);
            }
        }
        Ok(changed)
    }

    /// Alternates sweeps starting from `first` until two consecutive passes
    /// change nothing. Bounds only shrink, so this terminates. The fixpoint
    /// does not depend on which side goes first.
    pub fn contract(
        &self,
        l: &mut [u32],
        u: &mut [u32],
        min: &A::Elem,
        max: &A::Elem,
        sums: &mut RunningSums<A::Elem>,
        first: Side,
    ) -> Result<(), Infeasible> {
        let mut side = first;
        let mut quiet = 0;
        while quiet < 2 {
            let changed = match side {
                Side::Lower => self.lower_sweep(l, u, min, sums)?,
                Side::Upper => self.upper_sweep(l, u, max, sums)?,
            };
            quiet = if changed { 0 } else { quiet + 1 };
            side = match side {
                Side::Lower => Side::Upper,
                Side::Upper => Side::Lower,
            };
        }
        Ok(())
    }
}
