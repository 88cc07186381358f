//! Shared problem vocabulary: sorted supersets, target ranges, index
//! hyperrectangles, solutions and mining knobs.

use std::time::Duration;

use crate::error::{Error, Result};

/// A 1-D superset: finite reals sorted ascending, plus the permutation that
/// recovers the caller's original positions.
#[derive(Debug, Clone)]
pub struct Superset1D {
    elems: Vec<f64>,
    /// `perm[sorted_pos] = input_pos`.
    perm: Vec<u32>,
}

impl Superset1D {
    /// Stable-sorts `values` ascending. Rejects empty input and non-finite
    /// entries.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        let mut perm: Vec<u32> = (0..values.len() as u32).collect();
        perm.sort_by(|&a, &b| {
            values[a as usize]
                .partial_cmp(&values[b as usize])
                .expect("finite values compare")
        });
        let elems = perm.iter().map(|&p| values[p as usize]).collect();
        Ok(Self { elems, perm })
    }

    /// Wraps values that are already sorted ascending; the permutation is the
    /// identity.
    pub fn from_sorted(values: &[f64]) -> Result<Self> {
        let s = Self::new(values)?;
        if s.perm.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::BadInstance("values are not sorted ascending".into()));
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Elements in ascending order.
    pub fn elems(&self) -> &[f64] {
        &self.elems
    }

    /// Maps a sorted position back to the caller's input position.
    pub fn input_position(&self, sorted_pos: usize) -> u32 {
        self.perm[sorted_pos]
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }
}

/// Closed target interval per dimension; a subset qualifies when its sum lies
/// in `[min, max]` on every dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRange {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl TargetRange {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (t, (lo, hi)) in min.iter().zip(&max).enumerate() {
            // Infinite ends are allowed (one-sided constraints); NaN is not.
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::NonFinite(t));
            }
            if lo > hi {
                return Err(Error::EmptyRange(t));
            }
        }
        Ok(Self { min, max })
    }

    /// `[target - me, target + me]` per dimension; `me` must be nonnegative.
    pub fn around(target: &[f64], me: &[f64]) -> Result<Self> {
        if target.len() != me.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                got: me.len(),
            });
        }
        if me.iter().any(|&e| !(e >= 0.0)) {
            return Err(Error::BadInstance("margin of error must be >= 0".into()));
        }
        let min = target.iter().zip(me).map(|(t, e)| t - e).collect();
        let max = target.iter().zip(me).map(|(t, e)| t + e).collect();
        Self::new(min, max)
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }

    /// True when `sum` lies inside the range on every dimension.
    pub fn contains(&self, sum: &[f64]) -> bool {
        sum.len() == self.dims()
            && sum
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(s, (lo, hi))| lo <= s && s <= hi)
    }
}

/// Per-dimension index bounds of the search hyperrectangle. `lower[k]` and
/// `upper[k]` are inclusive positions into the sorted superset.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexBounds {
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

impl IndexBounds {
    /// Widest hypercube for choosing `n` of `n_elems` ordered indexes:
    /// `lower[k] = k`, `upper[k] = n_elems - n + k`.
    pub fn initial(n_elems: usize, n: usize) -> Result<Self> {
        if n == 0 || n > n_elems {
            return Err(Error::BadSubsetSize { n, len: n_elems });
        }
        let lower = (0..n as u32).collect();
        let upper = ((n_elems - n) as u32..n_elems as u32).collect();
        Ok(Self { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    /// Checks the ordered-subset form: equal lengths, `lower <= upper`
    /// pointwise, both strictly increasing, all below `n_elems`.
    pub fn validate(&self, n_elems: usize) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::BadBounds("lower/upper length mismatch".into()));
        }
        let inc = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
        if !inc(&self.lower) || !inc(&self.upper) {
            return Err(Error::BadBounds("bounds must be strictly increasing".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Err(Error::BadBounds("lower exceeds upper".into()));
        }
        if *self.upper.last().unwrap() as usize >= n_elems {
            return Err(Error::BadBounds("bound beyond superset".into()));
        }
        Ok(())
    }
}

/// One qualifying subset: member positions in the caller's original order
/// (strictly increasing) and the per-dimension sum those members achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub indexes: Vec<u32>,
    pub achieved_sum: Vec<f64>,
}

/// How a mining run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MineStatus {
    /// The search space was fully explored.
    Exhausted,
    /// The solution quota was reached first.
    Quota,
    /// The time limit expired first; results are the partial set.
    Timeout,
}

/// Solutions found by a mining run plus how the run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct MineResult {
    pub solutions: Vec<Solution>,
    pub status: MineStatus,
}

/// Knobs shared by every solver entry point.
#[derive(Debug, Clone)]
pub struct MiningConfig {
    /// Stop after this many solutions (`usize::MAX` = all).
    pub max_solutions: usize,
    /// Wall-clock budget for the mining phase.
    pub time_limit: Duration,
    /// Worker threads; 1 runs fully deterministic.
    pub threads: usize,
    /// Resolve the inner bound updates by bisection instead of linear scan.
    /// Both modes produce identical bounds.
    pub use_binary_search: bool,
    /// Branch each subspace into one child per candidate index of the
    /// narrowest dimension instead of two halves. Benchmark arm only.
    pub variable_tree: bool,
    /// Cap on the number of target rows a multidimensional solve may build.
    pub max_target_rows: usize,
    /// Mine multidimensional target rows in percentile-guided order instead
    /// of natural key order.
    pub order_targets: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            max_solutions: usize::MAX,
            time_limit: Duration::from_secs(60 * 60),
            threads: 1,
            use_binary_search: false,
            variable_tree: false,
            max_target_rows: 1_000_000,
            order_targets: true,
        }
    }
}
