//! Exact solvers for subset sum with subset-size control, in one and many
//! dimensions, over reals or integers, plus 0-1 knapsack and generalized
//! assignment solvers built on the same search engine.
//!
//! The engine mines index subsets of a sorted superset. A candidate subset of
//! size n is an ordered index tuple constrained to a hyperrectangle of
//! per-position bounds; the bounds are contracted against the target range
//! until a fixed point, then the narrowest dimension is split and the halves
//! are searched depth first. Comparison, addition and subtraction of element
//! sums go through the [`algebra::Algebra`] trait, which is what lets the
//! same engine run on plain floats, per-dimension vectors, or bit-packed
//! integer bundles.

pub mod algebra;
pub mod contraction;
pub mod error;
pub mod gap;
pub mod knapsack;
pub mod mdim;
pub mod model;
pub mod multiset;
pub mod oracle;
pub mod packedint;
pub mod solver1d;
pub mod subspacing;

pub use error::{Error, Result};
pub use model::{
    IndexBounds, MineStatus, MiningConfig, Solution, Superset1D, TargetRange,
};
