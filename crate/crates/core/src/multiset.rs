//! Joint subset mining over several supersets: pick `sizes[h]` elements from
//! superset `h` so the combined sum lands in one shared range.
//!
//! The reduction shifts each superset so it starts where the previous
//! shifted one ends, concatenates them into a single nondecreasing pool,
//! offsets the target range by the shift mass, and pins each subset position
//! inside its originating block with index bounds. One bounded 1-D solve
//! then covers the whole product space.

use crate::error::{Error, Result};
use crate::model::{IndexBounds, MineStatus, MiningConfig, Superset1D, TargetRange};
use crate::solver1d;

#[derive(Debug, Clone)]
pub struct MultiInstance {
    supersets: Vec<Superset1D>,
    sizes: Vec<usize>,
    range: TargetRange,
}

impl MultiInstance {
    pub fn new(supersets: &[Vec<f64>], sizes: &[usize], range: TargetRange) -> Result<Self> {
        if supersets.is_empty() {
            return Err(Error::EmptyInput);
        }
        if supersets.len() != sizes.len() {
            return Err(Error::DimensionMismatch {
                expected: supersets.len(),
                got: sizes.len(),
            });
        }
        if range.dims() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: range.dims(),
            });
        }
        let supersets = supersets
            .iter()
            .map(|v| Superset1D::new(v))
            .collect::<Result<Vec<_>>>()?;
        for (h, (s, &n)) in supersets.iter().zip(sizes).enumerate() {
            if n == 0 || n > s.len() {
                return Err(Error::BadBounds(format!(
                    "superset {h} holds {} elements, cannot take {n}",
                    s.len()
                )));
            }
        }
        Ok(Self {
            supersets,
            sizes: sizes.to_vec(),
            range,
        })
    }

    pub fn supersets(&self) -> &[Superset1D] {
        &self.supersets
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn range(&self) -> &TargetRange {
        &self.range
    }
}

/// The single-superset instance a [`MultiInstance`] reduces to.
#[derive(Debug, Clone)]
pub struct PooledInstance {
    pub pooled: Superset1D,
    pub adjusted_range: TargetRange,
    pub block_bounds: IndexBounds,
    /// Additive shift applied to every element of each input superset.
    pub offsets: Vec<f64>,
}

/// Builds the pooled superset, shifted range, and per-block index bounds.
pub fn pool(mi: &MultiInstance) -> Result<PooledInstance> {
    let k = mi.supersets.len();
    let mut offsets = Vec::with_capacity(k);
    let mut pooled = Vec::new();
    let mut prev_tail = 0.0;
    for (h, s) in mi.supersets.iter().enumerate() {
        let elems = s.elems();
        let offset = if h == 0 {
            0.0
        } else {
            prev_tail - elems[0]
        };
        offsets.push(offset);
        for (t, v) in elems.iter().enumerate() {
            let shifted = v + offset;
            // The block start equals the previous tail by construction;
            // rounding in v + (tail - v) may land one ulp below it.
            if t == 0 && h > 0 && shifted < prev_tail {
                pooled.push(prev_tail);
            } else {
                pooled.push(shifted);
            }
        }
        prev_tail = *pooled.last().expect("superset nonempty");
    }

    let shift_mass: f64 = offsets
        .iter()
        .zip(&mi.sizes)
        .map(|(o, &n)| o * n as f64)
        .sum();
    let adjusted_range = TargetRange::new(
        vec![mi.range.min[0] + shift_mass],
        vec![mi.range.max[0] + shift_mass],
    )?;

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut elems_before = 0u32;
    for (s, &n) in mi.supersets.iter().zip(&mi.sizes) {
        let n_h = s.len() as u32;
        for j in 0..n as u32 {
            lower.push(elems_before + j);
            upper.push(elems_before + n_h - n as u32 + j);
        }
        elems_before += n_h;
    }

    Ok(PooledInstance {
        pooled: Superset1D::from_sorted(&pooled)?,
        adjusted_range,
        block_bounds: IndexBounds { lower, upper },
        offsets,
    })
}

/// One joint pick: for each superset, the chosen positions in that
/// superset's original order, plus the combined original-domain sum.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSolution {
    pub picks: Vec<Vec<u32>>,
    pub achieved_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiResult {
    pub solutions: Vec<MultiSolution>,
    pub status: MineStatus,
}

/// Solves the joint instance and maps pooled indexes back to per-superset
/// positions. Every reported sum is re-computed from the original values.
pub fn solve_multi(mi: &MultiInstance, config: &MiningConfig) -> Result<MultiResult> {
    let pooled = pool(mi)?;
    let total: usize = mi.sizes.iter().sum();
    let mined = solver1d::solve_bounded(
        &pooled.pooled,
        total,
        &pooled.adjusted_range,
        pooled.block_bounds.clone(),
        config,
    )?;

    let block_start: Vec<u32> = mi
        .supersets
        .iter()
        .scan(0u32, |acc, s| {
            let start = *acc;
            *acc += s.len() as u32;
            Some(start)
        })
        .collect();

    let mut solutions = Vec::with_capacity(mined.solutions.len());
    for sol in &mined.solutions {
        let mut picks: Vec<Vec<u32>> = mi.supersets.iter().map(|_| Vec::new()).collect();
        for &g in &sol.indexes {
            let h = match block_start.binary_search(&g) {
                Ok(i) => i,
                Err(i) => i - 1,
            };
            let local_sorted = (g - block_start[h]) as usize;
            picks[h].push(mi.supersets[h].input_position(local_sorted));
        }
        let mut sum = 0.0;
        for (s, p) in mi.supersets.iter().zip(picks.iter_mut()) {
            p.sort_unstable();
            let perm = s.permutation();
            for &local in p.iter() {
                let sorted_pos = perm.iter().position(|&ip| ip == local).expect("member");
                sum += s.elems()[sorted_pos];
            }
        }
        if sum < mi.range.min[0] || sum > mi.range.max[0] {
            continue;
        }
        solutions.push(MultiSolution {
            picks,
            achieved_sum: sum,
        });
    }
    Ok(MultiResult {
        solutions,
        status: mined.status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(mut sols: Vec<Vec<Vec<u32>>>) -> Vec<Vec<Vec<u32>>> {
        sols.sort();
        sols
    }

    fn product_oracle(
        supersets: &[Vec<f64>],
        sizes: &[usize],
        min: f64,
        max: f64,
    ) -> Vec<Vec<Vec<u32>>> {
        fn combos(n: usize, k: usize) -> Vec<Vec<u32>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            let mut idx: Vec<u32> = (0..k as u32).collect();
            loop {
                out.push(idx.clone());
                let mut t = k;
                loop {
                    if t == 0 {
                        return out;
                    }
                    t -= 1;
                    if idx[t] < (n - k + t) as u32 {
                        idx[t] += 1;
                        for j in t + 1..k {
                            idx[j] = idx[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        }
        let per: Vec<Vec<Vec<u32>>> = supersets
            .iter()
            .zip(sizes)
            .map(|(s, &n)| combos(s.len(), n))
            .collect();
        let mut out = Vec::new();
        let mut cursor = vec![0usize; per.len()];
        'outer: loop {
            let pick: Vec<Vec<u32>> = cursor
                .iter()
                .enumerate()
                .map(|(h, &c)| per[h][c].clone())
                .collect();
            let sum: f64 = pick
                .iter()
                .enumerate()
                .flat_map(|(h, p)| p.iter().map(move |&i| supersets[h][i as usize]))
                .sum();
            if sum >= min && sum <= max {
                out.push(pick);
            }
            for h in (0..cursor.len()).rev() {
                cursor[h] += 1;
                if cursor[h] < per[h].len() {
                    continue 'outer;
                }
                cursor[h] = 0;
            }
            break;
        }
        out
    }

    #[test]
    fn two_supersets_shift_matches_worked_example() {
        let mi = MultiInstance::new(
            &[vec![1.0, 2.0], vec![10.0, 20.0]],
            &[1, 1],
            TargetRange::new(vec![21.0], vec![21.0]).unwrap(),
        )
        .unwrap();
        let p = pool(&mi).unwrap();
        assert_eq!(p.pooled.elems(), &[1.0, 2.0, 2.0, 12.0]);
        assert_eq!(p.offsets, vec![0.0, -8.0]);
        assert_eq!(p.adjusted_range.min, vec![13.0]);
        assert_eq!(p.adjusted_range.max, vec![13.0]);
        assert_eq!(p.block_bounds.lower, vec![0, 2]);
        assert_eq!(p.block_bounds.upper, vec![1, 3]);

        let r = solve_multi(&mi, &MiningConfig::default()).unwrap();
        let got = canon(r.solutions.iter().map(|s| s.picks.clone()).collect());
        let want = canon(product_oracle(
            &[vec![1.0, 2.0], vec![10.0, 20.0]],
            &[1, 1],
            21.0,
            21.0,
        ));
        assert_eq!(got, want);
        assert_eq!(got, vec![vec![vec![0], vec![1]]]);
    }

    #[test]
    fn single_superset_degenerates_to_fixed_size_solve() {
        let mi = MultiInstance::new(
            &[vec![3.0, 1.0, 4.0, 1.5]],
            &[2],
            TargetRange::new(vec![5.0], vec![5.0]).unwrap(),
        )
        .unwrap();
        let p = pool(&mi).unwrap();
        assert_eq!(p.offsets, vec![0.0]);
        assert_eq!(p.adjusted_range.min, vec![5.0]);
        let r = solve_multi(&mi, &MiningConfig::default()).unwrap();
        let got = canon(r.solutions.iter().map(|s| s.picks.clone()).collect());
        // Of all pairs only 1.0 + 4.0 hits 5.0 exactly.
        assert_eq!(got, vec![vec![vec![1, 2]]]);
    }

    #[test]
    fn random_instances_match_product_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for case in 0..60 {
            let k = rng.gen_range(1..=3);
            let mut supersets = Vec::new();
            let mut sizes = Vec::new();
            for _ in 0..k {
                let n_h = rng.gen_range(2..=6);
                supersets.push(
                    (0..n_h)
                        .map(|_| rng.gen_range(-256i32..=256) as f64 / 8.0)
                        .collect::<Vec<f64>>(),
                );
                sizes.push(rng.gen_range(1..=2.min(n_h)));
            }
            let planted: f64 = supersets
                .iter()
                .zip(&sizes)
                .flat_map(|(s, &n)| s.iter().take(n))
                .sum();
            let mi = MultiInstance::new(
                &supersets,
                &sizes,
                TargetRange::new(vec![planted], vec![planted]).unwrap(),
            )
            .unwrap();
            let r = solve_multi(&mi, &MiningConfig::default()).unwrap();
            assert_eq!(r.status, MineStatus::Exhausted);
            let got = canon(r.solutions.iter().map(|s| s.picks.clone()).collect());
            let want = canon(product_oracle(&supersets, &sizes, planted, planted));
            assert_eq!(got, want, "case {case}");
            assert!(!want.is_empty(), "planted, case {case}");
        }
    }

    #[test]
    fn per_block_pick_counts_match_sizes() {
        let mi = MultiInstance::new(
            &[vec![1.0, 2.0, 3.0], vec![5.0, 6.0, 7.0, 8.0]],
            &[1, 2],
            TargetRange::new(vec![10.0], vec![20.0]).unwrap(),
        )
        .unwrap();
        let r = solve_multi(&mi, &MiningConfig::default()).unwrap();
        assert!(!r.solutions.is_empty());
        for s in &r.solutions {
            assert_eq!(s.picks[0].len(), 1);
            assert_eq!(s.picks[1].len(), 2);
        }
    }

    #[test]
    fn infeasible_range_returns_clean_empty() {
        let mi = MultiInstance::new(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[1, 1],
            TargetRange::new(vec![100.0], vec![101.0]).unwrap(),
        )
        .unwrap();
        let r = solve_multi(&mi, &MiningConfig::default()).unwrap();
        assert!(r.solutions.is_empty());
        assert_eq!(r.status, MineStatus::Exhausted);
    }
}
