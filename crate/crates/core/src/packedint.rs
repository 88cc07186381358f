//! Integer compression and machine-word packing for multidimensional mining.
//!
//! Columns are affinely mapped to small nonnegative integers, comonotonized,
//! and several columns are packed into each 64-bit word. Addition,
//! subtraction and the componentwise order then run on whole words: add and
//! subtract are exact integer identities modulo 2^64, and `a <= b` holds
//! exactly when no packed field of `b - a` has its sign bit set. Each field
//! carries one bit more than the largest magnitude it can meet during
//! mining, so borrows between fields cancel and comparisons stay exact.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::algebra::Algebra;
use crate::contraction::{Contractor, WindowSums};
use crate::error::{Error, Result};
use crate::mdim::{leader_column, SupersetMD};
use crate::model::{MineResult, MineStatus, MiningConfig, Solution};
use crate::subspacing::{Driver, Engine, Task, Walk};

/// Magnitudes above this lose exactness on the way through f64 rounding.
const MAX_EXACT: f64 = (1u64 << 52) as f64;

#[derive(Debug, Clone)]
pub struct IntegerizedInstance {
    /// Effective per-column resolution; 0 marks a constant column mapped to
    /// all zeros.
    pub lambda: Vec<u64>,
    /// N x d nonnegative integer matrix.
    pub xz: Vec<Vec<i64>>,
    /// Integerized target range, shifted by n times the column minimum.
    pub z_lower: Vec<i64>,
    pub z_upper: Vec<i64>,
    /// Per-column affine map parameters: value = min + xz * divisor / lambda.
    pub mins: Vec<f64>,
    pub divisors: Vec<f64>,
    /// True when mapping back reproduces every input exactly.
    pub lossless: bool,
}

fn scale(v: f64, min: f64, divisor: f64, lambda: u64) -> f64 {
    ((v - min) / divisor * lambda as f64).round()
}

/// Maps each column onto 0..=cap integers by shift, scale and
/// round-half-away, and maps the target range through the same affine map.
pub fn integerize(
    x: &SupersetMD,
    s_l: &[f64],
    s_u: &[f64],
    n: usize,
    lambda: &[u64],
) -> Result<IntegerizedInstance> {
    let d = x.dims();
    if s_l.len() != d || s_u.len() != d || lambda.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: s_l.len().min(s_u.len()).min(lambda.len()),
        });
    }
    if n == 0 || n > x.len() {
        return Err(Error::BadSubsetSize { n, len: x.len() });
    }
    for t in 0..d {
        if lambda[t] == 0 {
            return Err(Error::BadInstance(format!(
                "integer resolution for column {t} must be >= 1"
            )));
        }
        if !s_l[t].is_finite() || !s_u[t].is_finite() || s_l[t] > s_u[t] {
            return Err(Error::BadBounds(format!(
                "target range for column {t} must be finite and ordered"
            )));
        }
    }
    let mut xz = vec![vec![0i64; d]; x.len()];
    let mut z_lower = vec![0i64; d];
    let mut z_upper = vec![0i64; d];
    let mut mins = vec![0.0; d];
    let mut divisors = vec![0.0; d];
    let mut eff_lambda = vec![0u64; d];
    let mut lossless = true;
    for t in 0..d {
        let col: Vec<f64> = x.rows().iter().map(|r| r[t]).collect();
        let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // The map divides by the original column maximum; when that is not
        // positive it falls back to the column spread, and a constant column
        // degenerates to the all-zero map.
        let (divisor, lam) = if max == min {
            (1.0, 0)
        } else if max > 0.0 {
            (max, lambda[t])
        } else {
            (max - min, lambda[t])
        };
        mins[t] = min;
        divisors[t] = divisor;
        eff_lambda[t] = lam;
        for (s, v) in col.iter().enumerate() {
            let z = scale(*v, min, divisor, lam);
            if z.abs() > MAX_EXACT {
                return Err(Error::BadInstance(format!(
                    "integerized value in column {t} exceeds the exact word budget"
                )));
            }
            xz[s][t] = z as i64;
            lossless &= min + z / lam.max(1) as f64 * divisor == *v;
        }
        let zl = scale(s_l[t] - n as f64 * min, 0.0, divisor, lam);
        let zu = scale(s_u[t] - n as f64 * min, 0.0, divisor, lam);
        if zl.abs() > MAX_EXACT || zu.abs() > MAX_EXACT {
            return Err(Error::BadInstance(format!(
                "integerized target in column {t} exceeds the exact word budget"
            )));
        }
        z_lower[t] = zl as i64;
        z_upper[t] = zu as i64;
        lossless &= min * n as f64 + zl / lam.max(1) as f64 * divisor == s_l[t];
        lossless &= min * n as f64 + zu / lam.max(1) as f64 * divisor == s_u[t];
    }
    Ok(IntegerizedInstance {
        lambda: eff_lambda,
        xz,
        z_lower,
        z_upper,
        mins,
        divisors,
        lossless,
    })
}

/// Word layout for one packed column set.
#[derive(Debug, Clone)]
pub struct PackLayout {
    /// Largest magnitude each column can meet during mining.
    pub psi: Vec<i64>,
    /// Field widths: one sign bit on top of the magnitude bits.
    pub bits: Vec<u32>,
    pub words_per_row: usize,
    /// Per-column (word index, left shift of the field's low bit).
    pub places: Vec<(usize, u32)>,
    /// One set bit per field, aligned with its sign bit.
    pub mask: Vec<u64>,
}

impl PackLayout {
    /// Largest packable magnitude for column `t`.
    pub fn field_limit(&self, t: usize) -> i64 {
        (1i64 << (self.bits[t] - 1)) - 1
    }
}

fn bits_for_magnitude(psi: i128) -> u32 {
    debug_assert!(psi >= 0);
    (128 - (psi as u128).leading_zeros()) + 1
}

fn psi_columns(
    star: &[Vec<i128>],
    rows_lower: &[Vec<i128>],
    rows_upper: &[Vec<i128>],
    n: usize,
) -> Vec<i128> {
    let cols = star[0].len();
    (0..cols)
        .map(|t| {
            // Rows are comonotonized, so the top-n column sum is the tail sum.
            let topn: i128 = star[star.len() - n..].iter().map(|r| r[t]).sum();
            let tmax = rows_lower
                .iter()
                .chain(rows_upper)
                .map(|r| r[t].abs())
                .max()
                .unwrap_or(0);
            topn.max(tmax)
        })
        .collect()
}

/// Allocates one signed field per column, greedy first-fit in natural column
/// order, never straddling a word boundary.
pub fn plan_layout(
    star: &[Vec<i64>],
    rows_lower: &[Vec<i64>],
    rows_upper: &[Vec<i64>],
    n: usize,
) -> Result<PackLayout> {
    if star.is_empty() || n == 0 || n > star.len() {
        return Err(Error::BadSubsetSize {
            n,
            len: star.len(),
        });
    }
    let widen = |m: &[Vec<i64>]| -> Vec<Vec<i128>> {
        m.iter()
            .map(|r| r.iter().map(|&v| v as i128).collect())
            .collect()
    };
    let psi128 = psi_columns(&widen(star), &widen(rows_lower), &widen(rows_upper), n);
    let mut psi = Vec::with_capacity(psi128.len());
    let mut bits = Vec::with_capacity(psi128.len());
    for (t, &p) in psi128.iter().enumerate() {
        let b = bits_for_magnitude(p);
        if b > 63 {
            return Err(Error::FieldOverflow { col: t, bits: b });
        }
        psi.push(p as i64);
        bits.push(b);
    }
    let mut places = Vec::with_capacity(bits.len());
    let mut word = 0usize;
    let mut free = 64u32;
    for &b in &bits {
        if free < b {
            word += 1;
            free = 64;
        }
        free -= b;
        places.push((word, free));
    }
    let words_per_row = word + 1;
    let mut mask = vec![0u64; words_per_row];
    for (t, &(w, shift)) in places.iter().enumerate() {
        mask[w] |= 1u64 << (shift + bits[t] - 1);
    }
    Ok(PackLayout {
        psi,
        bits,
        words_per_row,
        places,
        mask,
    })
}

/// Packs one integer vector; each component must fit its field's magnitude.
pub fn pack_row(layout: &PackLayout, v: &[i64]) -> Result<Vec<u64>> {
    debug_assert_eq!(v.len(), layout.places.len());
    let mut words = vec![0u64; layout.words_per_row];
    for (t, &x) in v.iter().enumerate() {
        if x.abs() > layout.field_limit(t) {
            return Err(Error::PackOverflow {
                col: t,
                bits: layout.bits[t],
                value: x,
            });
        }
        let (w, shift) = layout.places[t];
        words[w] = words[w].wrapping_add((x as u64) << shift);
    }
    Ok(words)
}

/// Recovers the integer vector: fields are read from the low end of each
/// word upward, sign-extended, and their contribution removed so pending
/// borrows never leak into higher fields.
pub fn unpack_row(layout: &PackLayout, words: &[u64]) -> Vec<i64> {
    let mut work = words.to_vec();
    let mut out = vec![0i64; layout.places.len()];
    for t in (0..layout.places.len()).rev() {
        let (w, shift) = layout.places[t];
        let b = layout.bits[t];
        let field_mask = (1u64 << b) - 1;
        let raw = (work[w] >> shift) & field_mask;
        let val = if raw & (1u64 << (b - 1)) != 0 {
            (raw | !field_mask) as i64
        } else {
            raw as i64
        };
        work[w] = work[w].wrapping_sub((val as u64) << shift);
        out[t] = val;
    }
    out
}

pub fn packed_add(acc: &mut [u64], x: &[u64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a = a.wrapping_add(*b);
    }
}

pub fn packed_sub(acc: &mut [u64], x: &[u64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a = a.wrapping_sub(*b);
    }
}

/// Componentwise `a <= b`: no field of `b - a` may carry its sign bit.
pub fn packed_leq(a: &[u64], b: &[u64], mask: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .zip(mask)
        .all(|((x, y), m)| y.wrapping_sub(*x) & m == 0)
}

/// Word algebra over packed rows. `caps[t]` is the top-n column sum; target
/// ranges are clamped into [0, caps] so every compared quantity stays within
/// the field contract.
pub struct PackedAlgebra<'a> {
    pub layout: &'a PackLayout,
    pub caps: Vec<i64>,
}

impl Algebra for PackedAlgebra<'_> {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0u64; self.layout.words_per_row]
    }

    fn add_assign(&self, acc: &mut Vec<u64>, x: &Vec<u64>) {
        packed_add(acc, x);
    }

    fn sub_assign(&self, acc: &mut Vec<u64>, x: &Vec<u64>) {
        packed_sub(acc, x);
    }

    fn le(&self, a: &Vec<u64>, b: &Vec<u64>) -> bool {
        packed_leq(a, b, &self.layout.mask)
    }

    fn clamp_range(&self, min: &mut Vec<u64>, max: &mut Vec<u64>) -> bool {
        let mut lo = unpack_row(self.layout, min);
        let mut hi = unpack_row(self.layout, max);
        let mut changed = false;
        for (t, cap) in self.caps.iter().enumerate() {
            if hi[t] < 0 || lo[t] > *cap {
                return false;
            }
            if lo[t] < 0 {
                lo[t] = 0;
                changed = true;
            }
            if hi[t] > *cap {
                hi[t] = *cap;
                changed = true;
            }
        }
        if changed {
            // Clamped values sit in [0, caps] and caps <= psi, so repacking
            // cannot overflow a field.
            *min = pack_row(self.layout, &lo).expect("clamped range fits its fields");
            *max = pack_row(self.layout, &hi).expect("clamped range fits its fields");
        }
        true
    }
}

/// Comonotonization in exact integer arithmetic, mirroring the real-valued
/// construction.
struct IntComono {
    star: Vec<Vec<i128>>,
    theta: Vec<i64>,
    row_perm: Vec<u32>,
    sorted_xz: Vec<Vec<i64>>,
}

fn comonotonize_int(xz: &[Vec<i64>]) -> IntComono {
    let d = xz[0].len();
    let as_f64: Vec<Vec<f64>> = xz
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let leader = leader_column(&as_f64, d);
    let mut row_perm: Vec<u32> = (0..xz.len() as u32).collect();
    row_perm.sort_by_key(|&r| xz[r as usize][leader]);
    let sorted_xz: Vec<Vec<i64>> = row_perm.iter().map(|&r| xz[r as usize].clone()).collect();

    let mut key = vec![0i64; xz.len()];
    for s in 1..xz.len() {
        let dominated = sorted_xz[s - 1]
            .iter()
            .zip(&sorted_xz[s])
            .all(|(a, b)| a <= b);
        key[s] = key[s - 1] + if dominated { 0 } else { 1 };
    }
    let mut theta = vec![0i64; d];
    for t in 0..d {
        let mut worst = 0i64;
        for s in 1..xz.len() {
            worst = worst.min(sorted_xz[s][t] - sorted_xz[s - 1][t]);
        }
        theta[t] = worst.abs();
    }
    let star: Vec<Vec<i128>> = sorted_xz
        .iter()
        .zip(&key)
        .map(|(row, &v)| {
            let mut out: Vec<i128> = row
                .iter()
                .zip(&theta)
                .map(|(&x, &th)| x as i128 + v as i128 * th as i128)
                .collect();
            out.push(v as i128);
            out
        })
        .collect();
    IntComono {
        star,
        theta,
        row_perm,
        sorted_xz,
    }
}

#[derive(Debug, Clone)]
pub struct IntegerizedResult {
    pub result: MineResult,
    /// True when the affine map rounded anything, so index sets may differ
    /// from mining the real-valued instance directly.
    pub approximate: bool,
}

struct PackedDriver<'a> {
    sorted_xz: &'a [Vec<i64>],
    row_perm: &'a [u32],
    z_lower: &'a [i64],
    z_upper: &'a [i64],
    x: &'a SupersetMD,
    quota: usize,
    deadline: Instant,
    cancel: &'a AtomicBool,
    timed_out: &'a AtomicBool,
    found: &'a AtomicUsize,
    out: Vec<Solution>,
    polls: u32,
}

impl Driver<Vec<u64>> for PackedDriver<'_> {
    fn solution(&mut self, members: &[u32]) -> bool {
        let d = self.z_lower.len();
        let mut zsum = vec![0i64; d];
        for &p in members {
            for (t, acc) in zsum.iter_mut().enumerate() {
                *acc += self.sorted_xz[p as usize][t];
            }
        }
        let inside = zsum
            .iter()
            .zip(self.z_lower.iter().zip(self.z_upper))
            .all(|(s, (lo, hi))| s >= lo && s <= hi);
        if inside {
            let mut indexes: Vec<u32> = members
                .iter()
                .map(|&p| self.row_perm[p as usize])
                .collect();
            indexes.sort_unstable();
            let mut sums = vec![0.0; self.x.dims()];
            for &r in &indexes {
                for (t, acc) in sums.iter_mut().enumerate() {
                    *acc += self.x.rows()[r as usize][t];
                }
            }
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

/// Full packed pipeline: integerize, comonotonize, enumerate key-sum target
/// rows, plan the word layout, and mine with the word algebra. Solutions
/// satisfy the integerized range exactly; `approximate` flags rounding loss
/// against the original instance.
pub fn solve_md_integerized(
    x: &SupersetMD,
    n: usize,
    m_target: &[f64],
    m_me: &[f64],
    lambda: &[u64],
    config: &MiningConfig,
) -> Result<IntegerizedResult> {
    let d = x.dims();
    if m_target.len() != d || m_me.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m_target.len().min(m_me.len()),
        });
    }
    if m_me.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::BadBounds("per-dimension tolerance must be >= 0".into()));
    }
    let s_l: Vec<f64> = m_target.iter().zip(m_me).map(|(t, e)| t - e).collect();
    let s_u: Vec<f64> = m_target.iter().zip(m_me).map(|(t, e)| t + e).collect();
    let inst = integerize(x, &s_l, &s_u, n, lambda)?;
    let ic = comonotonize_int(&inst.xz);
    let n_rows = ic.star.len();

    let key_at = |s: usize| ic.star[s][d] as i64;
    let key_lo: i64 = (0..n).map(key_at).sum();
    let key_hi: i64 = (n_rows - n..n_rows).map(key_at).sum();
    let count = (key_hi - key_lo + 1) as u128;
    if count > config.max_target_rows as u128 {
        return Err(Error::TargetRowCap {
            rows: count,
            cap: config.max_target_rows,
        });
    }

    let lift = |base: &[i64], ks: i64| -> Vec<i128> {
        let mut row: Vec<i128> = base
            .iter()
            .zip(&ic.theta)
            .map(|(&b, &th)| ks as i128 * th as i128 + b as i128)
            .collect();
        row.push(ks as i128);
        row
    };
    let mut rows_lower128 = Vec::with_capacity(count as usize);
    let mut rows_upper128 = Vec::with_capacity(count as usize);
    for ks in key_lo..=key_hi {
        rows_lower128.push(lift(&inst.z_lower, ks));
        rows_upper128.push(lift(&inst.z_upper, ks));
    }
    let psi128 = psi_columns(&ic.star, &rows_lower128, &rows_upper128, n);
    for (t, &p) in psi128.iter().enumerate() {
        let b = bits_for_magnitude(p);
        if b > 63 {
            return Err(Error::FieldOverflow { col: t, bits: b });
        }
    }
    let narrow = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter()
            .map(|r| r.into_iter().map(|v| v as i64).collect())
            .collect()
    };
    let star = narrow(ic.star.clone());
    let rows_lower = narrow(rows_lower128);
    let rows_upper = narrow(rows_upper128);
    let layout = plan_layout(&star, &rows_lower, &rows_upper, n)?;
    let caps: Vec<i64> = (0..=d)
        .map(|t| star[n_rows - n..].iter().map(|r| r[t]).sum())
        .collect();
    let alg = PackedAlgebra {
        layout: &layout,
        caps,
    };

    let packed_star: Vec<Vec<u64>> = star
        .iter()
        .map(|r| pack_row(&layout, r))
        .collect::<Result<_>>()?;
    // Pre-clamp every target row into [0, caps]; rows emptied by the clamp
    // cannot be met by nonnegative elements at all.
    let mut mining_rows: Vec<(Vec<u64>, Vec<u64>)> = Vec::with_capacity(count as usize);
    for (lo_row, hi_row) in rows_lower.iter().zip(&rows_upper) {
        let mut lo = lo_row.clone();
        let mut hi = hi_row.clone();
        let mut dead = false;
        for t in 0..=d {
            lo[t] = lo[t].max(0);
            hi[t] = hi[t].min(alg.caps[t]);
            if lo[t] > hi[t] {
                dead = true;
                break;
            }
        }
        if !dead {
            mining_rows.push((pack_row(&layout, &lo)?, pack_row(&layout, &hi)?));
        }
    }

    let windows = WindowSums::build(&alg, &packed_star, n);
    let deadline = Instant::now() + config.time_limit;
    let cancel = AtomicBool::new(false);
    let timed_out = AtomicBool::new(false);
    let found = AtomicUsize::new(0);
    let next_row = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Vec<Solution>)>> = Mutex::new(Vec::new());
    let exhausted_all = AtomicBool::new(true);

    let worker = || {
        let mut engine = Engine::new(Contractor::new(&alg, &packed_star, &windows));
        engine.contractor.use_binary_search = config.use_binary_search;
        engine.variable_tree = config.variable_tree;
        loop {
            let seq = next_row.fetch_add(1, Ordering::Relaxed);
            if seq >= mining_rows.len() || cancel.load(Ordering::Relaxed) {
                break;
            }
            let (lo, hi) = &mining_rows[seq];
            let task = Task::root(
                &alg,
                &packed_star,
                (0..n as u32).collect(),
                ((n_rows - n) as u32..n_rows as u32).collect(),
                lo.clone(),
                hi.clone(),
            );
            let mut driver = PackedDriver {
                sorted_xz: &ic.sorted_xz,
                row_perm: &ic.row_perm,
                z_lower: &inst.z_lower,
                z_upper: &inst.z_upper,
                x,
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
                results.lock().unwrap().push((seq, driver.out));
            }
        }
    };

    let workers = config.threads.max(1).min(mining_rows.len().max(1));
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
    rows.sort_by_key(|r| r.0);
    let mut solutions: Vec<Solution> = rows.into_iter().flat_map(|r| r.1).collect();
    solutions.truncate(config.max_solutions);
    let status = if timed_out.load(Ordering::Relaxed) {
        MineStatus::Timeout
    } else if !exhausted_all.load(Ordering::Relaxed) || solutions.len() >= config.max_solutions {
        MineStatus::Quota
    } else {
        MineStatus::Exhausted
    };
    Ok(IntegerizedResult {
        result: MineResult { solutions, status },
        approximate: !inst.lossless,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdim::solve_md;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_col(vals: &[f64]) -> SupersetMD {
        SupersetMD::new(&vals.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn aligned_column_maps_onto_itself() {
        let x = one_col(&[0.0, 5.0, 10.0]);
        let inst = integerize(&x, &[5.0], &[5.0], 1, &[10]).unwrap();
        let col: Vec<i64> = inst.xz.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![0, 5, 10]);
        assert_eq!(inst.z_lower, vec![5]);
        assert_eq!(inst.z_upper, vec![5]);
        assert!(inst.lossless);
    }

    #[test]
    fn shifted_column_divides_by_original_max() {
        let x = one_col(&[1.0, 2.0, 4.0]);
        let inst = integerize(&x, &[3.0], &[3.0], 1, &[4]).unwrap();
        let col: Vec<i64> = inst.xz.iter().map(|r| r[0]).collect();
        // min > 0 compresses below the cap: the top value maps to 3, not 4.
        assert_eq!(col, vec![0, 1, 3]);
        assert!(inst.lossless);
    }

    #[test]
    fn nonpositive_column_falls_back_to_the_spread() {
        let x = one_col(&[-4.0, -2.0, -1.0]);
        let inst = integerize(&x, &[-3.0], &[-3.0], 1, &[3]).unwrap();
        let col: Vec<i64> = inst.xz.iter().map(|r| r[0]).collect();
        assert_eq!(col, vec![0, 2, 3]);
        assert!(col.iter().all(|&v| v >= 0));
    }

    #[test]
    fn constant_column_collapses_to_zero() {
        let x = SupersetMD::new(&[vec![7.0, 1.0], vec![7.0, 2.0], vec![7.0, 4.0]]).unwrap();
        let inst = integerize(&x, &[14.0, 3.0], &[14.0, 3.0], 2, &[8, 8]).unwrap();
        assert_eq!(inst.lambda[0], 0);
        assert!(inst.xz.iter().all(|r| r[0] == 0));
        assert_eq!(inst.z_lower[0], 0);
        assert_eq!(inst.z_upper[0], 0);
    }

    #[test]
    fn target_map_shifts_by_n_minimums() {
        let x = one_col(&[2.0, 4.0, 10.0]);
        // n = 2: z(S) = round((S - 2*2)/10 * 10).
        let inst = integerize(&x, &[6.0], &[14.0], 2, &[10]).unwrap();
        assert_eq!(inst.z_lower, vec![2]);
        assert_eq!(inst.z_upper, vec![10]);
    }

    #[test]
    fn layout_fits_two_byte_wide_columns_in_one_word() {
        let star = vec![vec![255i64, 255]];
        let targets = vec![vec![0i64, 0]];
        let layout = plan_layout(&star, &targets, &targets, 1).unwrap();
        assert_eq!(layout.psi, vec![255, 255]);
        assert_eq!(layout.bits, vec![9, 9]);
        assert_eq!(layout.words_per_row, 1);
        assert_eq!(layout.places, vec![(0, 55), (0, 46)]);
    }

    #[test]
    fn eight_nine_bit_columns_need_two_words() {
        let star = vec![vec![255i64; 8]];
        let targets = vec![vec![0i64; 8]];
        let layout = plan_layout(&star, &targets, &targets, 1).unwrap();
        assert_eq!(layout.words_per_row, 2);
        let in_first = layout.places.iter().filter(|(w, _)| *w == 0).count();
        assert_eq!(in_first, 7);
    }

    #[test]
    fn oversized_magnitude_is_rejected() {
        let star = vec![vec![1i64 << 62]];
        let targets = vec![vec![0i64]];
        let err = plan_layout(&star, &targets, &targets, 1).unwrap_err();
        assert!(matches!(err, Error::FieldOverflow { col: 0, .. }));
    }

    #[test]
    fn placements_are_disjoint_and_within_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let cols = rng.gen_range(1..=20);
            let star = vec![(0..cols)
                .map(|_| {
                    let width = rng.gen_range(1..40);
                    rng.gen_range(0..1i64 << width)
                })
                .collect::<Vec<_>>()];
            let zeros = vec![vec![0i64; cols]];
            let layout = plan_layout(&star, &zeros, &zeros, 1).unwrap();
            let mut used = vec![0u64; layout.words_per_row];
            for (t, &(w, shift)) in layout.places.iter().enumerate() {
                assert!(shift + layout.bits[t] <= 64);
                let field = (((1u128 << layout.bits[t]) - 1) as u64) << shift;
                assert_eq!(used[w] & field, 0, "fields overlap");
                used[w] |= field;
            }
        }
    }

    #[test]
    fn round_trip_holds_at_zero_extremes_and_random_points() {
        let star = vec![vec![100i64, 4000, 31, 900_000, 7]];
        let zeros = vec![vec![0i64; 5]];
        let layout = plan_layout(&star, &zeros, &zeros, 1).unwrap();
        let zero = vec![0i64; 5];
        assert_eq!(unpack_row(&layout, &pack_row(&layout, &zero).unwrap()), zero);
        let maxima: Vec<i64> = layout.psi.clone();
        assert_eq!(
            unpack_row(&layout, &pack_row(&layout, &maxima).unwrap()),
            maxima
        );
        let minima: Vec<i64> = layout.psi.iter().map(|p| -p).collect();
        assert_eq!(
            unpack_row(&layout, &pack_row(&layout, &minima).unwrap()),
            minima
        );
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100_000 {
            let v: Vec<i64> = (0..5)
                .map(|t| rng.gen_range(-layout.field_limit(t)..=layout.field_limit(t)))
                .collect();
            let packed = pack_row(&layout, &v).unwrap();
            assert_eq!(unpack_row(&layout, &packed), v);
        }
    }

    #[test]
    fn pack_rejects_out_of_field_components() {
        let star = vec![vec![10i64]];
        let zeros = vec![vec![0i64]];
        let layout = plan_layout(&star, &zeros, &zeros, 1).unwrap();
        let err = pack_row(&layout, &[layout.field_limit(0) + 1]).unwrap_err();
        assert!(matches!(err, Error::PackOverflow { col: 0, .. }));
    }

    #[test]
    fn word_ops_agree_with_integer_vector_ops() {
        let star = vec![vec![1000i64, 255, 77, 1 << 20, 3, 40_000]];
        let zeros = vec![vec![0i64; 6]];
        let layout = plan_layout(&star, &zeros, &zeros, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200_000 {
            let half: Vec<i64> = (0..6).map(|t| layout.field_limit(t) / 2).collect();
            let a: Vec<i64> = half.iter().map(|&h| rng.gen_range(-h..=h)).collect();
            let b: Vec<i64> = half.iter().map(|&h| rng.gen_range(-h..=h)).collect();
            let pa = pack_row(&layout, &a).unwrap();
            let pb = pack_row(&layout, &b).unwrap();

            let mut sum = pa.clone();
            packed_add(&mut sum, &pb);
            let want_sum: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            assert_eq!(unpack_row(&layout, &sum), want_sum);

            let mut diff = pa.clone();
            packed_sub(&mut diff, &pb);
            let want_diff: Vec<i64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            assert_eq!(unpack_row(&layout, &diff), want_diff);

            let want_le = a.iter().zip(&b).all(|(x, y)| x <= y);
            assert_eq!(packed_leq(&pa, &pb, &layout.mask), want_le);
            assert!(packed_leq(&pa, &pa, &layout.mask));
        }
    }

    #[test]
    fn generous_resolution_reproduces_real_domain_mining() {
        let mut rng = ChaCha8Rng::seed_from_u64(4001);
        for case in 0..20 {
            let rows: Vec<Vec<f64>> = (0..30)
                .map(|_| (0..4).map(|_| rng.gen_range(0..2048) as f64 / 16.0).collect())
                .collect();
            let n = 5;
            let planted: Vec<f64> = (0..4)
                .map(|t| rows.iter().take(n).map(|r| r[t]).sum())
                .collect();
            let me = vec![0.75; 4];
            let x = SupersetMD::new(&rows).unwrap();
            let real = solve_md(&x, n, &planted, &me, &MiningConfig::default()).unwrap();
            let packed = solve_md_integerized(
                &x,
                n,
                &planted,
                &me,
                &[1 << 20; 4],
                &MiningConfig::default(),
            )
            .unwrap();
            let mut a: Vec<Vec<u32>> = real.solutions.iter().map(|s| s.indexes.clone()).collect();
            let mut b: Vec<Vec<u32>> = packed
                .result
                .solutions
                .iter()
                .map(|s| s.indexes.clone())
                .collect();
            a.sort();
            b.sort();
            assert_eq!(a, b, "case {case}");
            assert!(!a.is_empty(), "planted, case {case}");
        }
    }

    #[test]
    fn coarse_resolution_is_internally_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        for _ in 0..30 {
            let rows: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..3).map(|_| rng.gen_range(0..400) as f64 / 8.0).collect())
                .collect();
            let n = 4;
            let planted: Vec<f64> = (0..3)
                .map(|t| rows.iter().take(n).map(|r| r[t]).sum())
                .collect();
            let me = vec![2.0; 3];
            let x = SupersetMD::new(&rows).unwrap();
            let s_l: Vec<f64> = planted.iter().zip(&me).map(|(t, e)| t - e).collect();
            let s_u: Vec<f64> = planted.iter().zip(&me).map(|(t, e)| t + e).collect();
            let lambda = [1u64; 3];
            let inst = integerize(&x, &s_l, &s_u, n, &lambda).unwrap();
            let got =
                solve_md_integerized(&x, n, &planted, &me, &lambda, &MiningConfig::default())
                    .unwrap();
            assert!(got.approximate);
            for sol in &got.result.solutions {
                for t in 0..3 {
                    let zsum: i64 = sol.indexes.iter().map(|&r| inst.xz[r as usize][t]).sum();
                    assert!(zsum >= inst.z_lower[t] && zsum <= inst.z_upper[t]);
                }
            }
        }
    }

    #[test]
    fn wide_instance_completes_quickly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5005);
        let rows: Vec<Vec<f64>> = (0..70)
            .map(|_| (0..14).map(|_| rng.gen_range(0..10_000) as f64).collect())
            .collect();
        let n = 7;
        let planted: Vec<f64> = (0..14)
            .map(|t| rows.iter().take(n).map(|r| r[t]).sum())
            .collect();
        let me = vec![50.0; 14];
        let x = SupersetMD::new(&rows).unwrap();
        let mut cfg = MiningConfig::default();
        cfg.time_limit = std::time::Duration::from_secs(60);
        cfg.max_solutions = 1;
        let got = solve_md_integerized(&x, n, &planted, &me, &[1 << 12; 14], &cfg).unwrap();
        assert!(!got.result.solutions.is_empty());
    }
}
