//! Element algebra the search engine is generic over.
//!
//! The contraction and subspacing logic only ever adds elements into running
//! sums, subtracts them back out, and asks whether one accumulated value is
//! component-wise `<=` another. Scalars, target-table row vectors and packed
//! integer words all satisfy that interface, so one engine serves the 1-D,
//! multidimensional and integerized solvers.

pub trait Algebra: Sync {
    type Elem: Clone + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn add_assign(&self, acc: &mut Self::Elem, x: &Self::Elem);
    fn sub_assign(&self, acc: &mut Self::Elem, x: &Self::Elem);
    /// Component-wise `a <= b` on every dimension.
    fn le(&self, a: &Self::Elem, b: &Self::Elem) -> bool;

    fn assign(&self, dst: &mut Self::Elem, src: &Self::Elem) {
        dst.clone_from(src);
    }

    /// Hook applied after a solve range shrinks (fixed elements subtracted
    /// out). Identity for exact arithmetic; the packed algebra clamps the
    /// range back into its representable envelope. Returns false when the
    /// clamp proves the range can no longer be met, killing the node.
    fn clamp_range(&self, _min: &mut Self::Elem, _max: &mut Self::Elem) -> bool {
        true
    }
}

/// Plain `f64` elements for 1-D mining.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarAlgebra;

impl Algebra for ScalarAlgebra {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }

    fn add_assign(&self, acc: &mut f64, x: &f64) {
        *acc += x;
    }

    fn sub_assign(&self, acc: &mut f64, x: &f64) {
        *acc -= x;
    }

    fn le(&self, a: &f64, b: &f64) -> bool {
        a <= b
    }
}

/// Fixed-width `f64` vectors for multidimensional mining.
#[derive(Debug, Clone, Copy)]
pub struct VecAlgebra {
    pub dims: usize,
}

impl VecAlgebra {
    pub fn new(dims: usize) -> Self {
        Self { dims }
    }
}

impl Algebra for VecAlgebra {
    type Elem = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.dims]
    }

    fn add_assign(&self, acc: &mut Vec<f64>, x: &Vec<f64>) {
        debug_assert_eq!(acc.len(), x.len());
        for (a, b) in acc.iter_mut().zip(x) {
            *a += b;
        }
    }

    fn sub_assign(&self, acc: &mut Vec<f64>, x: &Vec<f64>) {
        debug_assert_eq!(acc.len(), x.len());
        for (a, b) in acc.iter_mut().zip(x) {
            *a -= b;
        }
    }

    fn le(&self, a: &Vec<f64>, b: &Vec<f64>) -> bool {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).all(|(x, y)| x <= y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ops() {
        let alg = ScalarAlgebra;
        let mut acc = alg.zero();
        alg.add_assign(&mut acc, &2.5);
        alg.sub_assign(&mut acc, &1.0);
        assert_eq!(acc, 1.5);
        assert!(alg.le(&1.0, &1.0));
        assert!(!alg.le(&2.0, &1.0));
    }

    #[test]
    fn vector_le_is_componentwise_conjunction() {
        let alg = VecAlgebra::new(3);
        assert!(alg.le(&vec![1.0, 2.0, 3.0], &vec![1.0, 2.0, 3.0]));
        assert!(!alg.le(&vec![1.0, 2.0, 3.0], &vec![5.0, 1.9, 5.0]));
        let mut acc = alg.zero();
        alg.add_assign(&mut acc, &vec![1.0, -1.0, 0.5]);
        alg.add_assign(&mut acc, &vec![1.0, -1.0, 0.5]);
        assert_eq!(acc, vec![2.0, -2.0, 1.0]);
    }
}
