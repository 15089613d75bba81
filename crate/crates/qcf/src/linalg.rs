//! Dense linear-algebra helpers shared by the operator and stability
//! modules: pivot-checked LU solves, matrix norms, and an orthonormal basis
//! of the subspace orthogonal to the constant vector.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::{Error, Result};

/// A factored matrix is declared singular when its smallest LU pivot falls
/// below this fraction of the matrix norm.
pub(crate) const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// `ℓ^∞` operator norm: largest absolute row sum.
pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// `ℓ²` operator norm via the largest singular value.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

pub(crate) fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

pub(crate) fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    max_abs(&(m - m.transpose())) <= tol
}

/// LU factorization with partial pivoting that refuses to solve with a
/// numerically singular matrix.
#[derive(Debug)]
pub(crate) struct CheckedLu {
    lu: nalgebra::LU<f64, Dyn, Dyn>,
}

impl CheckedLu {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let scale = inf_norm(m);
        let lu = m.clone().lu();
        let threshold = SINGULAR_PIVOT_REL * scale;
        let pivot = lu
            .u()
            .diagonal()
            .iter()
            .map(|d| d.abs())
            .fold(f64::INFINITY, f64::min);
        if !(pivot > threshold) {
            return Err(Error::Singular { pivot, threshold });
        }
        Ok(Self { lu })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(rhs).expect("pivots were checked at factorization")
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.lu
            .try_inverse()
            .expect("pivots were checked at factorization")
    }
}

/// Columns form an orthonormal basis of `{e}^⊥ ⊂ R^m`: the trailing `m − 1`
/// columns of the Householder reflector that maps `e` to `√m·e_1`.
pub(crate) fn e_complement_basis(m: usize) -> DMatrix<f64> {
    assert!(m >= 2);
    let root = (m as f64).sqrt();
    // v = e − √m·e_1; H = I − 2vvᵀ/(vᵀv). No cancellation: v_1 = 1 − √m is
    // bounded away from zero for m ≥ 2.
    let mut v = DVector::from_element(m, 1.0);
    v[0] = 1.0 - root;
    let beta = 2.0 / v.dot(&v);
    let mut q = DMatrix::zeros(m, m - 1);
    for j in 1..m {
        let col = j - 1;
        for i in 0..m {
            let id = if i == j { 1.0 } else { 0.0 };
            q[(i, col)] = id - beta * v[i] * v[j];
        }
    }
    q
}
