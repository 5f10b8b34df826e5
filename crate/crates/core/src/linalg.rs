//! Small dense linear-algebra helpers shared by the window statistics and the
//! detector. Every solve against a regularized Gram matrix goes through
//! [`SpdFactor`]; nothing in the crate forms an explicit inverse.

use nalgebra::{Cholesky, DMatrix, Dyn};

/// Relative tolerance for treating a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    /// Factors `gram + lambda * I`. Returns `None` if the matrix is not
    /// numerically positive definite, which cannot happen for a PSD `gram`
    /// and `lambda > 0` short of non-finite input.
    pub fn regularized(gram: &DMatrix<f64>, lambda: f64) -> Option<Self> {
        debug_assert!(is_symmetric(gram, SYMMETRY_TOL), "gram lost symmetry");
        let mut m = gram.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += lambda;
        }
        Cholesky::new(m).map(|chol| Self { chol })
    }

    /// Natural log of the determinant of the factored matrix.
    pub fn ln_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// Returns `rhs * M^{-1}` for the factored matrix `M` (right division).
    pub fn right_solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        // M is symmetric, so (rhs M^{-1})' = M^{-1} rhs'.
        self.chol.solve(&rhs.transpose()).transpose()
    }
}

pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = 1.0 + m.norm();
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= rel_tol * scale))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    debug_assert!(is_symmetric(m, SYMMETRY_TOL));
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}
