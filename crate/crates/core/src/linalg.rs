//! Dense complex linear algebra shared by every module.
//!
//! Eigen- and singular-value decompositions are delegated to `nalgebra`;
//! determinants use a local LU factorisation so the modulus can be
//! accumulated in log space.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Determinant held as `phase * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub ln_abs: f64,
    /// Unit-modulus phase; zero for a singular matrix.
    pub phase: Complex64,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        if self.phase == ZERO {
            return ZERO;
        }
        self.phase * self.ln_abs.exp()
    }

    pub fn is_singular(&self) -> bool {
        self.phase == ZERO
    }
}

/// LU with partial pivoting. Pivot moduli are summed as logarithms and the
/// phase is tracked separately, so products of many small pivots do not
/// underflow before the final exponentiation.
pub fn log_det(m: &CMatrix) -> LogDet {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut ln_abs = 0.0;
    let mut phase = ONE;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].norm();
        for r in (k + 1)..n {
            let v = a[(r, k)].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return LogDet {
                ln_abs: f64::NEG_INFINITY,
                phase: ZERO,
            };
        }
        if piv != k {
            a.swap_rows(piv, k);
            phase = -phase;
        }
        let p = a[(k, k)];
        ln_abs += best.ln();
        phase *= p / best;
        for r in (k + 1)..n {
            let f = a[(r, k)] / p;
            if f == ZERO {
                continue;
            }
            for c in (k + 1)..n {
                let t = a[(k, c)];
                a[(r, c)] -= f * t;
            }
        }
    }
    // keep the phase on the unit circle despite rounding drift
    let r = phase.norm();
    LogDet {
        ln_abs,
        phase: phase / r,
    }
}

pub fn det(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return ONE;
    }
    log_det(m).value()
}

pub fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn from_diagonal(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_column_slice(values))
}

pub fn from_real(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Hermitian eigendecomposition with eigenvalues sorted descending. Ties keep
/// the order in which the solver produced them.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolverFailed { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Singular values, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = nalgebra::SVD::try_new(m.clone(), false, false, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolverFailed { dim: m.nrows() })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// 2-norm condition number; infinite for a singular matrix.
pub fn condition_number(m: &CMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Relative residual `|x - y| / max(|y|, 1)`.
pub fn relative_residual(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_small_cases() {
        assert_eq!(det(&CMatrix::zeros(0, 0)), ONE);
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert!((det(&m) - c(-2.0, 0.0)).norm() < 1e-14);
        let z = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        // i*i - 1 = -2
        assert!((det(&z) - c(-2.0, 0.0)).norm() < 1e-14);
        assert_eq!(det(&CMatrix::zeros(3, 3)), ZERO);
    }

    #[test]
    fn log_det_avoids_underflow() {
        let m = CMatrix::from_diagonal_element(400, 400, c(1e-2, 0.0));
        let ld = log_det(&m);
        assert!((ld.ln_abs - 400.0 * (1e-2f64).ln()).abs() < 1e-9);
        assert!((ld.phase - ONE).norm() < 1e-14);
    }

    #[test]
    fn eigh_sorts_descending() {
        let m = from_diagonal(&[c(0.3, 0.0), c(0.7, 0.0)]);
        let (vals, vecs) = eigh(&m).unwrap();
        assert!((vals[0] - 0.7).abs() < 1e-15 && (vals[1] - 0.3).abs() < 1e-15);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((vecs[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }
}
