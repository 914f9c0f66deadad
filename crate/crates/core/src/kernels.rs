//! Kernel construction and validation, spectral data, Gauss–Legendre rules
//! and the symmetrised Nyström discretisation of kernel functions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Relative tolerance on `|K - K*|_max`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalue slack outside `[0, 1]` for user-supplied matrices.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Eigenvalue slack outside `[0, 1]` for discretised kernel functions.
pub const DISCRETIZED_SPECTRUM_TOL: f64 = 1e-8;

/// Eigenvalues (descending, clamped into `[0, 1]`) and the unitary matrix of
/// eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(f(λ)) U*`.
    pub fn functional_calculus(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.eigenvectors;
        let scaled = CMatrix::from_fn(u.nrows(), u.ncols(), |r, c| {
            u[(r, c)] * f(self.eigenvalues[c])
        });
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.functional_calculus(|x| x)
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.dim();
        linalg::max_abs_diff(
            &(self.eigenvectors.adjoint() * &self.eigenvectors),
            &CMatrix::identity(n, n),
        )
    }
}

/// A Hermitian matrix with spectrum in `[0, 1]`: the correlation kernel of a
/// determinantal process on a finite ground set.
#[derive(Debug, Clone)]
pub struct DiscreteKernel {
    matrix: CMatrix,
    labels: Option<Vec<f64>>,
    spectrum: SpectralData,
}

impl DiscreteKernel {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, SPECTRUM_TOL)
    }

    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::from_real(matrix))
    }

    /// Validates with a custom eigenvalue slack. The stored matrix is the
    /// Hermitian part of the input; only the reported eigenvalues are clamped.
    pub fn with_tolerance(matrix: CMatrix, spectrum_tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        for c in 0..matrix.ncols() {
            for r in 0..matrix.nrows() {
                let z = matrix[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        let tolerance = HERMITIAN_TOL * (1.0 + linalg::max_abs(&matrix));
        let deviation = linalg::hermitian_deviation(&matrix);
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let (mut eigenvalues, eigenvectors) = linalg::eigh(&matrix)?;
        for ev in eigenvalues.iter_mut() {
            if *ev < -spectrum_tol || *ev > 1.0 + spectrum_tol {
                return Err(Error::SpectrumOutOfRange {
                    eigenvalue: *ev,
                    tolerance: spectrum_tol,
                });
            }
            *ev = ev.clamp(0.0, 1.0);
        }
        Ok(DiscreteKernel {
            matrix,
            labels: None,
            spectrum: SpectralData {
                eigenvalues,
                eigenvectors,
            },
        })
    }

    pub fn with_labels(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(CMatrix::zeros(n, n)).expect("zero kernel is valid")
    }

    pub fn identity(n: usize) -> Self {
        Self::new(CMatrix::identity(n, n)).expect("identity kernel is valid")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn spectrum(&self) -> &SpectralData {
        &self.spectrum
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `|K^2 - K|_max`.
    pub fn projector_residual(&self) -> f64 {
        linalg::max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix)
    }
}

pub fn make_discrete_kernel(matrix: CMatrix) -> Result<DiscreteKernel> {
    DiscreteKernel::new(matrix)
}

pub fn spectral_decompose(kernel: &DiscreteKernel) -> SpectralData {
    kernel.spectrum().clone()
}

/// A kernel `K(x, y)` on the real line. Implementations are expected to be
/// Hermitian, `K(x, y) = conj(K(y, x))`.
pub trait KernelFunction: Sync {
    fn eval(&self, x: f64, y: f64) -> Complex64;
}

impl<F> KernelFunction for F
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        self(x, y)
    }
}

/// Dyson's sine kernel `sin(x - y) / (π (x - y))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SineKernel;

impl KernelFunction for SineKernel {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        Complex64::new(sine_kernel(x, y), 0.0)
    }
}

/// The constant kernel `1 / (hi - lo)`: on `L²([lo, hi])` it is the
/// orthogonal projector onto constants.
#[derive(Debug, Clone, Copy)]
pub struct RankOneUniform {
    pub lo: f64,
    pub hi: f64,
}

impl KernelFunction for RankOneUniform {
    fn eval(&self, _x: f64, _y: f64) -> Complex64 {
        Complex64::new(1.0 / (self.hi - self.lo), 0.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroKernel;

impl KernelFunction for ZeroKernel {
    fn eval(&self, _x: f64, _y: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let t = x - y;
    if t == 0.0 {
        return 1.0 / PI;
    }
    t.sin() / (PI * t)
}

/// Largest `|f(x, y) - conj(f(y, x))|` over all pairs of `points`.
pub fn hermitian_defect<F: KernelFunction + ?Sized>(f: &F, points: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in points {
        for &y in points {
            worst = worst.max((f.eval(x, y) - f.eval(y, x).conj()).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre rule on `[lo, hi]`, nodes ascending.
pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::BadInterval { lo, hi });
    }
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    // roots are symmetric; solve for the positive half by Newton from the
    // Chebyshev-like initial guess
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ref_nodes[i] = -x;
        ref_nodes[n - 1 - i] = x;
        ref_weights[i] = w;
        ref_weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    Ok(QuadratureRule {
        nodes: ref_nodes.iter().map(|&x| mid + half * x).collect(),
        weights: ref_weights.iter().map(|&w| half * w).collect(),
        interval: (lo, hi),
    })
}

/// Composite Gauss–Legendre rule with `n_per_panel` nodes on every panel
/// `[breakpoints[k], breakpoints[k + 1]]`.
pub fn composite_gauss_legendre(breakpoints: &[f64], n_per_panel: usize) -> Result<QuadratureRule> {
    if breakpoints.len() < 2 {
        return Err(Error::InvalidArgument(
            "a composite rule needs at least two breakpoints".into(),
        ));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breakpoints.windows(2) {
        let panel = gauss_legendre(n_per_panel, w[0], w[1])?;
        nodes.extend(panel.nodes);
        weights.extend(panel.weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (breakpoints[0], breakpoints[breakpoints.len() - 1]),
    })
}

/// Symmetrised Nyström matrix `√w_i f(x_i, x_j) √w_j`, labelled by the nodes.
pub fn discretize<F: KernelFunction + ?Sized>(f: &F, q: &QuadratureRule) -> Result<DiscreteKernel> {
    let sw: Vec<f64> = q.weights.iter().map(|w| w.sqrt()).collect();
    let n = q.len();
    let m = CMatrix::from_fn(n, n, |i, j| f.eval(q.nodes[i], q.nodes[j]) * (sw[i] * sw[j]));
    DiscreteKernel::with_tolerance(m, DISCRETIZED_SPECTRUM_TOL)?.with_labels(q.nodes.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use crate::subset::all_subsets;

    fn real(rows: usize, data: &[f64]) -> CMatrix {
        linalg::from_real(&DMatrix::from_row_slice(rows, rows, data))
    }

    #[test]
    fn zero_and_identity_are_valid() {
        let z = DiscreteKernel::new(CMatrix::zeros(4, 4)).unwrap();
        assert!(z.spectrum().eigenvalues.iter().all(|&l| l == 0.0));
        let id = DiscreteKernel::new(CMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.spectrum().eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn spectrum_out_of_range_is_rejected() {
        // quadratic formula for [[p, q], [q, p]]: p ± q
        let (p, q) = (0.5, 0.6);
        let tr: f64 = 2.0 * p;
        let det: f64 = p * p - q * q;
        let disc = (tr * tr - 4.0 * det).sqrt();
        let top = 0.5 * (tr + disc);
        let bottom = 0.5 * (tr - disc);
        assert!((top - 1.1).abs() < 1e-15 && (bottom + 0.1).abs() < 1e-15);

        let err = DiscreteKernel::new(real(2, &[p, q, q, p])).unwrap_err();
        match err {
            Error::SpectrumOutOfRange { eigenvalue, .. } => {
                assert!((eigenvalue - top).abs() < 1e-12 || (eigenvalue - bottom).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let err = DiscreteKernel::new(real(2, &[0.5, 0.1, 0.0, 0.5])).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
        let err = DiscreteKernel::new(CMatrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn tiny_excursions_are_clamped() {
        let k = DiscreteKernel::new(real(2, &[1.0 + 5e-11, 0.0, 0.0, -5e-11])).unwrap();
        assert_eq!(k.spectrum().eigenvalues, vec![1.0, 0.0]);
    }

    #[test]
    fn diagonal_spectral_data() {
        let k = DiscreteKernel::new(real(2, &[0.3, 0.0, 0.0, 0.7])).unwrap();
        let sd = spectral_decompose(&k);
        assert_eq!(sd.eigenvalues, vec![0.7, 0.3]);
        // permuted standard basis
        assert!((sd.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((sd.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);

        let id = spectral_decompose(&DiscreteKernel::identity(2));
        assert_eq!(id.eigenvalues, vec![1.0, 1.0]);
        assert!(id.orthonormality_residual() < 1e-15);
    }

    #[test]
    fn random_kernel_reconstruction() {
        let mut rng = random::rng(5);
        let k = random::kernel(&mut rng, 5);
        let sd = spectral_decompose(&k);
        assert!(linalg::max_abs_diff(&sd.reconstruct(), k.matrix()) <= 1e-9);
        assert!(sd.orthonormality_residual() <= 1e-10);
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn principal_minors_nonnegative() {
        let mut rng = random::rng(11);
        for n in [3, 7, 12] {
            let k = random::kernel(&mut rng, n);
            for s in all_subsets(n) {
                let idx = s.to_vec();
                let minor = linalg::det(&linalg::submatrix(k.matrix(), &idx, &idx));
                assert!(minor.re >= -1e-10, "minor {minor} for {s}");
            }
        }
    }

    #[test]
    fn sine_kernel_values() {
        assert!((sine_kernel(0.0, 0.0) - 1.0 / PI).abs() < 1e-16);
        assert!(sine_kernel(0.0, PI).abs() < 1e-16);
        // series oracle for sin(1)
        let mut sin1 = 0.0;
        let mut term = 1.0;
        for k in 0..20 {
            sin1 += term;
            term *= -1.0 / (((2 * k + 2) * (2 * k + 3)) as f64);
        }
        assert!((sine_kernel(0.0, 1.0) - sin1 / PI).abs() < 1e-15);
        assert!((sine_kernel(0.0, 1.0) - 0.2678485334).abs() < 1e-10);
        for (x, y) in [(0.3, -1.7), (2.0, 5.5), (-4.0, 0.1)] {
            assert_eq!(sine_kernel(x, y), sine_kernel(y, x));
        }
        assert_eq!(hermitian_defect(&SineKernel, &[0.0, 0.5, 1.3, -2.0]), 0.0);
    }

    #[test]
    fn gauss_legendre_small_rules() {
        let q1 = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert_eq!(q1.nodes, vec![0.0]);
        assert!((q1.weights[0] - 2.0).abs() < 1e-15);

        let q2 = gauss_legendre(2, -1.0, 1.0).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((q2.nodes[0] + r).abs() < 1e-15 && (q2.nodes[1] - r).abs() < 1e-15);
        assert!((q2.weights[0] - 1.0).abs() < 1e-15 && (q2.weights[1] - 1.0).abs() < 1e-15);

        let q = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert!((q.integrate(|x| x * x) - 1.0 / 3.0).abs() < 1e-14);

        assert!(matches!(gauss_legendre(3, 1.0, 1.0), Err(Error::BadInterval { .. })));
        assert!(matches!(gauss_legendre(0, 0.0, 1.0), Err(Error::ZeroOrder)));
    }

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        for n in [1usize, 2, 5, 17, 40, 80] {
            let (lo, hi) = (-0.7, 2.3);
            let q = gauss_legendre(n, lo, hi).unwrap();
            let total: f64 = q.weights.iter().sum();
            assert!((total - (hi - lo)).abs() <= 1e-12 * (hi - lo));
            assert!(q.nodes.iter().all(|&x| lo <= x && x <= hi));
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for deg in 0..(2 * n).min(30) {
                let exact = (hi.powi(deg as i32 + 1) - lo.powi(deg as i32 + 1)) / (deg as f64 + 1.0);
                let approx = q.integrate(|x| x.powi(deg as i32));
                assert!(
                    (approx - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                    "n={n} deg={deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn discretize_zero_and_rank_one() {
        let q = gauss_legendre(6, -1.0, 1.0).unwrap();
        let z = discretize(&ZeroKernel, &q).unwrap();
        assert!(linalg::max_abs(z.matrix()) == 0.0);
        assert_eq!(z.labels().unwrap(), &q.nodes[..]);

        // rank-one: trace = Σ w_i / (hi - lo) = 1 is the only nonzero eigenvalue
        let q = gauss_legendre(5, 0.0, 1.0).unwrap();
        let k = discretize(&RankOneUniform { lo: 0.0, hi: 1.0 }, &q).unwrap();
        let ev = &k.spectrum().eigenvalues;
        let trace: f64 = k.diagonal().iter().sum();
        assert!((trace - 1.0).abs() < 1e-14);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1..].iter().all(|&l| l.abs() < 1e-12));
    }

    #[test]
    fn discretized_sine_spectrum() {
        let q40 = gauss_legendre(40, -1.0, 1.0).unwrap();
        let q80 = gauss_legendre(80, -1.0, 1.0).unwrap();
        let k40 = discretize(&SineKernel, &q40).unwrap();
        let k80 = discretize(&SineKernel, &q80).unwrap();
        for &l in &k40.spectrum().eigenvalues {
            assert!((-1e-10..=1.0 + 1e-10).contains(&l));
        }
        for (a, b) in k40.spectrum().eigenvalues[..10]
            .iter()
            .zip(&k80.spectrum().eigenvalues[..10])
        {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}
