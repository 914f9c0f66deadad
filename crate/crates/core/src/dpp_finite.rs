//! The determinantal process on a finite ground set `{0, .., n-1}`.
//!
//! Two independent routes are kept side by side. The enumerative route builds
//! the exact point probabilities by inclusion–exclusion over principal minors
//! and sums functionals over all `2^n` configurations. The determinantal
//! route evaluates the same expectations as single `n x n` determinants.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::DiscreteKernel;
use crate::linalg::{self, CMatrix};
use crate::subset::{self, Configuration, IndexSet};

/// Largest ground set for which configurations are enumerated.
pub const ENUMERATION_LIMIT: usize = 20;
const MINOR_CACHE_LIMIT: usize = 16;

/// A function `a` on the ground set; the induced multiplier is `1 + a(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    values: Vec<Complex64>,
}

impl Symbol {
    pub fn new(values: Vec<Complex64>) -> Self {
        Symbol { values }
    }

    pub fn from_real<I: IntoIterator<Item = f64>>(values: I) -> Self {
        Symbol::new(values.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Symbol::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn multiplier(&self, j: usize) -> Complex64 {
        self.values[j] + 1.0
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// The symbol of `A B*`: `(1 + a) conj(1 + b) - 1`.
    pub fn gram_symbol(a: &Symbol, b: &Symbol) -> Symbol {
        assert_eq!(a.len(), b.len());
        Symbol::new(
            a.values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| (x + 1.0) * (y + 1.0).conj() - 1.0)
                .collect(),
        )
    }
}

/// `∏_{j ∈ I} (1 + a(j))`.
pub fn multiplicative_functional(a: &Symbol, config: Configuration) -> Complex64 {
    config
        .indices()
        .fold(Complex64::new(1.0, 0.0), |acc, j| acc * a.multiplier(j))
}

/// `det(I + K diag(a))`.
pub fn det_one_plus_kernel_times(kernel: &CMatrix, a: &[Complex64]) -> Complex64 {
    let n = kernel.nrows();
    let m = CMatrix::from_fn(n, n, |i, j| {
        let v = kernel[(i, j)] * a[j];
        if i == j {
            v + 1.0
        } else {
            v
        }
    });
    linalg::det(&m)
}

#[derive(Debug)]
pub struct FiniteDpp {
    kernel: DiscreteKernel,
    minors: OnceLock<Vec<f64>>,
}

impl Clone for FiniteDpp {
    fn clone(&self) -> Self {
        FiniteDpp::new(self.kernel.clone())
    }
}

impl FiniteDpp {
    pub fn new(kernel: DiscreteKernel) -> Self {
        FiniteDpp {
            kernel,
            minors: OnceLock::new(),
        }
    }

    pub fn kernel(&self) -> &DiscreteKernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn check_config(&self, config: Configuration) -> Result<()> {
        if config.fits(self.dim()) {
            Ok(())
        } else {
            let index = 63 - config.mask().leading_zeros() as usize;
            Err(Error::IndexOutOfRange {
                index,
                n: self.dim(),
            })
        }
    }

    fn check_symbol(&self, a: &Symbol) -> Result<()> {
        if a.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.len(),
            })
        }
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.dim() <= ENUMERATION_LIMIT {
            Ok(())
        } else {
            Err(Error::GroundSetTooLarge {
                n: self.dim(),
                limit: ENUMERATION_LIMIT,
            })
        }
    }

    fn minor(&self, config: Configuration) -> f64 {
        if let Some(cache) = self.minors.get() {
            return cache[config.mask() as usize];
        }
        let idx = config.to_vec();
        linalg::det(&linalg::submatrix(self.kernel.matrix(), &idx, &idx)).re
    }

    /// Principal minors indexed by subset mask.
    fn all_minors(&self) -> Vec<f64> {
        if self.dim() <= MINOR_CACHE_LIMIT {
            return self.minors.get_or_init(|| self.compute_minors()).clone();
        }
        self.compute_minors()
    }

    fn compute_minors(&self) -> Vec<f64> {
        let n = self.dim();
        (0..1u64 << n)
            .into_par_iter()
            .map(|mask| {
                let idx = IndexSet::from_mask(mask).to_vec();
                linalg::det(&linalg::submatrix(self.kernel.matrix(), &idx, &idx)).re
            })
            .collect()
    }

    /// Probability that the random configuration contains `config`:
    /// the principal minor `det K_I` (1 for the empty set).
    pub fn correlation(&self, config: Configuration) -> Result<f64> {
        self.check_config(config)?;
        Ok(self.minor(config))
    }

    /// Probability that the random configuration equals `config`, by direct
    /// inclusion–exclusion over its supersets.
    pub fn point_probability(&self, config: Configuration) -> Result<f64> {
        self.check_enumerable()?;
        self.check_config(config)?;
        let base = config.len();
        Ok(subset::supersets(config, self.dim())
            .map(|j| {
                let m = self.minor(j);
                if (j.len() - base) % 2 == 0 {
                    m
                } else {
                    -m
                }
            })
            .sum())
    }

    /// All `2^n` point probabilities, indexed by subset mask, via the
    /// superset Möbius transform of the principal minors.
    pub fn point_probabilities(&self) -> Result<Vec<f64>> {
        self.check_enumerable()?;
        let n = self.dim();
        let mut p = self.all_minors();
        for bit in 0..n {
            let b = 1usize << bit;
            for mask in 0..p.len() {
                if mask & b == 0 {
                    p[mask] -= p[mask | b];
                }
            }
        }
        Ok(p)
    }

    /// `Σ_I p[I] Ψ_a(I)` over every configuration.
    pub fn expectation_brute(&self, a: &Symbol) -> Result<Complex64> {
        self.check_symbol(a)?;
        let p = self.point_probabilities()?;
        Ok(p.iter()
            .enumerate()
            .map(|(mask, &pi)| pi * multiplicative_functional(a, IndexSet::from_mask(mask as u64)))
            .sum())
    }

    /// `det(I + K diag(a))`.
    pub fn expectation_det(&self, a: &Symbol) -> Result<Complex64> {
        self.check_symbol(a)?;
        Ok(det_one_plus_kernel_times(self.kernel.matrix(), a.values()))
    }

    /// `⟨Ψ_a, Ψ_b⟩ = det(I + K diag((1 + a) conj(1 + b) - 1))`.
    pub fn gram_det(&self, a: &Symbol, b: &Symbol) -> Result<Complex64> {
        self.check_symbol(a)?;
        self.check_symbol(b)?;
        self.expectation_det(&Symbol::gram_symbol(a, b))
    }

    /// `Σ_I p[I] Ψ_a(I) conj(Ψ_b(I))` over every configuration.
    pub fn gram_brute(&self, a: &Symbol, b: &Symbol) -> Result<Complex64> {
        self.check_symbol(a)?;
        self.check_symbol(b)?;
        let p = self.point_probabilities()?;
        Ok(p.iter()
            .enumerate()
            .map(|(mask, &pi)| {
                let c = IndexSet::from_mask(mask as u64);
                pi * multiplicative_functional(a, c) * multiplicative_functional(b, c).conj()
            })
            .sum())
    }

    /// Joint law of the occupation numbers of disjoint blocks.
    ///
    /// The generating function `E ∏ r_j^{α_j} = det(I + K diag(Σ (r_j - 1) 1_{X_j}))`
    /// is a polynomial of degree `|X_j|` in each `r_j`; it is sampled on the
    /// `(|X_j| + 1)`-th roots of unity and inverted by a separable DFT.
    pub fn count_distribution(&self, blocks: &[IndexSet]) -> Result<CountDistribution> {
        self.check_enumerable()?;
        let n = self.dim();
        let mut seen = IndexSet::EMPTY;
        for &b in blocks {
            self.check_config(b)?;
            let overlap = IndexSet::from_mask(seen.mask() & b.mask());
            if let Some(index) = overlap.indices().next() {
                return Err(Error::OverlappingBlocks { index });
            }
            seen = seen.union(b);
        }
        let dims: Vec<usize> = blocks.iter().map(|b| b.len() + 1).collect();
        let total: usize = dims.iter().product();
        let strides = strides(&dims);

        let values: Vec<Complex64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                for (axis, block) in blocks.iter().enumerate() {
                    let k = (flat / strides[axis]) % dims[axis];
                    let r = Complex64::from_polar(1.0, TAU * k as f64 / dims[axis] as f64);
                    for i in block.indices() {
                        x[i] = r - 1.0;
                    }
                }
                det_one_plus_kernel_times(self.kernel.matrix(), &x)
            })
            .collect();

        let mut data = values;
        for axis in 0..dims.len() {
            inverse_dft_axis(&mut data, &dims, &strides, axis);
        }
        let max_imag = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        Ok(CountDistribution {
            dims,
            probabilities: data.iter().map(|z| z.re).collect(),
            max_imaginary: max_imag,
        })
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for axis in (0..dims.len().saturating_sub(1)).rev() {
        s[axis] = s[axis + 1] * dims[axis + 1];
    }
    s
}

/// `c_α = (1/d) Σ_k v_k ω^{-αk}` along one axis of a row-major array.
fn inverse_dft_axis(data: &mut [Complex64], dims: &[usize], strides: &[usize], axis: usize) {
    let d = dims[axis];
    let stride = strides[axis];
    let twiddle: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / d as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); d];
    for start in 0..data.len() {
        if (start / stride) % d != 0 {
            continue;
        }
        for (k, slot) in line.iter_mut().enumerate() {
            *slot = data[start + k * stride];
        }
        for alpha in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, v) in line.iter().enumerate() {
                acc += v * twiddle[(alpha * k) % d];
            }
            data[start + alpha * stride] = acc / d as f64;
        }
    }
}

/// Probabilities `P(α_1, .., α_l)` stored row-major with `α_j ∈ 0..dims[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    pub dims: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// Largest discarded imaginary part after inversion.
    pub max_imaginary: f64,
}

impl CountDistribution {
    pub fn get(&self, counts: &[usize]) -> f64 {
        assert_eq!(counts.len(), self.dims.len());
        let s = strides(&self.dims);
        let flat: usize = counts
            .iter()
            .zip(&self.dims)
            .zip(&s)
            .map(|((&c, &d), &st)| {
                assert!(c < d, "count {c} out of range");
                c * st
            })
            .sum();
        self.probabilities[flat]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_dpp(d: &[f64]) -> FiniteDpp {
        let n = d.len();
        FiniteDpp::new(DiscreteKernel::from_real(&DMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })).unwrap())
    }

    fn set(n: usize, idx: &[usize]) -> IndexSet {
        IndexSet::from_indices(n, idx.iter().copied()).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let dpp = diag_dpp(&[0.3, 0.7]);
        assert_eq!(dpp.correlation(IndexSet::EMPTY).unwrap(), 1.0);
        assert!((dpp.correlation(set(2, &[0, 1])).unwrap() - 0.3 * 0.7).abs() < 1e-15);
        let id = FiniteDpp::new(DiscreteKernel::identity(3));
        assert!((id.correlation(set(3, &[0, 2])).unwrap() - 1.0).abs() < 1e-15);
        assert!(id.correlation(IndexSet::from_mask(0b1000)).is_err());
    }

    #[test]
    fn point_probability_examples() {
        let p = 0.37;
        let dpp = diag_dpp(&[p]);
        // two-subset enumeration: P({0}) = p, P(∅) = 1 - p
        assert!((dpp.point_probability(set(1, &[0])).unwrap() - p).abs() < 1e-15);
        assert!((dpp.point_probability(IndexSet::EMPTY).unwrap() - (1.0 - p)).abs() < 1e-15);

        let zero = FiniteDpp::new(DiscreteKernel::zeros(4));
        let probs = zero.point_probabilities().unwrap();
        assert_eq!(probs[0], 1.0);
        assert!(probs[1..].iter().all(|&x| x == 0.0));

        let id = FiniteDpp::new(DiscreteKernel::identity(4));
        assert!((id.point_probability(IndexSet::full(4)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn enumeration_guard() {
        let dpp = FiniteDpp::new(DiscreteKernel::zeros(21));
        assert!(matches!(dpp.point_probability(IndexSet::EMPTY), Err(Error::GroundSetTooLarge { .. })));
        assert!(matches!(dpp.expectation_brute(&Symbol::zeros(21)), Err(Error::GroundSetTooLarge { .. })));
        // the determinant route has no size limit
        assert_eq!(dpp.expectation_det(&Symbol::zeros(21)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn direct_and_mobius_probabilities_agree() {
        let mut rng = random::rng(21);
        for n in 1..=8 {
            let dpp = FiniteDpp::new(random::kernel(&mut rng, n));
            let all = dpp.point_probabilities().unwrap();
            for s in subset::all_subsets(n) {
                let direct = dpp.point_probability(s).unwrap();
                assert!((direct - all[s.mask() as usize]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn probability_matches_complement_determinant() {
        // independent oracle: p[I] = |det(K - 1_{complement of I})|
        let mut rng = random::rng(4);
        let n = 6;
        let dpp = FiniteDpp::new(random::kernel(&mut rng, n));
        let probs = dpp.point_probabilities().unwrap();
        for s in subset::all_subsets(n) {
            let mut m = dpp.kernel().matrix().clone();
            for i in 0..n {
                if !s.contains(i) {
                    m[(i, i)] -= 1.0;
                }
            }
            let oracle = linalg::det(&m).norm();
            assert!((oracle - probs[s.mask() as usize]).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplicative_functional_examples() {
        let a = Symbol::from_real([1.0, 2.0]);
        assert_eq!(multiplicative_functional(&a, set(2, &[0, 1])), c(6.0, 0.0));
        assert_eq!(multiplicative_functional(&a, IndexSet::EMPTY), c(1.0, 0.0));
        assert_eq!(multiplicative_functional(&Symbol::zeros(2), set(2, &[1])), c(1.0, 0.0));
    }

    #[test]
    fn expectation_examples() {
        let half = diag_dpp(&[0.5]);
        let a = Symbol::from_real([1.0]);
        // 0.5 * 1 + 0.5 * 2
        assert!((half.expectation_brute(&a).unwrap() - c(1.5, 0.0)).norm() < 1e-15);
        assert!((half.expectation_det(&a).unwrap() - c(1.5, 0.0)).norm() < 1e-15);

        let d = diag_dpp(&[0.3, 0.7]);
        let ones = Symbol::from_real([1.0, 1.0]);
        assert!((d.expectation_det(&ones).unwrap() - c(1.3 * 1.7, 0.0)).norm() < 1e-15);

        let (r, s) = (c(0.4, 1.2), c(-2.0, 0.5));
        let id = FiniteDpp::new(DiscreteKernel::identity(2));
        let a = Symbol::new(vec![r - 1.0, s - 1.0]);
        assert!((id.expectation_brute(&a).unwrap() - r * s).norm() < 1e-14);

        let mut rng = random::rng(8);
        let dpp = FiniteDpp::new(random::kernel(&mut rng, 5));
        let z = Symbol::zeros(5);
        assert!((dpp.expectation_brute(&z).unwrap() - 1.0).norm() < 1e-13);
        assert_eq!(dpp.expectation_det(&z).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn gram_examples() {
        let half = diag_dpp(&[0.5]);
        let a = Symbol::from_real([1.0]);
        // brute: 0.5 * 1 + 0.5 * |2|^2
        assert!((half.gram_det(&a, &a).unwrap() - c(2.5, 0.0)).norm() < 1e-15);
        assert!((half.gram_brute(&a, &a).unwrap() - c(2.5, 0.0)).norm() < 1e-15);

        let mut rng = random::rng(9);
        let dpp = FiniteDpp::new(random::kernel(&mut rng, 4));
        let a = random::disc_symbol(&mut rng, 4, 2.0);
        let z = Symbol::zeros(4);
        assert!((dpp.gram_det(&a, &z).unwrap() - dpp.expectation_det(&a).unwrap()).norm() < 1e-14);
        assert!((dpp.gram_det(&z, &z).unwrap() - 1.0).norm() < 1e-15);
        assert!((dpp.gram_brute(&z, &z).unwrap() - 1.0).norm() < 1e-13);

        let empty = FiniteDpp::new(DiscreteKernel::zeros(4));
        let b = random::disc_symbol(&mut rng, 4, 2.0);
        assert!((empty.gram_brute(&a, &b).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn gram_brute_matches_det_on_random_cases() {
        let mut rng = random::rng(10);
        for n in 1..=10 {
            let dpp = FiniteDpp::new(random::kernel(&mut rng, n));
            let a = random::disc_symbol(&mut rng, n, 2.0);
            let b = random::disc_symbol(&mut rng, n, 2.0);
            let brute = dpp.gram_brute(&a, &b).unwrap();
            let det = dpp.gram_det(&a, &b).unwrap();
            assert!(linalg::relative_residual(brute, det) <= 1e-9, "n={n}");
            let swapped = dpp.gram_det(&b, &a).unwrap();
            assert!((det - swapped.conj()).norm() <= 1e-10 * det.norm().max(1.0));
        }
    }

    #[test]
    fn inclusion_probability_is_diagonal() {
        let mut rng = random::rng(12);
        let n = 7;
        let dpp = FiniteDpp::new(random::kernel(&mut rng, n));
        let probs = dpp.point_probabilities().unwrap();
        for j in 0..n {
            let inc: f64 = probs
                .iter()
                .enumerate()
                .filter(|(mask, _)| mask >> j & 1 == 1)
                .map(|(_, p)| p)
                .sum();
            assert!((inc - dpp.kernel().matrix()[(j, j)].re).abs() <= 1e-10);
        }
    }

    fn brute_counts(dpp: &FiniteDpp, blocks: &[IndexSet]) -> Vec<f64> {
        let dims: Vec<usize> = blocks.iter().map(|b| b.len() + 1).collect();
        let st = strides(&dims);
        let mut out = vec![0.0; dims.iter().product()];
        for (mask, p) in dpp.point_probabilities().unwrap().into_iter().enumerate() {
            let flat: usize = blocks
                .iter()
                .zip(&st)
                .map(|(b, s)| (b.mask() & mask as u64).count_ones() as usize * s)
                .sum();
            out[flat] += p;
        }
        out
    }

    #[test]
    fn count_distribution_examples() {
        let p = 0.42;
        let d = diag_dpp(&[p]).count_distribution(&[set(1, &[0])]).unwrap();
        assert!((d.get(&[0]) - (1.0 - p)).abs() < 1e-15);
        assert!((d.get(&[1]) - p).abs() < 1e-15);

        let id = FiniteDpp::new(DiscreteKernel::identity(2));
        let d = id.count_distribution(&[set(2, &[0]), set(2, &[1])]).unwrap();
        assert!((d.get(&[1, 1]) - 1.0).abs() < 1e-15);
        assert!(d.get(&[0, 1]).abs() < 1e-15);

        let mut rng = random::rng(13);
        let dpp = FiniteDpp::new(random::kernel(&mut rng, 6));
        for blocks in [vec![set(6, &[0, 1, 2])], vec![set(6, &[0, 4]), set(6, &[1, 2, 5])]] {
            let d = dpp.count_distribution(&blocks).unwrap();
            let oracle = brute_counts(&dpp, &blocks);
            for (x, y) in d.probabilities.iter().zip(&oracle) {
                assert!((x - y).abs() <= 1e-10);
                assert!(*x >= -1e-10);
            }
            assert!((d.total() - 1.0).abs() <= 1e-10);
            assert!(d.max_imaginary <= 1e-10);
        }
    }

    #[test]
    fn count_distribution_rejects_overlap() {
        let dpp = FiniteDpp::new(DiscreteKernel::zeros(4));
        let err = dpp.count_distribution(&[set(4, &[0, 1]), set(4, &[1, 3])]).unwrap_err();
        assert_eq!(err, Error::OverlappingBlocks { index: 1 });
        let err = FiniteDpp::new(DiscreteKernel::zeros(21)).count_distribution(&[]).unwrap_err();
        assert!(matches!(err, Error::GroundSetTooLarge { .. }));
    }
}
