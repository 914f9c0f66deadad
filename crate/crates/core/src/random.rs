//! Seeded generators for random kernels, operators and symbols.
//!
//! Every randomized suite derives one independent seed per case from a master
//! seed with [`case_seed`], so results never depend on evaluation order or the
//! number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dpp_finite::Symbol;
use crate::kernels::DiscreteKernel;
use crate::linalg::CMatrix;

pub type CaseRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser applied to `master + counter * γ`.
pub fn case_seed(master: u64, counter: u64) -> u64 {
    let mut z = master.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn case_rng(master: u64, counter: u64) -> CaseRng {
    rng(case_seed(master, counter))
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the QR factorisation of a Ginibre matrix,
/// with the phases of `R`'s diagonal folded back into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = complex_matrix(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian kernel with eigenvalues drawn uniformly from `[0, 1]`.
pub fn kernel<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DiscreteKernel {
    let eigenvalues: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    kernel_with_spectrum(rng, &eigenvalues)
}

pub fn kernel_with_spectrum<R: Rng + ?Sized>(rng: &mut R, eigenvalues: &[f64]) -> DiscreteKernel {
    let n = eigenvalues.len();
    let u = unitary(rng, n);
    let scaled = CMatrix::from_fn(n, n, |r, c| u[(r, c)] * eigenvalues[c]);
    DiscreteKernel::new(scaled * u.adjoint()).expect("random kernel is valid")
}

/// Rank-`rank` orthogonal projector `QQ*`.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DiscreteKernel {
    assert!(rank <= n);
    let u = unitary(rng, n);
    let q = u.columns(0, rank).into_owned();
    DiscreteKernel::new(&q * q.adjoint()).expect("random projector is valid")
}

/// Complex symbol with values uniform in the disc of the given radius.
pub fn disc_symbol<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Symbol {
    Symbol::new(
        (0..n)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                let t = std::f64::consts::TAU * rng.random::<f64>();
                Complex64::from_polar(r, t)
            })
            .collect(),
    )
}

/// Real symbol with values uniform in `[lo, hi)`.
pub fn real_symbol<R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Symbol {
    Symbol::from_real((0..n).map(|_| rng.random_range(lo..hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn case_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..1000).map(|i| case_seed(7, i)).collect();
        let mut sorted = seeds.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
        assert_eq!(case_seed(7, 3), seeds[3]);
    }

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(1);
        let u = unitary(&mut r, 6);
        let err = linalg::max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(6, 6));
        assert!(err < 1e-13);
    }

    #[test]
    fn projector_is_idempotent() {
        let mut r = rng(2);
        for rank in 0..=5 {
            let p = projector(&mut r, 5, rank);
            assert!(p.projector_residual() < 1e-13);
            let tr: f64 = p.diagonal().iter().sum();
            assert!((tr - rank as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_symbol_is_bounded() {
        let mut r = rng(3);
        let a = disc_symbol(&mut r, 200, 2.0);
        assert!(a.values().iter().all(|z| z.norm() <= 2.0));
    }
}
