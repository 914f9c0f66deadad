//! Randomized identity suites. Each case draws its inputs from its own seed,
//! `case_seed(master, case)`, so a suite can be replayed case by case and its
//! results do not depend on the number of threads.

use num_complex::Complex64;
use rand::seq::index;
use rayon::prelude::*;

use crate::dpp_finite::FiniteDpp;
use crate::embedding::{self, EmbeddingMode};
use crate::error::Result;
use crate::fock::{self, BlockOperator, SplitSpace};
use crate::linalg;
use crate::random;

/// Symbols are drawn from the disc `|a| <= SYMBOL_RADIUS`.
pub const SYMBOL_RADIUS: f64 = 2.0;
pub const PROBABILITY_TOL: f64 = 1e-10;
pub const BLOCK_IDENTITY_TOL: f64 = 1e-10;
pub const IDEMPOTENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCase {
    pub case: u64,
    pub n: usize,
    pub expectation: Complex64,
    /// `|brute - det| / max(|det|, 1)` for the mean of `Ψ_a`.
    pub expectation_residual: f64,
    pub gram_residual: f64,
    pub sesquilinear_residual: f64,
    pub probability_sum_residual: f64,
    pub min_probability: f64,
}

impl FiniteCase {
    pub fn max_identity_residual(&self) -> f64 {
        self.expectation_residual
            .max(self.gram_residual)
            .max(self.sesquilinear_residual)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_identity_residual() <= tol
            && self.probability_sum_residual <= PROBABILITY_TOL
            && self.min_probability >= -PROBABILITY_TOL
    }
}

pub fn finite_case(case: u64, n: usize, seed: u64) -> Result<FiniteCase> {
    let mut rng = random::rng(seed);
    let dpp = FiniteDpp::new(random::kernel(&mut rng, n));
    let a = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
    let b = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);

    let probs = dpp.point_probabilities()?;
    let total: f64 = probs.iter().sum();
    let min_probability = probs.iter().copied().fold(f64::INFINITY, f64::min);

    let expectation = dpp.expectation_det(&a)?;
    let gram = dpp.gram_det(&a, &b)?;
    let gram_swapped = dpp.gram_det(&b, &a)?;
    Ok(FiniteCase {
        case,
        n,
        expectation,
        expectation_residual: linalg::relative_residual(dpp.expectation_brute(&a)?, expectation),
        gram_residual: linalg::relative_residual(dpp.gram_brute(&a, &b)?, gram),
        sesquilinear_residual: linalg::relative_residual(gram_swapped.conj(), gram),
        probability_sum_residual: (total - 1.0).abs(),
        min_probability,
    })
}

pub fn finite_suite(n: usize, cases: u64, master_seed: u64) -> Result<Vec<FiniteCase>> {
    (0..cases)
        .into_par_iter()
        .map(|c| finite_case(c, n, random::case_seed(master_seed, c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockCase {
    pub case: u64,
    pub n: usize,
    pub m: usize,
    /// Brute Plücker inner product against `det(c c̃* + d d̃*)`.
    pub cauchy_binet_residual: f64,
    /// `det(c c̃* + d d̃*)` against `det(1 + Π(g g̃* - 1))`.
    pub projector_formula_residual: f64,
    /// `|λ(g1) λ(g2) - λ(g1 g2)|_max`, when `n` admits dense exterior powers.
    pub representation_residual: Option<f64>,
}

impl FockCase {
    pub fn max_residual(&self) -> f64 {
        self.cauchy_binet_residual
            .max(self.projector_formula_residual)
            .max(self.representation_residual.unwrap_or(0.0))
    }
}

pub fn fock_case(case: u64, n: usize, m: usize, seed: u64) -> Result<FockCase> {
    let mut rng = random::rng(seed);
    let w: Vec<usize> = index::sample(&mut rng, n, m).into_vec();
    let split = SplitSpace::new(n, &w)?;
    let g = BlockOperator::new(random::complex_matrix(&mut rng, n, n), split)?;
    let h = BlockOperator::new(random::complex_matrix(&mut rng, n, n), split)?;
    let brute = fock::fock_inner(&fock::coherent_state(&g), &fock::coherent_state(&h))?;
    let (blocks, full) = fock::coherent_inner_formulas(&g, &h)?;

    let representation_residual = if n <= fock::DENSE_LIMIT {
        let l1 = fock::exterior_power(g.matrix(), m)?.matrix;
        let l2 = fock::exterior_power(h.matrix(), m)?.matrix;
        let l12 = fock::exterior_power(&(g.matrix() * h.matrix()), m)?.matrix;
        Some(linalg::max_abs_diff(&(l1 * l2), &l12))
    } else {
        None
    };
    Ok(FockCase {
        case,
        n,
        m,
        cauchy_binet_residual: linalg::relative_residual(brute, blocks),
        projector_formula_residual: linalg::relative_residual(full, blocks),
        representation_residual,
    })
}

pub fn fock_suite(n: usize, m: usize, cases: u64, master_seed: u64) -> Result<Vec<FockCase>> {
    (0..cases)
        .into_par_iter()
        .map(|c| fock_case(c, n, m, random::case_seed(master_seed, c)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCase {
    pub case: u64,
    pub n: usize,
    /// Rank of the projector kernel; `None` in general mode.
    pub rank: Option<usize>,
    pub values: embedding::EmbeddingValues,
    /// Largest pairwise relative residual among the available routes.
    pub residual: f64,
    pub idempotence_residual: f64,
    pub block_residual: f64,
}

impl EmbeddingCase {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol
            && self.idempotence_residual <= IDEMPOTENCE_TOL
            && self.block_residual <= BLOCK_IDENTITY_TOL
    }
}

pub fn embedding_case(case: u64, mode: EmbeddingMode, n: usize, seed: u64) -> Result<EmbeddingCase> {
    let mut rng = random::rng(seed);
    let (kernel, rank) = match mode {
        EmbeddingMode::Projector => {
            let rank = rand::Rng::random_range(&mut rng, 0..=n);
            (random::projector(&mut rng, n, rank), Some(rank))
        }
        EmbeddingMode::General => (random::kernel(&mut rng, n), None),
    };
    let a = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
    let b = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
    let values = match mode {
        EmbeddingMode::Projector => embedding::projector_embedding_check(&kernel, &a, &b)?,
        EmbeddingMode::General => embedding::general_embedding_check(&kernel, &a, &b)?,
    };
    let l = embedding::doubling_projector(&kernel)?;
    Ok(EmbeddingCase {
        case,
        n,
        rank,
        residual: values.residual(),
        values,
        idempotence_residual: l.idempotence_residual(),
        block_residual: embedding::block_conjugation_check(&kernel, &a)?,
    })
}

pub fn embedding_suite(mode: EmbeddingMode, n: usize, cases: u64, master_seed: u64) -> Result<Vec<EmbeddingCase>> {
    (0..cases)
        .into_par_iter()
        .map(|c| embedding_case(c, mode, n, random::case_seed(master_seed, c)))
        .collect()
}
