//! Exact sampling by the spectral method and Monte Carlo audits of the
//! determinant identities.
//!
//! A draw first keeps each eigenvector `v_k` with probability `λ_k`, then picks
//! points one at a time from the projection DPP spanned by the kept vectors,
//! projecting the chosen coordinate out after each pick. Trial `t` of a batch
//! is seeded with [`random::case_seed`]`(master, t)`, so batches are identical
//! however many threads run them.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::dpp_finite::{multiplicative_functional, FiniteDpp, Symbol};
use crate::error::{Error, Result};
use crate::kernels::{DiscreteKernel, SpectralData};
use crate::linalg::CMatrix;
use crate::random;
use crate::subset::{Configuration, IndexSet, MAX_GROUND_SET};

/// Squared projection norms below this cannot be normalised safely.
pub const DEGENERACY_TOL: f64 = 1e-14;
pub const MIN_MC_TRIALS: usize = 100;
pub const MIN_AUDIT_TRIALS: usize = 10_000;
/// Expected counts below this are pooled into one chi-squared cell.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;
const RESAMPLE_ATTEMPTS: usize = 8;

pub fn sample(sd: &SpectralData, seed: u64) -> Result<Configuration> {
    sample_with_rng(sd, &mut random::rng(seed))
}

pub fn sample_with_rng<R: Rng + ?Sized>(sd: &SpectralData, rng: &mut R) -> Result<Configuration> {
    let n = sd.dim();
    if n > MAX_GROUND_SET {
        return Err(Error::GroundSetTooLarge {
            n,
            limit: MAX_GROUND_SET,
        });
    }
    let kept: Vec<usize> = (0..n)
        .filter(|&k| rng.random::<f64>() < sd.eigenvalues[k])
        .collect();
    // columns of the current orthonormal basis
    let mut basis: Vec<Vec<Complex64>> = kept
        .iter()
        .map(|&k| sd.eigenvectors.column(k).iter().copied().collect())
        .collect();
    let mut chosen = IndexSet::EMPTY;

    while !basis.is_empty() {
        let weights: Vec<f64> = (0..n)
            .map(|i| basis.iter().map(|col| col[i].norm_sqr()).sum())
            .collect();
        let point = pick_point(&weights, chosen, rng)?;
        chosen = chosen.union(IndexSet::from_mask(1 << point));

        let pivot = (0..basis.len())
            .max_by(|&x, &y| basis[x][point].norm().total_cmp(&basis[y][point].norm()))
            .expect("basis is non-empty");
        let pivot_col = basis.swap_remove(pivot);
        let pivot_val = pivot_col[point];
        for col in basis.iter_mut() {
            let f = col[point] / pivot_val;
            for (x, p) in col.iter_mut().zip(&pivot_col) {
                *x -= f * p;
            }
            col[point] = Complex64::new(0.0, 0.0);
        }
        orthonormalize(&mut basis)?;
    }
    Ok(chosen)
}

fn pick_point<R: Rng + ?Sized>(weights: &[f64], chosen: IndexSet, rng: &mut R) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    for _ in 0..RESAMPLE_ATTEMPTS {
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if w > 0.0 && (target < acc || pick.is_none()) {
                pick = Some(i);
                if target < acc {
                    break;
                }
            }
        }
        if let Some(i) = pick {
            if weights[i] >= DEGENERACY_TOL && !chosen.contains(i) {
                return Ok(i);
            }
        }
    }
    Err(Error::NumericalDegeneracy { norm: total })
}

/// Modified Gram–Schmidt in place.
fn orthonormalize(basis: &mut [Vec<Complex64>]) -> Result<()> {
    for j in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(j);
        let col = &mut rest[0];
        for q in done.iter() {
            let proj: Complex64 = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in col.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm_sqr: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr < DEGENERACY_TOL {
            return Err(Error::NumericalDegeneracy { norm: norm_sqr });
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for x in col.iter_mut() {
            *x *= inv;
        }
    }
    Ok(())
}

/// FNV-1a over the little-endian bytes of the kernel entries.
pub fn kernel_fingerprint(kernel: &CMatrix) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: [u8; 8]| {
        for b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed((kernel.nrows() as u64).to_le_bytes());
    for z in kernel.iter() {
        feed(z.re.to_le_bytes());
        feed(z.im.to_le_bytes());
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub configurations: Vec<Configuration>,
    pub master_seed: u64,
    pub kernel_fingerprint: u64,
}

pub fn sample_batch(kernel: &DiscreteKernel, count: usize, master_seed: u64) -> Result<SampleBatch> {
    let sd = kernel.spectrum();
    let configurations = (0..count as u64)
        .into_par_iter()
        .map(|t| sample(sd, random::case_seed(master_seed, t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        configurations,
        master_seed,
        kernel_fingerprint: kernel_fingerprint(kernel.matrix()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
}

impl McEstimate {
    /// `|estimate - exact|` in units of the standard error.
    pub fn z_score(&self, exact: Complex64) -> f64 {
        z_score((self.estimate - exact).norm(), self.stderr)
    }
}

fn z_score(deviation: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        deviation / stderr
    } else if deviation <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Sample mean of complex observations and its standard error.
pub fn mean_and_stderr(values: &[Complex64]) -> McEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        estimate: mean,
        stderr: (var / n).sqrt(),
    }
}

pub fn mc_expectation(dpp: &FiniteDpp, a: &Symbol, trials: usize, master_seed: u64) -> Result<McEstimate> {
    if trials < MIN_MC_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_MC_TRIALS} trials required, got {trials}"
        )));
    }
    if a.len() != dpp.dim() {
        return Err(Error::DimensionMismatch {
            expected: dpp.dim(),
            found: a.len(),
        });
    }
    let batch = sample_batch(dpp.kernel(), trials, master_seed)?;
    let values: Vec<Complex64> = batch
        .configurations
        .iter()
        .map(|&c| multiplicative_functional(a, c))
        .collect();
    Ok(mean_and_stderr(&values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionRow {
    pub point: usize,
    pub expected: f64,
    pub frequency: f64,
    pub stderr: f64,
    pub z: f64,
}

fn binomial_row(point: usize, expected: f64, hits: usize, trials: usize) -> InclusionRow {
    let frequency = hits as f64 / trials as f64;
    let stderr = (expected * (1.0 - expected) / trials as f64).max(0.0).sqrt();
    InclusionRow {
        point,
        expected,
        frequency,
        stderr,
        z: z_score((frequency - expected).abs(), stderr),
    }
}

/// Empirical inclusion frequency of every point against `K(j, j)`.
pub fn inclusion_audit(dpp: &FiniteDpp, trials: usize, master_seed: u64) -> Result<Vec<InclusionRow>> {
    if trials < MIN_AUDIT_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_AUDIT_TRIALS} trials required, got {trials}"
        )));
    }
    let batch = sample_batch(dpp.kernel(), trials, master_seed)?;
    Ok(inclusion_rows(dpp.kernel(), &batch))
}

pub fn inclusion_rows(kernel: &DiscreteKernel, batch: &SampleBatch) -> Vec<InclusionRow> {
    let diag = kernel.diagonal();
    let trials = batch.configurations.len();
    (0..kernel.dim())
        .map(|j| {
            let hits = batch.configurations.iter().filter(|c| c.contains(j)).count();
            binomial_row(j, diag[j], hits, trials)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRow {
    pub i: usize,
    pub j: usize,
    pub row: InclusionRow,
}

/// Joint inclusion frequency of every pair against `K_ii K_jj - |K_ij|²`.
pub fn pair_rows(kernel: &DiscreteKernel, batch: &SampleBatch) -> Vec<PairRow> {
    let k = kernel.matrix();
    let n = kernel.dim();
    let trials = batch.configurations.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let expected = (k[(i, i)] * k[(j, j)] - k[(i, j)] * k[(j, i)]).re;
            let hits = batch
                .configurations
                .iter()
                .filter(|c| c.contains(i) && c.contains(j))
                .count();
            out.push(PairRow {
                i,
                j,
                row: binomial_row(0, expected, hits, trials),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit of a batch against exact point probabilities
/// (indexed by mask). Cells with expected count below 5 are pooled.
pub fn chi_squared_test(batch: &SampleBatch, probabilities: &[f64]) -> Result<ChiSquaredTest> {
    let trials = batch.configurations.len() as f64;
    let mut observed = vec![0usize; probabilities.len()];
    for c in &batch.configurations {
        let idx = c.mask() as usize;
        if idx >= observed.len() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                n: observed.len(),
            });
        }
        observed[idx] += 1;
    }
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (o, &p) in observed.iter().zip(probabilities) {
        let e = p.max(0.0) * trials;
        if e < MIN_EXPECTED_COUNT {
            pooled_obs += *o as f64;
            pooled_exp += e;
        } else {
            statistic += (*o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        statistic += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquaredTest {
        statistic,
        degrees_of_freedom: dof,
        p_value: dist.sf(statistic),
    })
}
