//! The correspondence between multiplicative functionals and coherent states.
//!
//! For a projector kernel `K`, the multiplier `A = 1 + diag(a)` is viewed as an
//! operator on `C^n = ker K ⊕ ran K`; the inner product of its coherent states
//! equals `⟨Ψ_a, Ψ_b⟩`. A general kernel is first doubled into the projector
//! `L = [[1 - K, √(K - K²)], [√(K - K²), K]]` on `C^n ⊕ C^n`, and the multiplier
//! into `g_a = diag(1, A)`.
//!
//! The Fock side needs `W` spanned by basis vectors, so every operator is
//! conjugated into the eigenbasis of the relevant projector before coherent
//! states are formed. Determinants are invariant under this change of basis.

use num_complex::Complex64;

use crate::dpp_finite::{FiniteDpp, Symbol};
use crate::error::{Error, Result};
use crate::fock::{self, BlockOperator, SplitSpace};
use crate::kernels::{DiscreteKernel, SpectralData};
use crate::linalg::{self, CMatrix};

pub const PROJECTOR_TOL: f64 = 1e-9;
/// Eigenvalues of `K - K²` below this are an input error rather than round-off.
pub const DEFECT_NEGATIVE_TOL: f64 = 1e-12;
/// Largest `n` for which explicit coherent states are built in the projector case.
pub const PROJECTOR_FOCK_LIMIT: usize = 8;
/// Largest `n` (so `2n` ambient dimensions) for explicit coherent states of the
/// doubled construction.
pub const DOUBLED_FOCK_LIMIT: usize = 6;
/// Largest `n` for which the enumerative Gram value is included.
pub const BRUTE_LIMIT: usize = 10;

#[derive(Debug, Clone)]
pub struct DoubledProjector {
    matrix: CMatrix,
    defect: CMatrix,
}

impl DoubledProjector {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `√(K - K²)`.
    pub fn defect(&self) -> &CMatrix {
        &self.defect
    }

    pub fn idempotence_residual(&self) -> f64 {
        linalg::max_abs_diff(&(&self.matrix * &self.matrix), &self.matrix)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.matrix)
    }
}

pub fn doubling_projector(kernel: &DiscreteKernel) -> Result<DoubledProjector> {
    doubling_projector_from_parts(kernel.matrix(), kernel.spectrum())
}

/// Builds `L` from `K` and a spectral decomposition of it. The defect uses the
/// eigenvalue map `λ ↦ √max(λ - λ², 0)`.
pub fn doubling_projector_from_parts(k: &CMatrix, spectrum: &SpectralData) -> Result<DoubledProjector> {
    let n = k.nrows();
    if spectrum.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: spectrum.dim(),
        });
    }
    for &l in &spectrum.eigenvalues {
        if l - l * l < -DEFECT_NEGATIVE_TOL {
            return Err(Error::SpectrumOutOfRange {
                eigenvalue: l,
                tolerance: DEFECT_NEGATIVE_TOL,
            });
        }
    }
    let defect = spectrum.functional_calculus(|l| (l - l * l).max(0.0).sqrt());
    let identity = CMatrix::identity(n, n);
    let mut matrix = CMatrix::zeros(2 * n, 2 * n);
    matrix.view_mut((0, 0), (n, n)).copy_from(&(identity - k));
    matrix.view_mut((0, n), (n, n)).copy_from(&defect);
    matrix.view_mut((n, 0), (n, n)).copy_from(&defect);
    matrix.view_mut((n, n), (n, n)).copy_from(k);
    Ok(DoubledProjector { matrix, defect })
}

/// `g_a = diag(1, 1 + diag(a))` on `C^n ⊕ C^n`.
pub fn doubled_symbol(a: &Symbol) -> CMatrix {
    let n = a.len();
    let mut diag = vec![linalg::ONE; 2 * n];
    for j in 0..n {
        diag[n + j] = a.multiplier(j);
    }
    linalg::from_diagonal(&diag)
}

fn check_symbols(kernel: &DiscreteKernel, symbols: &[&Symbol]) -> Result<()> {
    for s in symbols {
        if s.len() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                found: s.len(),
            });
        }
    }
    Ok(())
}

/// `|(g_a* - 1) L (g_a - 1) - diag(0, (A* - 1) K (A - 1))|_max`.
pub fn block_conjugation_check(kernel: &DiscreteKernel, a: &Symbol) -> Result<f64> {
    check_symbols(kernel, &[a])?;
    let n = kernel.dim();
    let l = doubling_projector(kernel)?;
    let g_minus_one = doubled_symbol(a) - CMatrix::identity(2 * n, 2 * n);
    let lhs = g_minus_one.adjoint() * l.matrix() * &g_minus_one;
    let a_minus_one = linalg::from_diagonal(a.values());
    let mut rhs = CMatrix::zeros(2 * n, 2 * n);
    rhs.view_mut((n, n), (n, n))
        .copy_from(&(a_minus_one.adjoint() * kernel.matrix() * &a_minus_one));
    Ok(linalg::max_abs_diff(&lhs, &rhs))
}

/// Values of `⟨Ψ_a, Ψ_b⟩` obtained along independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingValues {
    /// Fock side by determinant formula (projector case) or `det(1 + L(g_a g_b* - 1))`.
    pub fock_det: Complex64,
    /// Fock side by explicit Plücker coordinates, for small `n`.
    pub fock_brute: Option<Complex64>,
    pub gram_det: Complex64,
    /// Enumeration over all configurations, for small `n`.
    pub gram_brute: Option<Complex64>,
}

impl EmbeddingValues {
    /// Largest pairwise relative residual `|x - y| / max(|y|, 1)`.
    pub fn residual(&self) -> f64 {
        let values: Vec<Complex64> = [Some(self.fock_det), self.fock_brute, Some(self.gram_det), self.gram_brute]
            .into_iter()
            .flatten()
            .collect();
        let mut worst: f64 = 0.0;
        for (i, x) in values.iter().enumerate() {
            for y in &values[i + 1..] {
                worst = worst.max(linalg::relative_residual(*x, *y));
            }
        }
        worst
    }
}

/// Conjugates `op` into the eigenbasis `u` (columns), `u* op u`.
fn rotate(u: &CMatrix, op: &CMatrix) -> CMatrix {
    u.adjoint() * op * u
}

/// Count of eigenvalues of a projector that round to 1.
fn projector_rank(eigenvalues: &[f64]) -> usize {
    eigenvalues.iter().filter(|&&l| l > 0.5).count()
}

pub fn projector_embedding_check(kernel: &DiscreteKernel, a: &Symbol, b: &Symbol) -> Result<EmbeddingValues> {
    check_symbols(kernel, &[a, b])?;
    let residual = kernel.projector_residual();
    if residual > PROJECTOR_TOL {
        return Err(Error::NotAProjector { residual });
    }
    let n = kernel.dim();
    let spectrum = kernel.spectrum();
    let u = &spectrum.eigenvectors;
    let split = SplitSpace::leading(n, projector_rank(&spectrum.eigenvalues))?;
    let a_hat = BlockOperator::new(rotate(u, &multiplier(a)), split)?;
    let b_hat = BlockOperator::new(rotate(u, &multiplier(b)), split)?;

    let dpp = FiniteDpp::new(kernel.clone());
    let fock_brute = if n <= PROJECTOR_FOCK_LIMIT {
        Some(fock::fock_inner(&fock::coherent_state(&a_hat), &fock::coherent_state(&b_hat))?)
    } else {
        None
    };
    Ok(EmbeddingValues {
        fock_det: fock::coherent_inner_det(&a_hat, &b_hat)?,
        fock_brute,
        gram_det: dpp.gram_det(a, b)?,
        gram_brute: if n <= BRUTE_LIMIT { Some(dpp.gram_brute(a, b)?) } else { None },
    })
}

fn multiplier(a: &Symbol) -> CMatrix {
    let diag: Vec<Complex64> = (0..a.len()).map(|j| a.multiplier(j)).collect();
    linalg::from_diagonal(&diag)
}

/// `det(1 + L(g_a g_b* - 1))` on the doubled space.
pub fn doubled_inner_det(l: &DoubledProjector, a: &Symbol, b: &Symbol) -> Complex64 {
    let size = l.matrix().nrows();
    let identity = CMatrix::identity(size, size);
    let product = doubled_symbol(a) * doubled_symbol(b).adjoint();
    linalg::det(&(&identity + l.matrix() * (product - &identity)))
}

pub fn general_embedding_check(kernel: &DiscreteKernel, a: &Symbol, b: &Symbol) -> Result<EmbeddingValues> {
    check_symbols(kernel, &[a, b])?;
    let n = kernel.dim();
    let l = doubling_projector(kernel)?;
    let dpp = FiniteDpp::new(kernel.clone());

    let fock_brute = if n <= DOUBLED_FOCK_LIMIT {
        let (eigenvalues, u) = linalg::eigh(l.matrix())?;
        let split = SplitSpace::leading(2 * n, projector_rank(&eigenvalues))?;
        let g = BlockOperator::new(rotate(&u, &doubled_symbol(a)), split)?;
        let h = BlockOperator::new(rotate(&u, &doubled_symbol(b)), split)?;
        Some(fock::fock_inner(&fock::coherent_state(&g), &fock::coherent_state(&h))?)
    } else {
        None
    };
    Ok(EmbeddingValues {
        fock_det: doubled_inner_det(&l, a, b),
        fock_brute,
        gram_det: dpp.gram_det(a, b)?,
        gram_brute: if n <= BRUTE_LIMIT { Some(dpp.gram_brute(a, b)?) } else { None },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    Projector,
    General,
}

/// Largest relative entrywise difference between the Gram matrix of the
/// functionals `Ψ_{a_i}` (by enumeration) and that of their coherent states.
pub fn isometry_residual(kernel: &DiscreteKernel, symbols: &[Symbol], mode: EmbeddingMode) -> Result<f64> {
    let dpp = FiniteDpp::new(kernel.clone());
    let mut worst: f64 = 0.0;
    let l = match mode {
        EmbeddingMode::General => Some(doubling_projector(kernel)?),
        EmbeddingMode::Projector => None,
    };
    for a in symbols {
        for b in symbols {
            let brute = dpp.gram_brute(a, b)?;
            let fock = match &l {
                Some(l) => doubled_inner_det(l, a, b),
                None => {
                    let v = projector_embedding_check(kernel, a, b)?;
                    v.fock_brute.unwrap_or(v.fock_det)
                }
            };
            worst = worst.max(linalg::relative_residual(fock, brute));
        }
    }
    Ok(worst)
}
