//! Finite truncation of the space of semi-infinite forms.
//!
//! `H = V ⊕ W` is `C^n` with `W` spanned by a designated set of `m` basis
//! vectors. The Fock space is `Λ^m C^n`, with orthonormal basis the wedge
//! monomials `e_{k_1} ∧ .. ∧ e_{k_m}`, `k_1 < .. < k_m`. The vacuum is the wedge
//! of the `W` basis, and the coherent state of `g` is `∧_{j ∈ W} (Σ_k g_{jk} e_k)`,
//! whose coordinates are the `m x m` minors of the `W` rows of `g`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::subset::{self, IndexSet, MAX_GROUND_SET};

/// Operators with a larger 2-norm condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Agreement required between the two coherent inner product formulas.
pub const FORMULA_TOL: f64 = 1e-10;
/// Largest ambient dimension for dense exterior powers.
pub const DENSE_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitSpace {
    n: usize,
    w: IndexSet,
}

impl SplitSpace {
    pub fn new(n: usize, w_indices: &[usize]) -> Result<Self> {
        if n > MAX_GROUND_SET {
            return Err(Error::GroundSetTooLarge {
                n,
                limit: MAX_GROUND_SET,
            });
        }
        Ok(SplitSpace {
            n,
            w: IndexSet::from_indices(n, w_indices.iter().copied())?,
        })
    }

    /// `W` spanned by the first `m` basis vectors.
    pub fn leading(n: usize, m: usize) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidArgument(format!("m = {m} exceeds n = {n}")));
        }
        Self::new(n, &(0..m).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `dim W`, the degree of every monomial.
    pub fn m(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> IndexSet {
        self.w
    }

    pub fn w_indices(&self) -> Vec<usize> {
        self.w.to_vec()
    }

    pub fn v_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.w.contains(i)).collect()
    }

    /// The orthogonal projector `Π` onto `W`.
    pub fn projector(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j && self.w.contains(i) {
                linalg::ONE
            } else {
                linalg::ZERO
            }
        })
    }
}

/// An invertible operator on `V ⊕ W`, viewed as the block matrix
/// `[[a, b], [c, d]]` with `a: V → V`, `b: W → V`, `c: V → W`, `d: W → W`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    matrix: CMatrix,
    split: SplitSpace,
}

impl BlockOperator {
    pub fn new(matrix: CMatrix, split: SplitSpace) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != split.dim() {
            return Err(Error::DimensionMismatch {
                expected: split.dim(),
                found: matrix.nrows(),
            });
        }
        let condition = linalg::condition_number(&matrix)?;
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::Singular { condition });
        }
        Ok(BlockOperator { matrix, split })
    }

    pub fn identity(split: SplitSpace) -> Self {
        let n = split.dim();
        BlockOperator {
            matrix: CMatrix::identity(n, n),
            split,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn split(&self) -> &SplitSpace {
        &self.split
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        linalg::submatrix(&self.matrix, rows, cols)
    }

    pub fn a(&self) -> CMatrix {
        let v = self.split.v_indices();
        self.block(&v, &v)
    }

    pub fn b(&self) -> CMatrix {
        self.block(&self.split.v_indices(), &self.split.w_indices())
    }

    pub fn c(&self) -> CMatrix {
        self.block(&self.split.w_indices(), &self.split.v_indices())
    }

    pub fn d(&self) -> CMatrix {
        let w = self.split.w_indices();
        self.block(&w, &w)
    }

    /// The `W` rows `[c d]` in the original column order.
    pub fn w_rows(&self) -> CMatrix {
        let all: Vec<usize> = (0..self.split.dim()).collect();
        self.block(&self.split.w_indices(), &all)
    }
}

/// Amplitudes on the degree-`m` monomials of a split space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    split: SplitSpace,
    amplitudes: BTreeMap<IndexSet, Complex64>,
}

impl FockVector {
    pub fn new(split: SplitSpace, amplitudes: BTreeMap<IndexSet, Complex64>) -> Result<Self> {
        for key in amplitudes.keys() {
            if key.len() != split.m() || !key.fits(split.dim()) {
                return Err(Error::InvalidArgument(format!(
                    "monomial {key} is not a degree-{} monomial of C^{}",
                    split.m(),
                    split.dim()
                )));
            }
        }
        Ok(FockVector { split, amplitudes })
    }

    pub fn split(&self) -> &SplitSpace {
        &self.split
    }

    pub fn amplitudes(&self) -> &BTreeMap<IndexSet, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, monomial: IndexSet) -> Complex64 {
        self.amplitudes.get(&monomial).copied().unwrap_or(linalg::ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum()
    }
}

pub fn vacuum(split: SplitSpace) -> FockVector {
    FockVector {
        split,
        amplitudes: BTreeMap::from([(split.w(), linalg::ONE)]),
    }
}

/// Plücker coordinates of the `W` rows of `g`, one per degree-`m` monomial.
pub fn coherent_state(g: &BlockOperator) -> FockVector {
    let split = *g.split();
    let rows = split.w_indices();
    let amplitudes = subset::combinations(split.dim(), split.m())
        .into_par_iter()
        .map(|s| {
            let cols = s.to_vec();
            (s, linalg::det(&linalg::submatrix(g.matrix(), &rows, &cols)))
        })
        .collect();
    FockVector { split, amplitudes }
}

/// `Σ_S u(S) conj(v(S))`.
pub fn fock_inner(u: &FockVector, v: &FockVector) -> Result<Complex64> {
    if u.split != v.split {
        return Err(Error::SplitMismatch);
    }
    Ok(u.amplitudes
        .iter()
        .map(|(s, x)| x * v.amplitude(*s).conj())
        .sum())
}

/// `det(c h_c* + d h_d*)` and `det(1 + Π(g h* - 1))`.
pub fn coherent_inner_formulas(g: &BlockOperator, h: &BlockOperator) -> Result<(Complex64, Complex64)> {
    if g.split != h.split {
        return Err(Error::SplitMismatch);
    }
    let blocks = g.c() * h.c().adjoint() + g.d() * h.d().adjoint();
    let n = g.split.dim();
    let identity = CMatrix::identity(n, n);
    let full = &identity + g.split.projector() * (g.matrix() * h.matrix().adjoint() - &identity);
    Ok((linalg::det(&blocks), linalg::det(&full)))
}

/// `⟨λ(g)Υ, λ(h)Υ⟩` by the block formula, cross-checked against the
/// projector formula.
pub fn coherent_inner_det(g: &BlockOperator, h: &BlockOperator) -> Result<Complex64> {
    let (blocks, full) = coherent_inner_formulas(g, h)?;
    if linalg::relative_residual(full, blocks) > FORMULA_TOL {
        return Err(Error::FormulaMismatch {
            first: blocks.to_string(),
            second: full.to_string(),
        });
    }
    Ok(blocks)
}

/// Finite-dimensional stand-ins for the membership conditions of the
/// restricted linear group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlMembershipReport {
    pub hilbert_schmidt_b: f64,
    pub hilbert_schmidt_c: f64,
    pub trace_norm_d_minus_one: f64,
    pub condition_number: f64,
}

pub fn gl_membership_report(g: &BlockOperator) -> Result<GlMembershipReport> {
    let m = g.split.m();
    let d_minus_one = g.d() - CMatrix::identity(m, m);
    Ok(GlMembershipReport {
        hilbert_schmidt_b: g.b().norm(),
        hilbert_schmidt_c: g.c().norm(),
        trace_norm_d_minus_one: linalg::singular_values(&d_minus_one)?.iter().sum(),
        condition_number: linalg::condition_number(g.matrix())?,
    })
}

/// The action of `g` on `Λ^m C^n` by `e_j ↦ g e_j`, as a dense matrix over the
/// monomial basis: entry `(T, S)` is the minor `det g[T, S]`.
///
/// With this convention `λ(g_1) λ(g_2) = λ(g_1 g_2)`; the coherent state of `g`
/// is `λ(gᵀ)` applied to the vacuum.
#[derive(Debug, Clone)]
pub struct ExteriorPower {
    pub basis: Vec<IndexSet>,
    pub matrix: CMatrix,
}

pub fn exterior_power(g: &CMatrix, m: usize) -> Result<ExteriorPower> {
    if !g.is_square() {
        return Err(Error::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    let n = g.nrows();
    if n > DENSE_LIMIT {
        return Err(Error::GroundSetTooLarge {
            n,
            limit: DENSE_LIMIT,
        });
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("m = {m} exceeds n = {n}")));
    }
    let basis = subset::combinations(n, m);
    let idx: Vec<Vec<usize>> = basis.iter().map(|s| s.to_vec()).collect();
    let k = basis.len();
    let matrix = CMatrix::from_fn(k, k, |t, s| linalg::det(&linalg::submatrix(g, &idx[t], &idx[s])));
    Ok(ExteriorPower { basis, matrix })
}
