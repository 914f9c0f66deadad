//! Fredholm determinants `det(1 + K(A - 1))` of kernel functions, evaluated by
//! Nyström discretisation on Gauss–Legendre panels aligned with the symbol's
//! jumps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{self, KernelFunction, QuadratureRule};
use crate::linalg::{self, CMatrix};

pub const DEFAULT_NODES_PER_PIECE: usize = 40;

/// A piecewise-constant symbol: `values[k]` on `[breakpoints[k], breakpoints[k + 1])`
/// and zero outside `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSymbol {
    breakpoints: Vec<f64>,
    values: Vec<Complex64>,
}

impl PiecewiseSymbol {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::UnboundedSupport);
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::BadSymbol(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadSymbol("breakpoints must be strictly ascending".into()));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BadSymbol("non-finite symbol value".into()));
        }
        Ok(PiecewiseSymbol { breakpoints, values })
    }

    /// `value` on `[lo, hi]`. An empty interval yields the zero symbol.
    pub fn constant(lo: f64, hi: f64, value: Complex64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::UnboundedSupport);
        }
        if lo > hi {
            return Err(Error::BadInterval { lo, hi });
        }
        if lo == hi {
            return Ok(PiecewiseSymbol {
                breakpoints: Vec::new(),
                values: Vec::new(),
            });
        }
        Self::new(vec![lo, hi], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        for (k, w) in self.breakpoints.windows(2).enumerate() {
            if w[0] <= x && x < w[1] {
                return self.values[k];
            }
        }
        Complex64::new(0.0, 0.0)
    }

    pub fn conj(&self) -> Self {
        PiecewiseSymbol {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Composite rule with `n_per_piece` nodes on every piece, together with
    /// the symbol sampled at each node. `None` for the zero-length symbol.
    pub fn quadrature(&self, n_per_piece: usize) -> Result<Option<(QuadratureRule, Vec<Complex64>)>> {
        if self.values.is_empty() {
            return Ok(None);
        }
        let rule = kernels::composite_gauss_legendre(&self.breakpoints, n_per_piece)?;
        let sampled = self
            .values
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, n_per_piece))
            .collect();
        Ok(Some((rule, sampled)))
    }
}

/// Nyström matrix `M_ij = f(x_i, x_j) a(x_j) w_j` of the operator `K(A - 1)`.
pub fn nystrom_matrix<F: KernelFunction + ?Sized>(
    f: &F,
    rule: &QuadratureRule,
    a: &[Complex64],
) -> CMatrix {
    let n = rule.len();
    CMatrix::from_fn(n, n, |i, j| {
        f.eval(rule.nodes[i], rule.nodes[j]) * a[j] * rule.weights[j]
    })
}

pub fn fredholm_det<F: KernelFunction + ?Sized>(
    f: &F,
    a: &PiecewiseSymbol,
    n_per_piece: usize,
) -> Result<Complex64> {
    let Some((rule, sampled)) = a.quadrature(n_per_piece)? else {
        return Ok(Complex64::new(1.0, 0.0));
    };
    let mut m = nystrom_matrix(f, &rule, &sampled);
    for i in 0..m.nrows() {
        m[(i, i)] += 1.0;
    }
    Ok(linalg::det(&m))
}

/// A determinant at `n` nodes per piece and its change when `n` is doubled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergedValue {
    pub value: Complex64,
    pub refined: Complex64,
    pub self_convergence_delta: f64,
}

pub fn fredholm_det_with_delta<F: KernelFunction + ?Sized>(
    f: &F,
    a: &PiecewiseSymbol,
    n_per_piece: usize,
) -> Result<ConvergedValue> {
    let (value, refined) = rayon::join(
        || fredholm_det(f, a, n_per_piece),
        || fredholm_det(f, a, 2 * n_per_piece),
    );
    let (value, refined) = (value?, refined?);
    Ok(ConvergedValue {
        value,
        refined,
        self_convergence_delta: (value - refined).norm(),
    })
}

fn gap_symbol(lo: f64, hi: f64) -> Result<PiecewiseSymbol> {
    PiecewiseSymbol::constant(lo, hi, Complex64::new(-1.0, 0.0))
}

/// Probability that no point falls in `[lo, hi]`: the determinant with
/// `a = -1` on the interval.
pub fn gap_probability<F: KernelFunction + ?Sized>(f: &F, lo: f64, hi: f64, n: usize) -> Result<f64> {
    Ok(fredholm_det(f, &gap_symbol(lo, hi)?, n)?.re)
}

pub fn gap_probability_with_delta<F: KernelFunction + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<ConvergedValue> {
    fredholm_det_with_delta(f, &gap_symbol(lo, hi)?, n)
}

/// Singular values of the discretised kernels `conj(a(x)) K(x, y) a(y)` and
/// `K(x, y) a(y)`, with their tail sums `Σ_{k > m} σ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceClassReport {
    pub nodes: usize,
    pub sandwich_singular_values: Vec<f64>,
    pub sandwich_tails: Vec<f64>,
    pub operator_singular_values: Vec<f64>,
    pub operator_tails: Vec<f64>,
}

impl TraceClassReport {
    /// `σ_k / σ_1` (1-based `k`) of the sandwich kernel; 0 when `σ_1 = 0`.
    pub fn sandwich_ratio(&self, k: usize) -> f64 {
        ratio(&self.sandwich_singular_values, k)
    }
}

fn ratio(s: &[f64], k: usize) -> f64 {
    match (s.first(), s.get(k - 1)) {
        (Some(&first), Some(&sk)) if first > 0.0 => sk / first,
        _ => 0.0,
    }
}

fn tails(s: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    let mut acc = 0.0;
    for k in (0..s.len()).rev() {
        acc += s[k];
        out[k] = acc;
    }
    out
}

pub fn trace_class_report<F: KernelFunction + ?Sized>(
    f: &F,
    a: &PiecewiseSymbol,
    n_per_piece: usize,
) -> Result<TraceClassReport> {
    let Some((rule, sampled)) = a.quadrature(n_per_piece)? else {
        return Ok(TraceClassReport {
            nodes: 0,
            sandwich_singular_values: Vec::new(),
            sandwich_tails: Vec::new(),
            operator_singular_values: Vec::new(),
            operator_tails: Vec::new(),
        });
    };
    let n = rule.len();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let k = CMatrix::from_fn(n, n, |i, j| f.eval(rule.nodes[i], rule.nodes[j]) * (sw[i] * sw[j]));
    let sandwich = CMatrix::from_fn(n, n, |i, j| sampled[i].conj() * k[(i, j)] * sampled[j]);
    let operator = CMatrix::from_fn(n, n, |i, j| k[(i, j)] * sampled[j]);
    let s = linalg::singular_values(&sandwich)?;
    let o = linalg::singular_values(&operator)?;
    Ok(TraceClassReport {
        nodes: n,
        sandwich_tails: tails(&s),
        sandwich_singular_values: s,
        operator_tails: tails(&o),
        operator_singular_values: o,
    })
}
