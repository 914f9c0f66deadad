//! JSON descriptors for kernels, quadrature rules and piecewise symbols.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use dppfock::kernels::{self, DiscreteKernel, KernelFunction, RankOneUniform, SineKernel};
use dppfock::{CMatrix, PiecewiseSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureDescriptor {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelDescriptor {
    Matrix {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    Sine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature: Option<QuadratureDescriptor>,
    },
    RankOneUniform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature: Option<QuadratureDescriptor>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDescriptor {
    pub breakpoints: Vec<f64>,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

/// Inline JSON, a path to a JSON file, or a bare kernel type name.
fn read_source(arg: &str, what: &str) -> Result<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    let path = Path::new(arg);
    if path.is_file() {
        return std::fs::read_to_string(path).with_context(|| format!("{what}: cannot read {arg}"));
    }
    Ok(format!("{{\"type\":{}}}", serde_json::to_string(arg)?))
}

pub fn parse_kernel(arg: &str) -> Result<KernelDescriptor> {
    let text = read_source(arg, "kernel")?;
    serde_json::from_str(&text).map_err(|e| anyhow!("kernel: {e}"))
}

pub fn parse_symbol(arg: &str) -> Result<SymbolDescriptor> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("symbol: cannot read {arg}"))?
    };
    serde_json::from_str(&text).map_err(|e| anyhow!("symbol: {e}"))
}

fn dense(rows: &[Vec<f64>], field: &str, n: usize) -> Result<()> {
    if rows.len() != n {
        bail!("kernel.{field}: expected {n} rows, found {}", rows.len());
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            bail!("kernel.{field}: row {i} has {} entries, expected {n}", row.len());
        }
    }
    Ok(())
}

pub enum ResolvedKernel {
    Sine(SineKernel),
    RankOne(RankOneUniform),
}

impl ResolvedKernel {
    pub fn as_function(&self) -> &dyn KernelFunction {
        match self {
            ResolvedKernel::Sine(k) => k,
            ResolvedKernel::RankOne(k) => k,
        }
    }
}

impl KernelDescriptor {
    pub fn function(&self) -> Result<ResolvedKernel> {
        match self {
            KernelDescriptor::Matrix { .. } => {
                bail!("kernel.type: \"matrix\" describes a finite kernel; a kernel function (sine, rank_one_uniform) is required")
            }
            KernelDescriptor::Sine { .. } => Ok(ResolvedKernel::Sine(SineKernel)),
            KernelDescriptor::RankOneUniform { lo, hi, .. } => {
                let (lo, hi) = (lo.unwrap_or(0.0), hi.unwrap_or(1.0));
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    bail!("kernel.lo/kernel.hi: need finite lo < hi, got [{lo}, {hi}]");
                }
                Ok(ResolvedKernel::RankOne(RankOneUniform { lo, hi }))
            }
        }
    }

    /// A finite kernel: the matrix itself, or a kernel function discretised on
    /// its `quadrature` rule.
    pub fn discrete(&self) -> Result<DiscreteKernel> {
        match self {
            KernelDescriptor::Matrix { re, im } => {
                let n = re.len();
                dense(re, "re", n)?;
                if let Some(im) = im {
                    dense(im, "im", n)?;
                }
                let m = CMatrix::from_fn(n, n, |i, j| {
                    Complex64::new(re[i][j], im.as_ref().map_or(0.0, |im| im[i][j]))
                });
                DiscreteKernel::new(m).map_err(|e| anyhow!("kernel: {e}"))
            }
            KernelDescriptor::Sine { quadrature } | KernelDescriptor::RankOneUniform { quadrature, .. } => {
                let q = quadrature.ok_or_else(|| {
                    anyhow!("kernel.quadrature: required to discretise a kernel function")
                })?;
                let rule = kernels::gauss_legendre(q.n, q.lo, q.hi)
                    .map_err(|e| anyhow!("kernel.quadrature: {e}"))?;
                let f = self.function()?;
                kernels::discretize(f.as_function(), &rule).map_err(|e| anyhow!("kernel: {e}"))
            }
        }
    }
}

impl SymbolDescriptor {
    pub fn resolve(&self) -> Result<PiecewiseSymbol> {
        let pieces = self.re.len();
        let im = match &self.im {
            Some(im) if im.len() != pieces => {
                bail!("symbol.im: {} values for {pieces} pieces", im.len())
            }
            Some(im) => im.clone(),
            None => vec![0.0; pieces],
        };
        let values = self.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        PiecewiseSymbol::new(self.breakpoints.clone(), values).map_err(|e| anyhow!("symbol: {e}"))
    }
}
