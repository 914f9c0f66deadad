//! `dppfock`: identity suites, determinant evaluators and the exact sampler.
//!
//! Exit status 0 means every residual and statistical check passed, 1 means a
//! suite failed, 2 means the invocation or its inputs were malformed.

mod descriptor;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dppfock::embedding::EmbeddingMode;
use dppfock::fredholm::{self, DEFAULT_NODES_PER_PIECE};
use dppfock::sampler::{self, MIN_AUDIT_TRIALS};
use dppfock::verify;

use descriptor::{KernelDescriptor, SymbolDescriptor};
use report::{fmt_f64, open_output, CsvReport, Num};

/// Band, in standard errors, for every statistical check.
const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(name = "dppfock", version, about = "Determinantal point processes and fermionic coherent states")]
struct RunConfig {
    #[command(subcommand)]
    command: Command,

    /// Master seed; every case derives its own seed from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Residual tolerance (suites default to 1e-9; determinant commands only
    /// fail on tolerance when it is given).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the parallel suites.
    #[arg(long, global = true, env = "DPPFOCK_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Projector,
    General,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumeration versus determinant identities on random finite kernels.
    VerifyFinite {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cases: u64,
    },
    /// Cauchy–Binet and representation checks on random operators.
    VerifyFock {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cases: u64,
    },
    /// Coherent-state inner products against the functional Gram identity.
    VerifyEmbedding {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cases: u64,
    },
    /// Fredholm determinant det(1 + K a) of a kernel function and a piecewise symbol.
    Fredholm {
        /// Kernel descriptor: inline JSON, a JSON file, or a type name.
        #[arg(long)]
        kernel: String,
        /// Piecewise symbol: inline JSON or a JSON file.
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = DEFAULT_NODES_PER_PIECE)]
        n: usize,
    },
    /// Gap probability of an interval.
    Gap {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = DEFAULT_NODES_PER_PIECE)]
        n: usize,
    },
    /// Exact samples of a finite kernel, or an inclusion-frequency audit.
    Sample {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        audit: bool,
    },
}

enum Failure {
    Config(anyhow::Error),
    Suite(anyhow::Error),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Suite(e.into())
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn suite_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Suite(e.into())
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Suite(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(config: &RunConfig) -> Outcome {
    if let Some(t) = config.threads {
        if t == 0 {
            return Err(config_err(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(suite_err)?;
    }
    if let Some(tol) = config.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(config_err(anyhow!("--tol must be a finite non-negative number")));
        }
    }
    match &config.command {
        Command::VerifyFinite { n, cases } => verify_finite(config, *n, *cases),
        Command::VerifyFock { n, m, cases } => verify_fock(config, *n, *m, *cases),
        Command::VerifyEmbedding { mode, n, cases } => verify_embedding(config, *mode, *n, *cases),
        Command::Fredholm { kernel, symbol, n } => fredholm_cmd(config, kernel, symbol, *n),
        Command::Gap { kernel, lo, hi, n } => gap_cmd(config, kernel, *lo, *hi, *n),
        Command::Sample { kernel, trials, audit } => sample_cmd(config, kernel, *trials, *audit),
    }
}

fn suite_tol(config: &RunConfig) -> f64 {
    config.tol.unwrap_or(1e-9)
}

fn common(config: &RunConfig) -> Vec<(&'static str, String)> {
    vec![
        ("seed", config.seed.to_string()),
        ("tol", fmt_f64(suite_tol(config))),
        ("threads", rayon::current_num_threads().to_string()),
    ]
}

fn summary(command: &str, cases: usize, worst: f64, pass: bool) {
    eprintln!(
        "{command}: {cases} cases, max residual {}, {}",
        fmt_f64(worst),
        if pass { "PASS" } else { "FAIL" }
    );
}

fn verify_finite(config: &RunConfig, n: usize, cases: u64) -> Outcome {
    if n == 0 || n > dppfock::dpp_finite::ENUMERATION_LIMIT {
        return Err(config_err(anyhow!(
            "--n must be in 1..={}",
            dppfock::dpp_finite::ENUMERATION_LIMIT
        )));
    }
    let tol = suite_tol(config);
    let rows = verify::finite_suite(n, cases, config.seed).map_err(suite_err)?;
    let mut cfg = common(config);
    cfg.extend([("n", n.to_string()), ("cases", cases.to_string())]);
    let mut csv = CsvReport::new(
        open_output(config.out.as_deref())?,
        "verify-finite",
        &cfg,
        &[
            "case",
            "max_identity_residual",
            "n",
            "expectation_residual",
            "gram_residual",
            "sesquilinear_residual",
            "probability_sum_residual",
            "min_probability",
        ],
    )?;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for r in &rows {
        pass &= r.passes(tol);
        worst = worst.max(r.max_identity_residual());
        csv.row(&[
            r.case.to_string(),
            fmt_f64(r.max_identity_residual()),
            r.n.to_string(),
            fmt_f64(r.expectation_residual),
            fmt_f64(r.gram_residual),
            fmt_f64(r.sesquilinear_residual),
            fmt_f64(r.probability_sum_residual),
            fmt_f64(r.min_probability),
        ])?;
    }
    csv.finish()?;
    summary("verify-finite", rows.len(), worst, pass);
    Ok(pass)
}

fn verify_fock(config: &RunConfig, n: usize, m: usize, cases: u64) -> Outcome {
    if n == 0 || n > 16 {
        return Err(config_err(anyhow!("--n must be in 1..=16")));
    }
    if m > n {
        return Err(config_err(anyhow!("--m must not exceed --n")));
    }
    let tol = suite_tol(config);
    let rows = verify::fock_suite(n, m, cases, config.seed).map_err(suite_err)?;
    let mut cfg = common(config);
    cfg.extend([("n", n.to_string()), ("m", m.to_string()), ("cases", cases.to_string())]);
    let mut csv = CsvReport::new(
        open_output(config.out.as_deref())?,
        "verify-fock",
        &cfg,
        &[
            "case",
            "max_residual",
            "n",
            "m",
            "cauchy_binet_residual",
            "projector_formula_residual",
            "representation_residual",
        ],
    )?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        worst = worst.max(r.max_residual());
        csv.row(&[
            r.case.to_string(),
            fmt_f64(r.max_residual()),
            r.n.to_string(),
            r.m.to_string(),
            fmt_f64(r.cauchy_binet_residual),
            fmt_f64(r.projector_formula_residual),
            r.representation_residual.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    csv.finish()?;
    let pass = worst <= tol;
    summary("verify-fock", rows.len(), worst, pass);
    Ok(pass)
}

fn verify_embedding(config: &RunConfig, mode: Mode, n: usize, cases: u64) -> Outcome {
    if n == 0 || n > dppfock::dpp_finite::ENUMERATION_LIMIT {
        return Err(config_err(anyhow!(
            "--n must be in 1..={}",
            dppfock::dpp_finite::ENUMERATION_LIMIT
        )));
    }
    let tol = suite_tol(config);
    let (mode, name) = match mode {
        Mode::Projector => (EmbeddingMode::Projector, "projector"),
        Mode::General => (EmbeddingMode::General, "general"),
    };
    let rows = verify::embedding_suite(mode, n, cases, config.seed).map_err(suite_err)?;
    let mut cfg = common(config);
    cfg.extend([("mode", name.to_string()), ("n", n.to_string()), ("cases", cases.to_string())]);
    let mut csv = CsvReport::new(
        open_output(config.out.as_deref())?,
        "verify-embedding",
        &cfg,
        &["case", "residual", "n", "rank", "idempotence_residual", "block_residual"],
    )?;
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for r in &rows {
        pass &= r.passes(tol);
        worst = worst.max(r.residual);
        csv.row(&[
            r.case.to_string(),
            fmt_f64(r.residual),
            r.n.to_string(),
            r.rank.map(|k| k.to_string()).unwrap_or_default(),
            fmt_f64(r.idempotence_residual),
            fmt_f64(r.block_residual),
        ])?;
    }
    csv.finish()?;
    summary("verify-embedding", rows.len(), worst, pass);
    Ok(pass)
}

#[derive(Serialize)]
struct FredholmReport<'a> {
    command: &'static str,
    config: FredholmConfig<'a>,
    value_re: Num,
    value_im: Num,
    self_convergence_delta: Num,
}

#[derive(Serialize)]
struct FredholmConfig<'a> {
    kernel: &'a KernelDescriptor,
    symbol: &'a SymbolDescriptor,
    n: usize,
    seed: u64,
    tol: Option<Num>,
}

fn write_json<T: Serialize>(config: &RunConfig, value: &T) -> Result<(), Failure> {
    let mut out = open_output(config.out.as_deref())?;
    serde_json::to_writer(&mut out, value).map_err(suite_err)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn within_tol(config: &RunConfig, delta: f64) -> bool {
    config.tol.is_none_or(|tol| delta <= tol)
}

fn fredholm_cmd(config: &RunConfig, kernel: &str, symbol: &str, n: usize) -> Outcome {
    if n == 0 {
        return Err(config_err(anyhow!("--n must be positive")));
    }
    let kd = descriptor::parse_kernel(kernel).map_err(config_err)?;
    let sd = descriptor::parse_symbol(symbol).map_err(config_err)?;
    let f = kd.function().map_err(config_err)?;
    let a = sd.resolve().map_err(config_err)?;
    let v = fredholm::fredholm_det_with_delta(f.as_function(), &a, n).map_err(suite_err)?;
    write_json(
        config,
        &FredholmReport {
            command: "fredholm",
            config: FredholmConfig {
                kernel: &kd,
                symbol: &sd,
                n,
                seed: config.seed,
                tol: config.tol.map(Num),
            },
            value_re: Num(v.value.re),
            value_im: Num(v.value.im),
            self_convergence_delta: Num(v.self_convergence_delta),
        },
    )?;
    Ok(within_tol(config, v.self_convergence_delta))
}

#[derive(Serialize)]
struct GapReport<'a> {
    command: &'static str,
    config: GapConfig<'a>,
    probability: Num,
    delta: Num,
}

#[derive(Serialize)]
struct GapConfig<'a> {
    kernel: &'a KernelDescriptor,
    lo: Num,
    hi: Num,
    n: usize,
    seed: u64,
    tol: Option<Num>,
}

fn gap_cmd(config: &RunConfig, kernel: &str, lo: f64, hi: f64, n: usize) -> Outcome {
    if n == 0 {
        return Err(config_err(anyhow!("--n must be positive")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(config_err(anyhow!("--lo/--hi: need finite lo <= hi")));
    }
    let kd = descriptor::parse_kernel(kernel).map_err(config_err)?;
    let f = kd.function().map_err(config_err)?;
    let v = fredholm::gap_probability_with_delta(f.as_function(), lo, hi, n).map_err(suite_err)?;
    write_json(
        config,
        &GapReport {
            command: "gap",
            config: GapConfig {
                kernel: &kd,
                lo: Num(lo),
                hi: Num(hi),
                n,
                seed: config.seed,
                tol: config.tol.map(Num),
            },
            probability: Num(v.value.re),
            delta: Num(v.self_convergence_delta),
        },
    )?;
    Ok(within_tol(config, v.self_convergence_delta))
}

#[derive(Serialize)]
struct SampleHeader<'a> {
    command: &'static str,
    kernel: &'a KernelDescriptor,
    trials: usize,
    seed: u64,
    kernel_fingerprint: String,
}

fn sample_cmd(config: &RunConfig, kernel: &str, trials: usize, audit: bool) -> Outcome {
    let kd = descriptor::parse_kernel(kernel).map_err(config_err)?;
    let k = kd.discrete().map_err(config_err)?;
    if audit && trials < MIN_AUDIT_TRIALS {
        return Err(config_err(anyhow!("--trials: audit needs at least {MIN_AUDIT_TRIALS}")));
    }
    let batch = sampler::sample_batch(&k, trials, config.seed).map_err(suite_err)?;
    let fingerprint = format!("{:016x}", batch.kernel_fingerprint);

    if audit {
        let rows = sampler::inclusion_rows(&k, &batch);
        let cfg = vec![
            ("seed", config.seed.to_string()),
            ("trials", trials.to_string()),
            ("kernel_fingerprint", fingerprint),
            ("z_limit", fmt_f64(Z_LIMIT)),
        ];
        let mut csv = CsvReport::new(
            open_output(config.out.as_deref())?,
            "sample --audit",
            &cfg,
            &["point", "expected", "frequency", "stderr", "z"],
        )?;
        let mut pass = true;
        for r in &rows {
            pass &= r.z <= Z_LIMIT;
            csv.row(&[
                r.point.to_string(),
                fmt_f64(r.expected),
                fmt_f64(r.frequency),
                fmt_f64(r.stderr),
                fmt_f64(r.z),
            ])?;
        }
        csv.finish()?;
        return Ok(pass);
    }

    let mut out = open_output(config.out.as_deref())?;
    let header = SampleHeader {
        command: "sample",
        kernel: &kd,
        trials,
        seed: config.seed,
        kernel_fingerprint: fingerprint,
    };
    serde_json::to_writer(&mut out, &header).context("writing header").map_err(suite_err)?;
    writeln!(out)?;
    for c in &batch.configurations {
        serde_json::to_writer(&mut out, &c.to_vec()).map_err(suite_err)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(true)
}
