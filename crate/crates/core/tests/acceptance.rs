//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use dppfock::dpp_finite::{FiniteDpp, Symbol};
use dppfock::fock;
use dppfock::fredholm::{self, PiecewiseSymbol};
use dppfock::kernels::{self, SineKernel};
use dppfock::verify::{self, FiniteCase, SYMBOL_RADIUS};
use dppfock::{embedding, linalg, random, sampler};

const MASTER: u64 = 20_240_917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn finite_sweep() -> Vec<FiniteCase> {
    (0..200u64)
        .into_par_iter()
        .map(|c| verify::finite_case(c, 1 + (c as usize % 12), random::case_seed(MASTER, c)).unwrap())
        .collect()
}

fn criterion_1(sweep: &[FiniteCase], elapsed: Duration) -> Outcome {
    let worst = sweep.iter().map(|c| c.expectation_residual).fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9 && elapsed <= Duration::from_secs(30),
        detail: format!(
            "finite expectation identity, {} kernels, max relative residual {worst:.3e}, {:.2}s",
            sweep.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_2(sweep: &[FiniteCase]) -> Outcome {
    let worst = sweep.iter().map(|c| c.gram_residual).fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("Gram identity, max relative residual {worst:.3e}"),
    }
}

fn criterion_3(sweep: &[FiniteCase]) -> Outcome {
    let sum = sweep.iter().map(|c| c.probability_sum_residual).fold(0.0, f64::max);
    let min = sweep.iter().map(|c| c.min_probability).fold(f64::INFINITY, f64::min);
    Outcome {
        pass: sum <= 1e-10 && min >= -1e-10,
        detail: format!("probability axioms, max |sum - 1| {sum:.3e}, min p {min:.3e}"),
    }
}

/// (n, m) pairs covering every m for n = 1..=8, cycled to `count` cases.
fn fock_shapes(count: usize, max_n: usize) -> Vec<(usize, usize)> {
    let all: Vec<(usize, usize)> = (1..=max_n).flat_map(|n| (0..=n).map(move |m| (n, m))).collect();
    (0..count).map(|i| all[i % all.len()]).collect()
}

fn criterion_4() -> Outcome {
    let shapes = fock_shapes(100, 8);
    let worst = shapes
        .par_iter()
        .enumerate()
        .map(|(c, &(n, m))| {
            let r = verify::fock_case(c as u64, n, m, random::case_seed(MASTER + 4, c as u64)).unwrap();
            r.cauchy_binet_residual.max(r.projector_formula_residual)
        })
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: worst <= 1e-10,
        detail: format!("coherent-state inner products, 100 pairs, n <= 8, max pairwise residual {worst:.3e}"),
    }
}

fn criterion_5() -> Outcome {
    let shapes = fock_shapes(50, 6);
    let worst = shapes
        .par_iter()
        .enumerate()
        .map(|(c, &(n, m))| {
            let mut rng = random::case_rng(MASTER + 5, c as u64);
            let g1 = random::complex_matrix(&mut rng, n, n);
            let g2 = random::complex_matrix(&mut rng, n, n);
            let l1 = fock::exterior_power(&g1, m).unwrap().matrix;
            let l2 = fock::exterior_power(&g2, m).unwrap().matrix;
            let l12 = fock::exterior_power(&(&g1 * &g2), m).unwrap().matrix;
            linalg::max_abs_diff(&(l1 * l2), &l12)
        })
        .reduce(|| 0.0, f64::max);
    Outcome {
        pass: worst <= 1e-9,
        detail: format!("representation property, 50 pairs, n <= 6, max entry error {worst:.3e}"),
    }
}

fn criterion_6() -> Outcome {
    // every (n, rank) with n <= 8, cycled
    let shapes = fock_shapes(100, 8);
    let results: Vec<(f64, bool)> = shapes
        .par_iter()
        .enumerate()
        .map(|(c, &(n, rank))| {
            let mut rng = random::case_rng(MASTER + 6, c as u64);
            let k = random::projector(&mut rng, n, rank);
            let a = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
            let b = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
            let v = embedding::projector_embedding_check(&k, &a, &b).unwrap();
            (v.residual(), v.fock_brute.is_some() && v.gram_brute.is_some())
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let complete = results.iter().all(|r| r.1);
    Outcome {
        pass: worst <= 1e-9 && complete,
        detail: format!("projector embedding, 100 kernels, all ranks, max three-way residual {worst:.3e}"),
    }
}

fn criterion_7() -> Outcome {
    let cases: Vec<_> = (0..100u64)
        .into_par_iter()
        .map(|c| {
            let n = 1 + (c as usize % 10);
            let mut rng = random::case_rng(MASTER + 7, c);
            // eigenvalues strictly inside (0, 1) so the kernel is not a projector
            let spectrum: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
            let k = random::kernel_with_spectrum(&mut rng, &spectrum);
            let a = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
            let b = random::disc_symbol(&mut rng, n, SYMBOL_RADIUS);
            let l = embedding::doubling_projector(&k).unwrap();
            let v = embedding::general_embedding_check(&k, &a, &b).unwrap();
            let block = embedding::block_conjugation_check(&k, &a).unwrap();
            (l.idempotence_residual(), block, v.residual(), v.gram_brute.is_some())
        })
        .collect();
    let idem = cases.iter().map(|c| c.0).fold(0.0, f64::max);
    let block = cases.iter().map(|c| c.1).fold(0.0, f64::max);
    let three_way = cases.iter().map(|c| c.2).fold(0.0, f64::max);
    let complete = cases.iter().all(|c| c.3);
    Outcome {
        pass: idem <= 1e-9 && block <= 1e-10 && three_way <= 1e-9 && complete,
        detail: format!(
            "doubling construction, 100 kernels, n <= 10, |L^2 - L| {idem:.3e}, block {block:.3e}, three-way {three_way:.3e}"
        ),
    }
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = random::case_rng(MASTER + 8, 0);
    let dpp = FiniteDpp::new(random::kernel(&mut rng, 20));
    let a = random::real_symbol(&mut rng, 20, -0.5, 0.5);
    let trials = 100_000;

    let exact = dpp.expectation_det(&a).unwrap();
    let mc = sampler::mc_expectation(&dpp, &a, trials, MASTER + 80).unwrap();
    let mc_z = mc.z_score(exact);

    let rows = sampler::inclusion_audit(&dpp, trials, MASTER + 81).unwrap();
    let worst_inclusion = rows.iter().map(|r| r.z).fold(0.0, f64::max);

    let small = FiniteDpp::new(random::kernel(&mut rng, 8));
    let batch = sampler::sample_batch(small.kernel(), trials, MASTER + 82).unwrap();
    let chi = sampler::chi_squared_test(&batch, &small.point_probabilities().unwrap()).unwrap();

    let elapsed = start.elapsed();
    Outcome {
        pass: mc_z <= 4.0 && worst_inclusion <= 4.0 && chi.p_value >= 1e-3 && elapsed <= Duration::from_secs(60),
        detail: format!(
            "sampler statistics, 10^5 draws, mean z {mc_z:.2}, max inclusion z {worst_inclusion:.2}, chi-squared p {:.5} ({} dof), {:.2}s",
            chi.p_value,
            chi.degrees_of_freedom,
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut values = Vec::new();
    let mut worst_delta: f64 = 0.0;
    let mut worst_consistency: f64 = 0.0;
    for s in [0.25, 0.5, 1.0, 2.0] {
        let gap = PiecewiseSymbol::constant(0.0, s, Complex64::new(-1.0, 0.0)).unwrap();
        let v = fredholm::fredholm_det_with_delta(&SineKernel, &gap, 40).unwrap();
        worst_delta = worst_delta.max(v.self_convergence_delta);
        values.push(v.value);

        let q = kernels::composite_gauss_legendre(&[0.0, s], 40).unwrap();
        let dpp = FiniteDpp::new(kernels::discretize(&SineKernel, &q).unwrap());
        let via_finite = dpp.expectation_det(&Symbol::from_real(vec![-1.0; q.len()])).unwrap();
        worst_consistency = worst_consistency.max((via_finite - v.value).norm());
    }
    let in_range = values.iter().all(|v| v.re > 0.0 && v.re < 1.0 && v.im.abs() <= 1e-12);
    let decreasing = values.windows(2).all(|w| w[1].re < w[0].re);
    let listed: Vec<String> = values.iter().map(|v| format!("{:.10}", v.re)).collect();
    Outcome {
        pass: worst_delta <= 1e-8 && in_range && decreasing && worst_consistency <= 1e-12,
        detail: format!(
            "sine gap determinants [{}], max |v(40) - v(80)| {worst_delta:.3e}, finite-route difference {worst_consistency:.3e}",
            listed.join(", ")
        ),
    }
}

fn criterion_10() -> Outcome {
    let a = PiecewiseSymbol::constant(0.0, 1.0, Complex64::new(-1.0, 0.0)).unwrap();
    let r40 = fredholm::trace_class_report(&SineKernel, &a, 40).unwrap().sandwich_ratio(10);
    let r80 = fredholm::trace_class_report(&SineKernel, &a, 80).unwrap().sandwich_ratio(10);
    let change = if r40 > 0.0 && r80 > 0.0 {
        (r40 / r80).max(r80 / r40)
    } else if r40 == r80 {
        1.0
    } else {
        f64::INFINITY
    };
    Outcome {
        pass: r40 <= 1e-8 && change <= 10.0,
        detail: format!("trace-class decay, sigma_10/sigma_1 = {r40:.3e} (n=40), {r80:.3e} (n=80), change {change:.2}x"),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let sweep = finite_sweep();
    let sweep_time = start.elapsed();

    let outcomes = [
        criterion_1(&sweep, sweep_time),
        criterion_2(&sweep),
        criterion_3(&sweep),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let mut failed = 0;
    for (i, o) in outcomes.iter().enumerate() {
        println!("{} criterion {}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
