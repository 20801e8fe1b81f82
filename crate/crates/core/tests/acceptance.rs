//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints a single PASS/FAIL line.

mod common;

use common::*;
use mp_core::constraints::{project_curve_set, CurveConstraintSpec, NormIndex};
use mp_core::curves::{curve_to_npoint, dense_pushforward};
use mp_core::energy::fourier::{nh_distance_sq_half, FourierOracle, PeriodicGaussian};
use mp_core::energy::{finite_difference_grad, grad_j, max_relative_error, Objective};
use mp_core::experiments::{random_blob_target, run_curve_rate, run_quantizer_rate, RateReport};
use mp_core::measure::{uniform_npoint, GridDensity, Points};
use mp_core::solver::{default_step, init_points, run, InitStrategy, SolverConfig};
use mp_core::transport::{w1_1d, w1_dual_lower_bound, w1_exact, Metric};
use mp_core::{FilterSpec, KernelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: usize, name: &str, budget_secs: f64, f: impl FnOnce() -> Outcome) -> bool {
    check_after(id, name, budget_secs, 0.0, f)
}

/// Like `check`, with `prior_secs` of shared setup charged against the budget.
fn check_after(id: usize, name: &str, budget_secs: f64, prior_secs: f64, f: impl FnOnce() -> Outcome) -> bool {
    let clock = Instant::now();
    let out = f();
    let secs = prior_secs + clock.elapsed().as_secs_f64();
    let pass = out.pass && secs < budget_secs;
    println!(
        "criterion {id:>2} {name}: {} ({}; {secs:.1}s of {budget_secs:.0}s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

const SIZES: [usize; 5] = [4, 16, 64, 256, 1024];

fn quantizer_bound_check(reports: &[RateReport]) -> Outcome {
    let total: usize = reports.iter().map(|r| r.samples.len()).sum();
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let worst = reports
        .iter()
        .flat_map(|r| r.samples.iter())
        .map(|s| s.w1 / s.bound)
        .fold(0.0, f64::max);
    Outcome {
        pass: violations == 0 && total == 500,
        detail: format!("{violations} violations in {total} samples, worst W1/bound {worst:.3}"),
    }
}

fn quantizer_rate_check(reports: &[RateReport]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in reports {
        let limit = -1.0 / r.d as f64 + 0.15;
        pass &= r.fit.slope <= limit;
        parts.push(format!("d={} slope {:.3} (≤ {limit:.2})", r.d, r.fit.slope));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let kernels = [KernelSpec::SmoothedL1 { eps: 0.05 }, KernelSpec::Gaussian { sigma: 0.1 }];
    let mut worst: f64 = 0.0;
    for k in &kernels {
        for _ in 0..20 {
            let m: Vec<f64> = (0..256).map(|_| rng.gen()).collect();
            let t = GridDensity::new(vec![16, 16], m).unwrap();
            let p: Vec<f64> = (0..16).map(|_| rng.gen_range(0.02..0.98)).collect();
            let a = grad_j(&p, 2, &t, k).unwrap();
            let fd = finite_difference_grad(&p, 2, &t, k, 1e-6).unwrap();
            worst = worst.max(max_relative_error(&a, &fd, 1e-8));
        }
    }
    Outcome {
        pass: worst < 1e-5,
        detail: format!("max relative error {worst:.2e} over 40 configurations"),
    }
}

fn equivalence_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let filter = FilterSpec::Gaussian { sigma: 0.05 };
    let target = random_blob_target(&mut rng, 2, 64).unwrap();
    let pg = PeriodicGaussian::new(&filter, 2).unwrap();
    let c = pg.torus_constant(&target).unwrap();
    let oracle = FourierOracle::new(&target, &filter, 64).unwrap();
    let obj = Objective::new(&target, &pg);
    let mut worst: f64 = 0.0;
    let mut diffs = Vec::new();
    for _ in 0..50 {
        let p: Vec<f64> = (0..32).map(|_| rng.gen()).collect();
        let j = obj.evaluate(&p, 2).unwrap().energy;
        let nh = oracle.energy(&uniform_npoint(Points::new(2, p).unwrap()).unwrap()).unwrap();
        worst = worst.max(((j + c) - nh).abs() / nh.abs());
        diffs.push(nh - j);
    }
    let spread = diffs
        .iter()
        .map(|d| (d - c).abs() / c.abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: worst < 1e-6 && spread < 1e-6,
        detail: format!("max relative deviation {worst:.2e}, constant spread {spread:.2e}"),
    }
}

fn norm_domination_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let filter = FilterSpec::Gaussian { sigma: 0.05 };
    let grid = 64;
    let lh = filter.lipschitz();
    let budget = 2.0 * lh / grid as f64;
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let d = 1 + k % 2;
        let mu_len = rng.gen_range(1..12);
        let mu = random_measure(&mut rng, mu_len, d);
        let nu_len = rng.gen_range(1..12);
        let nu = random_measure(&mut rng, nu_len, d);
        let lhs = (2.0 * nh_distance_sq_half(&mu, &nu, &filter, grid).unwrap()).sqrt();
        let w = w1_exact(&mu, &nu, Metric::L2).unwrap().0;
        let rhs = lh * w + budget;
        if lhs > rhs {
            violations += 1;
        }
        worst = worst.max(lhs / (lh * w).max(1e-300));
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} violations in 100 pairs, worst N_h/(L_h·W1) {worst:.3}"),
    }
}

fn descent_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let target = random_blob_target(&mut rng, 2, 64).unwrap();
    let kernel = KernelSpec::default();
    let n = 64;
    let start = init_points(&target, n, InitStrategy::Grid, 0).unwrap();
    let cfg = SolverConfig {
        gamma: Some(default_step(n, &kernel)),
        iters: 400,
        tol_stop: 0.0,
        kernel,
        ..Default::default()
    };
    let (_, trace) = run(&start, 2, &target, &cfg).unwrap();
    let increases = trace.increases(1e-10);
    let drop = (trace.initial_energy - trace.final_energy()) / trace.initial_energy.abs();
    Outcome {
        pass: increases == 0 && drop >= 0.01 && trace.len() == 400,
        detail: format!(
            "{increases} increasing steps in {} iterations, J {:.6} → {:.6} ({:.1}% lower)",
            trace.len(),
            trace.initial_energy,
            trace.final_energy(),
            100.0 * drop
        ),
    }
}

fn discretization_gap_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (alpha, t, n, dense) = (2.0, 1.0, 100, 2000);
    // Midpoint sampling of the dense pushforward moves mass by at most α·T/(2M).
    let budget = alpha * t / (2.0 * dense as f64);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let curve = random_feasible_polyline(&mut rng, 2, 25, t, alpha);
        let push = dense_pushforward(&curve, dense).unwrap();
        let samples = curve_to_npoint(&curve, n).unwrap();
        let w = w1_exact(&push, &samples.merge_duplicates(), Metric::L2).unwrap().0;
        let bound = alpha * t / n as f64;
        if w > bound + budget {
            violations += 1;
        }
        worst = worst.max(w / bound);
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{violations} violations in 50 curves, worst W1/(α₁T/N) {worst:.3}"),
    }
}

fn curve_rate_check() -> Outcome {
    let d2 = run_curve_rate(1, 2, &[16.0, 64.0, 256.0, 1024.0], 6, 8).unwrap();
    let d1 = run_curve_rate(1, 1, &[8.0, 16.0, 32.0, 64.0, 128.0, 256.0], 12, 8).unwrap();
    let pass = d2.fit.slope <= -0.5 + 0.15 && d1.fit.slope <= -1.0 + 0.15;
    Outcome {
        pass,
        detail: format!(
            "d=2 slope {:.3} (≤ -0.35), d=1 slope {:.3} (≤ -0.85), bound violations {}",
            d2.fit.slope,
            d1.fit.slope,
            d1.violations + d2.violations
        ),
    }
}

fn random_spec(rng: &mut impl Rng, n: usize, q: NormIndex) -> CurveConstraintSpec {
    let m = rng.gen_range(1..=2);
    let t = rng.gen_range(0.5..2.0);
    let alphas = (0..m).map(|j| rng.gen_range(0.2..1.5) * (1 + 2 * j) as f64).collect();
    CurveConstraintSpec::new(m, q, alphas, n, t).unwrap()
}

fn projection_oracle_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let qs = [NormIndex::One, NormIndex::Two, NormIndex::Inf];
    let mut worst: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for k in 0..200 {
        let q = qs[k % 3];
        let n = rng.gen_range(2..=4);
        let d = rng.gen_range(1..=2);
        let spec = random_spec(&mut rng, n, q);
        let z: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-0.3..1.3)).collect();
        let ours = project_curve_set(&spec, &z, 1e-10).unwrap();
        let reference = if d == 1 && q != NormIndex::Two {
            let exact = active_set_projection(&polyhedral_rows(&spec), &z);
            let barrier = barrier_projection(&spec, &z);
            cross = cross.max((half_sq_dist(&exact, &z) - half_sq_dist(&barrier, &z)).abs());
            exact
        } else {
            barrier_projection(&spec, &z)
        };
        worst = worst.max((half_sq_dist(&ours, &z) - half_sq_dist(&reference, &z)).abs());
    }
    Outcome {
        pass: worst < 1e-6 && cross < 1e-9,
        detail: format!("max objective gap {worst:.2e}; interior-point vs active-set {cross:.2e}"),
    }
}

fn w1_integrity_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut cross: f64 = 0.0;
    let mut breaches = 0;
    for k in 0..100 {
        let d = if k < 50 { 1 } else { 2 };
        let mu_len = rng.gen_range(1..50);
        let mu = random_measure(&mut rng, mu_len, d);
        let nu_len = rng.gen_range(1..50);
        let nu = random_measure(&mut rng, nu_len, d);
        let metrics: &[Metric] = if d == 1 { &[Metric::L1] } else { &[Metric::L1, Metric::L2] };
        for &metric in metrics {
            let (primal, plan) = w1_exact(&mu, &nu, metric).unwrap();
            if d == 1 {
                cross = cross.max((primal - w1_1d(&mu, &nu).unwrap()).abs());
            }
            let pts: Vec<&[f64]> = mu.points().iter().chain(nu.points().iter()).collect();
            let raw: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = lipschitz_projection(&pts, &raw, metric);
            let dual = w1_dual_lower_bound(&mu, &nu, &f[..mu.len()], &f[mu.len()..], metric).unwrap();
            let upper = independent_coupling_cost(&mu, &nu, metric)
                .min(northwest_coupling_cost(&mu, &nu, metric));
            if dual > primal + 1e-10 || primal > upper + 1e-10 || plan.marginal_error(&mu, &nu) > 1e-9 {
                breaches += 1;
            }
        }
    }
    Outcome {
        pass: cross < 1e-10 && breaches == 0,
        detail: format!("1-D closed form vs network simplex {cross:.2e}, {breaches} sandwich breaches"),
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut ok = true;
    let clock = Instant::now();
    let q1 = run_quantizer_rate(1, &SIZES, 50, 1).unwrap();
    let q2 = run_quantizer_rate(2, &SIZES, 50, 2).unwrap();
    let sweep_secs = clock.elapsed().as_secs_f64();
    let reports = [q1, q2];
    ok &= check_after(1, "quantizer bound", 120.0, sweep_secs, || quantizer_bound_check(&reports));
    ok &= check_after(2, "quantizer rate", 120.0, sweep_secs, || quantizer_rate_check(&reports));
    ok &= check(3, "gradient correctness", 10.0, gradient_check);
    ok &= check(4, "energy equivalence", 30.0, equivalence_check);
    ok &= check(5, "norm domination", 60.0, norm_domination_check);
    ok &= check(6, "descent", 30.0, descent_check);
    ok &= check(7, "curve discretization gap", 60.0, discretization_gap_check);
    ok &= check(8, "curve rate", 180.0, curve_rate_check);
    ok &= check(9, "projection oracle agreement", 60.0, projection_oracle_check);
    ok &= check(10, "W1 oracle integrity", 30.0, w1_integrity_check);
    if !ok {
        std::process::exit(1);
    }
}
