//! Subcommand implementations. Each returns the text printed on stdout.

use crate::args::{GradcheckArgs, MetricName, QuantizeArgs, RateKind, RatesArgs, W1Args};
use crate::config::{output_stem, resolve_kernel, with_suffix, RunConfig, Settings};
use crate::error::{unwritable, CliError, CliResult};
use crate::raster::Gray;
use crate::svg::{self, Style};
use crate::table;
use mp_core::constraints::{feasibility_residuals, mixed_norm};
use mp_core::curves::npoint_to_curve;
use mp_core::energy::{finite_difference_grad, grad_j, max_relative_error};
use mp_core::experiments::{random_blob_target, run_curve_rate, run_quantizer_rate, target_resolution, RateReport};
use mp_core::quantize::cube_quantize;
use mp_core::solver::{feasible_start, init_points, run, StopReason};
use mp_core::transport::w1_exact;
use mp_core::{Constraint, CurveConstraintSpec, Metric, Points, SolverConfig, SolverTrace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Above this many kernel evaluations per iteration the attraction is tabulated.
const DIRECT_ATTRACTION_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: &'static str,
    pub settings: Settings,
    pub width: usize,
    pub height: usize,
    pub iterations: usize,
    pub gamma: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub stop: StopReason,
    pub unconverged_projections: usize,
    /// `‖D_j s‖_q` of the final curve, one entry per constrained order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub derivative_norms: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    pub files: Vec<PathBuf>,
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::write(path, e))
}

fn ensure_parent(stem: &Path) -> CliResult<()> {
    match stem.parent() {
        Some(p) if !p.as_os_str().is_empty() => {
            std::fs::create_dir_all(p).map_err(unwritable(p.to_path_buf()))
        }
        _ => Ok(()),
    }
}

struct Solved {
    gray: Gray,
    points: Vec<f64>,
    trace: SolverTrace,
}

fn solve(s: &Settings, constraint: Constraint) -> CliResult<Solved> {
    let gray = Gray::load(&s.input)?;
    let target = gray.density(s.invert)?;
    let start = init_points(&target, s.n, s.init, s.seed)?;
    let start = feasible_start(&constraint, &start, 2)?;
    let refine = s
        .refine
        .or((target.num_cells() * s.n > DIRECT_ATTRACTION_LIMIT).then_some(2));
    let cfg = SolverConfig {
        gamma: s.gamma,
        iters: s.iters,
        seed: s.seed,
        constraint,
        kernel: s.kernel,
        field_refine: refine,
        ..Default::default()
    };
    let (points, trace) = run(&start, 2, &target, &cfg)?;
    Ok(Solved { gray, points, trace })
}

fn summary(command: &'static str, s: &Settings, solved: &Solved, files: Vec<PathBuf>) -> RunSummary {
    let t = &solved.trace;
    RunSummary {
        command,
        settings: s.clone(),
        width: solved.gray.width,
        height: solved.gray.height,
        iterations: t.len(),
        gamma: t.gamma,
        initial_energy: t.initial_energy,
        final_energy: t.final_energy(),
        stop: t.stop,
        unconverged_projections: t.unconverged_projections,
        derivative_norms: Vec::new(),
        residuals: Vec::new(),
        files,
    }
}

fn finish(summary: &RunSummary, json: &Path) -> CliResult<String> {
    let text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Internal(e.to_string()))?;
    write_text(json, &(text + "\n"))?;
    Ok(format!(
        "{}: {} iterations, J {} -> {}\n",
        summary.command, summary.iterations, summary.initial_energy, summary.final_energy
    ))
}

pub fn stipple(s: &Settings) -> CliResult<String> {
    let solved = solve(s, Constraint::Box)?;
    ensure_parent(&s.out)?;
    let points = Points::new(2, solved.points.clone())?;
    let files: Vec<PathBuf> = [".svg", ".csv", ".trace.csv", ".json"]
        .iter()
        .map(|x| with_suffix(&s.out, x))
        .collect();
    let notes = vec![format!(
        "stipple N={} iterations={} J={}",
        s.n,
        solved.trace.len(),
        solved.trace.final_energy()
    )];
    write_text(&files[0], &svg::render_points(&points, &s.style, &notes)?)?;
    table::write_points(&files[1], &points)?;
    table::write_trace(&files[2], &solved.trace)?;
    finish(&summary("stipple", s, &solved, files.clone()), &files[3])
}

/// `‖D_j s‖_q` for each constrained order.
pub fn derivative_norms(spec: &CurveConstraintSpec, s: &[f64]) -> CliResult<Vec<f64>> {
    spec.operators(2)?
        .iter()
        .map(|op| Ok(mixed_norm(&op.apply(s)?, 2, spec.q)))
        .collect()
}

pub fn lineart(s: &Settings) -> CliResult<String> {
    let spec = s.curve.clone().ok_or_else(|| CliError::Internal("lineart without a curve constraint".into()))?;
    let gray = Gray::load(&s.input)?;
    let cell = 1.0 / gray.width.max(gray.height) as f64;
    let mut notes = Vec::new();
    if spec.alphas[0] * spec.dt() < cell {
        let w = format!(
            "warning: alpha1*dt = {} is below one pixel ({cell}); the curve can barely move",
            spec.alphas[0] * spec.dt()
        );
        eprintln!("mp: {w}");
        notes.push(w);
    }
    let solved = solve(s, Constraint::Curve(spec.clone()))?;
    ensure_parent(&s.out)?;
    let norms = derivative_norms(&spec, &solved.points)?;
    let residuals = feasibility_residuals(&spec, &solved.points)?;
    notes.push(format!(
        "lineart N={} m={} q={} T={} iterations={} J={}",
        spec.n,
        spec.m,
        spec.q,
        spec.t,
        solved.trace.len(),
        solved.trace.final_energy()
    ));
    for (j, (norm, alpha)) in norms.iter().zip(&spec.alphas).enumerate() {
        notes.push(format!(
            "feasibility order {}: norm {norm} bound {alpha} residual {}",
            j + 1,
            residuals[j]
        ));
    }
    notes.push(format!("feasibility box: residual {}", residuals[spec.m]));

    let points = Points::new(2, solved.points.clone())?;
    let files: Vec<PathBuf> = [".svg", ".csv", ".curve.csv", ".trace.csv", ".json"]
        .iter()
        .map(|x| with_suffix(&s.out, x))
        .collect();
    write_text(&files[0], &svg::render_polyline(&points, &s.style, &notes)?)?;
    table::write_points(&files[1], &points)?;
    table::write_curve(&files[2], &npoint_to_curve(&solved.points, &spec)?)?;
    table::write_trace(&files[3], &solved.trace)?;
    let mut sum = summary("lineart", s, &solved, files.clone());
    sum.derivative_norms = norms;
    sum.residuals = residuals;
    finish(&sum, &files[4])
}

pub fn quantize(a: &QuantizeArgs) -> CliResult<String> {
    let target = Gray::load(&a.input)?.density(!a.no_invert)?;
    let mu = cube_quantize(&target, a.n)?;
    let stem = output_stem(&a.out);
    ensure_parent(&stem)?;
    table::write_measure(&with_suffix(&stem, ".csv"), &mu)?;
    let style = Style {
        canvas: a.canvas.unwrap_or(Style::default().canvas),
        ..Default::default()
    };
    let notes = vec![format!("quantize N={} atoms={}", a.n, mu.len())];
    write_text(&with_suffix(&stem, ".svg"), &svg::render_points(mu.points(), &style, &notes)?)?;
    Ok(format!("quantize: {} atoms\n", mu.len()))
}

pub fn w1(a: &W1Args) -> CliResult<String> {
    let mu = table::read_measure(&a.a)?;
    let nu = table::read_measure(&a.b)?;
    let metric = match a.metric {
        MetricName::L1 => Metric::L1,
        MetricName::L2 => Metric::L2,
    };
    let (cost, plan) = w1_exact(&mu, &nu, metric)?;
    if let Some(path) = &a.plan {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
        w.write_record(["source", "sink", "mass"]).map_err(|e| CliError::write(path, e))?;
        for (i, j, m) in &plan.entries {
            w.write_record([i.to_string(), j.to_string(), m.to_string()])
                .map_err(|e| CliError::write(path, e))?;
        }
        w.flush().map_err(|e| CliError::write(path, e))?;
    }
    Ok(format!("{cost}\n"))
}

fn positive_integers(sweep: &[f64]) -> CliResult<Vec<usize>> {
    sweep
        .iter()
        .map(|&v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::Validation(format!("quantizer sweep needs positive integers, got {v}")))
            }
        })
        .collect()
}

pub fn rates(a: &RatesArgs) -> CliResult<String> {
    let (report, label): (RateReport, &str) = match a.which {
        RateKind::Quantizer => (run_quantizer_rate(a.d, &positive_integers(&a.sweep)?, a.trials, a.seed)?, "N"),
        RateKind::Curve => (run_curve_rate(a.m, a.d, &a.sweep, a.trials, a.seed)?, "T"),
    };
    let stem = output_stem(&a.out);
    ensure_parent(&stem)?;
    table::write_rate_samples(&with_suffix(&stem, ".csv"), &report)?;
    table::write_gnuplot(&with_suffix(&stem, ".dat"), &report, label)?;
    Ok(format!(
        "slope {} intercept {} r2 {} violations {}\n",
        report.fit.slope, report.fit.intercept, report.fit.r2, report.violations
    ))
}

pub fn gradcheck(a: &GradcheckArgs) -> CliResult<String> {
    if a.n == 0 || !(1..=3).contains(&a.d) {
        return Err(CliError::Validation("gradcheck needs n ≥ 1 and d in 1..=3".into()));
    }
    let kernel = resolve_kernel(&a.kernel, &RunConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let res = target_resolution(a.d).min(64);
    let mut worst: f64 = 0.0;
    for _ in 0..a.configs {
        let target = random_blob_target(&mut rng, a.d, res)?;
        let p: Vec<f64> = (0..a.n * a.d).map(|_| rng.gen_range(0.02..0.98)).collect();
        let g = grad_j(&p, a.d, &target, &kernel)?;
        let fd = finite_difference_grad(&p, a.d, &target, &kernel, a.step)?;
        worst = worst.max(max_relative_error(&g, &fd, 1e-8));
    }
    let line = format!("max relative error {worst:e} over {} configurations\n", a.configs);
    if worst < a.threshold {
        Ok(line)
    } else {
        Err(CliError::Internal(format!("gradient check failed: {}", line.trim_end())))
    }
}
