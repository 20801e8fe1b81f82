//! Projected gradient descent on the attraction-repulsion energy.

use crate::constraints::{self, CurveConstraintSpec, CurveProjector};
use crate::energy::{AttractionField, Objective};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, Potential};
use crate::measure::GridDensity;
use crate::quantize::serpentine_order;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// Each coordinate in `[0, 1]`.
    #[default]
    Box,
    /// Ordered samples of a curve with bounded difference quotients.
    Curve(CurveConstraintSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    #[default]
    RandomRejection,
    Grid,
    Spiral,
    Circle,
}

impl FromStr for InitStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" | "random-rejection" => Ok(InitStrategy::RandomRejection),
            "grid" => Ok(InitStrategy::Grid),
            "spiral" => Ok(InitStrategy::Spiral),
            "circle" => Ok(InitStrategy::Circle),
            other => Err(format!(
                "unknown init strategy {other:?} (random, grid, spiral, circle)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Step size; `None` picks [`default_step`].
    pub gamma: Option<f64>,
    pub iters: usize,
    pub seed: u64,
    pub constraint: Constraint,
    pub kernel: KernelSpec,
    /// Stop once `‖p^{k+1} − p^k‖_∞` drops below this.
    pub tol_stop: f64,
    /// Duality-gap tolerance of each curve projection.
    pub projection_tol: f64,
    /// Tabulate the attraction on a lattice refined this many times (even), instead of direct sums.
    pub field_refine: Option<usize>,
    /// Abort after this many consecutive energy increases.
    pub divergence_window: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            iters: 1000,
            seed: 0,
            constraint: Constraint::Box,
            kernel: KernelSpec::default(),
            tol_stop: 1e-9,
            projection_tol: constraints::DEFAULT_TOL,
            field_refine: None,
            divergence_window: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    IterationCap,
    SmallStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub initial_energy: f64,
    /// `J` after each performed iteration.
    pub energies: Vec<f64>,
    /// `‖p^{k+1} − p^k‖_∞` of each iteration.
    pub step_norms: Vec<f64>,
    /// Largest relative constraint residual of each iterate (zero under the box).
    pub residuals: Vec<f64>,
    /// Curve projections that stopped at the iteration cap before certifying the gap.
    pub unconverged_projections: usize,
    pub gamma: f64,
    pub stop: StopReason,
    pub wall_time_secs: f64,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn final_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(self.initial_energy)
    }

    /// Number of steps where `J` rose by more than `slack`.
    pub fn increases(&self, slack: f64) -> usize {
        std::iter::once(self.initial_energy)
            .chain(self.energies.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|w| w[1] > w[0] + slack)
            .count()
    }
}

/// `0.9·N/(3L)`, safely below the `N/(3L)` cap.
pub fn default_step_for(n: usize, lipschitz: f64) -> f64 {
    0.9 * n as f64 / (3.0 * lipschitz)
}

pub fn default_step<P: Potential>(n: usize, kernel: &P) -> f64 {
    default_step_for(n, kernel.grad_lipschitz())
}

fn relative_residual(spec: &CurveConstraintSpec, s: &[f64]) -> Result<f64> {
    let r = constraints::feasibility_residuals(spec, s)?;
    Ok(r[..spec.m]
        .iter()
        .zip(&spec.alphas)
        .map(|(r, a)| r / a)
        .chain(std::iter::once(r[spec.m]))
        .fold(0.0, f64::max))
}

/// Runs projected gradient descent from `start` (flat, `dim` coordinates per point).
pub fn run(
    start: &[f64],
    dim: usize,
    target: &GridDensity,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolverTrace)> {
    cfg.kernel.validate()?;
    run_with_potential(start, dim, target, &cfg.kernel, cfg)
}

/// As [`run`], with an arbitrary pair potential in place of `cfg.kernel`.
pub fn run_with_potential<P: Potential>(
    start: &[f64],
    dim: usize,
    target: &GridDensity,
    potential: &P,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolverTrace)> {
    let clock = Instant::now();
    if start.is_empty() || start.len() % dim != 0 {
        return Err(Error::LengthMismatch {
            expected: dim,
            found: start.len(),
        });
    }
    let n = start.len() / dim;
    let gamma = cfg.gamma.unwrap_or_else(|| default_step(n, potential));
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {gamma}")));
    }

    let mut projector = match &cfg.constraint {
        Constraint::Box => {
            if constraints::box_violation(start) > 0.0 {
                return Err(Error::Infeasible("start lies outside the unit cube".into()));
            }
            None
        }
        Constraint::Curve(spec) => {
            if spec.n != n {
                return Err(Error::LengthMismatch {
                    expected: spec.n * dim,
                    found: start.len(),
                });
            }
            if relative_residual(spec, start)? > cfg.projection_tol.max(1e-6) {
                return Err(Error::Infeasible("start violates the curve constraints".into()));
            }
            let mut p = CurveProjector::new(spec, dim)?;
            p.tol = cfg.projection_tol;
            Some(p)
        }
    };

    let mut objective = Objective::new(target, potential);
    if let Some(refine) = cfg.field_refine {
        objective = objective.with_field(AttractionField::new(target, potential, refine)?);
    }

    let mut p = start.to_vec();
    let mut report = objective.evaluate(&p, dim)?;
    let mut trace = SolverTrace {
        initial_energy: report.energy,
        energies: Vec::new(),
        step_norms: Vec::new(),
        residuals: Vec::new(),
        unconverged_projections: 0,
        gamma,
        stop: StopReason::IterationCap,
        wall_time_secs: 0.0,
    };
    let mut rising = 0usize;
    let mut z = vec![0.0; p.len()];
    for _ in 0..cfg.iters {
        for ((zi, pi), gi) in z.iter_mut().zip(&p).zip(&report.grad) {
            *zi = pi - gamma * gi;
        }
        let (next, residual) = match projector.as_mut() {
            None => (constraints::project_box(&z), 0.0),
            Some(proj) => {
                let (s, rep) = proj.project_with_report(&z)?;
                if !rep.converged {
                    trace.unconverged_projections += 1;
                }
                let r = relative_residual(proj.spec(), &s)?;
                (s, r)
            }
        };
        let step = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let new_report = objective.evaluate(&next, dim)?;
        if new_report.energy > report.energy {
            rising += 1;
        } else {
            rising = 0;
        }
        trace.energies.push(new_report.energy);
        trace.step_norms.push(step);
        trace.residuals.push(residual);
        p = next;
        report = new_report;
        if rising >= cfg.divergence_window {
            return Err(Error::Diverged {
                consecutive: rising,
                energy: report.energy,
            });
        }
        if step < cfg.tol_stop {
            trace.stop = StopReason::SmallStep;
            break;
        }
    }
    trace.wall_time_secs = clock.elapsed().as_secs_f64();
    Ok((p, trace))
}

const SPIRAL_RADIUS: f64 = 0.45;
const CIRCLE_RADIUS: f64 = 0.4;

/// Arc length of `r = bθ` from 0 to `θ`.
pub fn spiral_arc_length(b: f64, theta: f64) -> f64 {
    0.5 * b * (theta * (1.0 + theta * theta).sqrt() + theta.asinh())
}

fn spiral_theta_at(b: f64, s: f64, theta_max: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, theta_max);
    let mut th = (2.0 * s / b).sqrt().min(theta_max);
    for _ in 0..100 {
        let f = spiral_arc_length(b, th) - s;
        if f.abs() <= 1e-15 * s.max(1.0) {
            break;
        }
        if f > 0.0 {
            hi = th;
        } else {
            lo = th;
        }
        let next = th - f / (b * (1.0 + th * th).sqrt());
        th = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    th
}

/// Turns of the start spiral for `n` points.
pub fn spiral_turns(n: usize) -> f64 {
    ((n as f64).sqrt() / 3.0).round().max(1.0)
}

/// Start configuration with `n` points inside the cube.
pub fn init_points(
    target: &GridDensity,
    n: usize,
    strategy: InitStrategy,
    seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::EmptyPoints);
    }
    let d = target.dim();
    match strategy {
        InitStrategy::Grid => {
            let mut c = (n as f64).powf(1.0 / d as f64).ceil() as usize;
            while c > 1 && (c - 1).pow(d as u32) >= n {
                c -= 1;
            }
            let part = serpentine_order(c, d);
            Ok(part
                .order
                .iter()
                .take(n)
                .flat_map(|idx| part.center(idx))
                .collect())
        }
        InitStrategy::RandomRejection => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let peak = target.masses().iter().cloned().fold(0.0, f64::max);
            if !(peak > 0.0) {
                return Err(Error::DegenerateTarget);
            }
            let dims = target.dims();
            let mut out = Vec::with_capacity(n * d);
            let mut x = vec![0.0; d];
            while out.len() < n * d {
                let mut flat = 0;
                for a in (0..d).rev() {
                    x[a] = rng.gen::<f64>();
                    let k = ((x[a] * dims[a] as f64) as usize).min(dims[a] - 1);
                    flat = flat * dims[a] + k;
                }
                if rng.gen::<f64>() * peak < target.masses()[flat] {
                    out.extend_from_slice(&x);
                }
            }
            Ok(out)
        }
        InitStrategy::Spiral => {
            if d != 2 {
                return Err(Error::Unsupported(format!("spiral start needs d = 2, got {d}")));
            }
            let theta_max = 2.0 * std::f64::consts::PI * spiral_turns(n);
            let b = SPIRAL_RADIUS / theta_max;
            let total = spiral_arc_length(b, theta_max);
            let mut out = Vec::with_capacity(2 * n);
            for i in 0..n {
                let s = if n == 1 { 0.0 } else { total * i as f64 / (n - 1) as f64 };
                let th = spiral_theta_at(b, s, theta_max);
                let r = b * th;
                out.push(0.5 + r * th.cos());
                out.push(0.5 + r * th.sin());
            }
            Ok(out)
        }
        InitStrategy::Circle => {
            if d != 2 {
                return Err(Error::Unsupported(format!("circle start needs d = 2, got {d}")));
            }
            Ok((0..n)
                .flat_map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    [0.5 + CIRCLE_RADIUS * th.cos(), 0.5 + CIRCLE_RADIUS * th.sin()]
                })
                .collect())
        }
    }
}

/// Projects an arbitrary start onto the constraint set.
pub fn feasible_start(constraint: &Constraint, start: &[f64], dim: usize) -> Result<Vec<f64>> {
    match constraint {
        Constraint::Box => Ok(constraints::project_box(start)),
        Constraint::Curve(spec) => {
            let mut p = CurveProjector::new(spec, dim)?;
            Ok(p.project_with_report(start)?.0)
        }
    }
}
