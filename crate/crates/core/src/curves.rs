//! Constructive curves and the maps between curves and ordered point sets.
//!
//! The serpentine curve visits the centers of a `C^d` cube partition in
//! boustrophedon order, waits at each center for a time proportional to the
//! target mass of its cube, and moves between neighbours along a smoothstep
//! polynomial whose derivative bounds are met by choosing the travel time.

use crate::constraints::{self, CurveConstraintSpec, NormIndex};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, GridDensity, Points};
use crate::quantize::{cell_masses, serpentine_order, QuantizeTarget};

/// Anything that maps `[0, duration]` into the cube.
pub trait Curve {
    fn dim(&self) -> usize;
    fn duration(&self) -> f64;
    fn position(&self, t: f64, out: &mut [f64]);
}

/// Peak of `|6t⁵−15t⁴+10t³)''|` on `[0,1]`, reached at `t = 1/2 ± √3/6`.
const QUINTIC_PEAK_SECOND: f64 = 5.773502691896258; // 10/√3
const QUINTIC_PEAK_FIRST: f64 = 1.875;
const CUBIC_PEAK_FIRST: f64 = 1.5;

/// Rest-to-rest move of length `length` over time `r`: `u(τ) = length·φ(τ/r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyStep {
    pub m: usize,
    pub length: f64,
    pub r: f64,
}

impl PolyStep {
    /// Shortest travel time meeting `|u^{(j)}| ≤ α_j` for `j ≤ m`.
    pub fn new(m: usize, length: f64, alphas: &[f64]) -> Result<Self> {
        if alphas.len() != m || alphas.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "need {m} positive derivative bounds, got {alphas:?}"
            )));
        }
        let r = match m {
            1 => CUBIC_PEAK_FIRST * length / alphas[0],
            2 => (length * QUINTIC_PEAK_SECOND / alphas[1])
                .sqrt()
                .max(QUINTIC_PEAK_FIRST * length / alphas[0]),
            _ => {
                return Err(Error::InvalidParameter(format!("m must be 1 or 2, got {m}")));
            }
        };
        Ok(Self { m, length, r })
    }

    /// Coefficients of `u` on `[0,1]` in increasing powers.
    pub fn coeffs(&self) -> Vec<f64> {
        let c = self.length;
        match self.m {
            1 => vec![0.0, 0.0, 3.0 * c, -2.0 * c],
            _ => vec![0.0, 0.0, 0.0, 10.0 * c, -15.0 * c, 6.0 * c],
        }
    }

    /// `j`-th derivative of the normalized profile `φ` at `s ∈ [0,1]`.
    pub fn profile(&self, s: f64, j: usize) -> f64 {
        let co = self.coeffs();
        let mut v = 0.0;
        for (k, &a) in co.iter().enumerate().skip(j) {
            let fall: f64 = (0..j).map(|i| (k - i) as f64).product();
            v += a * fall * s.powi((k - j) as i32);
        }
        v / self.length
    }

    /// Displacement after time `tau ∈ [0, r]`.
    pub fn displacement(&self, tau: f64) -> f64 {
        self.length * self.profile((tau / self.r).clamp(0.0, 1.0), 0)
    }

    /// Largest `|d^j u / dt^j|` over the move.
    pub fn peak_derivative(&self, j: usize) -> f64 {
        let shape = match (self.m, j) {
            (1, 1) => CUBIC_PEAK_FIRST,
            (1, 2) => 6.0,
            (_, 1) => QUINTIC_PEAK_FIRST,
            (_, 2) => QUINTIC_PEAK_SECOND,
            _ => f64::NAN,
        };
        shape * self.length / self.r.powi(j as i32)
    }

    pub fn time_scaled(&self, factor: f64) -> Self {
        Self {
            r: self.r * factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerpentineCurve {
    dim: usize,
    cells: usize,
    /// Cell centers in visiting order.
    centers: Vec<Vec<f64>>,
    /// `(cell position in the order, wait start, wait end)`.
    pub schedule: Vec<(usize, f64, f64)>,
    pub step: PolyStep,
    pub total_time: f64,
}

/// Time needed for the moves alone: `(C^d − 1)·r`.
pub fn travel_time(ncells: usize, d: usize, m: usize, alphas: &[f64]) -> Result<f64> {
    let step = PolyStep::new(m, 1.0 / ncells as f64, alphas)?;
    Ok((ncells.pow(d as u32) - 1) as f64 * step.r)
}

/// Serpentine curve with waits `π(ω_i)·(T − T_N)`.
pub fn build_serpentine_curve(
    target: &GridDensity,
    m: usize,
    alphas: &[f64],
    total_time: f64,
    ncells: usize,
) -> Result<SerpentineCurve> {
    if ncells == 0 {
        return Err(Error::InvalidParameter("need at least one cell per axis".into()));
    }
    let d = target.dim();
    let total_mass = target.total_mass();
    if !(total_mass > 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let step = PolyStep::new(m, 1.0 / ncells as f64, alphas)?;
    let part = serpentine_order(ncells, d);
    let moves = part.order.len() - 1;
    let t_n = moves as f64 * step.r;
    if !(total_time >= t_n) {
        return Err(Error::Infeasible(format!(
            "horizon {total_time} is shorter than the travel time {t_n}"
        )));
    }
    let masses = cell_masses(&QuantizeTarget::Grid(target), ncells);
    let slack = total_time - t_n;
    let mut schedule = Vec::with_capacity(part.order.len());
    let mut centers = Vec::with_capacity(part.order.len());
    let mut t = 0.0;
    for (k, idx) in part.order.iter().enumerate() {
        let wait = masses[part.flat(idx)] / total_mass * slack;
        schedule.push((k, t, t + wait));
        t += wait;
        if k < moves {
            t += step.r;
        }
        centers.push(part.center(idx));
    }
    Ok(SerpentineCurve {
        dim: d,
        cells: ncells,
        centers,
        schedule,
        step,
        total_time: t,
    })
}

impl SerpentineCurve {
    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn travel_time(&self) -> f64 {
        (self.centers.len() - 1) as f64 * self.step.r
    }

    /// Same geometry traversed `factor` times slower.
    pub fn time_scaled(&self, factor: f64) -> Self {
        Self {
            schedule: self
                .schedule
                .iter()
                .map(|&(k, a, b)| (k, a * factor, b * factor))
                .collect(),
            step: self.step.time_scaled(factor),
            total_time: self.total_time * factor,
            ..self.clone()
        }
    }

    /// Time pushforward: an atom per wait, plus `per_move` midpoint samples of each move.
    pub fn pushforward(&self, per_move: usize) -> Result<DiscreteMeasure> {
        let d = self.dim;
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for &(k, a, b) in &self.schedule {
            if b > a {
                coords.extend_from_slice(&self.centers[k]);
                weights.push((b - a) / self.total_time);
            }
        }
        if per_move > 0 {
            let w = self.step.r / (per_move as f64 * self.total_time);
            let mut x = vec![0.0; d];
            for k in 0..self.centers.len() - 1 {
                for s in 0..per_move {
                    let tau = (s as f64 + 0.5) / per_move as f64 * self.step.r;
                    self.move_position(k, tau, &mut x);
                    coords.extend_from_slice(&x);
                    weights.push(w);
                }
            }
        }
        Ok(DiscreteMeasure::new(Points::new(d, coords)?, weights)?.merge_duplicates())
    }

    fn move_position(&self, k: usize, tau: f64, out: &mut [f64]) {
        let (a, b) = (&self.centers[k], &self.centers[k + 1]);
        let frac = self.step.displacement(tau) / self.step.length;
        for i in 0..self.dim {
            out[i] = a[i] + frac * (b[i] - a[i]);
        }
    }
}

impl Curve for SerpentineCurve {
    fn dim(&self) -> usize {
        self.dim
    }

    fn duration(&self) -> f64 {
        self.total_time
    }

    fn position(&self, t: f64, out: &mut [f64]) {
        let t = t.clamp(0.0, self.total_time);
        // Last wait that starts at or before t.
        let k = self.schedule.partition_point(|&(_, a, _)| a <= t).max(1) - 1;
        let (_, _, end) = self.schedule[k];
        if t <= end || k + 1 == self.centers.len() {
            out.copy_from_slice(&self.centers[k]);
        } else {
            self.move_position(k, t - end, out);
        }
    }
}

/// Piecewise-linear curve through `points` at strictly increasing `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub times: Vec<f64>,
    pub points: Points,
}

impl Polyline {
    pub fn new(times: Vec<f64>, points: Points) -> Result<Self> {
        if times.len() != points.len() || times.is_empty() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                found: times.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] != 0.0 {
            return Err(Error::InvalidParameter("knot times must start at 0 and increase".into()));
        }
        Ok(Self { times, points })
    }

    /// `max |Δx|₂ / Δt` over the segments.
    pub fn max_speed(&self) -> f64 {
        self.times
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (a, b) = (self.points.get(i), self.points.get(i + 1));
                let len = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                len / (w[1] - w[0])
            })
            .fold(0.0, f64::max)
    }
}

impl Curve for Polyline {
    fn dim(&self) -> usize {
        self.points.dim()
    }

    fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn position(&self, t: f64, out: &mut [f64]) {
        let t = t.clamp(0.0, self.duration());
        let k = self.times.partition_point(|&s| s <= t);
        if k >= self.times.len() {
            out.copy_from_slice(self.points.get(self.times.len() - 1));
            return;
        }
        let k = k.max(1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let f = (t - t0) / (t1 - t0);
        let (a, b) = (self.points.get(k - 1), self.points.get(k));
        for i in 0..out.len() {
            out[i] = a[i] + f * (b[i] - a[i]);
        }
    }
}

/// Positions at `t_i = iT/N` for `i = 1..=N`, flattened.
pub fn sample_times<C: Curve + ?Sized>(curve: &C, n: usize) -> Vec<f64> {
    let d = curve.dim();
    let mut out = vec![0.0; n * d];
    for i in 0..n {
        let t = (i + 1) as f64 * curve.duration() / n as f64;
        curve.position(t, &mut out[i * d..(i + 1) * d]);
    }
    out
}

/// Uniform measure on `N` equispaced time samples of the curve.
pub fn curve_to_npoint<C: Curve + ?Sized>(curve: &C, n: usize) -> Result<DiscreteMeasure> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two samples, got {n}")));
    }
    crate::measure::uniform_npoint(Points::new(curve.dim(), sample_times(curve, n))?)
}

/// Midpoint-rule approximation of the time pushforward with `samples` atoms.
pub fn dense_pushforward<C: Curve + ?Sized>(curve: &C, samples: usize) -> Result<DiscreteMeasure> {
    let d = curve.dim();
    let mut coords = vec![0.0; samples * d];
    for i in 0..samples {
        let t = (i as f64 + 0.5) * curve.duration() / samples as f64;
        curve.position(t, &mut coords[i * d..(i + 1) * d]);
    }
    crate::measure::uniform_npoint(Points::new(d, coords)?)
}

/// Continuous curve through the samples: hold `s_1` on `[0, Δt]`, then move
/// linearly from `s_{i-1}` to `s_i` on `[(i−1)Δt, iΔt]`.
pub fn npoint_to_curve(s: &[f64], spec: &CurveConstraintSpec) -> Result<Polyline> {
    if spec.m != 1 || spec.q != NormIndex::Inf {
        return Err(Error::Unsupported(
            "continuous reconstruction is defined for speed bounds with q = inf".into(),
        ));
    }
    if !constraints::is_feasible(spec, s, 1e-9)? {
        return Err(Error::Infeasible("samples violate the speed bound".into()));
    }
    let n = spec.n;
    let d = s.len() / n;
    let dt = spec.dt();
    let mut times = Vec::with_capacity(n + 1);
    let mut coords = Vec::with_capacity((n + 1) * d);
    times.push(0.0);
    coords.extend_from_slice(&s[..d]);
    for i in 0..n {
        times.push((i + 1) as f64 * dt);
        coords.extend_from_slice(&s[i * d..(i + 1) * d]);
    }
    Polyline::new(times, Points::new(d, coords)?)
}
