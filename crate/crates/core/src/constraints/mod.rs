//! Feasible sets for the solver: the box `[0,1]^{Nd}` and discrete curves with
//! bounded difference quotients.
//!
//! A discrete curve is `N` samples `s_0..s_{N-1}` in the box, stored flat
//! (sample-major). For `m ∈ {1, 2}` the set further requires
//! `‖D_j s‖_q ≤ α_j` for `j = 1..m`, with `D_1` the backward difference
//! quotient and `D_2 = −D_1ᵀ D_1`.

mod norms;

pub use norms::{mixed_norm, project_ball, NormIndex};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Coordinate-wise clamp to `[0, 1]`.
pub fn project_box(s: &[f64]) -> Vec<f64> {
    s.iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

pub fn box_violation(s: &[f64]) -> f64 {
    s.iter()
        .map(|&x| (-x).max(x - 1.0).max(0.0))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffOperator {
    pub order: usize,
    pub n: usize,
    pub dim: usize,
    pub dt: f64,
}

impl DiffOperator {
    pub fn new(order: usize, n: usize, dim: usize, dt: f64) -> Result<Self> {
        if order != 1 && order != 2 {
            return Err(Error::InvalidParameter(format!(
                "difference order must be 1 or 2, got {order}"
            )));
        }
        if n == 0 || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need N ≥ 1 and Δt > 0, got N = {n}, Δt = {dt}"
            )));
        }
        crate::measure::check_dim(dim)?;
        Ok(Self { order, n, dim, dt })
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n * self.dim {
            return Err(Error::LengthMismatch {
                expected: self.n * self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn d1(&self, s: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out[..d].iter_mut().for_each(|x| *x = 0.0);
        for i in 1..self.n {
            for a in 0..d {
                out[i * d + a] = (s[i * d + a] - s[(i - 1) * d + a]) / self.dt;
            }
        }
    }

    fn d1t(&self, y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        let n = self.n;
        for i in 0..n {
            for a in 0..d {
                let here = if i >= 1 { y[i * d + a] } else { 0.0 };
                let next = if i + 1 < n { y[(i + 1) * d + a] } else { 0.0 };
                out[i * d + a] = (here - next) / self.dt;
            }
        }
    }

    /// `D s` into `out`.
    pub fn apply_into(&self, s: &[f64], out: &mut [f64]) {
        match self.order {
            1 => self.d1(s, out),
            _ => {
                let mut tmp = vec![0.0; s.len()];
                self.d1(s, &mut tmp);
                self.d1t(&tmp, out);
                out.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    /// `Dᵀ y` into `out`.
    pub fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        match self.order {
            1 => self.d1t(y, out),
            // D_2 is symmetric.
            _ => self.apply_into(y, out),
        }
    }

    pub fn apply(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check(s)?;
        let mut out = vec![0.0; s.len()];
        self.apply_into(s, &mut out);
        Ok(out)
    }

    pub fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        let mut out = vec![0.0; y.len()];
        self.adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Spectral norm. `D_1ᵀD_1` is a path-graph Laplacian over `Δt²`, whose
    /// largest eigenvalue is `2 + 2cos(π/N)`.
    pub fn norm(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let lap = (2.0 + 2.0 * (std::f64::consts::PI / self.n as f64).cos()) / (self.dt * self.dt);
        match self.order {
            1 => lap.sqrt(),
            _ => lap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveConstraintSpec {
    /// Highest constrained difference order, 1 or 2.
    pub m: usize,
    pub q: NormIndex,
    /// `α_1..α_m`.
    pub alphas: Vec<f64>,
    /// Number of samples.
    #[serde(rename = "N")]
    pub n: usize,
    /// Time horizon; `Δt = T/N`.
    #[serde(rename = "T")]
    pub t: f64,
}

impl CurveConstraintSpec {
    pub fn new(m: usize, q: NormIndex, alphas: Vec<f64>, n: usize, t: f64) -> Result<Self> {
        let s = Self { m, q, alphas, n, t };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m != 1 && self.m != 2 {
            return Err(Error::InvalidParameter(format!("m must be 1 or 2, got {}", self.m)));
        }
        if self.alphas.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "expected {} derivative bounds, got {}",
                self.m,
                self.alphas.len()
            )));
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter("derivative bounds must be positive".into()));
        }
        if self.n == 0 || !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need N ≥ 1 and T > 0, got N = {}, T = {}",
                self.n, self.t
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t / self.n as f64
    }

    pub fn operators(&self, dim: usize) -> Result<Vec<DiffOperator>> {
        (1..=self.m)
            .map(|j| DiffOperator::new(j, self.n, dim, self.dt()))
            .collect()
    }

    fn dim_of(&self, s: &[f64]) -> Result<usize> {
        if self.n == 0 || s.len() % self.n != 0 || s.is_empty() {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: s.len(),
            });
        }
        let d = s.len() / self.n;
        crate::measure::check_dim(d)?;
        Ok(d)
    }
}

/// `max(0, ‖D_j s‖_q − α_j)` for each `j`, followed by the box violation.
pub fn feasibility_residuals(spec: &CurveConstraintSpec, s: &[f64]) -> Result<Vec<f64>> {
    let d = spec.dim_of(s)?;
    let mut out = Vec::with_capacity(spec.m + 1);
    for (op, &alpha) in spec.operators(d)?.iter().zip(&spec.alphas) {
        let v = op.apply(s)?;
        out.push((mixed_norm(&v, d, spec.q) - alpha).max(0.0));
    }
    out.push(box_violation(s));
    Ok(out)
}

/// True when the box holds exactly and every derivative bound holds up to `α_j·tol`.
pub fn is_feasible(spec: &CurveConstraintSpec, s: &[f64], tol: f64) -> Result<bool> {
    let r = feasibility_residuals(spec, s)?;
    Ok(r[spec.m] == 0.0 && r[..spec.m].iter().zip(&spec.alphas).all(|(r, a)| *r <= a * tol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub iterations: usize,
    /// Certified duality gap of the returned point.
    pub gap: f64,
    pub converged: bool,
    pub residuals: Vec<f64>,
}

/// Euclidean projection onto a curve set by accelerated proximal ascent on the dual.
///
/// The box is handled exactly inside the primal recovery `s(y) = clamp(z − Σ D_jᵀ y_j)`,
/// and the derivative bounds enter through the prox of `α_j‖·‖_{q*}`. The
/// returned point is always feasible: the recovered primal is pulled towards its
/// centroid (a constant curve, which every `D_j` annihilates) until the bounds hold.
/// Dual variables persist between calls, so projecting a slowly moving sequence
/// of points is cheap.
#[derive(Debug, Clone)]
pub struct CurveProjector {
    spec: CurveConstraintSpec,
    dim: usize,
    ops: Vec<DiffOperator>,
    scales: Vec<f64>,
    /// Normalized bounds `α_j / ‖D_j‖`.
    radii: Vec<f64>,
    y: Vec<Vec<f64>>,
    pub tol: f64,
    pub max_iter: usize,
}

impl CurveProjector {
    pub fn new(spec: &CurveConstraintSpec, dim: usize) -> Result<Self> {
        spec.validate()?;
        let ops = spec.operators(dim)?;
        let scales: Vec<f64> = ops.iter().map(|o| o.norm()).collect();
        let radii = spec
            .alphas
            .iter()
            .zip(&scales)
            .map(|(a, c)| if *c > 0.0 { a / c } else { f64::INFINITY })
            .collect();
        let len = spec.n * dim;
        Ok(Self {
            spec: spec.clone(),
            dim,
            y: vec![vec![0.0; len]; ops.len()],
            ops,
            scales,
            radii,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn spec(&self) -> &CurveConstraintSpec {
        &self.spec
    }

    pub fn reset(&mut self) {
        self.y.iter_mut().for_each(|y| y.iter_mut().for_each(|v| *v = 0.0));
    }

    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ops.len()).filter(|&j| self.scales[j] > 0.0)
    }

    /// Normalized `D̃_j s`.
    fn forward(&self, j: usize, s: &[f64], out: &mut [f64]) {
        self.ops[j].apply_into(s, out);
        let c = 1.0 / self.scales[j];
        out.iter_mut().for_each(|x| *x *= c);
    }

    /// `s(y) = clamp(z − Σ D̃_jᵀ y_j)`; also returns `Σ D̃_jᵀ y_j`.
    fn primal(&self, z: &[f64], y: &[Vec<f64>], s: &mut [f64], aty: &mut [f64], tmp: &mut [f64]) {
        aty.iter_mut().for_each(|x| *x = 0.0);
        for j in self.active() {
            self.ops[j].adjoint_into(&y[j], tmp);
            let c = 1.0 / self.scales[j];
            for (a, t) in aty.iter_mut().zip(tmp.iter()) {
                *a += c * t;
            }
        }
        for ((si, zi), ai) in s.iter_mut().zip(z).zip(aty.iter()) {
            *si = (zi - ai).clamp(0.0, 1.0);
        }
    }

    fn dual_value(&self, z: &[f64], y: &[Vec<f64>], s: &[f64], aty: &[f64]) -> f64 {
        let d = self.dim;
        let quad: f64 = s.iter().zip(z).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
        let lin: f64 = s.iter().zip(aty).map(|(a, b)| a * b).sum();
        let pen: f64 = self
            .active()
            .map(|j| self.radii[j] * mixed_norm(&y[j], d, self.spec.q.dual()))
            .sum();
        quad + lin - pen
    }

    /// Scales `s` towards its centroid until every derivative bound holds.
    fn polish(&self, s: &[f64], tmp: &mut [f64]) -> Vec<f64> {
        let d = self.dim;
        let mut lambda: f64 = 1.0;
        for j in self.active() {
            self.forward(j, s, tmp);
            let n = mixed_norm(tmp, d, self.spec.q);
            if n > self.radii[j] {
                lambda = lambda.min(self.radii[j] / n);
            }
        }
        if lambda >= 1.0 {
            return s.to_vec();
        }
        let mut c = vec![0.0; d];
        for p in s.chunks_exact(d) {
            for a in 0..d {
                c[a] += p[a];
            }
        }
        c.iter_mut().for_each(|v| *v /= self.spec.n as f64);
        // Shave a few ulps so rounding cannot push the bound over.
        let lambda = lambda * (1.0 - 4.0 * f64::EPSILON);
        s.chunks_exact(d)
            .flat_map(|p| {
                p.iter()
                    .zip(&c)
                    .map(move |(x, ci)| (ci + lambda * (x - ci)).clamp(0.0, 1.0))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Projects `z`, returning the feasible point and a convergence report.
    pub fn project_with_report(&mut self, z: &[f64]) -> Result<(Vec<f64>, ProjectionReport)> {
        if z.len() != self.spec.n * self.dim {
            return Err(Error::LengthMismatch {
                expected: self.spec.n * self.dim,
                found: z.len(),
            });
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        if is_feasible(&self.spec, z, 0.0)? {
            let residuals = feasibility_residuals(&self.spec, z)?;
            self.reset();
            return Ok((
                z.to_vec(),
                ProjectionReport {
                    iterations: 0,
                    gap: 0.0,
                    converged: true,
                    residuals,
                },
            ));
        }
        let len = z.len();
        let d = self.dim;
        let q = self.spec.q;
        let tau = 1.0 / self.active().count().max(1) as f64;
        let mut y = std::mem::take(&mut self.y);
        let mut w = y.clone();
        let mut y_new = y.clone();
        let mut s = vec![0.0; len];
        let mut aty = vec![0.0; len];
        let mut tmp = vec![0.0; len];
        let mut t = 1.0f64;
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut iterations = 0;
        let mut converged = false;

        for k in 0..=self.max_iter {
            if k % 5 == 0 || k == self.max_iter {
                self.primal(z, &y, &mut s, &mut aty, &mut tmp);
                let dual = self.dual_value(z, &y, &s, &aty);
                let feas = self.polish(&s, &mut tmp);
                let p: f64 = feas.iter().zip(z).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
                let gap = (p - dual).max(0.0);
                if best.as_ref().is_none_or(|(_, g)| gap < *g) {
                    best = Some((feas, gap));
                }
                if gap <= self.tol * p.max(1.0) {
                    converged = true;
                    break;
                }
            }
            if k == self.max_iter {
                break;
            }
            iterations = k + 1;

            self.primal(z, &w, &mut s, &mut aty, &mut tmp);
            for j in self.active() {
                self.forward(j, &s, &mut tmp);
                let r = tau * self.radii[j];
                let yn = &mut y_new[j];
                for ((o, wv), g) in yn.iter_mut().zip(&w[j]).zip(tmp.iter()) {
                    *o = wv + tau * g;
                }
                // prox of τα‖·‖_* via Moreau: v − Proj_{‖·‖_q ≤ τα}(v)
                tmp.copy_from_slice(yn);
                project_ball(&mut tmp, d, q, r);
                for (o, p) in yn.iter_mut().zip(tmp.iter()) {
                    *o -= p;
                }
            }
            let mut restart = 0.0;
            for j in self.active() {
                for ((wv, yn), yo) in w[j].iter().zip(&y_new[j]).zip(&y[j]) {
                    restart += (wv - yn) * (yn - yo);
                }
            }
            let t_next = if restart > 0.0 {
                1.0
            } else {
                0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
            };
            let beta = if restart > 0.0 { 0.0 } else { (t - 1.0) / t_next };
            for j in self.active() {
                for ((wv, yn), yo) in w[j].iter_mut().zip(&y_new[j]).zip(&y[j]) {
                    *wv = yn + beta * (yn - yo);
                }
            }
            t = t_next;
            std::mem::swap(&mut y, &mut y_new);
        }
        self.y = y;
        let (point, gap) = best.expect("at least one gap evaluation");
        let residuals = feasibility_residuals(&self.spec, &point)?;
        Ok((
            point,
            ProjectionReport {
                iterations,
                gap,
                converged,
                residuals,
            },
        ))
    }

    /// Projects `z`, failing if the duality gap does not close within `max_iter`.
    pub fn project(&mut self, z: &[f64]) -> Result<Vec<f64>> {
        let (s, rep) = self.project_with_report(z)?;
        if rep.converged {
            Ok(s)
        } else {
            Err(Error::NotConverged {
                iterations: rep.iterations,
                gap: rep.gap,
                residuals: rep.residuals,
            })
        }
    }
}

/// One-shot projection onto a curve set, with the requested tolerance.
pub fn project_curve_set(spec: &CurveConstraintSpec, z: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let d = spec.dim_of(z)?;
    let mut p = CurveProjector::new(spec, d)?;
    p.tol = tol;
    p.project(z)
}
