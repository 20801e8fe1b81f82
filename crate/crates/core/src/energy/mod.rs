//! Attraction-repulsion objective.
//!
//! For points `p_1..p_N` and a grid target with cell masses `m_j = w_j π_j`
//! at centers `x_j`:
//!
//! ```text
//! F(p) = 1/(2N²) Σ_i Σ_k H(p_i - p_k)          repulsion (diagonal included)
//! G(p) = 1/N     Σ_i Σ_j m_j H(x_j - p_i)       attraction (rectangle rule)
//! J(p) = G(p) - F(p)
//! ```
//!
//! With the distance-like kernels of [`crate::kernel`], lowering `G` pulls
//! points onto the mass and raising `F` spreads them out.

pub mod field;
pub mod fourier;

use crate::error::{Error, Result};
use crate::kernel::Potential;
use crate::measure::GridDensity;
use rayon::prelude::*;

pub use field::AttractionField;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub repulsion: f64,
    pub attraction: f64,
    /// `attraction - repulsion`
    pub energy: f64,
    /// Flat gradient of `energy`, length `N·d`.
    pub grad: Vec<f64>,
}

fn check_points(points: &[f64], dim: usize) -> Result<usize> {
    crate::measure::check_dim(dim)?;
    if points.is_empty() || points.len() % dim != 0 {
        return Err(Error::LengthMismatch {
            expected: dim.max(points.len() / dim * dim),
            found: points.len(),
        });
    }
    Ok(points.len() / dim)
}

fn check_target(target: &GridDensity, dim: usize) -> Result<()> {
    if target.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: dim,
        });
    }
    Ok(())
}

// Scalar sums are accumulated in 2^-60 fixed point, so they do not depend on
// the order of points or on how rayon splits the work.
const FIXED_SCALE: f64 = (1u64 << 60) as f64;

#[inline]
fn fixed(v: f64) -> i128 {
    (v * FIXED_SCALE).round() as i128
}

#[inline]
fn unfixed(v: i128) -> f64 {
    v as f64 / FIXED_SCALE
}

#[inline]
fn diff(a: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x - y;
    }
}

/// Repulsion `F(p) = 1/(2N²) Σ_i Σ_k H(p_i - p_k)`.
pub fn repulsion<P: Potential>(points: &[f64], dim: usize, kernel: &P) -> Result<f64> {
    let n = check_points(points, dim)?;
    let total: i128 = points
        .par_chunks_exact(dim)
        .map(|pi| {
            let mut x = [0.0; 3];
            points
                .chunks_exact(dim)
                .map(|pk| {
                    diff(pi, pk, &mut x[..dim]);
                    fixed(kernel.value(&x[..dim]))
                })
                .sum::<i128>()
        })
        .sum();
    Ok(unfixed(total) / (2.0 * (n * n) as f64))
}

/// Attraction `G(p) = 1/N Σ_i Σ_j w_j π_j H(x_j - p_i)`.
pub fn attraction<P: Potential>(
    points: &[f64],
    dim: usize,
    target: &GridDensity,
    kernel: &P,
) -> Result<f64> {
    let n = check_points(points, dim)?;
    check_target(target, dim)?;
    let total: i128 = points
        .par_chunks_exact(dim)
        .map(|p| attraction_row(p, target, kernel))
        .sum();
    Ok(unfixed(total) / n as f64)
}

fn attraction_row<P: Potential>(p: &[f64], target: &GridDensity, kernel: &P) -> i128 {
    let dim = p.len();
    let mut x = [0.0; 3];
    target
        .centers()
        .chunks_exact(dim)
        .zip(target.cell_masses())
        .filter(|(_, &m)| m > 0.0)
        .map(|(c, &m)| {
            diff(c, p, &mut x[..dim]);
            fixed(m * kernel.value(&x[..dim]))
        })
        .sum()
}

/// Gradient of `-F`: `-(1/N²) Σ_i ∇H(p_k - p_i)` for every `k`.
pub fn grad_repulsion_term<P: Potential>(points: &[f64], dim: usize, kernel: &P) -> Result<Vec<f64>> {
    let n = check_points(points, dim)?;
    let scale = 1.0 / (n * n) as f64;
    let mut grad = vec![0.0; points.len()];
    grad.par_chunks_exact_mut(dim)
        .zip(points.par_chunks_exact(dim))
        .for_each(|(g, pk)| {
            let mut x = [0.0; 3];
            let mut gh = [0.0; 3];
            for pi in points.chunks_exact(dim) {
                diff(pk, pi, &mut x[..dim]);
                kernel.gradient(&x[..dim], &mut gh[..dim]);
                for a in 0..dim {
                    g[a] -= gh[a];
                }
            }
            for v in g.iter_mut() {
                *v *= scale;
            }
        });
    Ok(grad)
}

/// Gradient of `J = G - F`.
///
/// Per point `k`: `-(1/N) Σ_j m_j ∇H(x_j - p_k) - (1/N²) Σ_i ∇H(p_k - p_i)`.
pub fn grad_j<P: Potential>(
    points: &[f64],
    dim: usize,
    target: &GridDensity,
    kernel: &P,
) -> Result<Vec<f64>> {
    Ok(evaluate(points, dim, target, kernel)?.grad)
}

/// Energy `J = G - F`.
pub fn energy<P: Potential>(
    points: &[f64],
    dim: usize,
    target: &GridDensity,
    kernel: &P,
) -> Result<f64> {
    Ok(attraction(points, dim, target, kernel)? - repulsion(points, dim, kernel)?)
}

/// Values and gradient of the objective in one pass, direct `O(N² + N·n)` summation.
pub fn evaluate<P: Potential>(
    points: &[f64],
    dim: usize,
    target: &GridDensity,
    kernel: &P,
) -> Result<EnergyReport> {
    Objective::new(target, kernel).evaluate(points, dim)
}

/// The objective bound to one target and kernel, with an optional
/// precomputed attraction field replacing the direct attraction sums.
pub struct Objective<'a, P> {
    target: &'a GridDensity,
    kernel: &'a P,
    field: Option<AttractionField>,
}

#[derive(Default, Clone, Copy)]
struct Row {
    rep: i128,
    att: i128,
}

impl<'a, P: Potential> Objective<'a, P> {
    pub fn new(target: &'a GridDensity, kernel: &'a P) -> Self {
        Self {
            target,
            kernel,
            field: None,
        }
    }

    pub fn with_field(mut self, field: AttractionField) -> Self {
        self.field = Some(field);
        self
    }

    pub fn target(&self) -> &GridDensity {
        self.target
    }

    pub fn kernel(&self) -> &P {
        self.kernel
    }

    pub fn evaluate(&self, points: &[f64], dim: usize) -> Result<EnergyReport> {
        let n = check_points(points, dim)?;
        check_target(self.target, dim)?;
        let nf = n as f64;
        let mut grad = vec![0.0; points.len()];
        let total = grad
            .par_chunks_exact_mut(dim)
            .zip(points.par_chunks_exact(dim))
            .map(|(g, pk)| self.row(pk, points, g, nf))
            .reduce(Row::default, |a, b| Row {
                rep: a.rep + b.rep,
                att: a.att + b.att,
            });
        let rep = unfixed(total.rep) / (2.0 * nf * nf);
        let att = unfixed(total.att) / nf;
        Ok(EnergyReport {
            repulsion: rep,
            attraction: att,
            energy: att - rep,
            grad,
        })
    }

    pub fn value(&self, points: &[f64], dim: usize) -> Result<f64> {
        let n = check_points(points, dim)?;
        check_target(self.target, dim)?;
        let att = match &self.field {
            Some(f) => {
                let mut scratch = [0.0; 3];
                let total: i128 = points
                    .chunks_exact(dim)
                    .map(|p| fixed(f.interpolate(p, &mut scratch[..dim])))
                    .sum();
                unfixed(total) / n as f64
            }
            None => attraction(points, dim, self.target, self.kernel)?,
        };
        Ok(att - repulsion(points, dim, self.kernel)?)
    }

    fn row(&self, pk: &[f64], points: &[f64], g: &mut [f64], nf: f64) -> Row {
        let dim = pk.len();
        let mut x = [0.0; 3];
        let mut gh = [0.0; 3];
        let mut rep = 0i128;
        let mut grep = [0.0; 3];
        for pi in points.chunks_exact(dim) {
            diff(pk, pi, &mut x[..dim]);
            rep += fixed(self.kernel.value(&x[..dim]));
            self.kernel.gradient(&x[..dim], &mut gh[..dim]);
            for a in 0..dim {
                grep[a] += gh[a];
            }
        }
        let mut gatt = [0.0; 3];
        let att = match &self.field {
            Some(f) => fixed(f.interpolate(pk, &mut gatt[..dim])),
            None => {
                let mut att = 0i128;
                for (c, &m) in self
                    .target
                    .centers()
                    .chunks_exact(dim)
                    .zip(self.target.cell_masses())
                {
                    if m == 0.0 {
                        continue;
                    }
                    diff(c, pk, &mut x[..dim]);
                    att += fixed(m * self.kernel.value(&x[..dim]));
                    self.kernel.gradient(&x[..dim], &mut gh[..dim]);
                    for a in 0..dim {
                        // d/dp H(c - p) = -∇H(c - p)
                        gatt[a] -= m * gh[a];
                    }
                }
                att
            }
        };
        for a in 0..dim {
            g[a] = gatt[a] / nf - grep[a] / (nf * nf);
        }
        Row { rep, att }
    }
}

/// Central-difference gradient of `J`, used by the gradient check.
pub fn finite_difference_grad<P: Potential>(
    points: &[f64],
    dim: usize,
    target: &GridDensity,
    kernel: &P,
    step: f64,
) -> Result<Vec<f64>> {
    let obj = Objective::new(target, kernel);
    let mut p = points.to_vec();
    let mut out = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        p[i] = points[i] + step;
        let fp = obj.value(&p, dim)?;
        p[i] = points[i] - step;
        let fm = obj.value(&p, dim)?;
        p[i] = points[i];
        out.push((fp - fm) / (2.0 * step));
    }
    Ok(out)
}

/// Worst relative deviation between two gradients, `max_i |a_i - b_i| / max(|b|_∞, floor)`.
pub fn max_relative_error(analytic: &[f64], reference: &[f64], floor: f64) -> f64 {
    let scale = reference
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(floor);
    analytic
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max)
}
