//! Fourier-domain reference for the smoothed distance on the torus.
//!
//! With `h` a periodized gaussian of width σ, `½‖h⋆(μ−π)‖²` is evaluated as
//! `½ Σ_ξ ĥ(ξ)² |μ̂(ξ) − π̂(ξ)|²` over `|ξ_a| ≤ grid/2`. Transforms of atomic
//! measures are computed exactly (a nonuniform DFT), so the only error is the
//! frequency truncation, which is far below double precision for σ ≥ 1.5/grid.
//!
//! [`PeriodicGaussian`] is the matching interaction kernel `H = h⋆h`, negated to
//! follow the distance-like sign used by the solver, so that
//! `J(p) + torus_constant(π) = nh_energy_fourier(μ_p, π)`.

use crate::error::{Error, Result};
use crate::kernel::{FilterSpec, Potential};
use crate::measure::{DiscreteMeasure, GridDensity};
use rustfft::num_complex::Complex;
use std::f64::consts::PI;

pub const MIN_GRID: usize = 32;

/// Exact Fourier coefficients `μ̂(ξ) = Σ_i w_i e^{-2πi⟨ξ, x_i⟩}` for `ξ ∈ [-K, K]^d`,
/// flattened with axis 0 fastest.
pub fn atomic_transform(mu: &DiscreteMeasure, kmax: usize) -> Vec<Complex<f64>> {
    let d = mu.dim();
    let side = 2 * kmax + 1;
    let total = side.pow(d as u32);
    let mut out = vec![Complex::new(0.0, 0.0); total];
    let mut axis = vec![Complex::new(0.0, 0.0); side * d];
    for (x, &w) in mu.points().iter().zip(mu.weights()) {
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            for (k, e) in axis[a * side..(a + 1) * side].iter_mut().enumerate() {
                let xi = k as f64 - kmax as f64;
                *e = Complex::from_polar(1.0, -2.0 * PI * xi * x[a]);
            }
        }
        match d {
            1 => {
                for (o, e) in out.iter_mut().zip(&axis) {
                    *o += e * w;
                }
            }
            2 => {
                for j in 0..side {
                    let ey = axis[side + j] * w;
                    let row = &mut out[j * side..(j + 1) * side];
                    for (o, ex) in row.iter_mut().zip(&axis[..side]) {
                        *o += ex * ey;
                    }
                }
            }
            _ => {
                for l in 0..side {
                    let ez = axis[2 * side + l] * w;
                    for j in 0..side {
                        let eyz = axis[side + j] * ez;
                        let row = &mut out[(l * side + j) * side..(l * side + j + 1) * side];
                        for (o, ex) in row.iter_mut().zip(&axis[..side]) {
                            *o += ex * eyz;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `ĥ(ξ)²` on the same flattened lattice.
fn filter_power(filter: &FilterSpec, dim: usize, kmax: usize) -> Vec<f64> {
    let side = 2 * kmax + 1;
    let total = side.pow(dim as u32);
    let mut xi = vec![0i64; dim];
    (0..total)
        .map(|mut j| {
            for v in xi.iter_mut() {
                *v = (j % side) as i64 - kmax as i64;
                j /= side;
            }
            filter.fourier_coefficient(&xi).powi(2)
        })
        .collect()
}

/// Precomputed target transform so that many `μ` can be compared against one `π`.
#[derive(Debug, Clone)]
pub struct FourierOracle {
    dim: usize,
    kmax: usize,
    power: Vec<f64>,
    target_hat: Vec<Complex<f64>>,
}

impl FourierOracle {
    pub fn new(target: &GridDensity, filter: &FilterSpec, grid: usize) -> Result<Self> {
        if grid < MIN_GRID {
            return Err(Error::InvalidParameter(format!(
                "oracle grid must have at least {MIN_GRID} frequencies per axis, got {grid}"
            )));
        }
        let kmax = grid / 2;
        let dim = target.dim();
        Ok(Self {
            dim,
            kmax,
            power: filter_power(filter, dim, kmax),
            target_hat: atomic_transform(&target.to_atoms(), kmax),
        })
    }

    /// `½‖h⋆(μ−π)‖²`.
    pub fn energy(&self, mu: &DiscreteMeasure) -> Result<f64> {
        if mu.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: mu.dim(),
            });
        }
        let mu_hat = atomic_transform(mu, self.kmax);
        Ok(0.5
            * mu_hat
                .iter()
                .zip(&self.target_hat)
                .zip(&self.power)
                .map(|((a, b), p)| p * (a - b).norm_sqr())
                .sum::<f64>())
    }
}

/// `½‖h⋆(μ−π)‖²` for an atomic `μ` against a grid density `π`.
pub fn nh_energy_fourier(
    mu: &DiscreteMeasure,
    target: &GridDensity,
    filter: &FilterSpec,
    grid: usize,
) -> Result<f64> {
    FourierOracle::new(target, filter, grid)?.energy(mu)
}

/// `½‖h⋆(μ−ν)‖²` for two atomic measures.
pub fn nh_distance_sq_half(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    filter: &FilterSpec,
    grid: usize,
) -> Result<f64> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    if grid < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "oracle grid must have at least {MIN_GRID} frequencies per axis, got {grid}"
        )));
    }
    let kmax = grid / 2;
    let a = atomic_transform(mu, kmax);
    let b = atomic_transform(nu, kmax);
    let p = filter_power(filter, mu.dim(), kmax);
    Ok(0.5
        * a.iter()
            .zip(&b)
            .zip(&p)
            .map(|((x, y), w)| w * (x - y).norm_sqr())
            .sum::<f64>())
}

/// `-(h⋆h)` periodized over `[0,1)^d`: `-(πσ²)^{d/2} Σ_k exp(-|x+k|²/4σ²)`.
#[derive(Debug, Clone)]
pub struct PeriodicGaussian {
    dim: usize,
    amp: f64,
    /// Variance `s² = 2σ²` of the unnormalized gaussian `exp(-r²/2s²)`.
    s2: f64,
    images: i64,
}

impl PeriodicGaussian {
    pub fn new(filter: &FilterSpec, dim: usize) -> Result<Self> {
        crate::measure::check_dim(dim)?;
        let sigma = filter.sigma();
        let s = sigma * std::f64::consts::SQRT_2;
        // Differences lie in [-1, 1]; copies further than 6s from that range are dropped.
        let images = (1.0 + 6.0 * s).ceil() as i64;
        Ok(Self {
            dim,
            amp: (PI * sigma * sigma).powf(dim as f64 / 2.0),
            s2: s * s,
            images,
        })
    }

    /// Periodized one-dimensional profile and its derivative.
    fn profile(&self, t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut dv = 0.0;
        for k in -self.images..=self.images {
            let u = t + k as f64;
            let e = (-u * u / (2.0 * self.s2)).exp();
            v += e;
            dv -= u / self.s2 * e;
        }
        (v, dv)
    }

    /// `½⟨H⋆π, π⟩` with the positive kernel `h⋆h`, by direct double sum.
    pub fn torus_constant(&self, target: &GridDensity) -> Result<f64> {
        if target.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: target.dim(),
            });
        }
        let dims = target.dims();
        // Centers sit on a lattice, so the profile only depends on index offsets.
        let tables: Vec<Vec<f64>> = dims
            .iter()
            .map(|&n| {
                (0..2 * n - 1)
                    .map(|o| self.profile((o as f64 - (n - 1) as f64) / n as f64).0)
                    .collect()
            })
            .collect();
        let cells: Vec<(Vec<usize>, f64)> = target
            .cell_masses()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(j, &m)| (target.unravel(j), m))
            .collect();
        let mut total = 0.0;
        for (ia, ma) in &cells {
            let mut row = 0.0;
            for (ib, mb) in &cells {
                let mut g = *mb;
                for a in 0..self.dim {
                    g *= tables[a][ia[a] + dims[a] - 1 - ib[a]];
                }
                row += g;
            }
            total += ma * row;
        }
        Ok(0.5 * self.amp * total)
    }
}

impl Potential for PeriodicGaussian {
    fn value(&self, x: &[f64]) -> f64 {
        -self.amp * x.iter().map(|&t| self.profile(t).0).product::<f64>()
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let mut vals = [(0.0, 0.0); 3];
        for (v, &t) in vals.iter_mut().zip(x) {
            *v = self.profile(t);
        }
        for a in 0..x.len() {
            let mut g = -self.amp * vals[a].1;
            for (b, v) in vals.iter().enumerate().take(x.len()) {
                if b != a {
                    g *= v.0;
                }
            }
            out[a] = g;
        }
    }

    fn grad_lipschitz(&self) -> f64 {
        // Hessian norm of one copy is at most amp/s²; the nearest foreign copies
        // sit at distance ≥ 1/2 when x is reduced to the fundamental cell.
        let far = (3f64.powi(self.dim as i32) - 1.0)
            * (-0.125 / self.s2).exp()
            * (1.0 + 0.25 / self.s2);
        self.amp / self.s2 * (1.0 + far)
    }
}
