//! Interaction kernels `H` and smoothing filters `h`.
//!
//! Kernel values follow a distance-like convention: smoothed norms grow with
//! `|x|` and the gaussian is negated, so that in every case `H` is smallest
//! near the origin. The energy built from them in [`crate::energy`] is then
//! *attraction minus repulsion*, and minimizing it pulls points towards mass
//! while pushing them apart from each other.

use serde::{Deserialize, Serialize};

/// Anything that can serve as an even pair potential with an analytic gradient.
pub trait Potential: Sync {
    fn value(&self, x: &[f64]) -> f64;

    /// Writes `∇H(x)` into `out` (same length as `x`).
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Upper bound on the Lipschitz constant of the gradient.
    fn grad_lipschitz(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `Σ_a sqrt(x_a² + ε²)`
    SmoothedL1 { eps: f64 },
    /// `-exp(-|x|² / 2σ²)`
    Gaussian { sigma: f64 },
    /// `sqrt(|x|² + ε²)`
    SmoothedL2 { eps: f64 },
}

pub const DEFAULT_EPS: f64 = 0.05;

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::SmoothedL1 { eps: DEFAULT_EPS }
    }
}

impl KernelSpec {
    pub fn validate(&self) -> crate::Result<()> {
        let p = match *self {
            KernelSpec::SmoothedL1 { eps } | KernelSpec::SmoothedL2 { eps } => eps,
            KernelSpec::Gaussian { sigma } => sigma,
        };
        if p.is_finite() && p > 0.0 {
            Ok(())
        } else {
            Err(crate::Error::InvalidParameter(format!(
                "kernel width must be positive and finite, got {p}"
            )))
        }
    }
}

/// Evaluates `H(x)`.
pub fn eval_h(k: &KernelSpec, x: &[f64]) -> f64 {
    match *k {
        KernelSpec::SmoothedL1 { eps } => {
            let e2 = eps * eps;
            x.iter().map(|xa| (xa * xa + e2).sqrt()).sum()
        }
        KernelSpec::Gaussian { sigma } => {
            let r2: f64 = x.iter().map(|xa| xa * xa).sum();
            -(-r2 / (2.0 * sigma * sigma)).exp()
        }
        KernelSpec::SmoothedL2 { eps } => {
            let r2: f64 = x.iter().map(|xa| xa * xa).sum();
            (r2 + eps * eps).sqrt()
        }
    }
}

/// Evaluates `∇H(x)` into `out`.
pub fn grad_h(k: &KernelSpec, x: &[f64], out: &mut [f64]) {
    match *k {
        KernelSpec::SmoothedL1 { eps } => {
            let e2 = eps * eps;
            for (o, xa) in out.iter_mut().zip(x) {
                *o = xa / (xa * xa + e2).sqrt();
            }
        }
        KernelSpec::Gaussian { sigma } => {
            let s2 = sigma * sigma;
            let r2: f64 = x.iter().map(|xa| xa * xa).sum();
            let f = (-r2 / (2.0 * s2)).exp() / s2;
            for (o, xa) in out.iter_mut().zip(x) {
                *o = xa * f;
            }
        }
        KernelSpec::SmoothedL2 { eps } => {
            let r2: f64 = x.iter().map(|xa| xa * xa).sum();
            let inv = 1.0 / (r2 + eps * eps).sqrt();
            for (o, xa) in out.iter_mut().zip(x) {
                *o = xa * inv;
            }
        }
    }
}

/// Lipschitz constant of `∇H`: the sup of the Hessian's spectral norm.
pub fn lipschitz_of_grad(k: &KernelSpec) -> f64 {
    match *k {
        // Diagonal Hessian with entries ε² / (x_a² + ε²)^{3/2} ≤ 1/ε.
        KernelSpec::SmoothedL1 { eps } => 1.0 / eps,
        // Radial second derivative peaks at the origin with magnitude 1/σ².
        KernelSpec::Gaussian { sigma } => 1.0 / (sigma * sigma),
        // Largest Hessian eigenvalue is 1 / sqrt(|x|² + ε²).
        KernelSpec::SmoothedL2 { eps } => 1.0 / eps,
    }
}

impl Potential for KernelSpec {
    #[inline]
    fn value(&self, x: &[f64]) -> f64 {
        eval_h(self, x)
    }

    #[inline]
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        grad_h(self, x, out)
    }

    fn grad_lipschitz(&self) -> f64 {
        lipschitz_of_grad(self)
    }
}

/// Smoothing filter `h` whose L2 norm after convolution defines the distance being minimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    /// `h(x) = exp(-|x|² / 2σ²)` on the torus (periodized).
    Gaussian { sigma: f64 },
}

impl FilterSpec {
    pub fn sigma(&self) -> f64 {
        match *self {
            FilterSpec::Gaussian { sigma } => sigma,
        }
    }

    /// Lipschitz constant of `h`: `max |∇h| = e^{-1/2} / σ`.
    pub fn lipschitz(&self) -> f64 {
        (-0.5f64).exp() / self.sigma()
    }

    /// Fourier coefficient `ĥ(ξ)` of the periodized filter on `[0,1)^d`.
    pub fn fourier_coefficient(&self, xi: &[i64]) -> f64 {
        let s = self.sigma();
        let d = xi.len() as i32;
        let k2: f64 = xi.iter().map(|&k| (k * k) as f64).sum();
        (2.0 * std::f64::consts::PI * s * s).powf(d as f64 / 2.0)
            * (-2.0 * std::f64::consts::PI.powi(2) * s * s * k2).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const KINDS: [KernelSpec; 3] = [
        KernelSpec::SmoothedL1 { eps: 0.1 },
        KernelSpec::Gaussian { sigma: 0.3 },
        KernelSpec::SmoothedL2 { eps: 0.05 },
    ];

    fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
    }

    #[test]
    fn smoothed_l1_values() {
        let k = KernelSpec::SmoothedL1 { eps: 0.1 };
        assert!((eval_h(&k, &[0.0, 0.0]) - 0.2).abs() < 1e-15);
        let expect = (0.09f64 + 0.01).sqrt() + 0.1;
        assert!((eval_h(&k, &[0.3, 0.0]) - expect).abs() < 1e-15);
        assert!((expect - 0.416_227_766_016_838).abs() < 1e-12);
    }

    #[test]
    fn smoothed_l1_gradient_value() {
        let k = KernelSpec::SmoothedL1 { eps: 0.1 };
        let mut g = [0.0; 2];
        grad_h(&k, &[0.1, 0.0], &mut g);
        assert!((g[0] - 0.1 / 0.02f64.sqrt()).abs() < 1e-15);
        assert!((g[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradient_vanishes_at_origin() {
        for k in KINDS {
            let mut g = [1.0; 3];
            grad_h(&k, &[0.0; 3], &mut g);
            assert_eq!(g, [0.0; 3], "{k:?}");
        }
    }

    #[test]
    fn lipschitz_constants() {
        assert_eq!(lipschitz_of_grad(&KernelSpec::SmoothedL1 { eps: 0.1 }), 10.0);
        assert_eq!(lipschitz_of_grad(&KernelSpec::Gaussian { sigma: 1.0 }), 1.0);
        assert_eq!(lipschitz_of_grad(&KernelSpec::SmoothedL2 { eps: 0.1 }), 10.0);
    }

    #[test]
    fn evenness_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in KINDS {
            for _ in 0..1000 {
                let d = rng.gen_range(1..=3);
                let x = random_vec(&mut rng, d, 1.0);
                let nx: Vec<f64> = x.iter().map(|v| -v).collect();
                assert_eq!(eval_h(&k, &x), eval_h(&k, &nx));
                let (mut g, mut ng) = (vec![0.0; d], vec![0.0; d]);
                grad_h(&k, &x, &mut g);
                grad_h(&k, &nx, &mut ng);
                for (a, b) in g.iter().zip(&ng) {
                    assert!((a + b).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-6;
        for k in KINDS {
            for _ in 0..100 {
                let x = random_vec(&mut rng, 2, 1.0);
                let mut g = [0.0; 2];
                grad_h(&k, &x, &mut g);
                for a in 0..2 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[a] += h;
                    xm[a] -= h;
                    let fd = (eval_h(&k, &xp) - eval_h(&k, &xm)) / (2.0 * h);
                    let scale = g[a].abs().max(1e-3);
                    assert!((fd - g[a]).abs() / scale < 1e-6, "{k:?} x={x:?} fd={fd} g={}", g[a]);
                }
            }
        }
    }

    #[test]
    fn sampled_difference_quotients_below_lipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in KINDS {
            let lip = lipschitz_of_grad(&k);
            let mut worst: f64 = 0.0;
            for i in 0..10_000 {
                // Mix wide and tight pairs so the peak curvature near 0 gets probed.
                let scale = if i % 2 == 0 { 1.0 } else { 0.05 };
                let x = random_vec(&mut rng, 2, scale);
                let y = random_vec(&mut rng, 2, scale);
                let (mut gx, mut gy) = ([0.0; 2], [0.0; 2]);
                grad_h(&k, &x, &mut gx);
                grad_h(&k, &y, &mut gy);
                let num = ((gx[0] - gy[0]).powi(2) + (gx[1] - gy[1]).powi(2)).sqrt();
                let den = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                worst = worst.max(num / den);
            }
            assert!(worst <= lip * (1.0 + 1e-9), "{k:?}: {worst} > {lip}");
            assert!(worst > 0.3 * lip, "{k:?}: sampling never got close to the bound");
        }
    }

    #[test]
    fn gaussian_filter_dft_positive() {
        // Periodized sampled filter on a 64×64 grid: its DFT must be strictly positive.
        use rustfft::{num_complex::Complex, FftPlanner};
        let n = 64;
        let f = FilterSpec::Gaussian { sigma: 0.02 };
        let s = f.sigma();
        let mut data = vec![Complex::new(0.0, 0.0); n * n];
        for iy in 0..n {
            for ix in 0..n {
                let mut v = 0.0;
                for ky in -2i32..=2 {
                    for kx in -2i32..=2 {
                        let x = ix as f64 / n as f64 + kx as f64;
                        let y = iy as f64 / n as f64 + ky as f64;
                        v += (-(x * x + y * y) / (2.0 * s * s)).exp();
                    }
                }
                data[iy * n + ix] = Complex::new(v, 0.0);
            }
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        for row in data.chunks_exact_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex::new(0.0, 0.0); n];
        for ix in 0..n {
            for iy in 0..n {
                col[iy] = data[iy * n + ix];
            }
            fft.process(&mut col);
            for iy in 0..n {
                data[iy * n + ix] = col[iy];
            }
        }
        for c in &data {
            assert!(c.re > 0.0, "{c}");
            assert!(c.im.abs() < 1e-9 * c.re.max(1e-300) + 1e-12);
        }
        assert!(f.fourier_coefficient(&[3, -4]) > 0.0);
    }
}
