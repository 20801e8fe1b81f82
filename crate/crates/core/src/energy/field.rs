//! Attraction potential tabulated on a lattice by FFT convolution.
//!
//! `Φ(y) = Σ_j m_j H(x_j - y)` and its gradient are computed once on a lattice
//! refined `refine` times relative to the target grid, then read back by
//! multilinear interpolation. This turns the `O(N·n)` attraction sum into
//! `O(N·2^d)` per evaluation.

use crate::error::{Error, Result};
use crate::kernel::Potential;
use crate::measure::GridDensity;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Debug, Clone)]
pub struct AttractionField {
    /// Lattice intervals per axis; nodes run `0..=res[a]`.
    res: Vec<usize>,
    strides: Vec<usize>,
    phi: Vec<f64>,
    /// `d` gradient components per node.
    grad: Vec<f64>,
}

fn fft_axes(data: &mut [Complex<f64>], shape: &[usize], inverse: bool, planner: &mut FftPlanner<f64>) {
    let total: usize = shape.iter().product();
    let mut stride = 1;
    let mut line = Vec::new();
    for &len in shape {
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        line.resize(len, Complex::new(0.0, 0.0));
        let block = stride * len;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
        stride = block;
    }
}

fn unravel(mut j: usize, shape: &[usize], out: &mut [usize]) {
    for (o, &n) in out.iter_mut().zip(shape) {
        *o = j % n;
        j /= n;
    }
}

impl AttractionField {
    /// Tabulates the field for `target` under `kernel`. `refine` must be even and at least 2.
    pub fn new<P: Potential>(target: &GridDensity, kernel: &P, refine: usize) -> Result<Self> {
        if refine < 2 || refine % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "refinement factor must be even and at least 2, got {refine}"
            )));
        }
        let d = target.dim();
        let res: Vec<usize> = target.dims().iter().map(|&n| n * refine).collect();
        let nodes: Vec<usize> = res.iter().map(|r| r + 1).collect();
        // Linear convolution of a (R+1)-node mass array with a (2R+1)-tap kernel.
        let fft_shape: Vec<usize> = res.iter().map(|&r| (3 * r + 1).next_power_of_two()).collect();
        let total: usize = fft_shape.iter().product();
        let zero = Complex::new(0.0, 0.0);

        let mut fft_strides = vec![1; d];
        for a in 1..d {
            fft_strides[a] = fft_strides[a - 1] * fft_shape[a - 1];
        }

        let mut mass = vec![zero; total];
        let mut idx = vec![0; d];
        for (j, &m) in target.cell_masses().iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            unravel(j, target.dims(), &mut idx);
            let flat: usize = (0..d)
                .map(|a| (idx[a] * refine + refine / 2) * fft_strides[a])
                .sum();
            mass[flat].re += m;
        }

        let mut planner = FftPlanner::new();
        fft_axes(&mut mass, &fft_shape, false, &mut planner);

        // Kernel taps at offsets o/R for o in [-R, R], stored at index o + R.
        let taps: Vec<usize> = res.iter().map(|&r| 2 * r + 1).collect();
        let tap_count: usize = taps.iter().product();
        let mut value_k = vec![zero; total];
        let mut grad_k = vec![vec![zero; total]; d];
        let mut x = vec![0.0; d];
        let mut g = vec![0.0; d];
        for t in 0..tap_count {
            unravel(t, &taps, &mut idx);
            let mut flat = 0;
            for a in 0..d {
                x[a] = (idx[a] as f64 - res[a] as f64) / res[a] as f64;
                flat += idx[a] * fft_strides[a];
            }
            value_k[flat].re = kernel.value(&x);
            kernel.gradient(&x, &mut g);
            for a in 0..d {
                grad_k[a][flat].re = g[a];
            }
        }

        let mut convolve = |k: &mut Vec<Complex<f64>>| {
            fft_axes(k, &fft_shape, false, &mut planner);
            for (v, m) in k.iter_mut().zip(&mass) {
                *v *= m;
            }
            fft_axes(k, &fft_shape, true, &mut planner);
        };
        convolve(&mut value_k);
        for gk in grad_k.iter_mut() {
            convolve(gk);
        }

        let scale = 1.0 / total as f64;
        let node_count: usize = nodes.iter().product();
        let mut strides = vec![1; d];
        for a in 1..d {
            strides[a] = strides[a - 1] * nodes[a - 1];
        }
        let mut phi = vec![0.0; node_count];
        let mut grad = vec![0.0; node_count * d];
        for n in 0..node_count {
            unravel(n, &nodes, &mut idx);
            // Result for node k lives at k + R in the full convolution.
            let flat: usize = (0..d).map(|a| (idx[a] + res[a]) * fft_strides[a]).sum();
            phi[n] = value_k[flat].re * scale;
            for a in 0..d {
                // ∇_y H(x - y) = -∇H(x - y) = ∇H(y - x), i.e. conv with ∇H.
                grad[n * d + a] = grad_k[a][flat].re * scale;
            }
        }
        Ok(Self {
            res,
            strides,
            phi,
            grad,
        })
    }

    pub fn dim(&self) -> usize {
        self.res.len()
    }

    /// Interpolated `Φ(p)`; writes `∇Φ(p)` into `grad_out`.
    pub fn interpolate(&self, p: &[f64], grad_out: &mut [f64]) -> f64 {
        let d = self.res.len();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..d {
            let r = self.res[a];
            let u = (p[a] * r as f64).clamp(0.0, r as f64);
            let i = (u.floor() as usize).min(r - 1);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        grad_out.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for a in 0..d {
                let hi = (corner >> a) & 1;
                w *= if hi == 1 { frac[a] } else { 1.0 - frac[a] };
                flat += (base[a] + hi) * self.strides[a];
            }
            if w == 0.0 {
                continue;
            }
            value += w * self.phi[flat];
            for a in 0..d {
                grad_out[a] += w * self.grad[flat * d + a];
            }
        }
        value
    }
}
