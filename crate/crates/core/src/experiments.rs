//! Rate sweeps and bound checks on random targets.

use crate::curves::{build_serpentine_curve, travel_time};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, GridDensity};
use crate::quantize::{cube_quantize, quantizer_bound};
use crate::transport::{w1_1d, w1_exact, Metric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `log y` on `log x`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 points for a rate fit, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs positive values, got {p:?}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("rate fit needs distinct sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        xs,
        ys,
        slope,
        intercept,
        r2,
    })
}

/// Grid resolution per axis of the random targets.
pub fn target_resolution(d: usize) -> usize {
    match d {
        1 => 4096,
        2 => 64,
        _ => 16,
    }
}

/// W1 error from replacing a density by its grid atoms, `2√d / res`.
pub fn binning_budget(d: usize, res: usize) -> f64 {
    2.0 * (d as f64).sqrt() / res as f64
}

/// Mixture of 1–5 axis-aligned boxes of random size, position and weight on a `res^d` grid.
pub fn random_blob_target(rng: &mut impl Rng, d: usize, res: usize) -> Result<GridDensity> {
    crate::measure::check_dim(d)?;
    let dims = vec![res; d];
    let mut masses = vec![0.0; res.pow(d as u32)];
    let blobs = rng.gen_range(1..=5);
    let max_side = (res / 4).max(1);
    for _ in 0..blobs {
        let weight: f64 = rng.gen_range(0.1..1.0);
        let mut lo = vec![0; d];
        let mut hi = vec![0; d];
        for a in 0..d {
            let side = rng.gen_range(1..=max_side);
            lo[a] = rng.gen_range(0..=res - side);
            hi[a] = lo[a] + side;
        }
        let mut idx = lo.clone();
        loop {
            let flat = idx.iter().rev().fold(0, |acc, &k| acc * res + k);
            masses[flat] += weight;
            let mut a = 0;
            loop {
                if a == d {
                    break;
                }
                idx[a] += 1;
                if idx[a] < hi[a] {
                    break;
                }
                idx[a] = lo[a];
                a += 1;
            }
            if a == d {
                break;
            }
        }
    }
    GridDensity::new(dims, masses)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// W1 under the Euclidean metric, using the closed form on the line.
pub fn w1_euclidean(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    if a.dim() == 1 {
        w1_1d(a, b)
    } else {
        Ok(w1_exact(a, b, Metric::L2)?.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    /// Point count (quantizer) or time horizon (curve).
    pub size: usize,
    pub trial: usize,
    pub w1: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub d: usize,
    pub fit: RateFit,
    /// Mean W1 per size, in sweep order.
    pub means: Vec<(usize, f64)>,
    pub samples: Vec<RateSample>,
    pub violations: usize,
    /// Grid binning error of the random targets, reported alongside the bounds.
    pub binning_budget: f64,
}

fn summarize(d: usize, sizes: &[usize], samples: Vec<RateSample>, budget: f64) -> Result<RateReport> {
    let means: Vec<(usize, f64)> = sizes
        .iter()
        .map(|&s| {
            let v: Vec<f64> = samples.iter().filter(|x| x.size == s).map(|x| x.w1).collect();
            (s, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let fit = fit_rate(&means.iter().map(|&(s, w)| (s as f64, w)).collect::<Vec<_>>())?;
    let violations = samples.iter().filter(|s| s.w1 > s.bound).count();
    Ok(RateReport {
        d,
        fit,
        means,
        samples,
        violations,
        binning_budget: budget,
    })
}

/// Quantizer error against the grid atoms of random targets, for each `N` in `ns`.
pub fn run_quantizer_rate(d: usize, ns: &[usize], trials: usize, seed: u64) -> Result<RateReport> {
    if trials == 0 || ns.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let res = target_resolution(d);
    let per_trial: Vec<Result<Vec<RateSample>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let atoms = random_blob_target(&mut rng, d, res)?.to_atoms();
            ns.iter()
                .map(|&n| {
                    let q = cube_quantize(&atoms, n)?.merge_duplicates();
                    Ok(RateSample {
                        size: n,
                        trial,
                        w1: w1_euclidean(&q, &atoms)?,
                        bound: quantizer_bound(n, d),
                    })
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::new();
    for r in per_trial {
        samples.extend(r?);
    }
    summarize(d, ns, samples, binning_budget(d, res))
}

/// Cubes per axis used for horizon `t`: `T^{m/(m(d+1)−1)}`, rounded.
pub fn cells_for_horizon(t: f64, m: usize, d: usize) -> usize {
    let e = m as f64 / (m as f64 * (d as f64 + 1.0) - 1.0);
    (t.powf(e).round() as usize).max(1)
}

/// Target resolution for curve sweeps.
pub fn curve_target_resolution(d: usize) -> usize {
    match d {
        1 => 1024,
        _ => 64,
    }
}

/// `W1(π, s_*γ_T) ≤ (√d/2C)(T − T_N)/T + √d·T_N/T`.
pub fn serpentine_bound(c: usize, d: usize, t: f64, t_n: f64) -> f64 {
    let sd = (d as f64).sqrt();
    sd / (2.0 * c as f64) * (t - t_n) / t + sd * t_n / t
}

/// Serpentine-curve error against random targets over a sweep of horizons, unit speed bound.
pub fn run_curve_rate(m: usize, d: usize, ts: &[f64], trials: usize, seed: u64) -> Result<RateReport> {
    if m != 1 {
        return Err(Error::Unsupported(format!(
            "curve rates are certified for m = 1 only, got m = {m}"
        )));
    }
    if trials == 0 || ts.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let res = curve_target_resolution(d);
    let alphas = [1.0];
    let sizes: Vec<usize> = ts.iter().map(|t| t.round() as usize).collect();
    let per_trial: Vec<Result<Vec<RateSample>>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let target = random_blob_target(&mut rng, d, res)?;
            let atoms = target.to_atoms();
            ts.iter()
                .zip(&sizes)
                .map(|(&t, &size)| {
                    let c = cells_for_horizon(t, m, d);
                    let t_n = travel_time(c, d, m, &alphas)?;
                    let curve = build_serpentine_curve(&target, m, &alphas, t, c)?;
                    let push = curve.pushforward(1)?;
                    Ok(RateSample {
                        size,
                        trial,
                        w1: w1_euclidean(&push, &atoms)?,
                        bound: serpentine_bound(c, d, t, t_n),
                    })
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::new();
    for r in per_trial {
        samples.extend(r?);
    }
    summarize(d, &sizes, samples, binning_budget(d, res))
}
