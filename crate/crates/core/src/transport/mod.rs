//! Wasserstein-1 distances between discrete measures on the box.

mod simplex;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use serde::{Deserialize, Serialize};

/// Largest combined support accepted by [`w1_exact`].
pub const MAX_SUPPORT: usize = 4096;
/// Allowed difference between total masses.
pub const MASS_TOL: f64 = 1e-9;

const COST_SCALE: f64 = 1e12;
const MASS_BITS: i32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    L1,
    L2,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPlan {
    /// `(source index, sink index, mass)` with indices into the input measures.
    pub entries: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

impl CouplingPlan {
    /// Largest violation of the marginal constraints.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        for &(i, j, w) in &self.entries {
            rows[i] += w;
            cols[j] += w;
        }
        rows.iter()
            .zip(mu.weights())
            .chain(cols.iter().zip(nu.weights()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Cost of the plan under `metric`.
    pub fn cost_under(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, metric: Metric) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, w)| w * metric.distance(mu.point(i), nu.point(j)))
            .sum()
    }
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    if let Some(w) = mu.weights().iter().chain(nu.weights()).find(|w| **w < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transport needs nonnegative weights, found {w}"
        )));
    }
    let (a, b) = (mu.total_mass(), nu.total_mass());
    if (a - b).abs() > MASS_TOL {
        return Err(Error::MassMismatch(a, b));
    }
    Ok(())
}

/// Integer masses summing exactly to `2^MASS_BITS`, by largest remainder.
fn scale_masses(weights: &[f64], total: f64) -> Vec<i64> {
    let target = 1i64 << MASS_BITS;
    let factor = target as f64 / total;
    let raw: Vec<f64> = weights.iter().map(|w| w * factor).collect();
    let mut ints: Vec<i64> = raw.iter().map(|r| r.floor() as i64).collect();
    let short = target - ints.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - ints[a] as f64;
        let fb = raw[b] - ints[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    if short >= 0 {
        for &k in order.iter().cycle().take(short as usize) {
            ints[k] += 1;
        }
    } else {
        for &k in order.iter().rev().cycle().take((-short) as usize) {
            if ints[k] > 0 {
                ints[k] -= 1;
            }
        }
    }
    ints
}

/// Exact W1 by network simplex on the complete bipartite graph.
pub fn w1_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    metric: Metric,
) -> Result<(f64, CouplingPlan)> {
    check_pair(mu, nu)?;
    let src: Vec<usize> = (0..mu.len()).filter(|&i| mu.weights()[i] > 0.0).collect();
    let dst: Vec<usize> = (0..nu.len()).filter(|&j| nu.weights()[j] > 0.0).collect();
    if src.len() + dst.len() > MAX_SUPPORT {
        return Err(Error::Oversize(src.len() + dst.len(), MAX_SUPPORT));
    }
    if src.is_empty() || dst.is_empty() {
        return Ok((
            0.0,
            CouplingPlan {
                entries: Vec::new(),
                cost: 0.0,
            },
        ));
    }
    let total = 0.5 * (mu.total_mass() + nu.total_mass());
    let wa: Vec<f64> = src.iter().map(|&i| mu.weights()[i]).collect();
    let wb: Vec<f64> = dst.iter().map(|&j| nu.weights()[j]).collect();
    let supply = scale_masses(&wa, total);
    let demand = scale_masses(&wb, total);
    let m = dst.len();
    let mut cost = vec![0i64; src.len() * m];
    for (a, &i) in src.iter().enumerate() {
        for (b, &j) in dst.iter().enumerate() {
            cost[a * m + b] = (metric.distance(mu.point(i), nu.point(j)) * COST_SCALE).round() as i64;
        }
    }
    let sol = simplex::solve(&supply, &demand, &cost);
    let unit = total / (1i64 << MASS_BITS) as f64;
    let entries: Vec<(usize, usize, f64)> = sol
        .flows
        .iter()
        .map(|&(a, b, f)| (src[a], dst[b], f as f64 * unit))
        .collect();
    let mut plan = CouplingPlan { entries, cost: 0.0 };
    plan.cost = plan.cost_under(mu, nu, metric);
    Ok((plan.cost, plan))
}

/// W1 on the line as `∫ |F_μ − F_ν|`.
pub fn w1_1d(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    if mu.dim() != 1 {
        return Err(Error::Dimension(mu.dim()));
    }
    let mut events: Vec<(f64, f64)> = mu
        .points()
        .coords()
        .iter()
        .zip(mu.weights())
        .map(|(&x, &w)| (x, w))
        .chain(
            nu.points()
                .coords()
                .iter()
                .zip(nu.weights())
                .map(|(&x, &w)| (x, -w)),
        )
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cdf = 0.0;
    let mut total = 0.0;
    for k in 0..events.len() {
        cdf += events[k].1;
        if let Some(next) = events.get(k + 1) {
            total += cdf.abs() * (next.0 - events[k].0);
        }
    }
    Ok(total)
}

/// `μ(f) − ν(f)` for a test function sampled on both supports, after checking
/// that the samples are 1-Lipschitz for `metric` across every pair of support points.
pub fn w1_dual_lower_bound(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    f_mu: &[f64],
    f_nu: &[f64],
    metric: Metric,
) -> Result<f64> {
    check_pair(mu, nu)?;
    if f_mu.len() != mu.len() {
        return Err(Error::LengthMismatch {
            expected: mu.len(),
            found: f_mu.len(),
        });
    }
    if f_nu.len() != nu.len() {
        return Err(Error::LengthMismatch {
            expected: nu.len(),
            found: f_nu.len(),
        });
    }
    let pts: Vec<&[f64]> = mu.points().iter().chain(nu.points().iter()).collect();
    let vals: Vec<f64> = f_mu.iter().chain(f_nu).copied().collect();
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d = metric.distance(pts[a], pts[b]);
            if (vals[a] - vals[b]).abs() > d * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::LipschitzViolation(a, b));
            }
        }
    }
    let a: f64 = f_mu.iter().zip(mu.weights()).map(|(f, w)| f * w).sum();
    let b: f64 = f_nu.iter().zip(nu.weights()).map(|(f, w)| f * w).sum();
    Ok(a - b)
}
