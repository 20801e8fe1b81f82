//! Mixed group norms `‖x‖_q = (Σ_i ‖x_i‖₂^q)^{1/q}` and their balls.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormIndex {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl NormIndex {
    pub fn dual(self) -> NormIndex {
        match self {
            NormIndex::One => NormIndex::Inf,
            NormIndex::Two => NormIndex::Two,
            NormIndex::Inf => NormIndex::One,
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormIndex::One => "1",
            NormIndex::Two => "2",
            NormIndex::Inf => "inf",
        })
    }
}

impl FromStr for NormIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" => Ok(NormIndex::One),
            "2" => Ok(NormIndex::Two),
            "inf" | "infinity" | "∞" => Ok(NormIndex::Inf),
            other => Err(format!("norm index must be 1, 2 or inf, got {other:?}")),
        }
    }
}

fn group_norms(v: &[f64], d: usize) -> impl Iterator<Item = f64> + '_ {
    v.chunks_exact(d)
        .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
}

pub fn mixed_norm(v: &[f64], d: usize, q: NormIndex) -> f64 {
    match q {
        NormIndex::One => group_norms(v, d).sum(),
        NormIndex::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        NormIndex::Inf => group_norms(v, d).fold(0.0, f64::max),
    }
}

/// Euclidean projection of `v` onto `{‖·‖_q ≤ r}`, in place.
pub fn project_ball(v: &mut [f64], d: usize, q: NormIndex, r: f64) {
    match q {
        NormIndex::Two => {
            let n = mixed_norm(v, d, q);
            if n > r {
                let s = r / n;
                v.iter_mut().for_each(|x| *x *= s);
            }
        }
        NormIndex::Inf => {
            for g in v.chunks_exact_mut(d) {
                let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > r {
                    let s = r / n;
                    g.iter_mut().for_each(|x| *x *= s);
                }
            }
        }
        NormIndex::One => {
            let norms: Vec<f64> = group_norms(v, d).collect();
            let total: f64 = norms.iter().sum();
            if total <= r {
                return;
            }
            let theta = l1_threshold(&norms, r);
            for (g, &n) in v.chunks_exact_mut(d).zip(&norms) {
                let s = if n > theta { (n - theta) / n } else { 0.0 };
                g.iter_mut().for_each(|x| *x *= s);
            }
        }
    }
}

/// Threshold `θ` with `Σ max(n_i − θ, 0) = r` for nonnegative `n` summing above `r`.
fn l1_threshold(norms: &[f64], r: f64) -> f64 {
    let mut sorted = norms.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cum += u;
        let t = (cum - r) / (k + 1) as f64;
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    theta.max(0.0)
}
