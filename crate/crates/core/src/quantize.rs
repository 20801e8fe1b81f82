//! Constructive N-point quantizer on a cube partition.
//!
//! The unit cube is cut into `C^d` cubes with `C = ⌊N^{1/d}⌋`. Each cube's mass
//! is moved to its center, and the masses are then rounded down to multiples
//! of `1/N` one cube at a time along a serpentine path, pushing the remainder
//! into the next cube. Every remainder travels at most one cube width, which is
//! what makes the W1 error `O(N^{-1/d})`.

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, GridDensity, Points};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest `C` with `C^d ≤ n`.
pub fn cubes_per_axis(n: usize, d: usize) -> usize {
    let mut c = (n as f64).powf(1.0 / d as f64).round() as usize;
    while c > 1 && c.pow(d as u32) > n {
        c -= 1;
    }
    while (c + 1).pow(d as u32) <= n {
        c += 1;
    }
    c.max(1)
}

/// W1 guarantee `(√d/2 + 1) / (N^{1/d} − 1)` of the quantizer (infinite for `N < 2^d`).
pub fn quantizer_bound(n: usize, d: usize) -> f64 {
    let root = (n as f64).powf(1.0 / d as f64);
    if root <= 1.0 {
        return f64::INFINITY;
    }
    ((d as f64).sqrt() / 2.0 + 1.0) / (root - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubePartition {
    pub c: usize,
    pub dim: usize,
    /// Multi-indices in visiting order; consecutive entries are face-adjacent.
    pub order: Vec<Vec<usize>>,
}

impl CubePartition {
    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .map(|&k| (k as f64 + 0.5) / self.c as f64)
            .collect()
    }

    /// Flat index with axis 0 fastest.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &k| acc * self.c + k)
    }

    /// True when every consecutive pair differs by one step in exactly one axis.
    pub fn is_serpentine(&self) -> bool {
        self.order.windows(2).all(|w| {
            let steps: usize = w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| a.abs_diff(*b))
                .sum();
            steps == 1
        })
    }
}

/// Boustrophedon ordering of the `C^d` cubes, axis 0 varying fastest.
pub fn serpentine_order(c: usize, d: usize) -> CubePartition {
    fn build(c: usize, d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![Vec::new()];
        }
        let sub = build(c, d - 1);
        let mut out = Vec::with_capacity(sub.len() * c);
        for k in 0..c {
            let iter: Box<dyn Iterator<Item = &Vec<usize>>> = if k % 2 == 0 {
                Box::new(sub.iter())
            } else {
                Box::new(sub.iter().rev())
            };
            for s in iter {
                let mut v = s.clone();
                v.push(k);
                out.push(v);
            }
        }
        out
    }
    let c = c.max(1);
    CubePartition {
        c,
        dim: d,
        order: build(c, d),
    }
}

/// Something whose mass can be integrated over the cubes of a partition.
pub enum QuantizeTarget<'a> {
    Grid(&'a GridDensity),
    Atoms(&'a DiscreteMeasure),
}

impl<'a> From<&'a GridDensity> for QuantizeTarget<'a> {
    fn from(g: &'a GridDensity) -> Self {
        QuantizeTarget::Grid(g)
    }
}

impl<'a> From<&'a DiscreteMeasure> for QuantizeTarget<'a> {
    fn from(m: &'a DiscreteMeasure) -> Self {
        QuantizeTarget::Atoms(m)
    }
}

impl QuantizeTarget<'_> {
    fn dim(&self) -> usize {
        match self {
            QuantizeTarget::Grid(g) => g.dim(),
            QuantizeTarget::Atoms(m) => m.dim(),
        }
    }

    fn total_mass(&self) -> f64 {
        match self {
            QuantizeTarget::Grid(g) => g.total_mass(),
            QuantizeTarget::Atoms(m) => m.total_mass(),
        }
    }
}

/// Masses of the `C^d` cubes, flat with axis 0 fastest.
pub fn cell_masses(target: &QuantizeTarget<'_>, c: usize) -> Vec<f64> {
    let d = target.dim();
    let mut out = vec![0.0; c.pow(d as u32)];
    match target {
        QuantizeTarget::Atoms(m) => {
            for (p, &w) in m.points().iter().zip(m.weights()) {
                let flat = p.iter().rev().fold(0, |acc, &x| {
                    let k = ((x * c as f64).floor() as usize).min(c - 1);
                    acc * c + k
                });
                out[flat] += w;
            }
        }
        QuantizeTarget::Grid(g) => {
            // Per axis: which cubes a grid cell overlaps, and with what fraction of its width.
            let overlaps: Vec<Vec<Vec<(usize, f64)>>> = g
                .dims()
                .iter()
                .map(|&n| {
                    (0..n)
                        .map(|i| {
                            let (lo, hi) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
                            let k0 = ((lo * c as f64).floor() as usize).min(c - 1);
                            let mut parts = Vec::new();
                            for k in k0..c {
                                let (clo, chi) = (k as f64 / c as f64, (k + 1) as f64 / c as f64);
                                if clo >= hi {
                                    break;
                                }
                                let len = hi.min(chi) - lo.max(clo);
                                if len > 0.0 {
                                    parts.push((k, len * n as f64));
                                }
                            }
                            parts
                        })
                        .collect()
                })
                .collect();
            for (j, &mass) in g.cell_masses().iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let idx = g.unravel(j);
                let lists: Vec<&Vec<(usize, f64)>> =
                    (0..d).map(|a| &overlaps[a][idx[a]]).collect();
                let mut pick = vec![0usize; d];
                'outer: loop {
                    let mut w = mass;
                    let mut flat = 0;
                    for a in (0..d).rev() {
                        let (k, f) = lists[a][pick[a]];
                        w *= f;
                        flat = flat * c + k;
                    }
                    out[flat] += w;
                    for a in 0..d {
                        pick[a] += 1;
                        if pick[a] < lists[a].len() {
                            continue 'outer;
                        }
                        pick[a] = 0;
                    }
                    break;
                }
            }
        }
    }
    out
}

/// Bookkeeping of the rounding recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingTrace {
    /// Points assigned to each cube, in serpentine order.
    pub counts: Vec<usize>,
    /// Total mass of every intermediate measure `μ_l`, starting with `μ_0`.
    pub totals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuantizeOptions {
    /// Spread repeated points uniformly within their cube, seeded.
    pub jitter: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantization {
    /// Uniform N-point measure (coincident points allowed).
    pub measure: DiscreteMeasure,
    pub partition: CubePartition,
    pub trace: RoundingTrace,
}

/// Runs the quantizer with default options.
pub fn cube_quantize<'a>(target: impl Into<QuantizeTarget<'a>>, n: usize) -> Result<DiscreteMeasure> {
    Ok(cube_quantize_with(target, n, QuantizeOptions::default())?.measure)
}

pub fn cube_quantize_with<'a>(
    target: impl Into<QuantizeTarget<'a>>,
    n: usize,
    opts: QuantizeOptions,
) -> Result<Quantization> {
    let target = target.into();
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one point".into()));
    }
    let total = target.total_mass();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::MassMismatch(total, 1.0));
    }
    let d = target.dim();
    let c = cubes_per_axis(n, d);
    let partition = serpentine_order(c, d);
    let masses = cell_masses(&target, c);
    let ordered: Vec<f64> = partition
        .order
        .iter()
        .map(|idx| masses[partition.flat(idx)])
        .collect();

    let cells = ordered.len();
    let mut counts = vec![0usize; cells];
    let mut totals = Vec::with_capacity(cells);
    let mut assigned = 0usize;
    let mut carry = 0.0;
    let mut rest: f64 = ordered.iter().sum();
    totals.push(rest);
    for l in 0..cells - 1 {
        let current = ordered[l] + carry;
        rest -= ordered[l];
        let k = ((n as f64 * current + 1e-9).floor().max(0.0) as usize).min(n - assigned);
        counts[l] = k;
        assigned += k;
        carry = current - k as f64 / n as f64;
        totals.push(assigned as f64 / n as f64 + carry + rest);
    }
    counts[cells - 1] = n - assigned;
    totals.push(1.0);

    let mut rng = opts.jitter.map(ChaCha8Rng::seed_from_u64);
    let half = 0.5 / c as f64;
    let mut coords = Vec::with_capacity(n * d);
    for (idx, &k) in partition.order.iter().zip(&counts) {
        let center = partition.center(idx);
        for _ in 0..k {
            match rng.as_mut() {
                Some(r) if k > 1 => {
                    for &x in &center {
                        coords.push((x + r.gen_range(-half..half)).clamp(0.0, 1.0));
                    }
                }
                _ => coords.extend_from_slice(&center),
            }
        }
    }
    let measure = crate::measure::uniform_npoint(Points::new(d, coords)?)?;
    Ok(Quantization {
        measure,
        partition,
        trace: RoundingTrace { counts, totals },
    })
}
