//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use mp_core::constraints::{CurveConstraintSpec, NormIndex};
use mp_core::measure::{DiscreteMeasure, Points};
use mp_core::transport::Metric;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Dense matrix of a difference operator acting on flat length `N·d` vectors.
pub fn operator_matrix(spec: &CurveConstraintSpec, order: usize, d: usize) -> DMatrix<f64> {
    let n = spec.n * d;
    let op = &spec.operators(d).unwrap()[order - 1];
    let mut m = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = op.apply(&e).unwrap();
        for r in 0..n {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// Rows of `D_j` belonging to sample `i` (its `d` coordinates).
fn group_rows(m: &DMatrix<f64>, i: usize, d: usize) -> DMatrix<f64> {
    m.rows(i * d, d).into_owned()
}

/// Constraint `c + lᵀx + ½xᵀQx > 0`.
struct Quad {
    c: f64,
    l: DVector<f64>,
    q: Option<DMatrix<f64>>,
}

impl Quad {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = self.c + self.l.dot(x);
        if let Some(q) = &self.q {
            v += 0.5 * x.dot(&(q * x));
        }
        v
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.q {
            Some(q) => &self.l + q * x,
            None => self.l.clone(),
        }
    }
}

/// Euclidean projection onto a curve set by a log-barrier interior-point method.
///
/// Variables are the samples `s` plus, for `q = 1`, one epigraph variable per
/// group. Each derivative bound becomes one or more quadratic inequalities:
/// `q = ∞`: `α² − ‖(Ds)_i‖² > 0`; `q = 2`: `α² − ‖Ds‖² > 0`;
/// `q = 1`: `t_i² − ‖(Ds)_i‖² > 0`, `t_i > 0` and `α − Σ t_i > 0`.
pub fn barrier_projection(spec: &CurveConstraintSpec, z: &[f64]) -> Vec<f64> {
    let d = z.len() / spec.n;
    let ns = z.len();
    let groups = spec.n;
    let extra = if spec.q == NormIndex::One { groups * spec.m } else { 0 };
    let nv = ns + extra;
    let mut cons: Vec<Quad> = Vec::new();
    let unit = |k: usize, s: f64| {
        let mut l = DVector::zeros(nv);
        l[k] = s;
        l
    };
    for k in 0..ns {
        cons.push(Quad { c: 0.0, l: unit(k, 1.0), q: None });
        cons.push(Quad { c: 1.0, l: unit(k, -1.0), q: None });
    }
    let embed = |b: &DMatrix<f64>| {
        // Q = -2 BᵀB in the s block.
        let mut q = DMatrix::zeros(nv, nv);
        let btb = b.transpose() * b;
        q.view_mut((0, 0), (ns, ns)).copy_from(&(btb * -2.0));
        q
    };
    for j in 1..=spec.m {
        let a = spec.alphas[j - 1];
        let dm = operator_matrix(spec, j, d);
        match spec.q {
            NormIndex::Inf => {
                for i in 0..groups {
                    let b = group_rows(&dm, i, d);
                    if b.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    cons.push(Quad { c: a * a, l: DVector::zeros(nv), q: Some(embed(&b)) });
                }
            }
            NormIndex::Two => {
                cons.push(Quad { c: a * a, l: DVector::zeros(nv), q: Some(embed(&dm)) });
            }
            NormIndex::One => {
                let base = ns + (j - 1) * groups;
                let mut sum = DVector::zeros(nv);
                for i in 0..groups {
                    let b = group_rows(&dm, i, d);
                    let mut q = embed(&b);
                    q[(base + i, base + i)] = 2.0;
                    cons.push(Quad { c: 0.0, l: DVector::zeros(nv), q: Some(q) });
                    cons.push(Quad { c: 0.0, l: unit(base + i, 1.0), q: None });
                    sum[base + i] = -1.0;
                }
                cons.push(Quad { c: a, l: sum, q: None });
            }
        }
    }

    // Strictly feasible start: the constant curve at the cube center.
    let mut x = DVector::from_element(nv, 0.5);
    for j in 0..extra {
        x[ns + j] = spec.alphas[j / groups] / (2.0 * groups as f64);
    }
    let zv = DVector::from_column_slice(z);
    let objective = |x: &DVector<f64>| -> f64 {
        (0..ns).map(|k| 0.5 * (x[k] - zv[k]).powi(2)).sum()
    };
    let merit = |x: &DVector<f64>, tau: f64| -> Option<f64> {
        let mut v = tau * objective(x);
        for c in &cons {
            let g = c.value(x);
            if !(g > 0.0) {
                return None;
            }
            v -= g.ln();
        }
        Some(v)
    };
    let mut tau = 1.0;
    let mcount = cons.len() as f64;
    while mcount / tau > 1e-13 {
        for _ in 0..200 {
            let mut grad = DVector::zeros(nv);
            let mut hess = DMatrix::zeros(nv, nv);
            for k in 0..ns {
                grad[k] = tau * (x[k] - zv[k]);
                hess[(k, k)] = tau;
            }
            for c in &cons {
                let g = c.value(&x);
                let dg = c.grad(&x);
                grad -= &dg / g;
                hess += &dg * dg.transpose() / (g * g);
                if let Some(q) = &c.q {
                    hess -= q / g;
                }
            }
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => hess.lu().solve(&(-&grad)).expect("singular Newton system"),
            };
            let dec = -grad.dot(&step);
            if dec / 2.0 < 1e-15 {
                break;
            }
            let f0 = merit(&x, tau).unwrap();
            let mut t = 1.0;
            loop {
                let cand = &x + &step * t;
                if let Some(f) = merit(&cand, tau) {
                    if f <= f0 - 0.25 * t * dec {
                        x = cand;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-20 {
                    break;
                }
            }
            if t < 1e-20 {
                break;
            }
        }
        tau *= 8.0;
    }
    x.as_slice()[..ns].to_vec()
}

/// Linear inequalities `a·s ≤ b` describing a polyhedral curve set (d = 1, q ∈ {1, ∞}).
pub fn polyhedral_rows(spec: &CurveConstraintSpec) -> Vec<(Vec<f64>, f64)> {
    let n = spec.n;
    let mut rows = Vec::new();
    for k in 0..n {
        let mut a = vec![0.0; n];
        a[k] = -1.0;
        rows.push((a.clone(), 0.0));
        a[k] = 1.0;
        rows.push((a, 1.0));
    }
    for j in 1..=spec.m {
        let alpha = spec.alphas[j - 1];
        let dm = operator_matrix(spec, j, 1);
        let live: Vec<usize> = (0..n).filter(|&i| dm.row(i).iter().any(|v| *v != 0.0)).collect();
        match spec.q {
            NormIndex::Inf => {
                for &i in &live {
                    let r: Vec<f64> = dm.row(i).iter().copied().collect();
                    rows.push((r.clone(), alpha));
                    rows.push((r.iter().map(|v| -v).collect(), alpha));
                }
            }
            NormIndex::One => {
                for signs in 0..(1usize << live.len()) {
                    let mut r = vec![0.0; n];
                    for (b, &i) in live.iter().enumerate() {
                        let s = if signs >> b & 1 == 1 { -1.0 } else { 1.0 };
                        for c in 0..n {
                            r[c] += s * dm[(i, c)];
                        }
                    }
                    rows.push((r, alpha));
                }
            }
            NormIndex::Two => panic!("q = 2 is not polyhedral"),
        }
    }
    rows
}

fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - k + i {
            subset[i] += 1;
            for t in i + 1..k {
                subset[t] = subset[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact projection onto `{a_k·s ≤ b_k}` by enumerating active sets in order of size.
///
/// The objective is strictly convex, so the first KKT point found is the projection.
pub fn active_set_projection(rows: &[(Vec<f64>, f64)], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let zv = DVector::from_column_slice(z);
    let feasible = |s: &DVector<f64>| rows.iter().all(|(a, b)| DVector::from_column_slice(a).dot(s) <= b + 1e-12);
    if feasible(&zv) {
        return z.to_vec();
    }
    let mut subset: Vec<usize> = Vec::new();
    for size in 1..=n {
        subset.clear();
        subset.extend(0..size);
        loop {
            let a = DMatrix::from_fn(size, n, |r, c| rows[subset[r]].0[c]);
            let b = DVector::from_iterator(size, subset.iter().map(|&k| rows[k].1));
            let gram = &a * a.transpose();
            let sv = gram.singular_values();
            if sv.min() > 1e-10 * sv.max() {
                if let Some(lambda) = gram.lu().solve(&(&a * &zv - &b)) {
                    if lambda.iter().all(|l| *l >= -1e-12) {
                        let s = &zv - a.transpose() * &lambda;
                        if feasible(&s) {
                            return s.as_slice().to_vec();
                        }
                    }
                }
            }
            if !next_combination(&mut subset, rows.len()) {
                break;
            }
        }
    }
    panic!("no KKT point found");
}

pub fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x - y) * (x - y)).sum()
}

/// Random discrete probability measure with `n` atoms in `[0,1]^d`.
pub fn random_measure(rng: &mut impl Rng, n: usize, d: usize) -> DiscreteMeasure {
    let coords: Vec<f64> = (0..n * d).map(|_| rng.gen()).collect();
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    DiscreteMeasure::new(Points::new(d, coords).unwrap(), w).unwrap()
}

/// Largest 1-Lipschitz minorant of `f` on the given points (inf-convolution with the metric).
pub fn lipschitz_projection(points: &[&[f64]], f: &[f64], metric: Metric) -> Vec<f64> {
    points
        .iter()
        .map(|x| {
            points
                .iter()
                .zip(f)
                .map(|(y, fy)| fy + metric.distance(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Cost of the product coupling `μ ⊗ ν`.
pub fn independent_coupling_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, metric: Metric) -> f64 {
    let mut c = 0.0;
    for i in 0..mu.len() {
        for j in 0..nu.len() {
            c += mu.weights()[i] * nu.weights()[j] * metric.distance(mu.point(i), nu.point(j));
        }
    }
    c
}

/// Cost of the north-west corner coupling (a feasible, generally suboptimal plan).
pub fn northwest_coupling_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, metric: Metric) -> f64 {
    let mut a = mu.weights().to_vec();
    let mut b = nu.weights().to_vec();
    let (mut i, mut j) = (0, 0);
    let mut c = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        c += t * metric.distance(mu.point(i), nu.point(j));
        a[i] -= t;
        b[j] -= t;
        if a[i] <= 1e-15 {
            i += 1;
        } else {
            j += 1;
        }
    }
    c
}

/// Random polyline in the cube with every segment's speed at most `alpha`.
pub fn random_feasible_polyline(rng: &mut impl Rng, d: usize, segments: usize, t: f64, alpha: f64) -> mp_core::curves::Polyline {
    let dt = t / segments as f64;
    let mut coords: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..0.8)).collect();
    for k in 0..segments {
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        let speed = rng.gen_range(0.0..alpha);
        for a in 0..d {
            let prev = coords[k * d + a];
            // Clamping to the cube can only shorten the step.
            coords.push((prev + dir[a] / norm * speed * dt).clamp(0.0, 1.0));
        }
    }
    let times = (0..=segments).map(|k| k as f64 * dt).collect();
    mp_core::curves::Polyline::new(times, Points::new(d, coords).unwrap()).unwrap()
}
