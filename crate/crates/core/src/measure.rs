//! Measures on the unit cube `[0,1]^d`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance on the total mass of anything flagged as a probability measure.
pub const MASS_TOL: f64 = 1e-12;

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

/// A list of points in `[0,1]^d` stored as one flat coordinate vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    dim: usize,
    coords: Vec<f64>,
}

impl Points {
    /// Wraps a flat coordinate vector, checking that every point lies in the closed cube.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if coords.len() % dim != 0 {
            return Err(Error::LengthMismatch {
                expected: (coords.len() / dim + 1) * dim,
                found: coords.len(),
            });
        }
        if let Some(pos) = coords
            .iter()
            .position(|c| !c.is_finite() || *c < 0.0 || *c > 1.0)
        {
            return Err(Error::OutsideDomain { index: pos / dim });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyPoints)?;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }
}

/// A weighted point cloud `Σ w_i δ_{p_i}`. Weights may be signed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Points,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(points: Points, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite weight".into()));
        }
        Ok(Self { points, weights })
    }

    /// Builds a probability measure: nonnegative weights summing to one.
    pub fn probability(points: Points, weights: Vec<f64>) -> Result<Self> {
        let m = Self::new(points, weights)?;
        if m.weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidParameter("negative weight in probability measure".into()));
        }
        let total = m.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::MassMismatch(total, 1.0));
        }
        Ok(m)
    }

    /// The zero measure in dimension `dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(Points::new(dim, Vec::new())?, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.points.get(i)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0) && (self.total_mass() - 1.0).abs() <= MASS_TOL
    }

    /// Drops zero-weight atoms.
    pub fn compact(&self) -> Self {
        let dim = self.dim();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (p, &w) in self.points.iter().zip(&self.weights) {
            if w != 0.0 {
                coords.extend_from_slice(p);
                weights.push(w);
            }
        }
        Self {
            points: Points { dim, coords },
            weights,
        }
    }

    /// Merges atoms sitting at bitwise-identical coordinates, keeping first-seen order.
    pub fn merge_duplicates(&self) -> Self {
        use std::collections::HashMap;
        let dim = self.dim();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut coords = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
            match index.get(&key) {
                Some(&k) => weights[k] += w,
                None => {
                    index.insert(key, weights.len());
                    coords.extend_from_slice(p);
                    weights.push(w);
                }
            }
        }
        Self {
            points: Points { dim, coords },
            weights,
        }
    }
}

/// Uniform N-point measure: every atom gets weight `1/N`.
pub fn uniform_npoint(points: Points) -> Result<DiscreteMeasure> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let w = 1.0 / points.len() as f64;
    let weights = vec![w; points.len()];
    DiscreteMeasure::new(points, weights)
}

/// Total variation `Σ |w_i|`.
pub fn tv_norm(mu: &DiscreteMeasure) -> f64 {
    mu.weights.iter().map(|w| w.abs()).sum()
}

/// Piecewise-constant target density on a regular grid over `[0,1]^d`.
///
/// Cells are indexed with axis 0 varying fastest. Cell `j` has center
/// `(j_a + 0.5) / n_a` along each axis and quadrature weight `w = 1 / Π n_a`
/// (midpoint rectangle rule). Masses are normalized so that `Σ w π_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    dims: Vec<usize>,
    masses: Vec<f64>,
    quad_weight: f64,
    centers: Vec<f64>,
    cell_mass: Vec<f64>,
}

impl GridDensity {
    /// Normalizes nonnegative `masses` on a grid of shape `dims`.
    pub fn new(dims: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        check_dim(dims.len())?;
        if dims.contains(&0) {
            return Err(Error::InvalidParameter("grid axis of length zero".into()));
        }
        let cells: usize = dims.iter().product();
        if masses.len() != cells {
            return Err(Error::LengthMismatch {
                expected: cells,
                found: masses.len(),
            });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidParameter("masses must be finite and nonnegative".into()));
        }
        let quad_weight = 1.0 / cells as f64;
        let total: f64 = masses.iter().sum::<f64>() * quad_weight;
        if !(total > 0.0) {
            return Err(Error::DegenerateTarget);
        }
        let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let d = dims.len();
        let mut centers = Vec::with_capacity(cells * d);
        let mut idx = vec![0usize; d];
        for _ in 0..cells {
            for a in 0..d {
                centers.push((idx[a] as f64 + 0.5) / dims[a] as f64);
            }
            for a in 0..d {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let cell_mass = masses.iter().map(|m| m * quad_weight).collect();
        Ok(Self {
            dims,
            masses,
            quad_weight,
            centers,
            cell_mass,
        })
    }

    /// Builds a 2-D target from a row-major grayscale raster (row 0 on top).
    ///
    /// Pixel values must lie in `[0,1]`. Without `invert` the mass is the pixel
    /// value; with `invert` it is the darkness `1 - v`. The image's top row maps
    /// to the top of the domain, i.e. to the largest `y`.
    pub fn from_image(width: usize, height: usize, pixels: &[f64], invert: bool) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                found: pixels.len(),
            });
        }
        if pixels.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            return Err(Error::InvalidParameter("pixel values must lie in [0,1]".into()));
        }
        let mut masses = vec![0.0; width * height];
        for row in 0..height {
            let iy = height - 1 - row;
            for col in 0..width {
                let v = pixels[row * width + col];
                masses[iy * width + col] = if invert { 1.0 - v } else { v };
            }
        }
        if !masses.iter().any(|m| *m > 0.0) {
            return Err(Error::DegenerateTarget);
        }
        Self::new(vec![width, height], masses)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.masses.len()
    }

    /// Normalized densities `π_j`.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Quadrature weight `w_j`, identical for every cell.
    pub fn quad_weight(&self) -> f64 {
        self.quad_weight
    }

    /// Cell masses `w_j π_j`, summing to one.
    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_mass
    }

    /// Flat list of cell centers.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn center(&self, j: usize) -> &[f64] {
        let d = self.dim();
        &self.centers[j * d..(j + 1) * d]
    }

    /// Total mass `Σ w_j π_j`.
    pub fn total_mass(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    /// Multi-index of a flat cell index.
    pub fn unravel(&self, mut j: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&n| {
                let r = j % n;
                j /= n;
                r
            })
            .collect()
    }

    /// Atomic version of the target: one atom of mass `w_j π_j` at each nonempty cell center.
    pub fn to_atoms(&self) -> DiscreteMeasure {
        let d = self.dim();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for (j, &m) in self.cell_mass.iter().enumerate() {
            if m > 0.0 {
                coords.extend_from_slice(&self.centers[j * d..(j + 1) * d]);
                weights.push(m);
            }
        }
        DiscreteMeasure {
            points: Points { dim: d, coords },
            weights,
        }
    }
}
