//! Projection of probability densities onto structured measure sets.
//!
//! A target density (usually a grayscale image) is approximated either by an
//! N-point measure (stippling) or by the time pushforward of a curve whose
//! derivatives are bounded (continuous line drawing). Both problems are solved
//! by projected gradient descent on an attraction-repulsion energy, which equals
//! a kernel-smoothed L2 distance between the measures up to a constant.
//!
//! The crate also ships the verification machinery used to check the
//! approximation guarantees of these measure sets: exact Wasserstein-1
//! distances between small discrete measures, the constructive cube quantizer
//! and serpentine curve, and log-log rate fitting.
//!
//! Module map:
//! - [`measure`]: points, discrete measures, grid densities.
//! - [`kernel`]: interaction kernels `H` and the filter `h`.
//! - [`energy`]: the objective, its gradient, a grid-FFT attraction field and a
//!   Fourier-domain oracle.
//! - [`quantize`]: the cube partition quantizer.
//! - [`transport`]: exact W1 by network simplex, plus 1-D and dual bounds.
//! - [`constraints`]: box and discrete curve sets with their projections.
//! - [`solver`]: projected gradient descent and start configurations.
//! - [`curves`]: serpentine curves and curve/point discretization maps.
//! - [`experiments`]: rate sweeps and bound verification.

pub mod constraints;
pub mod curves;
pub mod energy;
pub mod error;
pub mod experiments;
pub mod kernel;
pub mod measure;
pub mod quantize;
pub mod solver;
pub mod transport;

pub use constraints::{CurveConstraintSpec, DiffOperator, NormIndex};
pub use energy::EnergyReport;
pub use error::{Error, Result};
pub use kernel::{FilterSpec, KernelSpec, Potential};
pub use measure::{DiscreteMeasure, GridDensity, Points};
pub use solver::{Constraint, InitStrategy, SolverConfig, SolverTrace};
pub use transport::{CouplingPlan, Metric};
