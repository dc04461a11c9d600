//! Numerical laboratory for spectral shape optimization under the
//! fractional Dirichlet Laplacian on pixel domains.
//!
//! - [`grid`], [`stiffness`], [`constant`], [`fourier`]: lattices, masks and
//!   the discrete Gagliardo form.
//! - [`dirichlet`]: torsion, resolvent, eigenpairs and the inequalities
//!   relating them.
//! - [`cc`]: concentration profiles, the trichotomy classifier, cut-off
//!   splitting and the translation lemma.
//! - [`shape`]: spectral functionals, volume-constrained annealing and the
//!   compactness/dichotomy detector for set trajectories.

pub mod cc;
pub mod constant;
pub mod dirichlet;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod lattice;
pub mod linalg;
pub mod quadrature;
pub mod serde_float;
pub mod shape;
pub mod stiffness;

pub use constant::normalization_constant;
pub use dirichlet::{
    apply_resolvent, capacity_estimate, dense_eigenvalues, eigenpairs, poincare_constant, resolvent_norm_diff, restrict,
    solve_torsion, torsion_resolvent_bound_check, BoundReport, DirichletOperator, Spectrum, TorsionFunction,
};
pub use error::{Error, Result};
pub use fourier::fourier_seminorm_sq;
pub use grid::{DomainMask, Grid, GridFunction, Point, Shift};
pub use stiffness::{assemble_stiffness, gagliardo_sq, FracParams, StiffnessOperator};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Build a grid; see [`Grid::new`].
pub fn build_grid(dim: usize, half_width: f64, resolution: usize) -> Result<Grid> {
    Grid::new(dim, half_width, resolution)
}
