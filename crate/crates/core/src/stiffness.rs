//! Dense assembly of the discrete Gagliardo form.
//!
//! For cells `i ≠ j` the coupling is the mid-point rule
//! `k_ij = h^{2N} / |x_i - x_j|^{N+2s}`; the cell self-interaction is
//! dropped. Each cell also interacts with the zero exterior of the box
//! through `ρ_i`, the same mid-point rule summed over every lattice cell
//! outside the box: `ρ_i = Σ_{j ∉ box} k_ij`, a quadrature of
//! `h^N ∫_{ℝ^N∖box} |x_i - y|^{-(N+2s)} dy`. The sum over the whole lattice
//! has a closed form (see [`crate::lattice`]), so `ρ_i` is that constant
//! minus the in-box row sum, and the form is the restriction of one
//! translation-invariant form on `hℤ^N`.
//!
//! The quadratic form is `Q(u) = Σ_{i<j} k_ij (u_i - u_j)² + Σ_i ρ_i u_i²`,
//! i.e. the matrix `A = diag(d) - K` with `d_i = Σ_j k_ij + ρ_i`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constant::normalization_constant;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Point};
use crate::lattice::lattice_kernel_sum;
use crate::quadrature::integrate;

/// Largest cell count the dense assembly accepts.
pub const DENSE_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub s: f64,
    pub dim: usize,
    /// `C_{s,N}`.
    pub c_norm: f64,
}

impl FracParams {
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        let c_norm = normalization_constant(s, dim)?;
        Ok(FracParams { s, dim, c_norm })
    }
}

#[derive(Debug)]
struct StiffnessData {
    grid: Grid,
    params: FracParams,
    /// Row-major `M × M`, zero diagonal.
    coupling: Vec<f64>,
    tail: Vec<f64>,
    diag: Vec<f64>,
}

/// The assembled operator. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct StiffnessOperator {
    data: Arc<StiffnessData>,
}

/// Continuum exterior integral `∫_{ℝ^N∖box} |x-y|^{-N-2s} dy`, equal to
/// `(1/2s) ∫_{S^{N-1}} t(θ)^{-2s} dθ` with `t` the exit distance.
/// The assembled tail is its lattice counterpart.
pub fn exterior_integral(grid: &Grid, x: &Point, s: f64) -> Result<f64> {
    let l = grid.half_width();
    let two_s = 2.0 * s;
    match grid.dim() {
        1 => Ok(((l - x[0]).powf(-two_s) + (l + x[0]).powf(-two_s)) / two_s),
        _ => {
            let (px, py) = (x[0], x[1]);
            let exit = |theta: f64| {
                let (sn, cs) = theta.sin_cos();
                let tx = if cs > 0.0 {
                    (l - px) / cs
                } else if cs < 0.0 {
                    (-l - px) / cs
                } else {
                    f64::INFINITY
                };
                let ty = if sn > 0.0 {
                    (l - py) / sn
                } else if sn < 0.0 {
                    (-l - py) / sn
                } else {
                    f64::INFINITY
                };
                tx.min(ty)
            };
            let wrap = |a: f64| if a < 0.0 { a + 2.0 * PI } else { a };
            let mut corners = [
                wrap((l - py).atan2(l - px)),
                wrap((l - py).atan2(-l - px)),
                wrap((-l - py).atan2(-l - px)),
                wrap((-l - py).atan2(l - px)),
            ];
            corners.sort_by(f64::total_cmp);
            let mut total = 0.0;
            for k in 0..4 {
                let a = corners[k];
                let b = if k == 3 { corners[0] + 2.0 * PI } else { corners[k + 1] };
                total += integrate(|t| exit(t).powf(-two_s), a, b, 1e-14, 1e-12, 2000)?.value;
            }
            Ok(total / two_s)
        }
    }
}

/// Assemble the dense stiffness operator of `grid` for exponent `s`.
pub fn assemble_stiffness(grid: &Grid, s: f64) -> Result<StiffnessOperator> {
    let params = FracParams::new(s, grid.dim())?;
    let m = grid.cell_count();
    if m > DENSE_BUDGET {
        return Err(Error::Budget {
            cells: m,
            budget: DENSE_BUDGET,
        });
    }
    let centers = grid.centers();
    let h_n = grid.cell_volume();
    let pair_weight = h_n * h_n;
    let expo = grid.dim() as f64 + 2.0 * s;

    let coupling: Vec<f64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|i| {
            let ci = centers[i];
            let centers = &centers;
            (0..m).map(move |j| {
                if i == j {
                    0.0
                } else {
                    pair_weight / crate::grid::dist(&ci, &centers[j]).powf(expo)
                }
            })
        })
        .collect();
    // Exterior part of the full lattice sum: every diagonal entry equals
    // h^{N-2s} Σ_{m≠0} |m|^{-N-2s}, so the operator commutes with lattice shifts.
    let full = lattice_kernel_sum(s, grid.dim())? * grid.h().powf(grid.dim() as f64 - 2.0 * s);
    let tail: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<f64> = coupling[i * m..(i + 1) * m].to_vec();
            row.sort_unstable_by(f64::total_cmp);
            full - row.iter().sum::<f64>()
        })
        .collect();
    Ok(StiffnessOperator::from_parts(*grid, params, coupling, tail))
}

impl StiffnessOperator {
    /// Build from raw parts. No symmetry or sign validation is done here;
    /// see [`StiffnessOperator::symmetry_defect`].
    pub fn from_parts(grid: Grid, params: FracParams, coupling: Vec<f64>, tail: Vec<f64>) -> Self {
        let m = grid.cell_count();
        assert_eq!(coupling.len(), m * m, "coupling must be M×M");
        assert_eq!(tail.len(), m, "tail must have M entries");
        let diag = (0..m)
            .map(|i| coupling[i * m..(i + 1) * m].iter().sum::<f64>() + tail[i])
            .collect();
        StiffnessOperator {
            data: Arc::new(StiffnessData {
                grid,
                params,
                coupling,
                tail,
                diag,
            }),
        }
    }

    pub fn grid(&self) -> Grid {
        self.data.grid
    }

    pub fn params(&self) -> FracParams {
        self.data.params
    }

    pub fn s(&self) -> f64 {
        self.data.params.s
    }

    pub fn size(&self) -> usize {
        self.data.tail.len()
    }

    /// `k_ij` (zero on the diagonal).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.data.coupling[i * self.size() + j]
    }

    pub fn coupling_row(&self, i: usize) -> &[f64] {
        let m = self.size();
        &self.data.coupling[i * m..(i + 1) * m]
    }

    /// Exterior weights `ρ_i`.
    pub fn tail(&self) -> &[f64] {
        &self.data.tail
    }

    /// `d_i = Σ_j k_ij + ρ_i`.
    pub fn diag(&self) -> &[f64] {
        &self.data.diag
    }

    /// Matrix entry `A_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.data.diag[i]
        } else {
            -self.coupling(i, j)
        }
    }

    /// Largest `|k_ij - k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.size();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| (self.coupling(i, j) - self.coupling(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// `A u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.size());
        (0..self.size())
            .into_par_iter()
            .map(|i| {
                let row = self.coupling_row(i);
                let off: f64 = row.iter().zip(u).map(|(k, v)| k * v).sum();
                self.data.diag[i] * u[i] - off
            })
            .collect()
    }

    /// `uᵀ A u` through a matrix-vector product.
    pub fn quadratic_form(&self, u: &GridFunction) -> Result<f64> {
        u.check_grid(&self.grid())?;
        let au = self.apply(u.values());
        Ok(au.iter().zip(u.values()).map(|(a, b)| a * b).sum())
    }

    /// `Σ_{i<j} k_ij (u_i - u_j)² + Σ_i ρ_i u_i²`, summed pairwise.
    pub fn gagliardo_sq(&self, u: &GridFunction) -> Result<f64> {
        u.check_grid(&self.grid())?;
        Ok(self.pair_form(u.values(), u.values()))
    }

    /// Symmetric bilinear form `B(u, v)` with `B(u, u) = Q(u)`.
    pub fn bilinear(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        u.check_grid(&self.grid())?;
        v.check_grid(&self.grid())?;
        Ok(self.pair_form(u.values(), v.values()))
    }

    fn pair_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.size();
        let rows: Vec<f64> = (0..m)
            .into_par_iter()
            .map(|i| {
                let row = self.coupling_row(i);
                let mut acc = self.data.tail[i] * u[i] * v[i];
                for j in i + 1..m {
                    acc += row[j] * (u[i] - u[j]) * (v[i] - v[j]);
                }
                acc
            })
            .collect();
        rows.iter().sum()
    }
}

/// Free-function form of [`StiffnessOperator::gagliardo_sq`].
pub fn gagliardo_sq(op: &StiffnessOperator, u: &GridFunction) -> Result<f64> {
    op.gagliardo_sq(u)
}
