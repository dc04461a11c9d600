use serde::{Deserialize, Serialize};

use super::cutoff::{localization_defect, make_cutoffs, Profile};
use crate::error::{param, Error, Result};
use crate::grid::{dist, GridFunction, Point};
use crate::stiffness::StiffnessOperator;

/// `v = φ_{R1}(· - y) u`, `w = ψ_{R2}(· - y) u` with the certified defect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitPair {
    pub v: GridFunction,
    pub w: GridFunction,
    /// Smallest distance between a cell of `supp v` and one of `supp w`;
    /// infinite when either is empty.
    #[serde(with = "crate::serde_float")]
    pub support_gap: f64,
    /// `‖u - v - w‖_{L²}`.
    pub mass_residual: f64,
    /// `[u]² - [v]² - [w]²`.
    pub seminorm_defect: f64,
    /// `φ`-defect at `R1` plus `ψ`-defect at `R2`.
    pub localization_error: f64,
    /// The certified lower bound is `-defect_bound`.
    pub defect_bound: f64,
}

pub fn dichotomy_split(
    op: &StiffnessOperator,
    u: &GridFunction,
    center: &Point,
    r1: f64,
    r2: f64,
) -> Result<SplitPair> {
    u.check_grid(&op.grid())?;
    let c1 = make_cutoffs(r1)?;
    let c2 = make_cutoffs(r2)?;
    if r2 < 2.0 * r1 {
        return Err(param("R2", format!("must be at least 2·R1 = {}, got {r2}", 2.0 * r1)));
    }
    let g = op.grid();
    let r: Vec<f64> = (0..g.cell_count()).map(|i| dist(&g.center(i), center)).collect();
    let vals = u.values();
    let v = GridFunction::new(g, vals.iter().zip(&r).map(|(x, d)| c1.phi(*d) * x).collect())?;
    let w = GridFunction::new(g, vals.iter().zip(&r).map(|(x, d)| c2.psi(*d) * x).collect())?;

    let sv = v.support().active_indices();
    let sw = w.support().active_indices();
    let support_gap = sv
        .iter()
        .flat_map(|&i| sw.iter().map(move |&j| (i, j)))
        .map(|(i, j)| g.distance(i, j))
        .fold(f64::INFINITY, f64::min);

    let mass_residual = u.sub(&v)?.sub(&w)?.l2_norm();
    let seminorm_defect = op.gagliardo_sq(u)? - op.gagliardo_sq(&v)? - op.gagliardo_sq(&w)?;
    let localization_error =
        localization_defect(op, u, center, r1, Profile::Phi)? + localization_defect(op, u, center, r2, Profile::Psi)?;
    let defect_bound = 2.0 * localization_error;
    // Rounding slack proportional to the energy scale.
    let slack = 1e-12 * op.gagliardo_sq(u)?.abs();
    if seminorm_defect < -defect_bound - slack {
        return Err(Error::Invariant {
            name: "seminorm-superadditivity",
            detail: format!("defect {seminorm_defect:.6e} below -{defect_bound:.6e}"),
        });
    }
    Ok(SplitPair {
        v,
        w,
        support_gap,
        mass_residual,
        seminorm_defect,
        localization_error,
        defect_bound,
    })
}
