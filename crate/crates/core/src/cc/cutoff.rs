//! Radial cut-offs `φ_R`, `ψ_R` and the localization defect of the form.

use crate::error::{param, Result};
use crate::grid::{dist, GridFunction, Point};
use crate::stiffness::StiffnessOperator;

/// Quintic smoothstep on `[0, 1]`, C² at both knots.
fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// The pair `φ_R` (1 on `B_R`, 0 off `B_{2R}`) and `ψ_R` (0 on `B_R`, 1 off
/// `B_{2R}`), with `ψ_R = sqrt(1 - φ_R²)` in the transition band so that
/// `φ_R² + ψ_R² ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    pub radius: f64,
}

pub fn make_cutoffs(radius: f64) -> Result<Cutoffs> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(param("R", format!("must be positive, got {radius}")));
    }
    Ok(Cutoffs { radius })
}

impl Cutoffs {
    /// `φ_R` as a function of the distance to the center.
    pub fn phi(&self, r: f64) -> f64 {
        1.0 - smoothstep5(r / self.radius - 1.0)
    }

    /// `ψ_R` as a function of the distance to the center.
    pub fn psi(&self, r: f64) -> f64 {
        let t = r / self.radius;
        if t <= 1.0 {
            0.0
        } else if t >= 2.0 {
            1.0
        } else {
            let p = self.phi(r);
            (1.0 - p * p).max(0.0).sqrt().min(1.0)
        }
    }

    pub fn profile(&self, which: Profile, r: f64) -> f64 {
        match which {
            Profile::Phi => self.phi(r),
            Profile::Psi => self.psi(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Phi,
    Psi,
}

impl Profile {
    /// Value of the cut-off on the exterior of the box (assumed beyond `B_{2R}`).
    fn exterior(self) -> f64 {
        match self {
            Profile::Phi => 0.0,
            Profile::Psi => 1.0,
        }
    }
}

/// Cut-off values at the cell centers, relative to `center`.
pub fn sample_cutoff(grid_fn: &GridFunction, cut: &Cutoffs, which: Profile, center: &Point) -> Vec<f64> {
    let g = grid_fn.grid();
    (0..g.cell_count())
        .map(|i| cut.profile(which, dist(&g.center(i), center)))
        .collect()
}

/// `|Q(χ u) - W_χ(u)|` where `W_χ` is the form with pair weights
/// `(χ_i² + χ_j²)/2` and exterior weights `(χ_i² + χ_ext²)/2`: the discrete
/// analogue of `[χu]² - ∫∫ χ(x)² |u(x) - u(y)|² / |x-y|^{N+2s}`.
pub fn localization_defect(
    op: &StiffnessOperator,
    u: &GridFunction,
    center: &Point,
    radius: f64,
    which: Profile,
) -> Result<f64> {
    u.check_grid(&op.grid())?;
    let cut = make_cutoffs(radius)?;
    let chi = sample_cutoff(u, &cut, which, center);
    let ext = which.exterior();
    let v = u.values();
    let m = op.size();
    let mut acc = 0.0;
    for i in 0..m {
        let row = op.coupling_row(i);
        let (ci, ui) = (chi[i], v[i]);
        for j in i + 1..m {
            let (cj, uj) = (chi[j], v[j]);
            let localized = (ci * ui - cj * uj).powi(2);
            let weighted = 0.5 * (ci * ci + cj * cj) * (ui - uj).powi(2);
            acc += row[j] * (localized - weighted);
        }
        acc += op.tail()[i] * ui * ui * (ci * ci - 0.5 * (ci * ci + ext * ext));
    }
    Ok(acc.abs())
}

/// Localization defect of `φ_R` around `center`.
pub fn cutoff_defect(op: &StiffnessOperator, u: &GridFunction, center: &Point, radius: f64) -> Result<f64> {
    localization_defect(op, u, center, radius, Profile::Phi)
}
