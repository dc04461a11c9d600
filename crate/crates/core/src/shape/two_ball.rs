use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::functional::mask_eigenvalues;
use super::geometry::{ball_mask, set_distance};
use crate::error::{param, Result};
use crate::stiffness::StiffnessOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBallRow {
    pub d: f64,
    pub lambda1_union: f64,
    pub lambda2_union: f64,
    pub lambda1_half_ball: f64,
    /// `λ₂(union) - λ₁(half ball)`.
    pub gap: f64,
}

pub const TWO_BALL_HEADER: &str = "d,lambda1_union,lambda2_union,lambda1_half_ball,gap";

/// Two balls of volume `total_volume / 2`, centered on the first axis
/// symmetrically about the origin with `d` between their edges.
///
/// The half ball is the left ball alone, at its position in the union, so
/// that both eigenvalues see the same lattice and the same box.
pub fn two_ball_experiment(base: &StiffnessOperator, total_volume: f64, distances: &[f64]) -> Result<Vec<TwoBallRow>> {
    let g = base.grid();
    let h = g.h();
    let half = total_volume / 2.0;
    if !(half >= g.cell_volume()) {
        return Err(param("total_volume", format!("{total_volume} leaves less than a cell per ball")));
    }
    let radius = match g.dim() {
        1 => half / 2.0,
        _ => (half / PI).sqrt(),
    };
    distances
        .iter()
        .map(|&d| {
            let offset = d / 2.0 + radius;
            if offset + radius > g.half_width() + 1e-9 * h {
                return Err(param(
                    "distances",
                    format!("d = {d} puts the balls outside the box; the largest feasible d is {}", 2.0 * (g.half_width() - 2.0 * radius)),
                ));
            }
            let left = ball_mask(&g, &[-offset, 0.0], half)?;
            let right = ball_mask(&g, &[offset, 0.0], half)?;
            let touching = set_distance(&g, &left.active_indices(), &right.active_indices()) < h * (1.0 + 1e-9) + 1e-12;
            if touching || !left.intersection(&right)?.is_empty() {
                return Err(param(
                    "distances",
                    format!("d = {d} makes the balls overlap or touch; the minimum feasible d is one cell, {h}"),
                ));
            }
            let union = left.union(&right)?;
            let lu = mask_eigenvalues(base, &union, 2)?;
            let lh = mask_eigenvalues(base, &left, 1)?[0];
            Ok(TwoBallRow {
                d,
                lambda1_union: lu[0],
                lambda2_union: lu[1],
                lambda1_half_ball: lh,
                gap: lu[1] - lh,
            })
        })
        .collect()
}

/// Header plus one `{:.16e}` row per distance.
pub fn two_ball_csv(rows: &[TwoBallRow]) -> String {
    let mut out = String::from(TWO_BALL_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.d, r.lambda1_union, r.lambda2_union, r.lambda1_half_ball, r.gap
        );
    }
    out
}
