//! Finite-sequence surrogate of the concentration-compactness trichotomy.
//!
//! Profiles `Q_n(R)` are evaluated on the ladder `R_j = h · 2^{j/4}` up to
//! the half-width of the smallest box in the sequence, which plays the role
//! of a fixed radius independent of `n`. A doubling window is four ladder
//! steps.

use serde::{Deserialize, Serialize};

use super::profile::concentration_profile_detailed;
use super::sequence::{tail_start, FunctionSequence};
use crate::error::{param, Result};
use crate::grid::Point;

/// Ladder steps per doubling of the radius.
pub const STEPS_PER_DOUBLING: usize = 4;
/// Largest relative growth of `Q_n` across a doubling window on a plateau.
pub const PLATEAU_SLOPE: f64 = 0.02;
/// Largest relative spread of the plateau heights over the tail.
pub const ALPHA_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Compactness,
    Vanishing,
    Dichotomy,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thresholds {
    pub epsilon: f64,
    pub mass_limit: f64,
    pub plateau_slope: f64,
    pub alpha_spread: f64,
    pub steps_per_doubling: usize,
    /// First index of the tail.
    pub tail_start: usize,
}

/// Plateau of one tail entry, as ladder indices `[lower, upper]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Plateau {
    pub lower: usize,
    pub upper: usize,
    pub height: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrichotomyReport {
    pub verdict: Verdict,
    /// Maximizing centers `y_n` at the compactness radius, one per entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Point>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compactness_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// For dichotomy: the last entry's splitting center (heaviest cell) and
    /// the smallest ladder radius holding mass within `ε` of `α`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_center: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateaus: Option<Vec<Plateau>>,
    pub radii: Vec<f64>,
    /// `profiles[n][j] = Q_n(R_j)`.
    pub profiles: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    pub thresholds: Thresholds,
}

/// First plateau of a profile inside `(ε, λ - ε)`, extended upward while the
/// growth stays below the slope threshold.
fn find_plateau(q: &[f64], lo: f64, hi: f64) -> Option<Plateau> {
    let w = STEPS_PER_DOUBLING;
    let flat = |a: usize, b: usize| q[b] - q[a] < PLATEAU_SLOPE * q[a];
    let lower = (0..q.len().saturating_sub(w)).find(|&j| q[j] > lo && q[j] < hi && flat(j, j + w))?;
    let mut upper = lower + w;
    while upper + 1 < q.len() && flat(lower, upper + 1) {
        upper += 1;
    }
    let window = &q[lower..=upper];
    Some(Plateau {
        lower,
        upper,
        height: window.iter().sum::<f64>() / window.len() as f64,
    })
}

/// Classify a sequence as compactness, vanishing or dichotomy (checked in
/// that order after vanishing), or inconclusive. Pure and deterministic.
pub fn classify(seq: &FunctionSequence, epsilon: f64) -> Result<TrichotomyReport> {
    let len = seq.len();
    if len < 8 {
        return Err(param("length", format!("sequence needs at least 8 entries, got {len}")));
    }
    let lambda = seq.mass_limit();
    if !(epsilon > 0.0 && epsilon < lambda / 4.0) {
        return Err(param("epsilon", format!("must lie in (0, {}), got {epsilon}", lambda / 4.0)));
    }
    let entries = seq.embedded()?;
    let grid = seq.largest_grid();
    let cap = seq
        .entries()
        .iter()
        .map(|e| e.grid().half_width())
        .fold(f64::INFINITY, f64::min);
    let h = grid.h();
    let radii: Vec<f64> = (0..)
        .map(|j| h * 2f64.powf(j as f64 / STEPS_PER_DOUBLING as f64))
        .take_while(|r| *r <= cap * (1.0 + 1e-12))
        .collect();

    let detailed = entries
        .iter()
        .map(|u| concentration_profile_detailed(&grid, u, &radii))
        .collect::<Result<Vec<_>>>()?;
    let profiles: Vec<Vec<f64>> = detailed.iter().map(|d| d.iter().map(|p| p.mass).collect()).collect();
    let masses: Vec<f64> = entries.iter().map(|u| u.mass()).collect();
    let tail = tail_start(len);
    let last = radii.len() - 1;

    let mut report = TrichotomyReport {
        verdict: Verdict::Inconclusive,
        centers: None,
        compactness_radius: None,
        alpha: None,
        split_center: None,
        split_radius: None,
        plateaus: None,
        radii: radii.clone(),
        profiles: profiles.clone(),
        masses,
        thresholds: Thresholds {
            epsilon,
            mass_limit: lambda,
            plateau_slope: PLATEAU_SLOPE,
            alpha_spread: ALPHA_SPREAD,
            steps_per_doubling: STEPS_PER_DOUBLING,
            tail_start: tail,
        },
    };

    let tops: Vec<f64> = profiles[tail..].iter().map(|q| q[last]).collect();
    let shrinking = tops.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    if tops[tops.len() - 1] < epsilon && shrinking {
        report.verdict = Verdict::Vanishing;
        return Ok(report);
    }

    if let Some(j) = (0..radii.len()).find(|&j| profiles[tail..].iter().all(|q| q[j] >= lambda - epsilon)) {
        report.verdict = Verdict::Compactness;
        report.compactness_radius = Some(radii[j]);
        report.centers = Some(detailed.iter().map(|d| grid.center(d[j].center)).collect());
        return Ok(report);
    }

    let plateaus: Option<Vec<Plateau>> = profiles[tail..]
        .iter()
        .map(|q| find_plateau(q, epsilon, lambda - epsilon))
        .collect();
    if let Some(plateaus) = plateaus {
        let widening = plateaus.windows(2).all(|w| w[1].upper >= w[0].upper);
        let alpha = plateaus.iter().map(|p| p.height).sum::<f64>() / plateaus.len() as f64;
        let consistent = plateaus.iter().all(|p| (p.height - alpha).abs() <= ALPHA_SPREAD * alpha);
        if widening && consistent && alpha > epsilon && alpha < lambda - epsilon {
            let q_last = &profiles[len - 1];
            let r1 = (0..radii.len())
                .find(|&j| q_last[j] >= alpha - epsilon)
                .map(|j| radii[j]);
            report.verdict = Verdict::Dichotomy;
            report.alpha = Some(alpha);
            report.split_center = Some(grid.center(detailed[len - 1][0].center));
            report.split_radius = r1;
            report.plateaus = Some(plateaus);
        }
    }
    Ok(report)
}
