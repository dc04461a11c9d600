//! Compactness versus dichotomy for set trajectories, the `γ`-distance and
//! lower semicontinuity of the volume.

use serde::{Deserialize, Serialize};

use super::anneal::ShapeTrajectory;
use super::geometry::{centering_shift, components, set_distance};
use crate::dirichlet::{resolvent_norm, resolvent_norm_diff_masks, restrict, torsion_of};
use crate::error::{param, Error, Result};
use crate::grid::{DomainMask, GridFunction};
use crate::stiffness::StiffnessOperator;

/// Components holding at most this fraction of the volume are debris, and
/// debris may hold at most this fraction in total.
pub const DEBRIS_FRACTION: f64 = 0.02;
/// Each cluster must keep this fraction of the volume.
pub const MIN_CLUSTER_FRACTION: f64 = 0.10;
/// `‖R_Ω - R_Ω̃‖ ≤ 0.05 ‖R_Ω‖` after dropping debris.
pub const RESOLVENT_GAP_FRACTION: f64 = 0.05;
/// Recentered torsions closer than this fraction of `max ‖w‖` count as Cauchy.
pub const CAUCHY_FRACTION: f64 = 0.02;
/// At most this many distinct tail masks are examined.
pub const TAIL_CAP: usize = 32;

/// `‖w_A - w_B‖_{L²}`, torsions extended by zero (`w_∅ ≡ 0`).
pub fn gamma_distance(base: &StiffnessOperator, a: &DomainMask, b: &DomainMask) -> Result<f64> {
    torsion_of(base, a)?.l2_distance(&torsion_of(base, b)?)
}

/// Two clusters of components obtained by cutting the longest edge of the
/// single-linkage tree, plus the debris left out of both.
#[derive(Debug, Clone)]
pub struct ClusterSplit {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub debris: Vec<usize>,
    pub separation: f64,
}

pub fn split_clusters(mask: &DomainMask) -> Option<ClusterSplit> {
    let g = mask.grid();
    let total = mask.count() as f64;
    let (major, minor): (Vec<Vec<usize>>, Vec<Vec<usize>>) = components(mask)
        .into_iter()
        .partition(|c| c.len() as f64 > DEBRIS_FRACTION * total);
    if major.len() < 2 {
        return None;
    }
    let n = major.len();
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { set_distance(&g, &major[i], &major[j]) }).collect())
        .collect();
    // Prim's tree; removing its longest edge leaves the two clusters.
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    let mut edges = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    for j in 1..n {
        best[j] = (d[0][j], 0);
    }
    for _ in 1..n {
        let next = (0..n)
            .filter(|&j| !in_tree[j])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .expect("vertices remain");
        edges.push((best[next].0, best[next].1, next));
        in_tree[next] = true;
        for j in 0..n {
            if !in_tree[j] && d[next][j] < best[j].0 {
                best[j] = (d[next][j], next);
            }
        }
    }
    let cut = edges
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .map(|(k, _)| k)
        .expect("at least one edge");
    let mut side = vec![usize::MAX; n];
    side[0] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for (k, &(_, a, b)) in edges.iter().enumerate() {
            if k == cut {
                continue;
            }
            for (x, y) in [(a, b), (b, a)] {
                if side[x] != usize::MAX && side[y] == usize::MAX {
                    side[y] = side[x];
                    changed = true;
                }
            }
        }
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (c, s) in major.iter().zip(&side) {
        if *s == 0 {
            first.extend(c);
        } else {
            second.extend(c);
        }
    }
    first.sort_unstable();
    second.sort_unstable();
    let mut debris: Vec<usize> = minor.into_iter().flatten().collect();
    debris.sort_unstable();
    let separation = set_distance(&g, &first, &second);
    Some(ClusterSplit {
        first,
        second,
        debris,
        separation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeVerdict {
    Compactness,
    Dichotomy,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub verdict: ShapeVerdict,
    /// Trajectory indices of the examined tail.
    pub tail: Vec<usize>,
    /// The two clusters per tail mask, present for a dichotomy verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<(DomainMask, DomainMask)>>,
    /// Cluster separation per tail mask (zero with fewer than two clusters).
    pub separations: Vec<f64>,
    pub component_volumes: Vec<(f64, f64)>,
    pub debris_volumes: Vec<f64>,
    /// `‖R_{Ω_n} - R_{Ω̃_n}‖` with `Ω̃_n` the union of the two clusters.
    pub resolvent_gap: Vec<f64>,
    /// `‖R_{Ω_n}‖ = 1/λ₁(Ω_n)`.
    pub resolvent_norm: Vec<f64>,
    /// Largest pairwise distance of recentered tail torsions over `max ‖w‖`.
    pub torsion_spread: f64,
}

fn tail_indices(traj: &ShapeTrajectory) -> Vec<usize> {
    let mut idx: Vec<usize> = Vec::new();
    for i in traj.tail() {
        if idx.last().map_or(true, |&j| traj.masks[j] != traj.masks[i]) {
            idx.push(i);
        }
    }
    let skip = idx.len().saturating_sub(TAIL_CAP);
    idx.split_off(skip)
}

/// Largest pairwise `L²` distance among the functions, over the largest norm.
fn relative_spread(fs: &[GridFunction]) -> Result<f64> {
    let scale = fs.iter().map(GridFunction::l2_norm).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for (i, a) in fs.iter().enumerate() {
        for b in &fs[i + 1..] {
            worst = worst.max(a.l2_distance(b)?);
        }
    }
    Ok(worst / scale)
}

pub fn detect_dichotomy(traj: &ShapeTrajectory, base: &StiffnessOperator) -> Result<DichotomyReport> {
    if traj.is_empty() {
        return Err(Error::Structure("empty trajectory".into()));
    }
    let g = base.grid();
    let hn = g.cell_volume();
    let tail = tail_indices(traj);
    let mut report = DichotomyReport {
        verdict: ShapeVerdict::Inconclusive,
        tail: tail.clone(),
        components: None,
        separations: Vec::new(),
        component_volumes: Vec::new(),
        debris_volumes: Vec::new(),
        resolvent_gap: Vec::new(),
        resolvent_norm: Vec::new(),
        torsion_spread: 0.0,
    };

    let mut pairs = Vec::new();
    let mut all_split = true;
    for &i in &tail {
        let mask = &traj.masks[i];
        let norm = match restrict(base, mask) {
            Ok(op) => resolvent_norm(&op)?,
            Err(Error::EmptyDomain) => 0.0,
            Err(e) => return Err(e),
        };
        report.resolvent_norm.push(norm);
        match split_clusters(mask) {
            Some(split) => {
                let a = DomainMask::from_indices(g, split.first.iter().copied())?;
                let b = DomainMask::from_indices(g, split.second.iter().copied())?;
                let tilde = a.union(&b)?;
                let gap = if split.debris.is_empty() {
                    0.0
                } else {
                    resolvent_norm_diff_masks(base, mask, &tilde)?
                };
                report.separations.push(split.separation);
                report.component_volumes.push((a.volume(), b.volume()));
                report.debris_volumes.push(split.debris.len() as f64 * hn);
                report.resolvent_gap.push(gap);
                pairs.push((a, b));
            }
            None => {
                all_split = false;
                report.separations.push(0.0);
                report.component_volumes.push((mask.volume(), 0.0));
                report.debris_volumes.push(0.0);
                report.resolvent_gap.push(0.0);
            }
        }
    }

    let recentered: Vec<GridFunction> = tail
        .iter()
        .map(|&i| traj.torsions[i].values.shifted(centering_shift(&traj.masks[i])))
        .collect();
    report.torsion_spread = relative_spread(&recentered)?;

    if all_split && tail.len() >= 2 {
        let increasing = report.separations.windows(2).all(|w| w[1] > w[0]);
        let floor_ok = tail.iter().zip(&report.component_volumes).all(|(&i, &(a, b))| {
            a.min(b) >= MIN_CLUSTER_FRACTION * traj.masks[i].volume()
        });
        let debris_ok = tail
            .iter()
            .zip(&report.debris_volumes)
            .all(|(&i, &d)| d <= DEBRIS_FRACTION * traj.masks[i].volume());
        let gap_ok = report
            .resolvent_gap
            .iter()
            .zip(&report.resolvent_norm)
            .all(|(gap, norm)| *gap <= RESOLVENT_GAP_FRACTION * norm);
        if increasing && floor_ok && debris_ok && gap_ok {
            report.verdict = ShapeVerdict::Dichotomy;
            report.components = Some(pairs);
            return Ok(report);
        }
    }
    if report.torsion_spread < CAUCHY_FRACTION {
        report.verdict = ShapeVerdict::Compactness;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemicontinuityReport {
    /// `|{w_tail > 1e-8 · max w_tail}|` with `w_tail` the last torsion.
    pub limit_volume: f64,
    pub min_tail_volume: f64,
    /// Relative pairwise spread of the tail torsions (the convergence check).
    pub tail_spread: f64,
    /// `limit_volume ≤ min_tail_volume + h^N`.
    pub holds: bool,
}

/// Default convergence tolerance of [`volume_semicontinuity_check`].
pub const GAMMA_TOLERANCE: f64 = 0.05;

/// `|Ω_limit| ≤ liminf |Ω_n|` on the trajectory tail, whose
/// torsions must agree to `tolerance · max ‖w‖` in `L²`.
pub fn volume_semicontinuity_check(traj: &ShapeTrajectory, tolerance: f64) -> Result<SemicontinuityReport> {
    if !(tolerance > 0.0) {
        return Err(param("tolerance", format!("must be positive, got {tolerance}")));
    }
    if traj.is_empty() {
        return Err(Error::Structure("empty trajectory".into()));
    }
    let tail = traj.tail();
    let ws: Vec<GridFunction> = tail.iter().map(|&i| traj.torsions[i].values.clone()).collect();
    let tail_spread = relative_spread(&ws)?;
    if tail_spread >= tolerance {
        return Err(Error::Precondition(format!(
            "tail torsions spread {tail_spread:.3e} relative, above {tolerance:.3e}"
        )));
    }
    let last = ws.last().expect("nonempty tail");
    let threshold = 1e-8 * last.max();
    let hn = last.grid().cell_volume();
    let limit_volume = if last.max() > 0.0 {
        last.values().iter().filter(|&&v| v > threshold).count() as f64 * hn
    } else {
        0.0
    };
    let min_tail_volume = tail.iter().map(|&i| traj.masks[i].volume()).fold(f64::INFINITY, f64::min);
    Ok(SemicontinuityReport {
        limit_volume,
        min_tail_volume,
        tail_spread,
        holds: limit_volume <= min_tail_volume + hn * (1.0 + 1e-12),
    })
}
