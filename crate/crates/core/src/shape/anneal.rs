//! Volume-preserving simulated annealing over cell masks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::functional::{eval_functional, FunctionalSpec};
use crate::dirichlet::{restrict, solve_torsion, TorsionFunction};
use crate::error::{param, Error, Result};
use crate::grid::{DomainMask, GridFunction};
use crate::stiffness::StiffnessOperator;

/// `T_j = T₀ · cooling^j`, `j` counting steps since the last reheat; `T₀`
/// defaults to `|J(Ω₀)| / 10`.
///
/// After `reheat_after` steps without a new best value, once the temperature
/// has fallen below `1e-3 T₀`, the walk is reheated to `T₀`. The recorded
/// trajectory keeps the best masks across reheats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default)]
    pub initial_temperature: Option<f64>,
    #[serde(default = "default_cooling")]
    pub cooling: f64,
    /// `None` disables reheating.
    #[serde(default = "default_reheat")]
    pub reheat_after: Option<usize>,
}

fn default_cooling() -> f64 {
    0.995
}

fn default_reheat() -> Option<usize> {
    Some(1500)
}

/// Relative decrease needed to record a new best mask; smaller changes are
/// rounding noise between congruent masks.
const IMPROVEMENT: f64 = 1e-12;

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            initial_temperature: None,
            cooling: default_cooling(),
            reheat_after: default_reheat(),
        }
    }
}

/// An accepted exchange.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub iteration: usize,
    pub removed: usize,
    pub added: usize,
    pub value: f64,
}

/// A minimizing sequence in compressed form: `masks[n]` is the best mask
/// from step `found_at[n]` until the next entry (or step `steps`), so the
/// per-step sequence is nonincreasing in `J` and constant between entries.
/// Every accepted exchange, including uphill ones, is kept in `move_log`.
#[derive(Debug, Clone)]
pub struct ShapeTrajectory {
    pub masks: Vec<DomainMask>,
    pub values: Vec<f64>,
    pub torsions: Vec<TorsionFunction>,
    pub found_at: Vec<usize>,
    /// Index of the last step; step 0 is the initial mask.
    pub steps: usize,
    pub seed: u64,
    pub move_log: Vec<Move>,
}

#[derive(Serialize)]
struct Line<'a> {
    index: usize,
    step: usize,
    value: f64,
    cells: usize,
    mask: &'a DomainMask,
}

impl ShapeTrajectory {
    /// A trajectory taking one step per given mask (no annealing); values
    /// and torsions are computed, the move log is empty.
    pub fn from_masks(spec: &FunctionalSpec, base: &StiffnessOperator, masks: Vec<DomainMask>, seed: u64) -> Result<Self> {
        if masks.is_empty() {
            return Err(Error::Structure("trajectory needs at least one mask".into()));
        }
        let values = masks
            .iter()
            .map(|m| eval_functional(spec, base, m))
            .collect::<Result<Vec<_>>>()?;
        let torsions = torsions(base, &masks)?;
        Ok(ShapeTrajectory {
            found_at: (0..masks.len()).collect(),
            steps: masks.len() - 1,
            masks,
            values,
            torsions,
            seed,
            move_log: Vec::new(),
        })
    }

    /// Entries alive during the last third of the steps.
    pub fn tail(&self) -> Vec<usize> {
        let total = self.steps + 1;
        let first_step = total - total.div_ceil(3);
        let first = self.found_at.partition_point(|&t| t <= first_step).saturating_sub(1);
        (first..self.masks.len()).collect()
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn final_mask(&self) -> &DomainMask {
        self.masks.last().expect("trajectories are nonempty")
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("trajectories are nonempty")
    }

    /// One JSON object per line: index, first step, value, cell count and
    /// the mask.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for (index, (mask, &value)) in self.masks.iter().zip(&self.values).enumerate() {
            let line = Line {
                index,
                step: self.found_at[index],
                value,
                cells: mask.count(),
                mask,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
            out.push('\n');
        }
        out
    }
}

fn torsions(base: &StiffnessOperator, masks: &[DomainMask]) -> Result<Vec<TorsionFunction>> {
    masks
        .par_iter()
        .map(|m| match restrict(base, m) {
            Ok(op) => solve_torsion(&op),
            Err(Error::EmptyDomain) => Ok(TorsionFunction {
                mask: m.clone(),
                values: GridFunction::zeros(base.grid()),
                residual: 0.0,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

fn is_boundary(mask: &DomainMask, i: usize) -> bool {
    let g = mask.grid();
    let interior_neighbors = g.neighbors(i).count();
    interior_neighbors < 2 * g.dim() || g.neighbors(i).any(|n| !mask.contains(n))
}

/// Anneal toward `min J(Ω)` subject to `|Ω| = c`.
///
/// Starts from `c / h^N` cells drawn uniformly. Each step swaps a boundary
/// cell of the mask with an exterior cell, chosen half of the time among
/// cells touching the mask and otherwise uniformly, then applies the
/// Metropolis rule at temperature `T_j`.
pub fn minimize_shape(
    spec: &FunctionalSpec,
    base: &StiffnessOperator,
    volume: f64,
    iterations: usize,
    seed: u64,
    schedule: Schedule,
) -> Result<ShapeTrajectory> {
    let g = base.grid();
    let cells = volume / g.cell_volume();
    let m = cells.round();
    if !((cells - m).abs() < 1e-9 * cells.max(1.0) && m >= 2.0) {
        return Err(param("c", format!("{volume} is not an integer number (>= 2) of cells")));
    }
    let m = m as usize;
    if m >= g.cell_count() {
        return Err(param("c", format!("{m} cells leave no room to move in a box of {}", g.cell_count())));
    }
    if spec.k > m {
        return Err(param("c", format!("{m} cells carry fewer than {} eigenvalues", spec.k)));
    }
    if !(schedule.cooling > 0.0 && schedule.cooling <= 1.0) {
        return Err(param("cooling", format!("must lie in (0, 1], got {}", schedule.cooling)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..g.cell_count()).collect();
    order.shuffle(&mut rng);
    let mut mask = DomainMask::from_indices(g, order[..m].iter().copied())?;
    let mut value = eval_functional(spec, base, &mask)?;
    let t0 = match schedule.initial_temperature {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(param("initial_temperature", format!("must be positive, got {t}"))),
        None => (value.abs() / 10.0).max(f64::MIN_POSITIVE),
    };

    let mut masks = vec![mask.clone()];
    let mut values = vec![value];
    let mut found_at = vec![0];
    let mut move_log = Vec::new();
    let mut temperature = t0;
    let mut last_best = 0;

    for iteration in 0..iterations {
        let inside = mask.active_indices();
        let boundary: Vec<usize> = inside.iter().copied().filter(|&i| is_boundary(&mask, i)).collect();
        let removed = boundary[rng.random_range(0..boundary.len())];
        let added = if rng.random_bool(0.5) {
            let touching: Vec<usize> = inside
                .iter()
                .flat_map(|&i| g.neighbors(i))
                .filter(|&n| !mask.contains(n))
                .collect();
            if touching.is_empty() {
                None
            } else {
                Some(touching[rng.random_range(0..touching.len())])
            }
        } else {
            None
        };
        let added = match added {
            Some(a) => a,
            None => {
                let outside: Vec<usize> = (0..g.cell_count()).filter(|&i| !mask.contains(i)).collect();
                outside[rng.random_range(0..outside.len())]
            }
        };
        let mut candidate = mask.clone();
        candidate.set(removed, false);
        candidate.set(added, true);
        let next = eval_functional(spec, base, &candidate)?;
        let delta = next - value;
        let accept = delta < 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
        temperature *= schedule.cooling;
        if let Some(stall) = schedule.reheat_after {
            if iteration - last_best >= stall && temperature < 1e-3 * t0 {
                temperature = t0;
                last_best = iteration;
            }
        }
        if !accept {
            continue;
        }
        mask = candidate;
        value = next;
        move_log.push(Move {
            iteration,
            removed,
            added,
            value,
        });
        let best = *values.last().unwrap();
        if value < best - IMPROVEMENT * best.abs() {
            last_best = iteration;
            masks.push(mask.clone());
            values.push(value);
            found_at.push(iteration + 1);
        }
    }

    let torsions = torsions(base, &masks)?;
    Ok(ShapeTrajectory {
        masks,
        values,
        torsions,
        found_at,
        steps: iterations,
        seed,
        move_log,
    })
}

/// Independent runs, one per seed, in seed order.
pub fn minimize_many(
    spec: &FunctionalSpec,
    base: &StiffnessOperator,
    volume: f64,
    iterations: usize,
    seeds: &[u64],
    schedule: Schedule,
) -> Result<Vec<ShapeTrajectory>> {
    seeds
        .par_iter()
        .map(|&s| minimize_shape(spec, base, volume, iterations, s, schedule))
        .collect()
}
