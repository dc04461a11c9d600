//! Seeded synthetic sequences, one per branch of the trichotomy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sequence::FunctionSequence;
use crate::error::{param, Result};
use crate::grid::{dist, Grid, GridFunction, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// A fixed bump moved by a growing multiple of `e₁`.
    TranslatingBump,
    /// `n^{-N/2} φ(x/n)`.
    FlatteningBump,
    /// Two bumps of mass 0.4 each drifting apart.
    SeparatingPair,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    pub family: Family,
    pub seed: u64,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Cell width shared by every grid of the sequence.
    #[serde(default = "default_h")]
    pub h: f64,
}

fn default_length() -> usize {
    32
}

fn default_dim() -> usize {
    1
}

fn default_h() -> f64 {
    0.25
}

impl GeneratorParams {
    pub fn new(family: Family, seed: u64) -> Self {
        GeneratorParams {
            family,
            seed,
            length: default_length(),
            dim: default_dim(),
            h: default_h(),
        }
    }
}

/// Mass carried by each bump of the separating pair.
pub const PAIR_BUMP_MASS: f64 = 0.4;

/// `(1 - |x|²/r²)²₊`.
pub fn bump(x: &Point, center: &Point, radius: f64) -> f64 {
    let t = dist(x, center) / radius;
    if t >= 1.0 {
        0.0
    } else {
        (1.0 - t * t).powi(2)
    }
}

/// Centered grid of cell width `h` whose half-width is the smallest whole
/// number `≥ reach`, so that all grids of a sequence are aligned.
fn grid_reaching(dim: usize, h: f64, reach: f64) -> Result<Grid> {
    let half_width = reach.ceil();
    let resolution = (2.0 * half_width / h).round() as usize;
    Grid::new(dim, half_width, resolution)
}

/// Amplitude making the discrete mass of `a · bump(·, 0, r)` equal `mass`.
fn amplitude(dim: usize, h: f64, radius: f64, mass: f64) -> Result<f64> {
    let g = grid_reaching(dim, h, radius + 1.0)?;
    let unit = GridFunction::from_fn(g, |x| bump(x, &[0.0, 0.0], radius)).mass();
    Ok((mass / unit).sqrt())
}

pub fn generate(p: &GeneratorParams) -> Result<FunctionSequence> {
    if p.length < 8 {
        return Err(param("length", format!("must be at least 8, got {}", p.length)));
    }
    if !(p.h > 0.0 && (1.0 / p.h - (1.0 / p.h).round()).abs() < 1e-9) {
        return Err(param("h", "must be the reciprocal of a positive integer"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let radius = rng.random_range(1.5..2.5);
    let dim = p.dim;
    let h = p.h;
    let origin = [0.0, 0.0];
    let mut entries = Vec::with_capacity(p.length);
    match p.family {
        Family::TranslatingBump => {
            let mass = rng.random_range(0.6..1.2);
            let step = rng.random_range(2.0..4.0);
            let a = amplitude(dim, h, radius, mass)?;
            for n in 1..=p.length {
                let c = [n as f64 * step, 0.0];
                let g = grid_reaching(dim, h, n as f64 * step + radius + 1.0)?;
                entries.push(GridFunction::from_fn(g, |x| a * bump(x, &c, radius)));
            }
        }
        Family::FlatteningBump => {
            let mass = rng.random_range(0.6..1.2);
            let a = amplitude(dim, h, radius, mass)?;
            for n in 1..=p.length {
                let t = n as f64;
                let scale = t.powf(-(dim as f64) / 2.0);
                let g = grid_reaching(dim, h, t * radius + 1.0)?;
                entries.push(GridFunction::from_fn(g, |x| {
                    scale * a * bump(&[x[0] / t, x[1] / t], &origin, radius)
                }));
            }
        }
        Family::SeparatingPair => {
            let a = amplitude(dim, h, radius, PAIR_BUMP_MASS)?;
            for n in 1..=p.length {
                let half = radius + 1.0 + n as f64;
                let (l, r) = ([-half, 0.0], [half, 0.0]);
                let g = grid_reaching(dim, h, half + radius + 1.0)?;
                entries.push(GridFunction::from_fn(g, |x| a * (bump(x, &l, radius) + bump(x, &r, radius))));
            }
        }
    }
    FunctionSequence::new(entries)
}
