//! Experiment configuration and its validation.
//!
//! A config file holds one [`ExperimentConfig`] object or an array of them
//! (a batch). Unknown keys are rejected everywhere. [`validate`] checks every
//! parameter against the preconditions of the operation it drives, so that
//! nothing is computed for a config that would fail halfway.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use fracshape_core::cc::{Family, GeneratorParams};
use fracshape_core::grid::GridSpec;
use fracshape_core::shape::{FunctionalSpec, Schedule};
use fracshape_core::stiffness::DENSE_BUDGET;
use fracshape_core::{DomainMask, Error as CoreError, Grid};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::audit::{CHECKS, DEFAULT_INSTANCES, MIN_AUDIT_CELLS};
use crate::error::{CliError, FieldError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Grid,
    Eig,
    Torsion,
    TwoBall,
    Minimize,
    Classify,
    Lieb,
    BoundsAudit,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Grid => "grid",
            Kind::Eig => "eig",
            Kind::Torsion => "torsion",
            Kind::TwoBall => "two-ball",
            Kind::Minimize => "minimize",
            Kind::Classify => "classify",
            Kind::Lieb => "lieb",
            Kind::BoundsAudit => "bounds-audit",
        }
    }

    fn needs_grid(self) -> bool {
        !matches!(self, Kind::Classify)
    }

    /// Keys accepted in `tolerances`.
    fn tolerance_keys(self) -> Vec<&'static str> {
        match self {
            Kind::Minimize => vec!["gamma"],
            Kind::BoundsAudit => CHECKS.iter().map(|c| c.name).collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One experiment as written in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out when the subcommand names the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Overrides of named tolerances; the accepted keys depend on the kind.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Kind-specific parameters.
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn default_s() -> f64 {
    0.5
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// Parse a config file: one experiment object or a batch array. The shape is
/// decided on the first non-blank character so that serde reports the real
/// error.
pub fn parse_config_file(text: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    let bad = |e: serde_json::Error| CliError::invalid("config", e.to_string());
    if text.trim_start().starts_with('[') {
        let batch: Vec<ExperimentConfig> = serde_json::from_str(text).map_err(bad)?;
        if batch.is_empty() {
            return Err(CliError::invalid("config", "batch holds no experiments"));
        }
        Ok(batch)
    } else {
        Ok(vec![serde_json::from_str(text).map_err(bad)?])
    }
}

/// Selects cells of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MaskSpec {
    Full,
    /// Run lengths alternating unset/set, starting with unset.
    Rle(String),
    /// Linear cell indices.
    Cells(Vec<usize>),
    Ball { center: Vec<f64>, volume_cells: usize },
}

impl MaskSpec {
    fn build(&self, g: Grid, field: &str) -> Result<DomainMask, FieldError> {
        let mask = match self {
            MaskSpec::Full => DomainMask::full(g),
            MaskSpec::Rle(r) => DomainMask::from_rle(g, r).map_err(|e| FieldError::new(field, e.to_string()))?,
            MaskSpec::Cells(c) => DomainMask::from_indices(g, c.iter().copied()).map_err(|e| FieldError::new(field, e.to_string()))?,
            MaskSpec::Ball { center, volume_cells } => {
                if center.len() != g.dim() {
                    return Err(FieldError::new(
                        format!("{field}.center"),
                        format!("needs {} coordinates, got {}", g.dim(), center.len()),
                    ));
                }
                if *volume_cells == 0 || *volume_cells > g.cell_count() {
                    return Err(FieldError::new(
                        format!("{field}.volume_cells"),
                        format!("must lie in 1..={}, got {volume_cells}", g.cell_count()),
                    ));
                }
                let mut c = [0.0; 2];
                c[..center.len()].copy_from_slice(center);
                fracshape_core::shape::ball_mask(&g, &c, *volume_cells as f64 * g.cell_volume())
                    .map_err(|e| FieldError::new(field, e.to_string()))?
            }
        };
        if mask.is_empty() {
            return Err(FieldError::new(field, "selects no cell"));
        }
        Ok(mask)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigParams {
    mask: MaskSpec,
    #[serde(default = "default_k")]
    k: usize,
}

fn default_k() -> usize {
    4
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorsionParams {
    mask: MaskSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoBallParams {
    volume_cells: usize,
    distances_cells: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinimizeParams {
    volume_cells: usize,
    iterations: usize,
    #[serde(default)]
    schedule: Schedule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyParams {
    family: Family,
    #[serde(default = "default_length")]
    length: usize,
    #[serde(default = "default_dim")]
    dim: usize,
    #[serde(default = "default_h")]
    h: f64,
    /// `ε` as a fraction of the sequence's mass limit.
    #[serde(default = "default_eps")]
    epsilon_fraction: f64,
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

fn default_eps() -> f64 {
    0.2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LiebParams {
    #[serde(default)]
    a: Option<MaskSpec>,
    #[serde(default)]
    b: Option<MaskSpec>,
    /// Cell probability of the random masks drawn per seed.
    #[serde(default = "default_density")]
    density: f64,
}

fn default_density() -> f64 {
    0.3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AuditParams {
    #[serde(default = "default_instances")]
    instances: usize,
}

fn default_instances() -> usize {
    DEFAULT_INSTANCES
}

/// The validated, typed form of a config.
#[derive(Debug, Clone)]
pub enum Task {
    Grid,
    Eig { mask: DomainMask, k: usize },
    Torsion { mask: DomainMask },
    TwoBall { volume_cells: usize, distances_cells: Vec<f64> },
    Minimize { functional: FunctionalSpec, volume_cells: usize, iterations: usize, schedule: Schedule, gamma: f64 },
    Classify { generators: Vec<GeneratorParams>, epsilon_fraction: f64 },
    Lieb { pair: Option<(DomainMask, DomainMask)>, density: f64 },
    Audit { instances: usize },
}

#[derive(Debug, Clone)]
pub struct Experiment {
    /// The config as it will be echoed in the manifest: kind resolved, seed
    /// override applied.
    pub config: ExperimentConfig,
    pub kind: Kind,
    pub grid: Option<Grid>,
    pub task: Task,
}

/// Cap on annealing iterations per seed.
pub const MAX_ITERATIONS: usize = 1_000_000;

/// Resolve the kind, apply the seed override and check everything.
///
/// All field problems are collected, not just the first.
pub fn validate(mut config: ExperimentConfig, kind: Option<Kind>, seed: Option<u64>) -> Result<Experiment, CliError> {
    let mut errs = Vec::new();
    let kind = match (config.kind, kind) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::invalid("kind", format!("config says `{a}` but the subcommand runs `{b}`")));
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return Err(CliError::invalid("kind", "missing; set it in the config or use a subcommand")),
    };
    config.kind = Some(kind);
    if let Some(s) = seed {
        config.seeds = vec![s];
    }
    if config.seeds.is_empty() {
        errs.push(FieldError::new("seeds", "must list at least one seed"));
    }
    let mut sorted = config.seeds.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        errs.push(FieldError::new("seeds", "must not repeat a seed"));
    }
    if !(config.s > 0.0 && config.s < 1.0) {
        errs.push(FieldError::new("s", format!("must lie in (0, 1), got {}", config.s)));
    }

    let grid = if kind.needs_grid() {
        match config.grid {
            None => {
                errs.push(FieldError::new("grid", "missing"));
                None
            }
            Some(spec) => match Grid::new(spec.dim, spec.half_width, spec.resolution) {
                Ok(g) if g.cell_count() > DENSE_BUDGET => {
                    errs.push(FieldError::new(
                        "grid",
                        format!("{} cells exceed the dense budget of {DENSE_BUDGET}", g.cell_count()),
                    ));
                    None
                }
                Ok(g) => Some(g),
                Err(CoreError::Parameter { field, reason }) => {
                    errs.push(FieldError::new(format!("grid.{field}"), reason));
                    None
                }
                Err(e) => {
                    errs.push(FieldError::new("grid", e.to_string()));
                    None
                }
            },
        }
    } else {
        if config.grid.is_some() {
            errs.push(FieldError::new("grid", format!("not used by `{kind}`")));
        }
        None
    };

    let known = kind.tolerance_keys();
    for (key, value) in &config.tolerances {
        if !known.contains(&key.as_str()) {
            let hint = if known.is_empty() { "none are accepted".to_string() } else { format!("expected one of {}", known.join(", ")) };
            errs.push(FieldError::new(format!("tolerances.{key}"), format!("unknown tolerance for `{kind}`; {hint}")));
        } else if !(value.is_finite() && *value > 0.0) {
            errs.push(FieldError::new(format!("tolerances.{key}"), format!("must be positive, got {value}")));
        }
    }

    let uses_functional = matches!(kind, Kind::Minimize);
    let functional = match (&config.functional, uses_functional) {
        (Some(_), false) => {
            errs.push(FieldError::new("functional", format!("not used by `{kind}`")));
            None
        }
        (None, true) => {
            errs.push(FieldError::new("functional", "missing"));
            None
        }
        (Some(src), true) => match FunctionalSpec::parse(src) {
            Ok(f) => Some(f),
            Err(e) => {
                errs.push(FieldError::new("functional", e.to_string()));
                None
            }
        },
        (None, false) => None,
    };

    let task = task_for(kind, &config, grid, functional, &mut errs);
    match task {
        Some(task) if errs.is_empty() => Ok(Experiment { config, kind, grid, task }),
        _ => Err(CliError::Invalid(errs)),
    }
}

fn params<T: serde::de::DeserializeOwned>(value: &Value, errs: &mut Vec<FieldError>) -> Option<T> {
    match serde_json::from_value(value.clone()) {
        Ok(p) => Some(p),
        Err(e) => {
            errs.push(FieldError::new("params", e.to_string()));
            None
        }
    }
}

fn task_for(
    kind: Kind,
    config: &ExperimentConfig,
    grid: Option<Grid>,
    functional: Option<FunctionalSpec>,
    errs: &mut Vec<FieldError>,
) -> Option<Task> {
    let mask = |spec: &MaskSpec, field: &str, errs: &mut Vec<FieldError>| -> Option<DomainMask> {
        match spec.build(grid?, field) {
            Ok(m) => Some(m),
            Err(e) => {
                errs.push(e);
                None
            }
        }
    };
    match kind {
        Kind::Grid => {
            params::<NoParams>(&config.params, errs)?;
            Some(Task::Grid)
        }
        Kind::Eig => {
            let p: EigParams = params(&config.params, errs)?;
            let m = mask(&p.mask, "params.mask", errs)?;
            if p.k == 0 || p.k > m.count() {
                errs.push(FieldError::new("params.k", format!("must lie in 1..={}, got {}", m.count(), p.k)));
                return None;
            }
            Some(Task::Eig { mask: m, k: p.k })
        }
        Kind::Torsion => {
            let p: TorsionParams = params(&config.params, errs)?;
            Some(Task::Torsion { mask: mask(&p.mask, "params.mask", errs)? })
        }
        Kind::TwoBall => {
            let p: TwoBallParams = params(&config.params, errs)?;
            let g = grid?;
            check_two_ball(g, p.volume_cells, &p.distances_cells, errs);
            Some(Task::TwoBall {
                volume_cells: p.volume_cells,
                distances_cells: p.distances_cells,
            })
        }
        Kind::Minimize => {
            let p: MinimizeParams = params(&config.params, errs)?;
            let g = grid?;
            let f = functional?;
            if p.volume_cells < 2 || p.volume_cells >= g.cell_count() {
                errs.push(FieldError::new(
                    "params.volume_cells",
                    format!("must lie in 2..{}, got {}", g.cell_count(), p.volume_cells),
                ));
            } else if f.k > p.volume_cells {
                errs.push(FieldError::new(
                    "params.volume_cells",
                    format!("{} cells cannot carry the {} eigenvalues `{}` needs", p.volume_cells, f.k, f.name),
                ));
            }
            if p.iterations > MAX_ITERATIONS {
                errs.push(FieldError::new("params.iterations", format!("at most {MAX_ITERATIONS}, got {}", p.iterations)));
            }
            if !(p.schedule.cooling > 0.0 && p.schedule.cooling < 1.0) {
                errs.push(FieldError::new("params.schedule.cooling", format!("must lie in (0, 1), got {}", p.schedule.cooling)));
            }
            if let Some(t) = p.schedule.initial_temperature {
                if !(t.is_finite() && t > 0.0) {
                    errs.push(FieldError::new("params.schedule.initial_temperature", format!("must be positive, got {t}")));
                }
            }
            if p.schedule.reheat_after == Some(0) {
                errs.push(FieldError::new("params.schedule.reheat_after", "must be positive (use null to disable)"));
            }
            let gamma = config.tolerances.get("gamma").copied().unwrap_or(fracshape_core::shape::detect::GAMMA_TOLERANCE);
            Some(Task::Minimize {
                functional: f,
                volume_cells: p.volume_cells,
                iterations: p.iterations,
                schedule: p.schedule,
                gamma,
            })
        }
        Kind::Classify => {
            let p: ClassifyParams = params(&config.params, errs)?;
            if p.length < 8 {
                errs.push(FieldError::new("params.length", format!("must be at least 8, got {}", p.length)));
            }
            if !(p.dim == 1 || p.dim == 2) {
                errs.push(FieldError::new("params.dim", format!("must be 1 or 2, got {}", p.dim)));
            }
            if !(p.h > 0.0 && (1.0 / p.h - (1.0 / p.h).round()).abs() < 1e-9) {
                errs.push(FieldError::new("params.h", format!("must be the reciprocal of a positive integer, got {}", p.h)));
            }
            if !(p.epsilon_fraction > 0.0 && p.epsilon_fraction < 0.5) {
                errs.push(FieldError::new(
                    "params.epsilon_fraction",
                    format!("must lie in (0, 0.5), got {}", p.epsilon_fraction),
                ));
            }
            let generators = config
                .seeds
                .iter()
                .map(|&seed| GeneratorParams {
                    family: p.family,
                    seed,
                    length: p.length,
                    dim: p.dim,
                    h: p.h,
                })
                .collect();
            Some(Task::Classify {
                generators,
                epsilon_fraction: p.epsilon_fraction,
            })
        }
        Kind::Lieb => {
            let p: LiebParams = params(&config.params, errs)?;
            if !(p.density > 0.0 && p.density <= 1.0) {
                errs.push(FieldError::new("params.density", format!("must lie in (0, 1], got {}", p.density)));
            }
            let pair = match (&p.a, &p.b) {
                (None, None) => None,
                (Some(a), Some(b)) => Some((mask(a, "params.a", errs)?, mask(b, "params.b", errs)?)),
                _ => {
                    errs.push(FieldError::new("params", "give both `a` and `b`, or neither for random pairs"));
                    return None;
                }
            };
            Some(Task::Lieb { pair, density: p.density })
        }
        Kind::BoundsAudit => {
            let p: AuditParams = params(&config.params, errs)?;
            if p.instances == 0 {
                errs.push(FieldError::new("params.instances", "must be positive"));
            }
            if grid?.cell_count() < MIN_AUDIT_CELLS {
                errs.push(FieldError::new("grid", format!("the audit needs at least {MIN_AUDIT_CELLS} cells")));
            }
            Some(Task::Audit { instances: p.instances })
        }
    }
}

/// The feasibility rules of the two-ball table, checked without assembling.
fn check_two_ball(g: Grid, volume_cells: usize, distances: &[f64], errs: &mut Vec<FieldError>) {
    if volume_cells < 2 || volume_cells % 2 != 0 || volume_cells > g.cell_count() {
        errs.push(FieldError::new(
            "params.volume_cells",
            format!("must be even and lie in 2..={}, got {volume_cells}", g.cell_count()),
        ));
        return;
    }
    if distances.is_empty() {
        errs.push(FieldError::new("params.distances_cells", "must list at least one distance"));
    }
    let h = g.h();
    let half = 0.5 * volume_cells as f64 * g.cell_volume();
    let radius = if g.dim() == 1 { half / 2.0 } else { (half / PI).sqrt() };
    let largest = 2.0 * (g.half_width() - 2.0 * radius) / h;
    for (i, &d) in distances.iter().enumerate() {
        if !(d.is_finite() && d >= 1.0) {
            errs.push(FieldError::new(format!("params.distances_cells[{i}]"), format!("must be at least one cell, got {d}")));
        } else if d > largest + 1e-9 {
            errs.push(FieldError::new(
                format!("params.distances_cells[{i}]"),
                format!("{d} puts the balls outside the box; at most {largest} cells fit"),
            ));
        }
    }
}
