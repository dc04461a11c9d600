//! Experiment dispatch, artifact writing and manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fracshape_core::cc::{classify, generate, lieb_translation_search};
use fracshape_core::shape::{
    components, detect_dichotomy, minimize_many, two_ball_csv, two_ball_experiment, volume_semicontinuity_check,
};
use fracshape_core::{
    assemble_stiffness, eigenpairs, restrict, solve_torsion, DomainMask, Grid, GridFunction, StiffnessOperator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::audit::bounds_audit;
use crate::config::{Experiment, Kind, Task};
use crate::error::CliError;

/// Name of the manifest written next to the artifacts.
pub const MANIFEST: &str = "manifest.json";

/// Artifacts of one experiment, keyed by file name (sorted).
#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    pub files: BTreeMap<String, Vec<u8>>,
    /// The headline result, also written as `summary.json`.
    pub summary: Value,
    /// Names of failed audit checks (empty otherwise).
    pub failed_checks: Vec<String>,
}

impl ReportBundle {
    fn text(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content.into_bytes());
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        self.text(name, to_json(value));
    }
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that round-trips, so equal values give equal bytes.
pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// CSV float: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn coord_header(g: Grid) -> &'static str {
    if g.dim() == 1 {
        "index,x"
    } else {
        "index,x,y"
    }
}

fn coord_cells(g: Grid, i: usize) -> String {
    let c = g.center(i);
    if g.dim() == 1 {
        format!("{i},{}", fmt_f64(c[0]))
    } else {
        format!("{i},{},{}", fmt_f64(c[0]), fmt_f64(c[1]))
    }
}

/// One row per cell: coordinates then the given columns.
fn cell_table(g: Grid, names: &[&str], columns: &[&[f64]]) -> String {
    let mut out = coord_header(g).to_string();
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for i in 0..g.cell_count() {
        out.push_str(&coord_cells(g, i));
        for c in columns {
            out.push(',');
            out.push_str(&fmt_f64(c[i]));
        }
        out.push('\n');
    }
    out
}

/// Compute the artifacts of a validated experiment. Nothing is written.
pub fn compute(exp: &Experiment) -> Result<ReportBundle, CliError> {
    let mut b = ReportBundle::default();
    let cfg = &exp.config;
    let base = match exp.grid {
        Some(g) => Some(assemble_stiffness(&g, cfg.s)?),
        None => None,
    };
    let base = || base.as_ref().expect("validated kinds that need a grid have one");
    match &exp.task {
        Task::Grid => {
            let op = base();
            let g = op.grid();
            let tail = op.tail();
            let diag = op.diag();
            let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
            let summary = json!({
                "grid": g,
                "h": g.h(),
                "cell_volume": g.cell_volume(),
                "cell_count": g.cell_count(),
                "s": op.s(),
                "c_norm": op.params().c_norm,
                "symmetry_defect": op.symmetry_defect(),
                "tail_min": fold(tail, f64::min, f64::INFINITY),
                "tail_max": fold(tail, f64::max, f64::NEG_INFINITY),
                "diag_min": fold(diag, f64::min, f64::INFINITY),
                "diag_max": fold(diag, f64::max, f64::NEG_INFINITY),
            });
            b.text("stiffness.csv", cell_table(g, &["tail", "diag"], &[tail, diag]));
            b.summary = summary;
        }
        Task::Eig { mask, k } => {
            let op = restrict(base(), mask)?;
            let spec = eigenpairs(&op, *k)?;
            let g = op.grid();
            let mut csv = String::from("k,lambda,residual\n");
            for (j, (l, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
                let _ = writeln!(csv, "{},{},{}", j + 1, fmt_f64(*l), fmt_f64(*r));
            }
            b.text("eigenvalues.csv", csv);
            let names: Vec<String> = (1..=*k).map(|j| format!("u{j}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let cols: Vec<&[f64]> = spec.eigenfunctions.iter().map(GridFunction::values).collect();
            b.text("eigenfunctions.csv", cell_table(g, &names, &cols));
            b.summary = json!({
                "cells": mask.count(),
                "volume": mask.volume(),
                "mask": mask.to_rle(),
                "eigenvalues": spec.eigenvalues,
                "residuals": spec.residuals,
                "poincare_constant": spec.eigenvalues[0].powf(-0.5),
            });
        }
        Task::Torsion { mask } => {
            let w = solve_torsion(&restrict(base(), mask)?)?;
            let g = mask.grid();
            b.text("torsion.csv", cell_table(g, &["w"], &[w.values.values()]));
            b.summary = json!({
                "cells": mask.count(),
                "volume": mask.volume(),
                "mask": mask.to_rle(),
                "residual": w.residual,
                "max": w.values.max(),
                "integral": w.values.integral(),
                "l2_norm": w.values.l2_norm(),
            });
        }
        Task::TwoBall { volume_cells, distances_cells } => {
            let op = base();
            let g = op.grid();
            let d: Vec<f64> = distances_cells.iter().map(|c| c * g.h()).collect();
            let rows = two_ball_experiment(op, *volume_cells as f64 * g.cell_volume(), &d)?;
            b.text("two_ball.csv", two_ball_csv(&rows));
            let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
            b.summary = json!({
                "rows": rows,
                "gap_positive": gaps.iter().all(|&x| x > 0.0),
                "gap_strictly_decreasing": gaps.windows(2).all(|w| w[1] < w[0]),
                "gap_ratio_last_first": gaps.last().unwrap() / gaps[0],
            });
        }
        Task::Minimize {
            functional,
            volume_cells,
            iterations,
            schedule,
            gamma,
        } => {
            let op = base();
            let volume = *volume_cells as f64 * op.grid().cell_volume();
            let trajs = minimize_many(functional, op, volume, *iterations, &cfg.seeds, *schedule)?;
            let mut csv = String::from("seed,final_value,components,entries,steps\n");
            let mut runs = Vec::new();
            for t in &trajs {
                b.text(&format!("trajectory-seed-{}.jsonl", t.seed), t.to_json_lines());
                let comps: Vec<usize> = components(t.final_mask()).iter().map(Vec::len).collect();
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    t.seed,
                    fmt_f64(t.final_value()),
                    comps.len(),
                    t.len(),
                    t.steps
                );
                let detector = detect_dichotomy(t, op)?;
                let semicontinuity = match volume_semicontinuity_check(t, *gamma) {
                    Ok(r) => serde_json::to_value(r).expect("serializes"),
                    Err(e) => json!({ "skipped": e.to_string() }),
                };
                runs.push(json!({
                    "seed": t.seed,
                    "final_value": t.final_value(),
                    "final_mask": t.final_mask().to_rle(),
                    "component_sizes": comps,
                    "verdict": detector.verdict,
                    "detector": detector,
                    "semicontinuity": semicontinuity,
                }));
            }
            b.text("minimize.csv", csv);
            b.summary = json!({ "functional": functional.name, "volume_cells": volume_cells, "runs": runs });
        }
        Task::Classify {
            generators,
            epsilon_fraction,
        } => {
            let results: Vec<Value> = generators
                .par_iter()
                .map(|p| {
                    let seq = generate(p)?;
                    let eps = epsilon_fraction * seq.mass_limit();
                    let report = classify(&seq, eps)?;
                    Ok(json!({ "seed": p.seed, "family": p.family, "epsilon": eps, "verdict": report.verdict, "report": report }))
                })
                .collect::<fracshape_core::Result<_>>()?;
            b.json("classify.json", &results);
            let verdicts: Vec<&Value> = results.iter().map(|r| &r["verdict"]).collect();
            b.summary = json!({ "verdicts": verdicts });
        }
        Task::Lieb { pair, density } => {
            let op = base();
            let pairs: Vec<(u64, DomainMask, DomainMask)> = match pair {
                Some((a, bm)) => vec![(cfg.seeds[0], a.clone(), bm.clone())],
                None => cfg.seeds.iter().map(|&s| random_pair(op, s, *density)).collect(),
            };
            let mut csv = String::from("seed,shift_x,shift_y,lambda1_intersection,lambda1_a,lambda1_b,bound,satisfied\n");
            let mut rows = Vec::new();
            for (seed, a, m) in &pairs {
                let o = lieb_translation_search(op, a, m)?;
                let _ = writeln!(
                    csv,
                    "{seed},{},{},{},{},{},{},{}",
                    o.shift[0],
                    o.shift[1],
                    fmt_f64(o.lambda1_intersection),
                    fmt_f64(o.lambda1_a),
                    fmt_f64(o.lambda1_b),
                    fmt_f64(o.bound),
                    u8::from(o.satisfied)
                );
                rows.push(json!({ "seed": seed, "a": a.to_rle(), "b": m.to_rle(), "outcome": o }));
            }
            b.text("lieb.csv", csv);
            let satisfied = rows.iter().filter(|r| r["outcome"]["satisfied"] == true).count();
            b.summary = json!({ "pairs": rows.len(), "satisfied": satisfied, "results": rows });
        }
        Task::Audit { instances } => {
            let report = bounds_audit(base(), &cfg.seeds, *instances, &cfg.tolerances);
            b.failed_checks = report.failed();
            b.summary = serde_json::to_value(&report).expect("serializes");
        }
    }
    let summary = b.summary.clone();
    b.json("summary.json", &summary);
    Ok(b)
}

/// Two masks of the given density drawn from `seed`, each nonempty.
pub fn random_pair(base: &StiffnessOperator, seed: u64, density: f64) -> (u64, DomainMask, DomainMask) {
    let g = base.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let cells: Vec<bool> = (0..g.cell_count()).map(|_| rng.random_bool(density)).collect();
        let m = DomainMask::new(g, cells).expect("length matches");
        if !m.is_empty() {
            return m;
        }
    };
    let a = draw();
    let b = draw();
    (seed, a, b)
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub kind: Kind,
    pub config: crate::config::ExperimentConfig,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<&'static str, &'static str>,
    /// Excluded from any reproducibility comparison.
    pub wall_time_seconds: f64,
    /// Sorted by path.
    pub files: Vec<FileEntry>,
}

pub fn versions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("fracshape-cli", env!("CARGO_PKG_VERSION")),
        ("fracshape-core", fracshape_core::VERSION),
    ])
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Validate-free entry point: compute, write the artifacts and the manifest
/// into `out`, and fail afterwards if the audit did.
pub fn run_experiment(exp: &Experiment, out: &Path) -> Result<ReportBundle, CliError> {
    let start = Instant::now();
    let bundle = compute(exp)?;
    let wall = start.elapsed().as_secs_f64();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    for (name, bytes) in &bundle.files {
        write(&out.join(name), bytes)?;
        files.push(FileEntry {
            path: name.clone(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = Manifest {
        kind: exp.kind,
        config: exp.config.clone(),
        seeds: exp.config.seeds.clone(),
        versions: versions(),
        wall_time_seconds: wall,
        files,
    };
    write(&out.join(MANIFEST), to_json(&manifest).as_bytes())?;
    if !bundle.failed_checks.is_empty() {
        return Err(CliError::AuditFailed(bundle.failed_checks.clone()));
    }
    Ok(bundle)
}

/// Directory of batch entry `index`.
pub fn batch_dir(root: &Path, index: usize, kind: Kind) -> PathBuf {
    root.join(format!("{index:03}-{kind}"))
}

/// Run a batch with at most `workers` experiments at a time, each in its own
/// directory under `root`. The batch manifest lists entries in config order.
pub fn run_batch(exps: &[Experiment], root: &Path, workers: usize) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<Result<ReportBundle, CliError>> = pool.install(|| {
        exps.par_iter()
            .enumerate()
            .map(|(i, e)| run_experiment(e, &batch_dir(root, i, e.kind)))
            .collect()
    });
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (i, (e, r)) in exps.iter().zip(&results).enumerate() {
        let dir = batch_dir(root, i, e.kind);
        let manifest = fs::read(dir.join(MANIFEST)).ok().map(|m| sha256_hex(&m));
        let (status, error) = match r {
            Ok(_) => ("ok", None),
            Err(err) => {
                failures.push(format!("{}: {err}", dir.display()));
                ("failed", Some(err.to_string()))
            }
        };
        entries.push(json!({
            "index": i,
            "kind": e.kind,
            "dir": dir.file_name().map(|n| n.to_string_lossy().into_owned()),
            "status": status,
            "error": error,
            "manifest_sha256": manifest,
        }));
    }
    let batch = json!({ "versions": versions(), "workers": workers, "experiments": entries });
    fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
    write(&root.join(MANIFEST), to_json(&batch).as_bytes())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Batch(failures))
    }
}
