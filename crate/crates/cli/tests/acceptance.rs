//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured runtime against its budget. Exits nonzero if any criterion fails.
//!
//! Run a subset with `cargo test -p fracshape-cli --test acceptance -- 3 9`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use fracshape_core::cc::{
    classify, cutoff_defect, dichotomy_split, generate, generators::bump, lieb_translation_search, Family,
    GeneratorParams, Verdict,
};
use fracshape_core::cc::generators::PAIR_BUMP_MASS;
use fracshape_core::dirichlet::resolvent_norm_diff_masks;
use fracshape_core::shape::{
    ball_mask, components, detect_dichotomy, minimize_many, two_ball_experiment, FunctionalSpec, Schedule,
    ShapeTrajectory, ShapeVerdict,
};
use fracshape_core::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_gagliardo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for (dim, half_width, res) in [(1, 4.0, 128), (2, 2.0, 16)] {
        let g = build_grid(dim, half_width, res).unwrap();
        let op = ok(assemble_stiffness(&g, 0.5))?;
        for _ in 0..20 {
            let u = random_function(&mut rng, g);
            let got = ok(gagliardo_sq(&op, &u))?;
            worst = worst.max(rel(got, gagliardo_oracle(&g, 0.5, &u)));
        }
    }
    ensure!(worst <= 1e-12, "largest relative error {worst:.3e}");
    Ok(format!("largest relative error {worst:.2e} over 40 functions"))
}

fn c2_fourier() -> Outcome {
    let mut lines = Vec::new();
    for s in [0.3, 0.5, 0.7] {
        let mut errs = Vec::new();
        for res in [256, 512] {
            let g = build_grid(1, 8.0, res).unwrap();
            let op = ok(assemble_stiffness(&g, s))?;
            let u = GridFunction::from_fn(g, |x| (-x[0] * x[0] / 8.0).exp());
            let direct = ok(gagliardo_sq(&op, &u))?;
            let spectral = ok(fourier_seminorm_sq(&g, &op.params(), &u))?;
            errs.push(rel(spectral, direct));
        }
        ensure!(errs[0] <= 0.05, "s = {s}: discrepancy {:.3e} at 256", errs[0]);
        ensure!(errs[1] < errs[0], "s = {s}: discrepancy grew from {:.3e} to {:.3e}", errs[0], errs[1]);
        lines.push(format!("s={s}: {:.2e} -> {:.2e}", errs[0], errs[1]));
    }
    Ok(lines.join(", "))
}

fn c3_spectrum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let s = 0.5;
    let (mut res_max, mut orth_max, mut sign_min) = (0.0f64, 0.0f64, f64::INFINITY);
    for (dim, half_width, res) in [(1, 2.0, 64), (2, 1.5, 12)] {
        let g = build_grid(dim, half_width, res).unwrap();
        let base = ok(assemble_stiffness(&g, s))?;
        ensure!(base.symmetry_defect() == 0.0, "stiffness asymmetric by {:.3e}", base.symmetry_defect());
        for _ in 0..25 {
            let mask = random_mask(&mut rng, g, 0.5, 4);
            let op = ok(restrict(&base, &mask))?;
            let a = restricted_matrix_oracle(&g, s, &mask);
            let asym = (&a - a.transpose()).amax();
            ensure!(asym == 0.0, "restricted matrix asymmetric by {asym:.3e}");
            let k = 3.min(op.size());
            let spec = ok(eigenpairs(&op, k))?;
            ensure!(spec.eigenvalues[0] > 0.0, "lambda_1 = {}", spec.eigenvalues[0]);
            let hn = g.cell_volume();
            for (j, (l, u)) in spec.eigenvalues.iter().zip(&spec.eigenfunctions).enumerate() {
                let v = ok(op.gather(u))?;
                let r = (&a * &v - &v * (l * hn)).norm() / (l * hn * v.norm());
                res_max = res_max.max(r);
                for (i, w) in spec.eigenfunctions.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    orth_max = orth_max.max((ok(u.inner(w))? - target).abs());
                }
            }
            let u1 = &spec.eigenfunctions[0];
            let scale = u1.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let low = mask.active_indices().iter().map(|&i| u1.values()[i]).fold(f64::INFINITY, f64::min) / scale;
            sign_min = sign_min.min(low);
        }
    }
    ensure!(res_max <= 1e-8, "eigen-residual {res_max:.3e}");
    ensure!(orth_max <= 1e-8, "orthonormality defect {orth_max:.3e}");
    ensure!(sign_min >= -1e-10, "first eigenfunction dips to {sign_min:.3e} of its maximum");
    Ok(format!(
        "residual {res_max:.1e}, orthonormality {orth_max:.1e}, min u1/max u1 {sign_min:.2e} on 50 masks"
    ))
}

/// 25 nested pairs on a 64-cell line and 25 on a 12x12 square.
fn nested_pairs(seed: u64) -> Vec<(StiffnessOperator, DomainMask, DomainMask)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (dim, half_width, res) in [(1, 2.0, 64), (2, 1.5, 12)] {
        let g = build_grid(dim, half_width, res).unwrap();
        let base = assemble_stiffness(&g, 0.5).unwrap();
        for _ in 0..25 {
            let (inner, outer) = nested_pair(&mut rng, g);
            out.push((base.clone(), inner, outer));
        }
    }
    out
}

fn c4_monotonicity() -> Outcome {
    let (mut lam_slack, mut w_excess) = (f64::INFINITY, f64::NEG_INFINITY);
    for (base, inner, outer) in nested_pairs(104) {
        let a = ok(restrict(&base, &inner))?;
        let b = ok(restrict(&base, &outer))?;
        let la = ok(eigenpairs(&a, 3))?.eigenvalues;
        let lb = ok(eigenpairs(&b, 3))?.eigenvalues;
        for k in 0..3 {
            lam_slack = lam_slack.min(la[k] - lb[k]);
        }
        let wa = ok(solve_torsion(&a))?.values;
        let wb = ok(solve_torsion(&b))?.values;
        for (x, y) in wa.values().iter().zip(wb.values()) {
            w_excess = w_excess.max(x - y);
        }
    }
    ensure!(lam_slack >= -1e-8, "lambda_k(inner) - lambda_k(outer) reaches {lam_slack:.3e}");
    ensure!(w_excess <= 1e-10, "w_inner - w_outer reaches {w_excess:.3e}");
    Ok(format!("min eigen gap {lam_slack:.2e}, max torsion excess {w_excess:.2e} on 50 pairs"))
}

fn c5_dunford() -> Outcome {
    let mut slack = f64::INFINITY;
    for (base, inner, outer) in nested_pairs(104) {
        let a = ok(restrict(&base, &inner))?;
        let b = ok(restrict(&base, &outer))?;
        let la = ok(eigenpairs(&a, 3))?.eigenvalues;
        let lb = ok(eigenpairs(&b, 3))?.eigenvalues;
        let gap = ok(resolvent_norm_diff(&a, &b))?;
        for k in 0..3 {
            slack = slack.min(gap - (1.0 / la[k] - 1.0 / lb[k]).abs());
        }
    }
    ensure!(slack >= -1e-8, "inequality violated by {:.3e}", -slack);
    Ok(format!("min slack {slack:.2e} over 150 inequalities"))
}

fn c6_projection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let g = build_grid(1, 2.0, 64).unwrap();
    let base = ok(assemble_stiffness(&g, 0.5))?;
    let mut slack = f64::INFINITY;
    for _ in 0..10 {
        let (inner, outer) = nested_pair(&mut rng, g);
        let w = ok(solve_torsion(&ok(restrict(&base, &outer))?))?.values;
        let wt = ok(solve_torsion(&ok(restrict(&base, &inner))?))?.values;
        let best = ok(base.gagliardo_sq(&ok(w.sub(&wt))?))?;
        for n in 0..100 {
            let xi = random_supported(&mut rng, &inner);
            // Half near the projection (perturbations down to 1e-6), half arbitrary.
            let v = if n < 50 {
                ok(wt.add(&xi.scaled(wt.max() * 10f64.powf(-6.0 * n as f64 / 49.0))))?
            } else {
                xi.scaled(rng.random_range(0.0..2.0) * wt.max())
            };
            let q = ok(base.gagliardo_sq(&ok(w.sub(&v))?))?;
            slack = slack.min(q - best);
        }
    }
    ensure!(slack >= -1e-9, "a competitor beats the projection by {:.3e}", -slack);
    Ok(format!("min Q(w - v) - Q(w - w~) = {slack:.2e} over 1000 competitors"))
}

fn c7_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    let mut families = 0;
    for (n, (base, inner, outer)) in nested_pairs(107).into_iter().step_by(2).take(20).enumerate() {
        let a = ok(restrict(&base, &outer))?;
        let b = ok(restrict(&base, &inner))?;
        worst = worst.max(ok(torsion_resolvent_bound_check(&a, &b))?.duality_residual);
        if n % 5 == 0 {
            // Shrinking family: remove 1, 2, 4, 8 cells of a fixed random order.
            let mut order = outer.active_indices();
            order.shuffle(&mut rng);
            let mut rows = Vec::new();
            for removed in [1usize, 2, 4, 8] {
                ensure!(removed < outer.count(), "outer mask too small for the family");
                let mut shrunk = outer.clone();
                for &c in &order[..removed] {
                    shrunk.set(c, false);
                }
                let lhs = ok(resolvent_norm_diff_masks(&base, &outer, &shrunk))?;
                let w = ok(dirichlet::torsion_of(&base, &outer))?;
                let rhs = ok(w.l2_distance(&ok(dirichlet::torsion_of(&base, &shrunk))?))?;
                rows.push((lhs, rhs));
            }
            for w in rows.windows(2) {
                ensure!(
                    w[1].0 >= w[0].0 * (1.0 - 1e-10) && w[1].1 >= w[0].1 * (1.0 - 1e-10),
                    "co-trend broken: {:?} then {:?}",
                    w[0],
                    w[1]
                );
            }
            families += 1;
        }
    }
    ensure!(worst <= 1e-8, "duality residual {worst:.3e}");
    Ok(format!("max duality residual {worst:.2e} on 20 pairs; co-trend holds on {families} families"))
}

fn c8_two_ball() -> Outcome {
    let g = build_grid(1, 32.0, 512).unwrap();
    let base = ok(assemble_stiffness(&g, 0.5))?;
    let h = g.h();
    let d: Vec<f64> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|c| c * h).collect();
    let rows = ok(two_ball_experiment(&base, 64.0 * h, &d))?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    ensure!(gaps.iter().all(|&x| x > 0.0), "nonpositive gap in {gaps:?}");
    ensure!(gaps.windows(2).all(|w| w[1] < w[0]), "gaps not strictly decreasing: {gaps:?}");
    let ratio = gaps[4] / gaps[0];
    ensure!(ratio <= 0.1, "gap(128)/gap(8) = {ratio:.3}");
    Ok(format!("gaps {:.3e} .. {:.3e}, ratio {ratio:.3}", gaps[0], gaps[4]))
}

fn two_half_balls(g: Grid, half_cells: usize, d_cells: usize) -> DomainMask {
    let h = g.h();
    let r = 0.5 * half_cells as f64 * h;
    let off = 0.5 * d_cells as f64 * h + r;
    let vol = half_cells as f64 * h;
    ball_mask(&g, &[-off, 0.0], vol)
        .unwrap()
        .union(&ball_mask(&g, &[off, 0.0], vol).unwrap())
        .unwrap()
}

fn c9_dichotomy() -> Outcome {
    let g = build_grid(1, 8.0, 128).unwrap();
    let base = ok(assemble_stiffness(&g, 0.5))?;
    let c = 24.0 * g.h();
    let seeds: Vec<u64> = (0..10).collect();
    let l2 = FunctionalSpec::lambda(2);
    let runs = ok(minimize_many(&l2, &base, c, 10_000, &seeds, Schedule::default()))?;
    for t in &runs {
        let comps = components(t.final_mask());
        let sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
        ensure!(
            sizes.len() == 2 && sizes.iter().all(|&n| n.abs_diff(12) <= 2),
            "lambda2 seed {}: component sizes {sizes:?}",
            t.seed
        );
    }

    let masks: Vec<DomainMask> = [4, 8, 16, 32].iter().map(|&d| two_half_balls(g, 12, d)).collect();
    let synthetic = ok(ShapeTrajectory::from_masks(&l2, &base, masks, 0))?;
    let verdict = ok(detect_dichotomy(&synthetic, &base))?.verdict;
    ensure!(verdict == ShapeVerdict::Dichotomy, "synthetic receding pair: {verdict:?}");

    let l1 = FunctionalSpec::lambda(1);
    let oracle = (0..=128 - 24)
        .map(|start| dense_eigen_oracle(&g, 0.5, &interval(g, start, 24))[0])
        .fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    for t in ok(minimize_many(&l1, &base, c, 10_000, &seeds, Schedule::default()))? {
        ensure!(components(t.final_mask()).len() == 1, "lambda1 seed {}: not contiguous", t.seed);
        let constant = ok(ShapeTrajectory::from_masks(&l1, &base, vec![t.final_mask().clone(); 4], t.seed))?;
        let v = ok(detect_dichotomy(&constant, &base))?.verdict;
        ensure!(v == ShapeVerdict::Compactness, "lambda1 seed {}: {v:?}", t.seed);
        let e = rel(t.final_value(), oracle);
        ensure!(e <= 0.01, "lambda1 seed {}: J = {} vs interval oracle {oracle}", t.seed, t.final_value());
        worst = worst.max(e);
    }
    Ok(format!("10/10 two-cluster lambda2 optima; lambda1 within {worst:.1e} of the interval oracle"))
}

fn c10_trichotomy() -> Outcome {
    let mut hits = 0;
    let mut alpha_err = 0.0f64;
    for (family, expected) in [
        (Family::TranslatingBump, Verdict::Compactness),
        (Family::FlatteningBump, Verdict::Vanishing),
        (Family::SeparatingPair, Verdict::Dichotomy),
    ] {
        for seed in 0..20 {
            let seq = ok(generate(&GeneratorParams::new(family, seed)))?;
            let r = ok(classify(&seq, 0.2 * seq.mass_limit()))?;
            ensure!(r.verdict == expected, "{family:?} seed {seed}: {:?}", r.verdict);
            if family == Family::SeparatingPair {
                let a = r.alpha.ok_or("dichotomy without alpha")?;
                alpha_err = alpha_err.max(rel(a, PAIR_BUMP_MASS));
            }
            hits += 1;
        }
    }
    ensure!(alpha_err <= 0.05, "alpha off by {:.2}%", 100.0 * alpha_err);
    Ok(format!("{hits}/60 verdicts, alpha within {:.2}%", 100.0 * alpha_err))
}

fn c11_cutoff() -> Outcome {
    let g = build_grid(1, 32.0, 512).unwrap();
    let op = ok(assemble_stiffness(&g, 0.5))?;
    let c = [0.0, 0.0];
    let u = GridFunction::from_fn(g, |x| bump(x, &c, 3.0));
    let defects: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&r| ok(cutoff_defect(&op, &u, &c, r)))
        .collect::<std::result::Result<_, _>>()?;
    ensure!(defects.windows(2).all(|w| w[1] < w[0]), "defects not decreasing: {defects:?}");

    let mut ops: HashMap<u64, StiffnessOperator> = HashMap::new();
    let mut splits = 0;
    let mut slack = f64::INFINITY;
    for seed in 0..20 {
        let seq = ok(generate(&GeneratorParams::new(Family::SeparatingPair, seed)))?;
        for u in seq.entries() {
            let g = u.grid();
            let op = ops
                .entry(g.half_width().to_bits())
                .or_insert_with(|| assemble_stiffness(&g, 0.5).unwrap());
            let argmax = (0..g.cell_count())
                .max_by(|&a, &b| u.values()[a].total_cmp(&u.values()[b]).then(b.cmp(&a)))
                .unwrap();
            let sp = ok(dichotomy_split(op, u, &g.center(argmax), 2.5, 5.0))?;
            let energy = ok(op.gagliardo_sq(u))?;
            slack = slack.min((sp.seminorm_defect + sp.defect_bound) / energy);
            splits += 1;
        }
    }
    ensure!(slack >= -1e-12, "seminorm defect below the bound by {:.3e} (relative)", -slack);
    Ok(format!(
        "defects {:.3e} > {:.3e} > {:.3e} > {:.3e}; {splits} splits, min relative slack {slack:.2e}",
        defects[0], defects[1], defects[2], defects[3]
    ))
}

fn c12_lieb() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let g = build_grid(1, 4.0, 64).unwrap();
    let op = ok(assemble_stiffness(&g, 0.5))?;
    let mut satisfied = 0;
    let mut ratio = 0.0f64;
    for trial in 0..50 {
        let a = random_mask(&mut rng, g, 0.3, 4);
        let b = random_mask(&mut rng, g, 0.3, 4);
        let o = ok(lieb_translation_search(&op, &a, &b))?;
        ensure!(o.satisfied, "trial {trial}: no shift meets the bound (best {:.4e} vs {:.4e})", o.lambda1_intersection, o.bound);
        ensure!(o.lambda1_intersection <= o.bound, "trial {trial}: reported shift exceeds the bound");
        satisfied += 1;
        ratio = ratio.max(o.lambda1_intersection / o.bound);
    }
    Ok(format!("{satisfied}/50 satisfied, largest lambda1(A_z n B)/bound {ratio:.3}"))
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect()
}

fn c13_reproducibility() -> Outcome {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let line = json!({"dim": 1, "half_width": 2.0, "resolution": 32});
    let configs = [
        ("grid", json!({"grid": line})),
        ("eig", json!({"grid": {"dim": 2, "half_width": 1.0, "resolution": 10}, "params": {"mask": "full", "k": 3}})),
        ("torsion", json!({"grid": line, "params": {"mask": {"ball": {"center": [0.25], "volume_cells": 12}}}})),
        ("two-ball", json!({"grid": {"dim": 1, "half_width": 16.0, "resolution": 256}, "params": {"volume_cells": 32, "distances_cells": [4, 8, 16]}})),
        ("minimize", json!({"grid": line, "functional": "lambda2", "seeds": [0, 1, 2, 3], "params": {"volume_cells": 8, "iterations": 2000}})),
        ("classify", json!({"seeds": [0, 1, 2], "params": {"family": "separating-pair"}})),
        ("lieb", json!({"grid": line, "seeds": [0, 1, 2, 3]})),
        ("audit", json!({"grid": line, "seeds": [0, 1]})),
    ];
    let mut files = 0;
    for (sub, cfg) in configs {
        let path = tmp.path().join(format!("{sub}.json"));
        fs::write(&path, cfg.to_string()).unwrap();
        let mut outs = Vec::new();
        for run in ["a", "b"] {
            let out = tmp.path().join(format!("{sub}-{run}"));
            let o = Command::new(env!("CARGO_BIN_EXE_fracshape"))
                .args([sub, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
                .output()
                .unwrap();
            ensure!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
            outs.push(out);
        }
        let (a, b) = (artifacts(&outs[0]), artifacts(&outs[1]));
        ensure!(a == b, "{sub}: reruns differ");
        let manifests: Vec<Value> = outs
            .iter()
            .map(|o| serde_json::from_str(&fs::read_to_string(o.join("manifest.json")).unwrap()).unwrap())
            .collect();
        ensure!(manifests[0]["files"] == manifests[1]["files"], "{sub}: manifest hashes differ");
        let listed: Vec<&str> = manifests[0]["files"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
        ensure!(listed == a.keys().map(String::as_str).collect::<Vec<_>>(), "{sub}: manifest misses files");
        for f in manifests[0]["files"].as_array().unwrap() {
            let name = f["path"].as_str().unwrap();
            ensure!(
                f["sha256"] == fracshape_cli::run::sha256_hex(&a[name]).as_str(),
                "{sub}: hash of {name} does not match its content"
            );
        }
        files += a.len();
    }
    Ok(format!("8 experiment kinds, {files} files byte-identical across reruns"))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const fn criterion(id: usize, name: &'static str, secs: u64, run: fn() -> Outcome) -> Criterion {
    Criterion {
        id,
        name,
        budget: Duration::from_secs(secs),
        run,
    }
}

const CRITERIA: [Criterion; 13] = [
    criterion(1, "Gagliardo brute-force equivalence", 10, c1_gagliardo),
    criterion(2, "Fourier identity", 30, c2_fourier),
    criterion(3, "spectral structure", 60, c3_spectrum),
    criterion(4, "domain monotonicity", 60, c4_monotonicity),
    criterion(5, "Dunford inequality", 120, c5_dunford),
    criterion(6, "projection property", 30, c6_projection),
    criterion(7, "torsion/resolvent duality and co-trend", 60, c7_duality),
    criterion(8, "two-ball gap signature", 300, c8_two_ball),
    criterion(9, "dichotomy signature", 600, c9_dichotomy),
    criterion(10, "trichotomy classifier", 120, c10_trichotomy),
    criterion(11, "cut-off defect decay and split bound", 120, c11_cutoff),
    criterion(12, "translation lemma", 300, c12_lieb),
    criterion(13, "reproducibility", 60, c13_reproducibility),
];

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > c.budget => Err(format!("over budget ({:.1}s)", elapsed.as_secs_f64())),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        failed += usize::from(result.is_err());
        println!(
            "criterion {:>2} {tag} {} [{:.2}s / {}s]: {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
