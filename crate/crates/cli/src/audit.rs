//! The bounds audit: every inequality the library relies on, checked on
//! randomized instances drawn from a fixed seed list.
//!
//! Each check reduces to `lhs ≤ rhs + tol` over its instances and reports
//! the smallest slack `rhs + tol - lhs` (negative means violated). A check
//! whose computation errors fails with the error as its detail.

use std::collections::BTreeMap;

use fracshape_core::cc::{cutoff_defect, dichotomy_split, generators::bump, make_cutoffs};
use fracshape_core::dirichlet::{resolvent_norm_diff_masks, torsion_of};
use fracshape_core::shape::{eval_functional, mask_eigenvalues, FunctionalSpec};
use fracshape_core::{
    assemble_stiffness, build_grid, eigenpairs, resolvent_norm_diff, restrict, solve_torsion,
    torsion_resolvent_bound_check, DomainMask, GridFunction, Result, StiffnessOperator,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Random instances drawn per seed when the config does not say.
pub const DEFAULT_INSTANCES: usize = 6;

/// Smallest grid the random instances need.
pub const MIN_AUDIT_CELLS: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct CheckInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
}

/// The audit suite, in report order.
pub const CHECKS: &[CheckInfo] = &[
    CheckInfo {
        name: "stiffness-symmetry",
        description: "k_ij = k_ji; tolerance relative to the largest coupling",
        tolerance: 1e-12,
    },
    CheckInfo {
        name: "stiffness-sign",
        description: "couplings k_ij and exterior weights rho_i are nonnegative",
        tolerance: 0.0,
    },
    CheckInfo {
        name: "maximum-principle",
        description: "torsion functions are nonnegative; tolerance relative to max w",
        tolerance: 1e-12,
    },
    CheckInfo {
        name: "eigenvalue-monotonicity",
        description: "lambda_k(inner) >= lambda_k(outer) for nested masks, k <= 3",
        tolerance: 1e-8,
    },
    CheckInfo {
        name: "torsion-monotonicity",
        description: "w_inner <= w_outer pointwise for nested masks",
        tolerance: 1e-10,
    },
    CheckInfo {
        name: "dunford",
        description: "|1/lambda_k(inner) - 1/lambda_k(outer)| <= ||R_outer - R_inner||, k <= 3",
        tolerance: 1e-8,
    },
    CheckInfo {
        name: "torsion-resolvent-duality",
        description: "integral of (R_outer - R_inner) f equals the pairing of f with w_outer - w_inner",
        tolerance: 1e-8,
    },
    CheckInfo {
        name: "resolvent-torsion-cotrend",
        description: "on a shrinking nested family both ||R - R_n|| and ||w - w_n|| are nondecreasing; tolerance relative",
        tolerance: 1e-10,
    },
    CheckInfo {
        name: "poincare",
        description: "Q(u) >= lambda_1 ||u||^2 for u supported in the mask; tolerance relative",
        tolerance: 1e-8,
    },
    CheckInfo {
        name: "cutoff-partition",
        description: "phi^2 + psi^2 <= 1, phi = 1 on B_R and 0 off B_2R, psi the reverse",
        tolerance: 1e-12,
    },
    CheckInfo {
        name: "cutoff-defect-decay",
        description: "cut-off defect of a fixed bump is nonincreasing in R in {2, 4, 8, 16}; tolerance relative",
        tolerance: 1e-12,
    },
    CheckInfo {
        name: "split-defect-bound",
        description: "[u]^2 - [v]^2 - [w]^2 >= -2 (phi-defect at R1 + psi-defect at R2)",
        tolerance: 1e-10,
    },
    CheckInfo {
        name: "empty-domain-conventions",
        description: "lambda(empty) = +inf, w_empty = 0, ||R_empty|| = 0, ||R_A - R_empty|| = 1/lambda_1(A)",
        tolerance: 1e-8,
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub description: String,
    pub tolerance: f64,
    pub passed: bool,
    /// Number of inequalities evaluated.
    pub evaluations: usize,
    /// Smallest `rhs + tol - lhs` (`+inf` if nothing was evaluated).
    #[serde(with = "fracshape_core::serde_float")]
    pub slack: f64,
    /// Where the slack was smallest, or the error that stopped the check.
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub passed: bool,
    pub seeds: Vec<u64>,
    pub instances_per_seed: usize,
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }
}

/// Running minimum of the slack of one check.
struct Tally {
    tol: f64,
    slack: f64,
    evaluations: usize,
    detail: String,
    error: Option<String>,
}

impl Tally {
    fn new(tol: f64) -> Self {
        Tally {
            tol,
            slack: f64::INFINITY,
            evaluations: 0,
            detail: String::new(),
            error: None,
        }
    }

    /// `lhs ≤ rhs + scale · tol`.
    fn bound(&mut self, lhs: f64, rhs: f64, scale: f64, what: impl FnOnce() -> String) {
        self.evaluations += 1;
        let slack = rhs + scale * self.tol - lhs;
        // NaN slack is a failure too.
        if !(slack >= self.slack) {
            self.slack = slack;
            self.detail = format!("{} (lhs {lhs:.6e}, rhs {rhs:.6e})", what());
        }
    }

    fn fail(&mut self, e: impl std::fmt::Display) {
        if self.error.is_none() {
            self.error = Some(e.to_string());
        }
    }

    fn absorb(&mut self, r: Result<()>) {
        if let Err(e) = r {
            self.fail(e);
        }
    }

    fn finish(self, info: &CheckInfo) -> CheckResult {
        let passed = self.error.is_none() && self.slack >= 0.0;
        CheckResult {
            name: info.name.to_string(),
            description: info.description.to_string(),
            tolerance: self.tol,
            passed,
            evaluations: self.evaluations,
            slack: self.slack,
            detail: self.error.unwrap_or(self.detail),
        }
    }
}

/// One random nested pair with probes.
struct Instance {
    label: String,
    inner: DomainMask,
    outer: DomainMask,
    /// Outer cells in random order: removing prefixes gives a nested family.
    order: Vec<usize>,
    /// Functions supported in the outer mask.
    probes: Vec<GridFunction>,
}

fn random_mask(rng: &mut ChaCha8Rng, base: &StiffnessOperator, p: f64, min: usize) -> DomainMask {
    let g = base.grid();
    loop {
        let cells: Vec<bool> = (0..g.cell_count()).map(|_| rng.random_bool(p)).collect();
        let m = DomainMask::new(g, cells).expect("length matches");
        if m.count() >= min {
            return m;
        }
    }
}

fn instances(base: &StiffnessOperator, seeds: &[u64], per_seed: usize) -> Vec<Instance> {
    let g = base.grid();
    let mut out = Vec::new();
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for n in 0..per_seed {
            let outer = random_mask(&mut rng, base, 0.5, 4);
            let inner = loop {
                let keep: Vec<usize> = outer.active_indices().into_iter().filter(|_| rng.random_bool(0.7)).collect();
                if keep.len() >= 3 && keep.len() < outer.count() {
                    break DomainMask::from_indices(g, keep).expect("cells of the grid");
                }
            };
            let mut order = outer.active_indices();
            order.shuffle(&mut rng);
            let probes = (0..3)
                .map(|_| {
                    let v = (0..g.cell_count())
                        .map(|i| if outer.contains(i) { rng.random_range(-1.0..1.0) } else { 0.0 })
                        .collect();
                    GridFunction::new(g, v).expect("length matches")
                })
                .collect();
            out.push(Instance {
                label: format!("seed {seed} instance {n}"),
                inner,
                outer,
                order,
                probes,
            });
        }
    }
    out
}

/// Run `f` on every instance in parallel and feed the results to the tally
/// in instance order.
fn per_instance<T: Send>(
    tally: &mut Tally,
    inst: &[Instance],
    f: impl Fn(&Instance) -> Result<T> + Sync,
    mut record: impl FnMut(&mut Tally, &Instance, T),
) {
    let results: Vec<Result<T>> = inst.par_iter().map(&f).collect();
    for (i, r) in inst.iter().zip(results) {
        match r {
            Ok(v) => record(tally, i, v),
            Err(e) => tally.fail(format!("{}: {e}", i.label)),
        }
    }
}

fn check(info: &CheckInfo, tol: f64, base: &StiffnessOperator, inst: &[Instance]) -> CheckResult {
    let mut t = Tally::new(tol);
    let m = base.size();
    match info.name {
        "stiffness-symmetry" => {
            let scale = (0..m).flat_map(|i| base.coupling_row(i).iter()).fold(0.0f64, |a, &b| a.max(b.abs()));
            t.bound(base.symmetry_defect(), 0.0, scale, || "largest |k_ij - k_ji|".into());
        }
        "stiffness-sign" => {
            for i in 0..m {
                let row_min = base.coupling_row(i).iter().copied().fold(f64::INFINITY, f64::min);
                t.bound(-row_min, 0.0, 1.0, || format!("row {i} coupling"));
                t.bound(-base.tail()[i], 0.0, 1.0, || format!("exterior weight of cell {i}"));
            }
        }
        "maximum-principle" => per_instance(
            &mut t,
            inst,
            |i| solve_torsion(&restrict(base, &i.outer)?).map(|w| w.values),
            |t, i, w| t.bound(-w.min(), 0.0, w.max(), || format!("{}: min w", i.label)),
        ),
        "eigenvalue-monotonicity" | "dunford" => {
            let dunford = info.name == "dunford";
            per_instance(
                &mut t,
                inst,
                |i| {
                    let a = restrict(base, &i.inner)?;
                    let b = restrict(base, &i.outer)?;
                    let k = 3.min(a.size());
                    let la = eigenpairs(&a, k)?.eigenvalues;
                    let lb = eigenpairs(&b, k)?.eigenvalues;
                    let gap = if dunford { resolvent_norm_diff(&a, &b)? } else { 0.0 };
                    Ok((la, lb, gap))
                },
                |t, i, (la, lb, gap)| {
                    for k in 0..la.len() {
                        if dunford {
                            let lhs = (1.0 / la[k] - 1.0 / lb[k]).abs();
                            t.bound(lhs, gap, 1.0, || format!("{}: k = {}", i.label, k + 1));
                        } else {
                            t.bound(lb[k], la[k], 1.0, || format!("{}: k = {}", i.label, k + 1));
                        }
                    }
                },
            );
        }
        "torsion-monotonicity" => per_instance(
            &mut t,
            inst,
            |i| Ok((torsion_of(base, &i.inner)?, torsion_of(base, &i.outer)?)),
            |t, i, (wi, wo)| {
                let (cell, excess) = wi
                    .values()
                    .iter()
                    .zip(wo.values())
                    .map(|(a, b)| a - b)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (c, d)| if d > acc.1 { (c, d) } else { acc });
                t.bound(excess, 0.0, 1.0, || format!("{}: cell {cell}", i.label));
            },
        ),
        "torsion-resolvent-duality" => per_instance(
            &mut t,
            inst,
            |i| torsion_resolvent_bound_check(&restrict(base, &i.outer)?, &restrict(base, &i.inner)?),
            |t, i, r| t.bound(r.duality_residual, 0.0, 1.0, || format!("{}: duality residual", i.label)),
        ),
        "resolvent-torsion-cotrend" => per_instance(
            &mut t,
            inst,
            |i| {
                let mut rows = Vec::new();
                for removed in [1usize, 2, 4, 8] {
                    if removed >= i.outer.count() {
                        break;
                    }
                    let mut shrunk = i.outer.clone();
                    for &c in &i.order[..removed] {
                        shrunk.set(c, false);
                    }
                    let lhs = resolvent_norm_diff_masks(base, &i.outer, &shrunk)?;
                    let rhs = torsion_of(base, &i.outer)?.l2_distance(&torsion_of(base, &shrunk)?)?;
                    rows.push((lhs, rhs));
                }
                Ok(rows)
            },
            |t, i, rows| {
                for (n, w) in rows.windows(2).enumerate() {
                    t.bound(w[0].0, w[1].0, w[1].0, || format!("{}: resolvent step {n}", i.label));
                    t.bound(w[0].1, w[1].1, w[1].1, || format!("{}: torsion step {n}", i.label));
                }
            },
        ),
        "poincare" => per_instance(
            &mut t,
            inst,
            |i| {
                let l1 = eigenpairs(&restrict(base, &i.outer)?, 1)?.eigenvalues[0];
                let q: Vec<(f64, f64)> = i
                    .probes
                    .iter()
                    .map(|u| Ok((base.gagliardo_sq(u)?, u.mass())))
                    .collect::<Result<_>>()?;
                Ok((l1, q))
            },
            |t, i, (l1, q)| {
                for (n, (form, mass)) in q.into_iter().enumerate() {
                    t.bound(l1 * mass, form, l1 * mass, || format!("{}: probe {n}", i.label));
                }
            },
        ),
        "cutoff-partition" => {
            for radius in [0.5, 1.0, 3.0] {
                let c = match make_cutoffs(radius) {
                    Ok(c) => c,
                    Err(e) => {
                        t.fail(e);
                        break;
                    }
                };
                for n in 0..=3000 {
                    let r = 3.0 * radius * n as f64 / 3000.0;
                    let (p, q) = (c.phi(r), c.psi(r));
                    t.bound(p * p + q * q, 1.0, 1.0, || format!("R = {radius}, r = {r}"));
                    if r <= radius {
                        t.bound((p - 1.0).abs() + q.abs(), 0.0, 1.0, || format!("inside B_R, R = {radius}, r = {r}"));
                    }
                    if r >= 2.0 * radius {
                        t.bound(p.abs() + (q - 1.0).abs(), 0.0, 1.0, || format!("outside B_2R, R = {radius}, r = {r}"));
                    }
                }
            }
        }
        "cutoff-defect-decay" => {
            let r = cutoff_decay(&mut t, base.s());
            t.absorb(r);
        }
        "split-defect-bound" => {
            let g = base.grid();
            let r1 = g.half_width() / 8.0;
            per_instance(
                &mut t,
                inst,
                |i| {
                    let u = &i.probes[0];
                    let heaviest = (0..g.cell_count())
                        .max_by(|&a, &b| u.values()[a].abs().total_cmp(&u.values()[b].abs()).then(b.cmp(&a)))
                        .expect("nonempty grid");
                    let split = dichotomy_split(base, u, &g.center(heaviest), r1, 2.0 * r1)?;
                    Ok((split, base.gagliardo_sq(u)?))
                },
                |t, i, (split, energy)| {
                    t.bound(-split.seminorm_defect, split.defect_bound, energy, || i.label.clone());
                },
            );
        }
        "empty-domain-conventions" => {
            let r = empty_conventions(&mut t, base, inst);
            t.absorb(r);
        }
        other => t.fail(format!("unknown check {other}")),
    }
    t.finish(info)
}

/// Fixed fixture: a bump of radius 3 on a 512-cell line of half-width 32.
fn cutoff_decay(t: &mut Tally, s: f64) -> Result<()> {
    let g = build_grid(1, 32.0, 512)?;
    let op = assemble_stiffness(&g, s)?;
    let c = [0.0, 0.0];
    let u = GridFunction::from_fn(g, |x| bump(x, &c, 3.0));
    let defects: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&r| cutoff_defect(&op, &u, &c, r))
        .collect::<Result<_>>()?;
    for (n, w) in defects.windows(2).enumerate() {
        t.bound(w[1], w[0], w[0], || format!("R = {} to R = {}", 2 << n, 4 << n));
    }
    Ok(())
}

fn empty_conventions(t: &mut Tally, base: &StiffnessOperator, inst: &[Instance]) -> Result<()> {
    let g = base.grid();
    let empty = DomainMask::empty(g);
    let lam = mask_eigenvalues(base, &empty, 3)?;
    let flag = |ok: bool| if ok { 0.0 } else { 1.0 };
    t.bound(flag(lam.iter().all(|&l| l == f64::INFINITY)), 0.0, 0.0, || "lambda_k(empty) = +inf".into());
    let j = eval_functional(&FunctionalSpec::lambda(1), base, &empty)?;
    t.bound(flag(j == f64::INFINITY), 0.0, 0.0, || "J(empty) = +inf".into());
    let w = torsion_of(base, &empty)?;
    t.bound(w.l2_norm(), 0.0, 0.0, || "w_empty = 0".into());
    t.bound(resolvent_norm_diff_masks(base, &empty, &empty)?, 0.0, 0.0, || "||R_empty - R_empty|| = 0".into());
    for i in inst {
        let l1 = eigenpairs(&restrict(base, &i.outer)?, 1)?.eigenvalues[0];
        let norm = resolvent_norm_diff_masks(base, &i.outer, &empty)?;
        t.bound((norm * l1 - 1.0).abs(), 0.0, 1.0, || format!("{}: ||R_A - R_empty|| l_1(A)", i.label));
    }
    Ok(())
}

/// Run the whole suite. `tolerances` overrides defaults by check name.
pub fn bounds_audit(
    base: &StiffnessOperator,
    seeds: &[u64],
    instances_per_seed: usize,
    tolerances: &BTreeMap<String, f64>,
) -> AuditReport {
    let inst = instances(base, seeds, instances_per_seed);
    let checks: Vec<CheckResult> = CHECKS
        .iter()
        .map(|info| {
            let tol = tolerances.get(info.name).copied().unwrap_or(info.tolerance);
            check(info, tol, base, &inst)
        })
        .collect();
    AuditReport {
        passed: checks.iter().all(|c| c.passed),
        seeds: seeds.to_vec(),
        instances_per_seed,
        checks,
    }
}

/// One line per check: name, default tolerance, description.
pub fn list_checks() -> String {
    CHECKS
        .iter()
        .map(|c| format!("{:<28} {:>8.1e}  {}\n", c.name, c.tolerance, c.description))
        .collect()
}
