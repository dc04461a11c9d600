//! Dirichlet restriction of the stiffness operator to a mask and the
//! solvers built on it: torsion, resolvent, eigenpairs, resolvent distances,
//! Poincaré constants and capacity.
//!
//! Eigenvalues are those of the generalized problem `A u = λ h^N u`, so the
//! resolvent `R f = A⁻¹ (h^N f)` has eigenvalues `1/λ_k` in the weighted
//! `L²` inner product.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::grid::{DomainMask, Grid, GridFunction};
use crate::linalg::{largest_magnitude_eigenvalue, pcg, smallest_eigenpairs, sorted_eigen, EigenOptions, EIGEN_SEED};
use crate::stiffness::StiffnessOperator;

/// Relative residual target of the linear solves.
pub const SOLVE_TOL: f64 = 1e-10;

/// The principal sub-operator of `A` on the cells of a nonempty mask.
/// Couplings to cells outside the mask stay folded into the diagonal.
#[derive(Debug)]
pub struct DirichletOperator {
    base: StiffnessOperator,
    mask: DomainMask,
    active: Vec<usize>,
    matrix: DMatrix<f64>,
    chol: OnceLock<Option<Cholesky<f64, Dyn>>>,
}

pub fn restrict(op: &StiffnessOperator, mask: &DomainMask) -> Result<DirichletOperator> {
    if mask.grid() != op.grid() {
        return Err(Error::Structure("mask and operator live on different grids".into()));
    }
    let active = mask.active_indices();
    if active.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let n = active.len();
    let matrix = DMatrix::from_fn(n, n, |r, c| op.entry(active[r], active[c]));
    Ok(DirichletOperator {
        base: op.clone(),
        mask: mask.clone(),
        active,
        matrix,
        chol: OnceLock::new(),
    })
}

impl DirichletOperator {
    pub fn base(&self) -> &StiffnessOperator {
        &self.base
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn grid(&self) -> Grid {
        self.base.grid()
    }

    /// Grid indices of the active cells, in dense order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn size(&self) -> usize {
        self.active.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn gather(&self, f: &GridFunction) -> Result<DVector<f64>> {
        f.check_grid(&self.grid())?;
        Ok(DVector::from_iterator(
            self.size(),
            self.active.iter().map(|&i| f.values()[i]),
        ))
    }

    pub fn scatter(&self, v: &DVector<f64>) -> GridFunction {
        let mut out = GridFunction::zeros(self.grid());
        for (k, &i) in self.active.iter().enumerate() {
            out.values_mut()[i] = v[k];
        }
        out
    }

    pub(crate) fn cholesky(&self) -> Result<&Cholesky<f64, Dyn>> {
        self.chol
            .get_or_init(|| Cholesky::new(self.matrix.clone()))
            .as_ref()
            .ok_or(Error::NotPositiveDefinite)
    }

    /// Resolvent action on a dense vector, through the Cholesky factor.
    pub(crate) fn resolvent_dense(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        let scaled = f * self.grid().cell_volume();
        Ok(self.cholesky()?.solve(&scaled))
    }

    fn solve_rhs(&self, rhs: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
        let out = pcg(&self.matrix, rhs, SOLVE_TOL, 10 * self.size().max(1))?;
        Ok((out.solution, out.relative_residual))
    }
}

#[derive(Debug, Clone)]
pub struct TorsionFunction {
    pub mask: DomainMask,
    pub values: GridFunction,
    pub residual: f64,
}

/// `A w = h^N 1` on the mask.
pub fn solve_torsion(op: &DirichletOperator) -> Result<TorsionFunction> {
    let rhs = DVector::from_element(op.size(), op.grid().cell_volume());
    let (w, residual) = op.solve_rhs(&rhs)?;
    Ok(TorsionFunction {
        mask: op.mask.clone(),
        values: op.scatter(&w),
        residual,
    })
}

/// Torsion function of a possibly empty mask (`w ≡ 0` for the empty set).
pub fn torsion_of(base: &StiffnessOperator, mask: &DomainMask) -> Result<GridFunction> {
    match restrict(base, mask) {
        Ok(op) => Ok(solve_torsion(&op)?.values),
        Err(Error::EmptyDomain) => Ok(GridFunction::zeros(base.grid())),
        Err(e) => Err(e),
    }
}

/// `R_Ω f`: solves `A u = h^N f` on the mask, zero outside.
pub fn apply_resolvent(op: &DirichletOperator, f: &GridFunction) -> Result<GridFunction> {
    let rhs = op.gather(f)? * op.grid().cell_volume();
    let (u, _) = op.solve_rhs(&rhs)?;
    Ok(op.scatter(&u))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending `λ_1 ≤ … ≤ λ_k`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal in the `h^N`-weighted inner product, largest-magnitude
    /// entry positive.
    #[serde(skip)]
    pub eigenfunctions: Vec<GridFunction>,
    /// `‖A u - λ h^N u‖ / (λ h^N ‖u‖)`.
    pub residuals: Vec<f64>,
}

pub fn eigenpairs(op: &DirichletOperator, k: usize) -> Result<Spectrum> {
    eigenpairs_with(op, k, EigenOptions::default())
}

pub fn eigenpairs_with(op: &DirichletOperator, k: usize, opts: EigenOptions) -> Result<Spectrum> {
    if k == 0 || k > op.size() {
        return Err(param(
            "k",
            format!("must lie in 1..={}, got {k}", op.size()),
        ));
    }
    let out = smallest_eigenpairs(&op.matrix, k, opts)?;
    let hn = op.grid().cell_volume();
    let eigenvalues = out.values.iter().map(|t| t / hn).collect();
    let eigenfunctions = out
        .vectors
        .iter()
        .map(|y| {
            let peak = y.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let sign = if peak < 0.0 { -1.0 } else { 1.0 };
            op.scatter(&(y * (sign / hn.sqrt())))
        })
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenfunctions,
        residuals: out.residuals,
    })
}

/// Every eigenvalue of the restricted problem, ascending, from a full
/// symmetric eigendecomposition. Cheaper than [`eigenpairs`] for small masks.
pub fn dense_eigenvalues(op: &DirichletOperator) -> Vec<f64> {
    let hn = op.grid().cell_volume();
    let (values, _) = sorted_eigen(op.matrix.clone());
    values.into_iter().map(|t| t / hn).collect()
}

/// `λ_1..λ_k` of a possibly empty mask; the empty set gives `+∞`.
pub fn eigenvalues_of(base: &StiffnessOperator, mask: &DomainMask, k: usize) -> Result<Vec<f64>> {
    match restrict(base, mask) {
        Ok(op) if op.size() >= k => Ok(eigenpairs(&op, k)?.eigenvalues),
        Ok(op) => {
            let mut v = eigenpairs(&op, op.size())?.eigenvalues;
            v.resize(k, f64::INFINITY);
            Ok(v)
        }
        Err(Error::EmptyDomain) => Ok(vec![f64::INFINITY; k]),
        Err(e) => Err(e),
    }
}

/// `‖R_A - R_B‖` in `L(L²)`, both resolvents extended by zero.
pub fn resolvent_norm_diff(a: &DirichletOperator, b: &DirichletOperator) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::Structure("operators live on different grids".into()));
    }
    let union = a.mask.union(&b.mask)?;
    let cells = union.active_indices();
    let pos_a = positions(&cells, a.active());
    let pos_b = positions(&cells, b.active());
    let n = cells.len();
    let apply = |f: &DVector<f64>| -> Result<DVector<f64>> {
        let fa = DVector::from_iterator(pos_a.len(), pos_a.iter().map(|&p| f[p]));
        let fb = DVector::from_iterator(pos_b.len(), pos_b.iter().map(|&p| f[p]));
        let ra = a.resolvent_dense(&fa)?;
        let rb = b.resolvent_dense(&fb)?;
        let mut out = DVector::zeros(n);
        for (k, &p) in pos_a.iter().enumerate() {
            out[p] += ra[k];
        }
        for (k, &p) in pos_b.iter().enumerate() {
            out[p] -= rb[k];
        }
        Ok(out)
    };
    // Factor once up front so the closure below cannot fail.
    a.cholesky()?;
    b.cholesky()?;
    let (norm, resid) = largest_magnitude_eigenvalue(n, |f| apply(f).expect("factored"), 1e-10, EIGEN_SEED)?;
    if resid > 1e-8 * norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
        return Err(Error::NoConvergence {
            method: "resolvent norm iteration",
            iterations: n,
            achieved: resid / norm,
            wanted: 1e-8,
        });
    }
    Ok(norm)
}

fn positions(cells: &[usize], subset: &[usize]) -> Vec<usize> {
    subset
        .iter()
        .map(|c| cells.binary_search(c).expect("subset of union"))
        .collect()
}

/// `‖R_Ω‖ = 1/λ_1(Ω)`.
pub fn resolvent_norm(op: &DirichletOperator) -> Result<f64> {
    Ok(1.0 / eigenpairs(op, 1)?.eigenvalues[0])
}

/// `‖R_A - R_B‖` for possibly empty masks (an empty set has `R = 0`).
pub fn resolvent_norm_diff_masks(base: &StiffnessOperator, a: &DomainMask, b: &DomainMask) -> Result<f64> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ok(0.0),
        (false, true) => resolvent_norm(&restrict(base, a)?),
        (true, false) => resolvent_norm(&restrict(base, b)?),
        (false, false) => resolvent_norm_diff(&restrict(base, a)?, &restrict(base, b)?),
    }
}

/// Quantities of the resolvent-versus-torsion comparison for nested masks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖R_A - R_B‖`.
    pub lhs: f64,
    /// `‖w_A - w_B‖_{L²}`.
    pub rhs: f64,
    /// `lhs / rhs` (zero when both vanish).
    pub constant: f64,
    /// `max_f |∫(R_A f - R_B f) - ∫ f (w_A - w_B)|` over `f ≡ 1` and a fixed
    /// nonconstant probe.
    pub duality_residual: f64,
}

/// `b`'s mask must be contained in `a`'s.
pub fn torsion_resolvent_bound_check(a: &DirichletOperator, b: &DirichletOperator) -> Result<BoundReport> {
    if !b.mask.is_subset_of(&a.mask)? {
        return Err(Error::Structure("second mask is not contained in the first".into()));
    }
    let lhs = resolvent_norm_diff(a, b)?;
    let wa = solve_torsion(a)?.values;
    let wb = solve_torsion(b)?.values;
    let dw = wa.sub(&wb)?;
    let rhs = dw.l2_norm();

    let grid = a.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(EIGEN_SEED);
    let probe = GridFunction::new(grid, (0..grid.cell_count()).map(|_| rng.random::<f64>() + 0.5).collect())?;
    let mut duality_residual = 0.0f64;
    for f in [GridFunction::constant(grid, 1.0), probe] {
        let diff = apply_resolvent(a, &f)?.sub(&apply_resolvent(b, &f)?)?;
        let left = diff.integral();
        let right = f.inner(&dw)?;
        duality_residual = duality_residual.max((left - right).abs());
    }
    let constant = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(BoundReport {
        lhs,
        rhs,
        constant,
        duality_residual,
    })
}

/// Least-squares slope and intercept of `log lhs` against `log rhs`:
/// the exponent `α` and `log C` in `lhs ≈ C rhs^α`. Pairs with a zero entry
/// are skipped; fewer than two usable points give `None`.
pub fn holder_exponent_fit(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(r, l)| *r > 0.0 && *l > 0.0)
        .map(|(r, l)| (r.ln(), l.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    Some((alpha, my - alpha * mx))
}

/// Optimal discrete Poincaré constant `λ_1^{-1/2}`.
pub fn poincare_constant(op: &DirichletOperator) -> Result<f64> {
    Ok(eigenpairs(op, 1)?.eigenvalues[0].powf(-0.5))
}

pub const CAPACITY_MAX_STEPS: usize = 2_000_000;

/// Discrete capacity `inf { Q(u) : u ≥ 1 on the mask }` by projected gradient
/// with step `1/(2 max d_i)`, stopping once the energy falls by less than
/// 1e-10 (relative) over 100 steps. The empty mask has capacity zero.
pub fn capacity_estimate(base: &StiffnessOperator, mask: &DomainMask) -> Result<f64> {
    if mask.grid() != base.grid() {
        return Err(Error::Structure("mask and operator live on different grids".into()));
    }
    if mask.is_empty() {
        return Ok(0.0);
    }
    let a = DMatrix::from_fn(base.size(), base.size(), |i, j| base.entry(i, j));
    let max_d = base.diag().iter().copied().fold(0.0, f64::max);
    let step = 1.0 / (2.0 * max_d);
    let constrained: Vec<bool> = mask.cells().to_vec();
    let mut u = DVector::from_iterator(base.size(), constrained.iter().map(|&c| if c { 1.0 } else { 0.0 }));
    let mut au = &a * &u;
    let mut energy = u.dot(&au);
    let mut checkpoint = energy;
    for it in 1..=CAPACITY_MAX_STEPS {
        // ∇Q = 2 A u
        u.axpy(-2.0 * step, &au, 1.0);
        for (v, &c) in u.iter_mut().zip(&constrained) {
            if c && *v < 1.0 {
                *v = 1.0;
            }
        }
        au.gemv(1.0, &a, &u, 0.0);
        energy = u.dot(&au);
        if it % 100 == 0 {
            if checkpoint - energy < 1e-10 * checkpoint {
                return Ok(energy);
            }
            checkpoint = energy;
        }
    }
    Err(Error::NoConvergence {
        method: "projected gradient (capacity)",
        iterations: CAPACITY_MAX_STEPS,
        achieved: (checkpoint - energy) / checkpoint,
        wanted: 1e-10,
    })
}
