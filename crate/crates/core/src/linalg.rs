//! Dense iterative kernels: preconditioned conjugate gradients, a block
//! Krylov eigensolver for the low end of an SPD spectrum, and a Lanczos
//! iteration for the largest-magnitude eigenvalue of a symmetric operator.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Starting-block seed of the eigensolver.
pub const EIGEN_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: DVector<f64>,
    /// `‖b - A x‖ / ‖b‖` at exit.
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`.
pub fn pcg(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: DVector::zeros(n),
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    let inv_diag: DVector<f64> = a.diagonal().map(|d| 1.0 / d);
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut ap = DVector::zeros(n);
    for it in 1..=max_iter {
        ap.gemv(1.0, a, &p, 0.0);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rel = r.norm() / bnorm;
        if rel <= tol {
            // Recompute the true residual to guard against drift.
            let true_rel = (b - a * &x).norm() / bnorm;
            if true_rel <= tol {
                return Ok(CgOutcome {
                    solution: x,
                    relative_residual: true_rel,
                    iterations: it,
                });
            }
            r = b - a * &x;
        }
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        p = &z + (rz_new / rz) * &p;
        rz = rz_new;
    }
    let achieved = (b - a * &x).norm() / bnorm;
    Err(Error::NoConvergence {
        method: "conjugate gradients",
        iterations: max_iter,
        achieved,
        wanted: tol,
    })
}

/// Orthonormalize `candidates` against `basis` and each other (two passes of
/// modified Gram–Schmidt). Vectors that collapse are dropped.
pub(crate) fn orthonormalize_against(
    basis: &[DVector<f64>],
    candidates: Vec<DVector<f64>>,
) -> Vec<DVector<f64>> {
    let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(candidates.len());
    for mut v in candidates {
        let start = v.norm();
        if start == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in basis.iter().chain(accepted.iter()) {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-10 * start {
            accepted.push(v / nv);
        }
    }
    accepted
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Relative residual target `‖A y - θ y‖ / (θ ‖y‖)`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-8,
            max_restarts: 200,
            seed: EIGEN_SEED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOutcome {
    /// Ascending.
    pub values: Vec<f64>,
    /// Euclidean-orthonormal.
    pub vectors: Vec<DVector<f64>>,
    pub residuals: Vec<f64>,
}

pub(crate) fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// The `k` smallest eigenpairs of SPD `a`.
///
/// Block Krylov iteration on `a⁻¹` (applied through a Cholesky factor) with
/// block size `k + 2`, full reorthogonalization, Rayleigh–Ritz extraction
/// against `a` itself, and restarts from the current Ritz block.
pub fn smallest_eigenpairs(a: &DMatrix<f64>, k: usize, opts: EigenOptions) -> Result<EigenOutcome> {
    let n = a.nrows();
    assert!(k >= 1 && k <= n, "1 <= k <= n required");
    let chol: Cholesky<f64, Dyn> = Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
    let block = (k + 2).min(n);
    let max_basis = n.min((12 * block).max(48));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<DVector<f64>> = (0..block)
        .map(|_| DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5))
        .collect();
    let mut basis = orthonormalize_against(&[], start);
    let mut last = basis.clone();
    let mut best: Option<EigenOutcome> = None;

    for _ in 0..=opts.max_restarts {
        while basis.len() < max_basis && !last.is_empty() {
            let room = max_basis - basis.len();
            let next: Vec<DVector<f64>> = last.iter().take(room).map(|v| chol.solve(v)).collect();
            let next = orthonormalize_against(&basis, next);
            basis.extend(next.iter().cloned());
            last = next;
        }
        let m = basis.len();
        let v = DMatrix::from_columns(&basis);
        let av = a * &v;
        let mut h = v.transpose() * &av;
        h = 0.5 * (&h + h.transpose());
        let (theta, q) = sorted_eigen(h);
        let take = k.min(m);
        let mut values = Vec::with_capacity(take);
        let mut vectors = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        for i in 0..take {
            let qi = q.column(i);
            let y = &v * qi;
            let ay = &av * qi;
            let r = (&ay - theta[i] * &y).norm() / (theta[i].abs() * y.norm());
            values.push(theta[i]);
            vectors.push(y);
            residuals.push(r);
        }
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        let outcome = EigenOutcome {
            values,
            vectors,
            residuals,
        };
        if worst <= opts.tol && take == k {
            return Ok(outcome);
        }
        let exhausted = m == n;
        best = Some(outcome);
        if exhausted {
            break;
        }
        // Restart from the leading Ritz block.
        let keep = (2 * block).min(m);
        let ritz: Vec<DVector<f64>> = (0..keep).map(|i| &v * q.column(i)).collect();
        basis = orthonormalize_against(&[], ritz);
        last = basis.clone();
    }
    let best = best.expect("at least one Rayleigh–Ritz pass");
    Err(Error::NoConvergence {
        method: "block Krylov eigensolver",
        iterations: opts.max_restarts,
        achieved: best.residuals.iter().copied().fold(0.0, f64::max),
        wanted: opts.tol,
    })
}

/// Largest `|eigenvalue|` of a symmetric operator given by its action, via
/// Lanczos with full reorthogonalization. Returns the value and the residual
/// bound of the extreme Ritz pair.
pub fn largest_magnitude_eigenvalue(
    n: usize,
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    tol: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut estimate = (0.0, f64::INFINITY);
    for j in 0..n {
        let mut w = apply(&basis[j]);
        let a = basis[j].dot(&w);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let b = w.norm();
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let (vals, vecs) = sorted_eigen(t);
        let (idx, theta) = if vals[0].abs() > vals[m - 1].abs() {
            (0, vals[0])
        } else {
            (m - 1, vals[m - 1])
        };
        let resid = b * vecs[(m - 1, idx)].abs();
        estimate = (theta.abs(), resid);
        let scale = theta.abs().max(f64::MIN_POSITIVE);
        if resid <= tol * scale || b <= 1e-14 * scale || j + 1 == n {
            return Ok(estimate);
        }
        beta.push(b);
        basis.push(w / b);
    }
    Ok(estimate)
}
