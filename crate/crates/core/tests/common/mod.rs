//! Independent oracles and random instances shared by the integration tests.
#![allow(dead_code)]

use fracshape_core::{DomainMask, Grid, GridFunction};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

/// `Σ_{m ∈ ℤ^N∖0} |m|^{-N-2s}` to 24 digits (mpmath), for s = 0.3, 0.5, 0.7.
/// Columns: s, 1D, 2D.
pub const LATTICE_SUMS: [(f64, f64, f64); 3] = [
    (0.3, 4.571_531_331_360_259_873_6, 13.160_278_487_044_915_186_6),
    (0.5, 3.289_868_133_696_452_872_9, 9.033_621_683_100_950_305_7),
    (0.7, 2.766_685_717_681_471_536_6, 7.295_647_076_635_606_739_8),
];

pub fn lattice_sum(s: f64, dim: usize) -> f64 {
    let row = LATTICE_SUMS
        .iter()
        .find(|r| (r.0 - s).abs() < 1e-15)
        .unwrap_or_else(|| panic!("no tabulated lattice sum for s = {s}"));
    if dim == 1 {
        row.1
    } else {
        row.2
    }
}

fn center(g: &Grid, i: usize) -> [f64; 2] {
    let h = g.h();
    let l = g.half_width();
    let r = g.resolution();
    let c = [i % r, i / r];
    let mut p = [0.0; 2];
    for axis in 0..g.dim() {
        p[axis] = -l + h * (c[axis] as f64 + 0.5);
    }
    p
}

fn kernel(g: &Grid, s: f64, i: usize, j: usize) -> f64 {
    let (a, b) = (center(g, i), center(g, j));
    let r = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    g.h().powi(2 * g.dim() as i32) / r.powf(g.dim() as f64 + 2.0 * s)
}

/// `ρ_i = Σ_{lattice cells outside the box} k_ij`, as the whole-lattice sum
/// minus the in-box row.
pub fn tail_oracle(g: &Grid, s: f64) -> Vec<f64> {
    let m = g.cell_count();
    let full = lattice_sum(s, g.dim()) * g.h().powf(g.dim() as f64 - 2.0 * s);
    (0..m)
        .map(|i| full - (0..m).filter(|&j| j != i).map(|j| kernel(g, s, i, j)).sum::<f64>())
        .collect()
}

/// `Σ_{i<j} k_ij (u_i - u_j)² + Σ_i ρ_i u_i²` by a plain double loop.
pub fn gagliardo_oracle(g: &Grid, s: f64, u: &GridFunction) -> f64 {
    let v = u.values();
    let m = g.cell_count();
    let rho = tail_oracle(g, s);
    let mut pairs = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            pairs += kernel(g, s, i, j) * (v[i] - v[j]).powi(2);
        }
    }
    let tail: f64 = (0..m).map(|i| rho[i] * v[i] * v[i]).sum();
    pairs + tail
}

/// Restricted stiffness matrix built entry by entry from the kernel.
pub fn restricted_matrix_oracle(g: &Grid, s: f64, mask: &DomainMask) -> DMatrix<f64> {
    let cells = mask.active_indices();
    let m = g.cell_count();
    let rho = tail_oracle(g, s);
    DMatrix::from_fn(cells.len(), cells.len(), |a, b| {
        let (i, j) = (cells[a], cells[b]);
        if i == j {
            (0..m).filter(|&k| k != i).map(|k| kernel(g, s, i, k)).sum::<f64>() + rho[i]
        } else {
            -kernel(g, s, i, j)
        }
    })
}

/// All eigenvalues of the restricted problem, ascending.
pub fn dense_eigen_oracle(g: &Grid, s: f64, mask: &DomainMask) -> Vec<f64> {
    let a = restricted_matrix_oracle(g, s, mask);
    let hn = g.cell_volume();
    let mut v: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().map(|x| x / hn).collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn random_function(rng: &mut impl Rng, g: Grid) -> GridFunction {
    GridFunction::new(g, (0..g.cell_count()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Each cell independently with probability `p`, at least `min` cells.
pub fn random_mask(rng: &mut impl Rng, g: Grid, p: f64, min: usize) -> DomainMask {
    loop {
        let cells: Vec<bool> = (0..g.cell_count()).map(|_| rng.random_bool(p)).collect();
        let mask = DomainMask::new(g, cells).unwrap();
        if mask.count() >= min {
            return mask;
        }
    }
}

/// `(inner, outer)` with `inner ⊂ outer`, inner keeping roughly 70% of the
/// outer cells and at least 3, outer at least 4 cells.
pub fn nested_pair(rng: &mut impl Rng, g: Grid) -> (DomainMask, DomainMask) {
    let outer = random_mask(rng, g, 0.5, 4);
    loop {
        let inner_cells: Vec<usize> = outer.active_indices().into_iter().filter(|_| rng.random_bool(0.7)).collect();
        if inner_cells.len() >= 3 && inner_cells.len() < outer.count() {
            return (DomainMask::from_indices(g, inner_cells).unwrap(), outer);
        }
    }
}

/// Random function supported in `mask`.
pub fn random_supported(rng: &mut impl Rng, mask: &DomainMask) -> GridFunction {
    let g = mask.grid();
    let values = (0..g.cell_count())
        .map(|i| if mask.contains(i) { rng.random_range(-1.0..1.0) } else { 0.0 })
        .collect();
    GridFunction::new(g, values).unwrap()
}

/// Interval of `len` cells starting at cell `start` on a 1D grid.
pub fn interval(g: Grid, start: usize, len: usize) -> DomainMask {
    DomainMask::from_indices(g, start..start + len).unwrap()
}
