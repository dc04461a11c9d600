//! Kernel sums over the whole lattice `hℤ^N`.
//!
//! `Σ_{m ∈ ℤ^N∖0} |m|^{-N-2s}` is `2ζ(1+2s)` in one dimension and
//! `4ζ(1+s)β(1+s)` in two, with `β` the Dirichlet beta function.

use crate::error::{param, Result};

/// `B_2, B_4, …, B_20`.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Hurwitz zeta `Σ_{n≥0} (n+a)^{-t}` for `t > 1`, `a > 0`, by
/// Euler–Maclaurin summation after 24 explicit terms.
pub fn hurwitz_zeta(t: f64, a: f64) -> f64 {
    debug_assert!(t > 1.0 && a > 0.0);
    const HEAD: usize = 24;
    let head: f64 = (0..HEAD).map(|n| (n as f64 + a).powf(-t)).sum();
    let x = HEAD as f64 + a;
    let mut total = head + x.powf(1.0 - t) / (t - 1.0) + 0.5 * x.powf(-t);
    // term_k = B_{2k}/(2k)! · t(t+1)…(t+2k-2) · x^{-t-2k+1}
    let mut rising = t;
    let mut factorial = 2.0;
    let mut power = x.powf(-t - 1.0);
    for (k, b) in BERNOULLI.iter().enumerate() {
        total += b / factorial * rising * power;
        let k2 = 2.0 * (k as f64 + 1.0);
        rising *= (t + k2 - 1.0) * (t + k2);
        factorial *= (k2 + 1.0) * (k2 + 2.0);
        power /= x * x;
    }
    total
}

pub fn riemann_zeta(t: f64) -> f64 {
    hurwitz_zeta(t, 1.0)
}

/// Dirichlet beta `Σ_{n≥0} (-1)^n (2n+1)^{-t}`.
pub fn dirichlet_beta(t: f64) -> f64 {
    4f64.powf(-t) * (hurwitz_zeta(t, 0.25) - hurwitz_zeta(t, 0.75))
}

/// `Σ_{m ∈ ℤ^N∖0} |m|^{-N-2s}`.
pub fn lattice_kernel_sum(s: f64, dim: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", format!("must lie in (0,1), got {s}")));
    }
    match dim {
        1 => Ok(2.0 * riemann_zeta(1.0 + 2.0 * s)),
        2 => Ok(4.0 * riemann_zeta(1.0 + s) * dirichlet_beta(1.0 + s)),
        _ => Err(param("dim", format!("must be 1 or 2, got {dim}"))),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn classical_values() {
        assert!((riemann_zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((riemann_zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((riemann_zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-14);
        assert!((dirichlet_beta(2.0) - 0.915_965_594_177_219).abs() < 1e-15);
        assert!((dirichlet_beta(3.0) - PI.powi(3) / 32.0).abs() < 1e-15);
    }

    #[test]
    fn two_dimensional_sum_by_shells() {
        // Direct summation over |m|_∞ ≤ R plus the continuum remainder.
        let s = 0.5;
        let t = 2.0 + 2.0 * s;
        let r = 400i64;
        let mut direct = 0.0;
        for a in -r..=r {
            for b in -r..=r {
                if a != 0 || b != 0 {
                    direct += ((a * a + b * b) as f64).powf(-t / 2.0);
                }
            }
        }
        // ∫ outside the square [-R-1/2, R+1/2]² of |x|^{-t}, to leading order.
        let edge = r as f64 + 0.5;
        let remainder = outside_square(edge, t);
        let exact = lattice_kernel_sum(s, 2).unwrap();
        assert!((direct + remainder - exact).abs() < 1e-6 * exact, "{} vs {exact}", direct + remainder);
    }

    /// `∫_{ℝ²∖[-e,e]²} |x|^{-t} dx` by polar integration of the exit radius.
    fn outside_square(e: f64, t: f64) -> f64 {
        // 8 symmetric octants: r from e/cos θ to ∞, θ ∈ [0, π/4].
        let n = 20_000;
        let dt = PI / 4.0 / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) * dt;
            let r0 = e / th.cos();
            acc += r0.powf(2.0 - t) / (t - 2.0) * dt;
        }
        8.0 * acc
    }
}
