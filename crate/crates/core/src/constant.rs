//! The normalization constant of the fractional Laplacian,
//! `C_{s,N} = ( ∫_{R^N} (1 - cos ζ₁) / |ζ|^{N+2s} dζ )^{-1}`, by quadrature.
//!
//! The 1D integral is split at `|ζ| = 1`. Below a radius `r0` the integrand
//! is replaced by its leading Taylor term `ζ²/2` (error below 1e-10), the
//! rest of `[r0, 1]` is integrated adaptively, and the oscillatory tail is
//! integrated period by period up to `2πK` with an asymptotic remainder.
//!
//! In 2D the transverse variable is integrated out exactly in shape:
//! `∫_R (ζ₁² + t²)^{-(1+s)} dt = |ζ₁|^{-1-2s} · 2∫_0^{π/2} cos^{2s}θ dθ`,
//! so the planar integral is the 1D one times a smooth angular factor.

use std::f64::consts::PI;

use crate::error::{param, Result};
use crate::quadrature::integrate;

const REL_TOL: f64 = 1e-12;
const TAYLOR_ERROR: f64 = 1e-10;
const TAIL_PERIODS: usize = 64;

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(param("s", format!("must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// `∫_0^∞ (1 - cos z) / z^{1+2s} dz`.
fn half_line_integral(s: f64) -> Result<f64> {
    let a = 1.0 + 2.0 * s;
    // Dropped Taylor term: ∫_0^{r0} z^{3-2s}/24 dz = r0^{4-2s} / (24 (4-2s)).
    let r0 = (TAYLOR_ERROR * 24.0 * (4.0 - 2.0 * s))
        .powf(1.0 / (4.0 - 2.0 * s))
        .min(0.5);
    let near = r0.powf(2.0 - 2.0 * s) / (2.0 * (2.0 - 2.0 * s));

    let core = integrate(
        |z| 2.0 * (0.5 * z).sin().powi(2) / z.powf(a),
        r0,
        1.0,
        1e-15,
        REL_TOL,
        4000,
    )?
    .value;

    // ∫_1^∞ z^{-a} dz - ∫_1^∞ cos z · z^{-a} dz
    let mut oscillatory = integrate(|z| z.cos() / z.powf(a), 1.0, 2.0 * PI, 1e-16, REL_TOL, 4000)?.value;
    for k in 1..TAIL_PERIODS {
        let lo = 2.0 * PI * k as f64;
        oscillatory += integrate(|z| z.cos() / z.powf(a), lo, lo + 2.0 * PI, 1e-17, REL_TOL, 4000)?.value;
    }
    // Remainder ∫_Z^∞ cos z z^{-a} dz with sin Z = 0, cos Z = 1, repeated
    // integration by parts: a Z^{-a-1} - a(a+1)(a+2) Z^{-a-3} + ...
    let z = 2.0 * PI * TAIL_PERIODS as f64;
    let mut term = a * z.powf(-a - 1.0);
    let mut remainder = 0.0;
    let mut b = a;
    for _ in 0..4 {
        remainder += term;
        term *= -(b + 1.0) * (b + 2.0) / (z * z);
        b += 2.0;
    }
    oscillatory += remainder;

    Ok(near + core + 1.0 / (2.0 * s) - oscillatory)
}

/// `2∫_0^{π/2} cos^{2s}θ dθ = ∫_R (1 + t²)^{-(1+s)} dt`.
fn transverse_factor(s: f64) -> Result<f64> {
    Ok(2.0 * integrate(|t| t.cos().max(0.0).powf(2.0 * s), 0.0, 0.5 * PI, 1e-15, REL_TOL, 4000)?.value)
}

/// The defining integral `∫_{R^N} (1 - cos ζ₁) / |ζ|^{N+2s} dζ`.
pub fn defining_integral(s: f64, dim: usize) -> Result<f64> {
    check_s(s)?;
    let line = 2.0 * half_line_integral(s)?;
    match dim {
        1 => Ok(line),
        2 => Ok(line * transverse_factor(s)?),
        _ => Err(param("dim", format!("must be 1 or 2, got {dim}"))),
    }
}

/// `C_{s,N}`.
pub fn normalization_constant(s: f64, dim: usize) -> Result<f64> {
    Ok(1.0 / defining_integral(s, dim)?)
}
