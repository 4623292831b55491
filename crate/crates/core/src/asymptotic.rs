//! Large-multiplicity regime: with the coefficient exponent scaled as
//! ℓ = B√r, the gap functional bound collapses to the closed form
//! (2B/π)·arctan(π/B²) plus a tail E(r) that vanishes faster than 1/√r.
//!
//! The closed form is primary; quadrature is the cross-check, never the
//! optimization path.

use crate::numerics::{
    golden_max, integrate_with_breakpoints, sine_zero_breakpoints, truncation_point, NumericsError,
    OptResult, QuadSpec,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsymptoticError {
    #[error("invalid asymptotic parameters: {reason}")]
    InvalidParams { reason: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Scale B in ℓ = B·√r, the gap multiplicity r (real for limit studies),
/// and the polynomial-length shortfall δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsympParams {
    pub scale: f64,
    pub r: f64,
    pub delta: f64,
}

impl AsympParams {
    pub fn new(scale: f64, r: f64, delta: f64) -> Result<Self, AsymptoticError> {
        if !(scale > 0.0) {
            return Err(AsymptoticError::InvalidParams {
                reason: format!("scale must be positive, got {scale}"),
            });
        }
        if !(r >= 1.0) {
            return Err(AsymptoticError::InvalidParams {
                reason: format!("r must be at least 1, got {r}"),
            });
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(AsymptoticError::InvalidParams {
                reason: format!("delta must lie in [0, 1], got {delta}"),
            });
        }
        Ok(Self { scale, r, delta })
    }
}

/// The exact objective (2B/π)·arctan(π/B²).
pub fn asymptotic_objective(scale: f64) -> f64 {
    debug_assert!(scale > 0.0);
    2.0 * scale / PI * (PI / (scale * scale)).atan()
}

fn sinc_exp_integrand(freq: f64, decay: f64) -> impl Fn(f64) -> f64 {
    move |w: f64| {
        if w == 0.0 {
            freq * (-decay * w).exp()
        } else {
            (PI * freq * w).sin() / (PI * w) * (-decay * w).exp()
        }
    }
}

/// Quadrature form ∫₀^∞ sin(πw(1-δ))/(πw)·e^{-B²w} dw; at δ = 0 it agrees
/// with arctan(π/B²)/π to the quadrature tolerance.
pub fn asymptotic_integral(scale: f64, delta: f64, quad: QuadSpec) -> Result<f64, AsymptoticError> {
    if !(scale > 0.0) {
        return Err(AsymptoticError::InvalidParams {
            reason: format!("scale must be positive, got {scale}"),
        });
    }
    let freq = 1.0 - delta;
    if freq == 0.0 {
        return Ok(0.0);
    }
    let decay = scale * scale;
    let horizon = truncation_point(0.0, 1.0, decay, quad.abs_tol);
    if horizon <= 0.0 {
        return Ok(0.0);
    }
    let inner = QuadSpec {
        abs_tol: quad.abs_tol / 2.0,
        max_subdivisions: quad.max_subdivisions,
    };
    let cuts = sine_zero_breakpoints(freq, 0.0, horizon);
    Ok(integrate_with_breakpoints(
        sinc_exp_integrand(freq, decay),
        0.0,
        horizon,
        &cuts,
        inner,
    )?)
}

/// Tail majorant e^{-B²r}/(πrB²); zero once the exponential underflows.
pub fn tail_majorant(r: f64, scale: f64) -> f64 {
    let decay = scale * scale;
    (-decay * r).exp() / (PI * r * decay)
}

/// Tail E(r) = ∫_r^∞ sin(πw(1-δ))/(πw)·e^{-B²w} dw.
pub fn tail_integral(
    r: f64,
    scale: f64,
    delta: f64,
    quad: QuadSpec,
) -> Result<f64, AsymptoticError> {
    if !(scale > 0.0) || !(r >= 1.0) {
        return Err(AsymptoticError::InvalidParams {
            reason: format!("need scale > 0 and r >= 1, got scale = {scale}, r = {r}"),
        });
    }
    let freq = 1.0 - delta;
    if freq == 0.0 {
        return Ok(0.0);
    }
    let decay = scale * scale;
    let envelope = tail_majorant(r, scale) * decay; // |f(r)| envelope: e^{-decay·r}/(πr)
    if envelope == 0.0 {
        return Ok(0.0);
    }
    let horizon = truncation_point(r, envelope, decay, quad.abs_tol);
    if horizon <= r {
        return Ok(0.0);
    }
    let inner = QuadSpec {
        abs_tol: quad.abs_tol / 2.0,
        max_subdivisions: quad.max_subdivisions,
    };
    let cuts = sine_zero_breakpoints(freq, r, horizon);
    Ok(integrate_with_breakpoints(
        sinc_exp_integrand(freq, decay),
        r,
        horizon,
        &cuts,
        inner,
    )?)
}

/// Maximize the closed-form objective over a bracket of B values.
pub fn optimize_scale(bracket: (f64, f64)) -> Result<OptResult, AsymptoticError> {
    let (lo, hi) = bracket;
    if !(lo > 0.0) {
        return Err(AsymptoticError::InvalidParams {
            reason: format!("bracket must lie in (0, inf), got lo = {lo}"),
        });
    }
    Ok(golden_max(asymptotic_objective, lo, hi, 1e-8)?)
}

/// Truncated-integral upper bound on h⁺ at c_r = r + θ√r:
/// c_r - 2B√r·(∫₀^∞ - E(r)). Falls below r whenever θ stays under the
/// closed-form objective (for r large enough that the tail is negligible).
pub fn h_plus_large_r(p: &AsympParams, theta: f64, quad: QuadSpec) -> Result<f64, AsymptoticError> {
    let c_r = p.r + theta * p.r.sqrt();
    let full = asymptotic_integral(p.scale, p.delta, quad)?;
    let tail = tail_integral(p.r, p.scale, p.delta, quad)?;
    Ok(c_r - 2.0 * p.scale * p.r.sqrt() * (full - tail))
}

/// Small-gap mirror with ℓ = B√(r-√r) and c_r = r - ϑ√r, requiring ϑ < 1;
/// the returned lower bound on h⁻ exceeds r when ϑ stays under the
/// closed-form objective.
pub fn h_minus_large_r(
    p: &AsympParams,
    vartheta: f64,
    quad: QuadSpec,
) -> Result<f64, AsymptoticError> {
    if !(vartheta < 1.0) {
        return Err(AsymptoticError::InvalidParams {
            reason: format!("the small-gap regime requires vartheta < 1, got {vartheta}"),
        });
    }
    let reduced = p.r - p.r.sqrt();
    if !(reduced >= 1.0) {
        return Err(AsymptoticError::InvalidParams {
            reason: format!("r - sqrt(r) must be at least 1, got r = {}", p.r),
        });
    }
    let c_r = p.r - vartheta * p.r.sqrt();
    let full = asymptotic_integral(p.scale, p.delta, quad)?;
    let tail = tail_integral(reduced, p.scale, p.delta, quad)?;
    Ok(c_r + 2.0 * p.scale * reduced.sqrt() * (full - tail))
}

/// Smallest r at which the neglected tail term 2B√r·|E(r)| is certified
/// (via the majorant) to fall below `tol`. Diagnostic for when the
/// large-multiplicity constants take over; the true threshold is not
/// quantified in closed form.
pub fn r_threshold(scale: f64, tol: f64) -> f64 {
    assert!(scale > 0.0 && tol > 0.0);
    let bound = |r: f64| 2.0 * scale * r.sqrt() * tail_majorant(r, scale);
    let mut lo = 1.0f64;
    if bound(lo) < tol {
        return lo;
    }
    let mut hi = 2.0f64;
    while bound(hi) >= tol {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) >= tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Finite-r diagnostic: ∫₀^r sin(πw(1-δ))/(πw)·(e^{-B²w} - (1-w/r)^{B²r}) dw,
/// the gap introduced by replacing the finite-r weight with its exponential
/// majorant.
pub fn finite_r_defect(p: &AsympParams, quad: QuadSpec) -> Result<f64, AsymptoticError> {
    let freq = 1.0 - p.delta;
    if freq == 0.0 {
        return Ok(0.0);
    }
    let decay = p.scale * p.scale;
    let r = p.r;
    let exponent = decay * r;
    let f = move |w: f64| {
        let weight_gap = (-decay * w).exp() - (1.0 - w / r).max(0.0).powf(exponent);
        if w == 0.0 {
            freq * weight_gap
        } else {
            (PI * freq * w).sin() / (PI * w) * weight_gap
        }
    };
    let horizon = truncation_point(0.0, 1.0, decay, quad.abs_tol).min(r);
    let inner = QuadSpec {
        abs_tol: quad.abs_tol / 2.0,
        max_subdivisions: quad.max_subdivisions,
    };
    let cuts = sine_zero_breakpoints(freq, 0.0, horizon);
    Ok(integrate_with_breakpoints(f, 0.0, horizon, &cuts, inner)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Boundary;

    #[test]
    fn objective_reference_values() {
        let v = asymptotic_objective(1.502243);
        assert!((v - 0.906499704982).abs() < 1e-11, "got {v}");
        let v = asymptotic_objective(1.0);
        assert!((v - 0.803813476095).abs() < 1e-11, "got {v}");
        // at B = √π the arctan collapses to π/4 and the objective to √π/2
        let v = asymptotic_objective(PI.sqrt());
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn objective_vanishes_at_origin() {
        assert!(asymptotic_objective(1e-9) < 1e-8);
    }

    #[test]
    fn integral_matches_closed_form() {
        let quad = QuadSpec::with_tol(1e-10);
        for scale in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let closed = (PI / (scale * scale)).atan() / PI;
            let v = asymptotic_integral(scale, 0.0, quad).unwrap();
            assert!((v - closed).abs() < 1e-8, "B={scale}: {v} vs {closed}");
        }
        let v = asymptotic_integral(1.502243, 0.0, quad).unwrap();
        assert!((v - 0.301715403228).abs() < 1e-9, "got {v}");
        let v = asymptotic_integral(1.0, 0.0, quad).unwrap();
        assert!((v - 0.401906738048).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn integral_degenerate_delta() {
        assert_eq!(
            asymptotic_integral(1.0, 1.0, QuadSpec::default()).unwrap(),
            0.0
        );
        assert_eq!(
            tail_integral(2.0, 1.0, 1.0, QuadSpec::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn tail_reference_and_majorant() {
        let quad = QuadSpec::with_tol(1e-16);
        let e = tail_integral(10.0, 1.5, 0.0, quad).unwrap();
        assert!(e.abs() <= 2.4e-12, "got {e}");
        assert!((e - 1.0995292e-12).abs() < 1e-15, "got {e:e}");
        assert!(e.abs() <= tail_majorant(10.0, 1.5));
    }

    #[test]
    fn optimize_scale_published_bracket() {
        let r = optimize_scale((0.5, 4.0)).unwrap();
        assert!(
            (r.arg_star - 1.50243284848).abs() < 1e-6,
            "got {}",
            r.arg_star
        );
        assert!(
            (r.val_star - 0.906499716838).abs() < 1e-10,
            "got {}",
            r.val_star
        );
        assert!(r.boundary.is_none());
    }

    #[test]
    fn optimize_scale_boundary_and_widening() {
        // bracket excluding the maximizer flags the lower edge
        let r = optimize_scale((2.0, 4.0)).unwrap();
        assert_eq!(r.boundary, Some(Boundary::Lower));
        assert!(r.arg_star < 2.05);

        let wide = optimize_scale((0.1, 10.0)).unwrap();
        let narrow = optimize_scale((0.5, 4.0)).unwrap();
        assert!((wide.val_star - narrow.val_star).abs() < 1e-6);
    }

    #[test]
    fn h_plus_large_r_margins() {
        let quad = QuadSpec::with_tol(1e-10);
        let p = AsympParams::new(1.502243, 1e4, 0.0).unwrap();
        let v = h_plus_large_r(&p, 0.9, quad).unwrap();
        assert!(v < 1e4, "got {v}");
        assert!((v - 1e4 + 0.6499705).abs() < 1e-4, "got {v}");
        let v = h_plus_large_r(&p, 0.91, quad).unwrap();
        assert!(v > 1e4, "got {v}");
        // θ = 0 leaves the whole subtracted term as margin
        let v = h_plus_large_r(&p, 0.0, quad).unwrap();
        assert!(v < 1e4 - 90.0, "got {v}");
    }

    #[test]
    fn h_minus_large_r_mirror() {
        let quad = QuadSpec::with_tol(1e-10);
        let p = AsympParams::new(1.502243, 1e4, 0.0).unwrap();
        let v = h_minus_large_r(&p, 0.9, quad).unwrap();
        assert!(v > 1e4, "got {v}");
        let v = h_minus_large_r(&p, 0.91, quad).unwrap();
        assert!(v < 1e4, "got {v}");
        assert!(h_minus_large_r(&p, 1.0, quad).is_err());
        let small = AsympParams::new(1.5, 2.0, 0.0).unwrap();
        assert!(h_minus_large_r(&small, 0.5, quad).is_err());
    }

    #[test]
    fn r_threshold_certifies_bound() {
        for tol in [1e-3, 1e-6, 1e-9] {
            let r = r_threshold(1.502243, tol);
            let bound = 2.0 * 1.502243 * r.sqrt() * tail_majorant(r, 1.502243);
            assert!(bound < tol);
        }
        // tighter tolerance needs larger r
        assert!(r_threshold(1.5, 1e-9) > r_threshold(1.5, 1e-3));
    }

    #[test]
    fn finite_r_defect_shrinks() {
        let quad = QuadSpec::with_tol(1e-10);
        let d8 = finite_r_defect(&AsympParams::new(1.5, 8.0, 0.0).unwrap(), quad)
            .unwrap()
            .abs();
        let d64 = finite_r_defect(&AsympParams::new(1.5, 64.0, 0.0).unwrap(), quad)
            .unwrap()
            .abs();
        assert!(d64 < d8);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(AsympParams::new(0.0, 10.0, 0.0).is_err());
        assert!(AsympParams::new(1.0, 0.5, 0.0).is_err());
        assert!(AsympParams::new(1.0, 10.0, 1.5).is_err());
        assert!(asymptotic_integral(-1.0, 0.0, QuadSpec::default()).is_err());
        assert!(tail_integral(0.5, 1.0, 0.0, QuadSpec::default()).is_err());
    }
}
