//! Integral forms of the gap functionals h⁺ and h⁻ and the search for
//! certified gap-length parameters, row by row.
//!
//! Both functionals share the sinc-kernel integral
//! ∫₀¹ sin(πc·v(1-δ))/(πv) · (1-v)^{ℓ²} dv, entering h⁺ with a negative and
//! h⁻ with a positive sign. The T→∞ limit is computed: the O(1/log T) error
//! term is dropped and δ defaults to 0.

use crate::numerics::{integrate_with_breakpoints, sine_zero_breakpoints, NumericsError, QuadSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HfunError {
    #[error("invalid h parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("no certified c found for r = {r}, ell = {ell}: h stays on the wrong side up to c = {scanned_to}")]
    NoCertificate { r: u32, ell: f64, scanned_to: f64 },
    #[error("h never crosses r = {r} before the scan cap c = {scanned_to}")]
    CrossingNotFound { r: u32, scanned_to: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Parameters of the integral functionals: gap length c (in units of the
/// average gap), coefficient exponent ℓ, polynomial-length shortfall δ, and
/// the quadrature budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HParams {
    pub c: f64,
    pub ell: f64,
    pub delta: f64,
    pub quad: QuadSpec,
}

impl HParams {
    /// c = 0 is admitted as a degenerate input; ell must be at least 1 and
    /// delta must lie in [0, 1).
    pub fn new(c: f64, ell: f64, delta: f64, quad: QuadSpec) -> Result<Self, HfunError> {
        if !(c >= 0.0) {
            return Err(HfunError::InvalidParams {
                reason: format!("c must be nonnegative, got {c}"),
            });
        }
        if !(ell >= 1.0) {
            return Err(HfunError::InvalidParams {
                reason: format!("ell must be >= 1, got {ell}"),
            });
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(HfunError::InvalidParams {
                reason: format!("delta must lie in [0, 1), got {delta}"),
            });
        }
        Ok(Self {
            c,
            ell,
            delta,
            quad,
        })
    }
}

/// ∫₀¹ sin(πc·v(1-δ))/(πv)·(1-v)^{ℓ²} dv with the removable v = 0
/// singularity resolved and the domain split at the sine zeros.
fn sinc_kernel_integral(p: &HParams) -> Result<f64, HfunError> {
    let freq = p.c * (1.0 - p.delta);
    if freq == 0.0 {
        return Ok(0.0);
    }
    let exponent = p.ell * p.ell;
    let f = move |v: f64| {
        if v == 0.0 {
            freq
        } else {
            (PI * freq * v).sin() / (PI * v) * (1.0 - v).powf(exponent)
        }
    };
    let cuts = sine_zero_breakpoints(freq, 0.0, 1.0);
    Ok(integrate_with_breakpoints(f, 0.0, 1.0, &cuts, p.quad)?)
}

/// h⁺(c) = c - 2ℓ·∫₀¹ sin(πc·v(1-δ))/(πv)·(1-v)^{ℓ²} dv.
pub fn h_plus(p: &HParams) -> Result<f64, HfunError> {
    Ok(p.c - 2.0 * p.ell * sinc_kernel_integral(p)?)
}

/// h⁻(c) = c + 2ℓ·∫₀¹ sin(πc·v(1-δ))/(πv)·(1-v)^{ℓ²} dv.
pub fn h_minus(p: &HParams) -> Result<f64, HfunError> {
    Ok(p.c + 2.0 * p.ell * sinc_kernel_integral(p)?)
}

const SCAN_STEP: f64 = 1e-2;
const BISECT_WIDTH: f64 = 1e-4;

/// Scan from `start` in direction `step` while `feasible` holds, then bisect
/// the first feasible/infeasible transition down to `BISECT_WIDTH` and return
/// the feasible end. `None` means the scan hit `cap` without a transition;
/// the bool reports whether any feasible point was seen.
fn scan_first_crossing<E>(
    mut eval_feasible: impl FnMut(f64) -> Result<bool, E>,
    start: f64,
    step: f64,
    cap: f64,
) -> Result<(Option<f64>, bool), E> {
    let ascending = step > 0.0;
    let mut c = start;
    let mut last_feasible: Option<f64> = None;
    loop {
        let within = if ascending { c <= cap } else { c >= cap };
        if !within {
            return Ok((None, last_feasible.is_some()));
        }
        if eval_feasible(c)? {
            last_feasible = Some(c);
        } else if let Some(good) = last_feasible {
            // bisect [good, c] (or [c, good] descending) keeping the feasible end
            let mut feas = good;
            let mut infeas = c;
            while (feas - infeas).abs() > BISECT_WIDTH {
                let mid = 0.5 * (feas + infeas);
                if eval_feasible(mid)? {
                    feas = mid;
                } else {
                    infeas = mid;
                }
            }
            return Ok((Some(feas), true));
        }
        c += step;
    }
}

/// Largest certified c with h⁺(c) < r: ascending grid scan from c = r in
/// steps of 1e-2, then bisection on the last sign change; the crossing lies
/// within 1e-4 above the returned value.
pub fn find_large_gap_c(r: u32, ell: f64, delta: f64, quad: QuadSpec) -> Result<f64, HfunError> {
    let rf = f64::from(r);
    let cap = rf + 4.0 * rf.sqrt();
    let feasible = |c: f64| -> Result<bool, HfunError> {
        let p = HParams::new(c, ell, delta, quad)?;
        Ok(h_plus(&p)? < rf)
    };
    match scan_first_crossing(feasible, rf, SCAN_STEP, cap)? {
        (Some(c), _) => Ok(c),
        (None, false) => Err(HfunError::NoCertificate {
            r,
            ell,
            scanned_to: cap,
        }),
        (None, true) => Err(HfunError::CrossingNotFound { r, scanned_to: cap }),
    }
}

/// Smallest certified c with h⁻(c) > r: descending grid scan from c = r,
/// mirroring `find_large_gap_c`.
pub fn find_small_gap_c(r: u32, ell: f64, delta: f64, quad: QuadSpec) -> Result<f64, HfunError> {
    let rf = f64::from(r);
    let floor = (rf - 4.0 * rf.sqrt()).max(SCAN_STEP);
    let feasible = |c: f64| -> Result<bool, HfunError> {
        let p = HParams::new(c, ell, delta, quad)?;
        Ok(h_minus(&p)? > rf)
    };
    match scan_first_crossing(feasible, rf, -SCAN_STEP, floor)? {
        (Some(c), _) => Ok(c),
        (None, false) => Err(HfunError::NoCertificate {
            r,
            ell,
            scanned_to: floor,
        }),
        (None, true) => Err(HfunError::CrossingNotFound {
            r,
            scanned_to: floor,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    Plus,
    Minus,
}

/// One emitted table row: the certified c for (r, ℓ) and h re-evaluated there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub r: u32,
    pub ell: f64,
    pub c: f64,
    pub h_value: f64,
}

/// A row whose search failed, kept alongside the successful rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFailure {
    pub r: u32,
    pub ell: f64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuiltTable {
    pub rows: Vec<TableRow>,
    pub failures: Vec<TableFailure>,
}

/// Run the matching certified-c search for each (r, ℓ) pair and re-evaluate
/// h at the found c. Per-row failures are collected, not fatal.
pub fn build_table(kind: TableKind, rows: &[(u32, f64)], delta: f64, quad: QuadSpec) -> BuiltTable {
    let mut out = BuiltTable::default();
    for &(r, ell) in rows {
        let found = match kind {
            TableKind::Plus => find_large_gap_c(r, ell, delta, quad),
            TableKind::Minus => find_small_gap_c(r, ell, delta, quad),
        };
        match found.and_then(|c| {
            let p = HParams::new(c, ell, delta, quad)?;
            let h = match kind {
                TableKind::Plus => h_plus(&p)?,
                TableKind::Minus => h_minus(&p)?,
            };
            Ok(TableRow {
                r,
                ell,
                c,
                h_value: h,
            })
        }) {
            Ok(row) => out.rows.push(row),
            Err(e) => out.failures.push(TableFailure {
                r,
                ell,
                error: e.to_string(),
            }),
        }
    }
    out
}
