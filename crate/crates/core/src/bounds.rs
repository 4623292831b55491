//! Closed-form lower-bound machinery: chord minorants of the sine lobe over
//! [0, 1/2], the exponential-integral tail bound, the Θ(b) and ϑ(b)
//! objectives built from them, and the generalized k-piece refinement.
//!
//! Two evaluation modes exist. `AsPrinted` reproduces the published display
//! constants verbatim (two pieces on the large-gap side, one piece with an
//! e^{-b} bracket on the small-gap side). `RigorousKPiece` assembles the same
//! structure from the k-piece chord slopes for any k; the two modes coincide
//! for the large-gap k = 2 case.

use crate::numerics::{exp_integral_e1, golden_max, Boundary, NumericsError};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("objective domain requires b > {min_b}, got {b}")]
    BadB { b: f64, min_b: f64 },
    #[error("as-printed mode is only defined for k = {expected_k}, got k = {k}")]
    UnsupportedScheme { k: u32, expected_k: u32 },
    #[error("piece count k must be >= 1")]
    BadPieceCount,
    #[error("bracket [{lo}, {hi}] leaves the objective domain b > {min_b}")]
    BracketOutsideDomain { lo: f64, hi: f64, min_b: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// The display constants exactly as published.
    AsPrinted,
    /// The internally consistent k-piece chord scheme.
    RigorousKPiece,
}

/// Piece count and evaluation mode for the chord-splitting lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundScheme {
    pub k: u32,
    pub mode: BoundMode,
}

impl BoundScheme {
    pub fn as_printed(k: u32) -> Self {
        Self {
            k,
            mode: BoundMode::AsPrinted,
        }
    }

    pub fn rigorous(k: u32) -> Self {
        Self {
            k,
            mode: BoundMode::RigorousKPiece,
        }
    }

    pub fn mode_label(&self) -> &'static str {
        match self.mode {
            BoundMode::AsPrinted => "as_printed",
            BoundMode::RigorousKPiece => "rigorous_k_piece",
        }
    }
}

/// Maximizer, maximum, and the scheme that produced them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub b_star: f64,
    pub theta: f64,
    pub scheme: BoundScheme,
    pub boundary: Option<Boundary>,
    /// For the small-gap objective: whether the maximum satisfies the
    /// admissibility constraint ϑ ≤ 1/2. Always true on the large-gap side.
    pub constraint_ok: bool,
}

/// Increment slopes s_j = 2k·(sin(πj/2k) - sin(π(j-1)/2k)) of the k-piece
/// linear minorants of sin(πx) on [0, 1/2]: on piece j the line s_j·x stays
/// below the sine. Positive and strictly decreasing in j; k = 2 yields the
/// published pair {2√2, 4-2√2} and k = 1 the Jordan slope 2.
pub fn chord_slopes(k: u32) -> Vec<f64> {
    assert!(k >= 1, "piece count must be >= 1");
    let kf = f64::from(k);
    (1..=k)
        .map(|j| {
            let j = f64::from(j);
            2.0 * kf * ((PI * j / (2.0 * kf)).sin() - (PI * (j - 1.0) / (2.0 * kf)).sin())
        })
        .collect()
}

/// Abel-summed chord bracket
/// s₁/2 - Σ_{j<k} (s_j - s_{j+1})/2 · e^{-b·j/(2k)} - s_k/2 · e^{-b/2}.
fn chord_bracket(b: f64, k: u32) -> f64 {
    let s = chord_slopes(k);
    let kf = f64::from(k);
    let mut acc = s[0] / 2.0;
    for j in 1..k as usize {
        acc -= (s[j - 1] - s[j]) / 2.0 * (-b * j as f64 / (2.0 * kf)).exp();
    }
    acc - s[k as usize - 1] / 2.0 * (-b / 2.0).exp()
}

/// Large-gap objective Θ(b) for b > 1.
pub fn theta_objective(b: f64, scheme: BoundScheme) -> Result<f64, BoundsError> {
    if scheme.k < 1 {
        return Err(BoundsError::BadPieceCount);
    }
    if !(b > 1.0) {
        return Err(BoundsError::BadB { b, min_b: 1.0 });
    }
    let tail = exp_integral_e1(b - 1.0)? / PI;
    match scheme.mode {
        BoundMode::AsPrinted => {
            if scheme.k != 2 {
                return Err(BoundsError::UnsupportedScheme {
                    k: scheme.k,
                    expected_k: 2,
                });
            }
            let inner = SQRT_2
                - (2.0 * SQRT_2 - 2.0) * (-b / 4.0).exp()
                - (2.0 - SQRT_2) * (-b / 2.0).exp();
            Ok(2.0 * b.sqrt() * (1.0 - 1.0 / b).sqrt() * (2.0 / (PI * b) * inner - tail))
        }
        BoundMode::RigorousKPiece => {
            Ok(2.0 * (b - 1.0).sqrt() * (2.0 / (PI * b) * chord_bracket(b, scheme.k) - tail))
        }
    }
}

/// Small-gap objective ϑ(b) for b > 2.
///
/// The printed one-piece form carries an e^{-b} bracket; the rigorous k = 1
/// scheme would give e^{-b/2}. Both are exposed through the mode.
pub fn vartheta_objective(b: f64, scheme: BoundScheme) -> Result<f64, BoundsError> {
    if scheme.k < 1 {
        return Err(BoundsError::BadPieceCount);
    }
    if !(b > 2.0) {
        return Err(BoundsError::BadB { b, min_b: 2.0 });
    }
    let tail = exp_integral_e1(b - 2.0)? / PI;
    let prefactor = 2.0 * b.sqrt() * (0.5 - 1.0 / b).sqrt();
    match scheme.mode {
        BoundMode::AsPrinted => {
            if scheme.k != 1 {
                return Err(BoundsError::UnsupportedScheme {
                    k: scheme.k,
                    expected_k: 1,
                });
            }
            Ok(prefactor * (2.0 / (PI * b) * (1.0 - (-b).exp()) - tail))
        }
        BoundMode::RigorousKPiece => {
            Ok(prefactor * (2.0 / (PI * b) * chord_bracket(b, scheme.k) - tail))
        }
    }
}

const OPT_X_TOL: f64 = 1e-8;

fn optimize(
    objective: impl Fn(f64) -> Result<f64, BoundsError>,
    scheme: BoundScheme,
    bracket: (f64, f64),
    min_b: f64,
    check_half: bool,
) -> Result<ThetaResult, BoundsError> {
    let (lo, hi) = bracket;
    if !(lo > min_b && hi > lo) {
        return Err(BoundsError::BracketOutsideDomain { lo, hi, min_b });
    }
    // domain was checked above, so evaluation inside the bracket cannot fail
    let f = |b: f64| objective(b).expect("objective defined on validated bracket");
    let opt = golden_max(f, lo, hi, OPT_X_TOL)?;
    Ok(ThetaResult {
        b_star: opt.arg_star,
        theta: opt.val_star,
        scheme,
        boundary: opt.boundary,
        constraint_ok: !check_half || opt.val_star <= 0.5,
    })
}

/// Maximize Θ(·, scheme) over the bracket.
pub fn optimize_theta(
    scheme: BoundScheme,
    bracket: (f64, f64),
) -> Result<ThetaResult, BoundsError> {
    optimize(|b| theta_objective(b, scheme), scheme, bracket, 1.0, false)
}

/// Maximize ϑ(·, scheme) over the bracket; the result is flagged invalid if
/// the maximum exceeds the admissible 1/2.
pub fn optimize_vartheta(
    scheme: BoundScheme,
    bracket: (f64, f64),
) -> Result<ThetaResult, BoundsError> {
    optimize(
        |b| vartheta_objective(b, scheme),
        scheme,
        bracket,
        2.0,
        true,
    )
}

/// Closed-form upper bound on h⁺(c) assembled from the k-piece chord
/// estimate and the E1 tail, with ℓ and c free.
///
/// The chord pieces partition [0, 1/(2c)], so the assembly is a certified
/// bound for c ≥ 1/2; the mode of `scheme` is irrelevant here (the k = 2
/// rigorous form is the printed one). Weakly increasing in δ.
pub fn certified_h_plus_upper(c: f64, ell: f64, delta: f64, scheme: BoundScheme) -> f64 {
    debug_assert!(c > 0.0 && ell >= 1.0 && (0.0..1.0).contains(&delta));
    let l2p1 = ell * ell + 1.0;
    let s = chord_slopes(scheme.k);
    let kf = f64::from(scheme.k);
    let mut bracket = s[0] / 2.0;
    for j in 1..scheme.k as usize {
        bracket -= (s[j - 1] - s[j]) / 2.0 * (-l2p1 * j as f64 / (2.0 * kf * c)).exp();
    }
    bracket -= s[scheme.k as usize - 1] / 2.0 * (-l2p1 / (2.0 * c)).exp();

    let tail = exp_integral_e1(ell * ell / c).expect("positive E1 argument") / PI;
    let lower_integral = 2.0 * c * (1.0 - delta) / (PI * l2p1) * bracket - tail;
    c - 2.0 * ell * lower_integral
}
