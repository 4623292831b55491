//! The discrete prime-power form of the gap functionals: generalized divisor
//! coefficients d_ℓ, the Liouville and von Mangoldt functions, the sine
//! kernel g_c(k), and the double sum over kn ≤ X.

use crate::numerics::KahanSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArithmeticError {
    #[error("invalid discrete parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("sieve for X = {x} needs {needed} bytes, budget is {budget}")]
    SieveBudget { x: u64, needed: u64, budget: u64 },
}

/// Default cap on sieve allocations (1 GiB), overridable per call.
pub const DEFAULT_SIEVE_BUDGET: u64 = 1 << 30;

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut m = 0u32;
            while n % p == 0 {
                n /= p;
                m += 1;
            }
            out.push((p, m));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Binomial C(m+ℓ-1, m): the prime-power value of d_ℓ.
fn prime_power_coefficient(m: u32, ell: u32) -> u64 {
    let mut num: u128 = 1;
    for i in 1..=u128::from(m) {
        num = num * (u128::from(ell) - 1 + i) / i;
    }
    u64::try_from(num).expect("d_ell prime-power value overflows u64")
}

/// Generalized divisor function d_ℓ(n), multiplicative with
/// d_ℓ(p^m) = C(m+ℓ-1, m). Exact integer arithmetic.
pub fn d_ell(n: u64, ell: u32) -> u64 {
    assert!(n >= 1 && ell >= 1);
    factorize(n)
        .iter()
        .map(|&(_, m)| prime_power_coefficient(m, ell))
        .product()
}

/// Von Mangoldt function: log p on prime powers p^m, zero otherwise.
pub fn von_mangoldt(k: u64) -> f64 {
    assert!(k >= 1);
    let f = factorize(k);
    match f.as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    }
}

/// Liouville function (-1)^Ω(n) with Ω counting prime factors with
/// multiplicity.
pub fn liouville(n: u64) -> i32 {
    assert!(n >= 1);
    let omega: u32 = factorize(n).iter().map(|&(_, m)| m).sum();
    if omega % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sine kernel g_c(k) = 2·sin(πc·log k/log T)/(π·log k); bounded by
/// 2c/log T in magnitude.
pub fn g_kernel(k: u64, c: f64, log_t: f64) -> f64 {
    debug_assert!(k >= 2 && log_t > 0.0 && c >= 0.0);
    let log_k = (k as f64).ln();
    let g = 2.0 * (PI * c * log_k / log_t).sin() / (PI * log_k);
    debug_assert!(g.abs() <= 2.0 * c / log_t + 1e-12);
    g
}

/// Smallest-prime-factor table plus the sorted prime-power list up to X.
pub struct SieveTables {
    spf: Vec<u32>,
    prime_powers: Vec<u64>,
}

/// Build sieve tables up to `x` under the default memory budget.
pub fn sieve_tables(x: u64) -> Result<SieveTables, ArithmeticError> {
    sieve_tables_with_budget(x, DEFAULT_SIEVE_BUDGET)
}

/// Build sieve tables up to `x`, failing before allocation if the
/// smallest-prime-factor table would exceed `budget` bytes.
pub fn sieve_tables_with_budget(x: u64, budget: u64) -> Result<SieveTables, ArithmeticError> {
    if x < 1 {
        return Err(ArithmeticError::InvalidParams {
            reason: format!("X must be at least 1, got {x}"),
        });
    }
    let needed = 4 * (x + 1);
    if needed > budget || x > u64::from(u32::MAX) - 1 {
        return Err(ArithmeticError::SieveBudget { x, needed, budget });
    }
    let n = x as usize;
    let mut spf: Vec<u32> = vec![0; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if spf[i] == 0 {
            let mut j = i * i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    // remaining zeros (and the primes themselves) map to the number itself
    let mut prime_powers = Vec::new();
    for k in 2..=n {
        if spf[k] == 0 {
            spf[k] = k as u32;
        }
        let p = spf[k] as usize;
        let mut q = k;
        while q % p == 0 {
            q /= p;
        }
        if q == 1 {
            prime_powers.push(k as u64);
        }
    }
    Ok(SieveTables { spf, prime_powers })
}

impl SieveTables {
    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Smallest prime factor of n (n itself when n is prime); n ≥ 2.
    pub fn smallest_prime_factor(&self, n: u64) -> u64 {
        u64::from(self.spf[n as usize])
    }

    /// Complete sorted list of prime powers in [2, X].
    pub fn prime_powers(&self) -> &[u64] {
        &self.prime_powers
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] == n as u32
    }

    pub fn prime_count(&self) -> usize {
        self.prime_powers
            .iter()
            .filter(|&&k| self.is_prime(k))
            .count()
    }

    pub fn d_ell(&self, n: u64, ell: u32) -> u64 {
        assert!(n >= 1 && ell >= 1);
        let mut n = n as usize;
        let mut out = 1u64;
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut m = 0u32;
            while n % p == 0 {
                n /= p;
                m += 1;
            }
            out *= prime_power_coefficient(m, ell);
        }
        out
    }

    pub fn liouville(&self, n: u64) -> i32 {
        assert!(n >= 1);
        let mut n = n as usize;
        let mut sign = 1i32;
        while n > 1 {
            n /= self.spf[n] as usize;
            sign = -sign;
        }
        sign
    }

    pub fn von_mangoldt(&self, k: u64) -> f64 {
        assert!(k >= 1);
        if k < 2 {
            return 0.0;
        }
        let p = self.spf[k as usize] as u64;
        let mut q = k;
        while q % p == 0 {
            q /= p;
        }
        if q == 1 {
            (p as f64).ln()
        } else {
            0.0
        }
    }

    /// d_ℓ(n) for every n ≤ X as exact small integers in f64.
    fn d_ell_table(&self, ell: u32) -> Vec<f64> {
        let n = self.spf.len() - 1;
        let mut d = vec![1.0f64; n + 1];
        for i in 2..=n {
            let p = self.spf[i] as usize;
            let mut m = 0u32;
            let mut q = i;
            while q % p == 0 {
                q /= p;
                m += 1;
            }
            d[i] = d[q] * prime_power_coefficient(m, ell) as f64;
        }
        d
    }

    fn liouville_table(&self) -> Vec<i8> {
        let n = self.spf.len() - 1;
        let mut lam = vec![1i8; n + 1];
        for i in 2..=n {
            lam[i] = -lam[i / self.spf[i] as usize];
        }
        lam
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSign {
    Plus,
    Minus,
}

/// Parameters of the discrete double sum: coefficient cutoff X = T^{1-δ},
/// log T, the integer coefficient exponent ℓ, the coefficient choice
/// (d_ℓ or λ·d_ℓ), and the gap-length parameter c.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteParams {
    pub x_cutoff: u64,
    pub log_t: f64,
    pub ell: u32,
    pub sign: CoeffSign,
    pub c: f64,
}

impl DiscreteParams {
    pub fn new(
        x_cutoff: u64,
        log_t: f64,
        ell: u32,
        sign: CoeffSign,
        c: f64,
    ) -> Result<Self, ArithmeticError> {
        if x_cutoff < 1 {
            return Err(ArithmeticError::InvalidParams {
                reason: format!("X must be at least 1, got {x_cutoff}"),
            });
        }
        if !(log_t > 0.0) {
            return Err(ArithmeticError::InvalidParams {
                reason: format!("log T must be positive, got {log_t}"),
            });
        }
        if (x_cutoff as f64).ln() > log_t * (1.0 + 1e-12) {
            return Err(ArithmeticError::InvalidParams {
                reason: format!("log X = {} exceeds log T = {log_t}", (x_cutoff as f64).ln()),
            });
        }
        if ell < 1 {
            return Err(ArithmeticError::InvalidParams {
                reason: "ell must be at least 1".into(),
            });
        }
        if !(c >= 0.0) {
            return Err(ArithmeticError::InvalidParams {
                reason: format!("c must be nonnegative, got {c}"),
            });
        }
        Ok(Self {
            x_cutoff,
            log_t,
            ell,
            sign,
            c,
        })
    }
}

/// Discrete functional
/// h(c) = c - [Σ_{kn≤X} a(n)·a(kn)·g_c(k)·Λ(k)/(kn)] / [Σ_{n≤X} a(n)²/n]
/// with a(n) = d_ℓ(n) for the plus sign and a(n) = λ(n)·d_ℓ(n) for the
/// minus sign, k running over prime powers.
///
/// The Liouville factors collapse to λ(k) per term, so the minus-sign
/// numerator flips exactly the odd-prime-power contributions; that flip is
/// what pushes h above c, matching the integral form h⁻.
pub fn h_discrete(p: &DiscreteParams) -> Result<f64, ArithmeticError> {
    let tables = sieve_tables(p.x_cutoff)?;
    Ok(h_discrete_with_tables(&tables, p))
}

/// As [`h_discrete`] but reusing prebuilt sieve tables (which must cover X).
///
/// Terms are accumulated per k in ascending n with compensated summation,
/// then across ascending k, for cross-platform reproducibility.
pub fn h_discrete_with_tables(tables: &SieveTables, p: &DiscreteParams) -> f64 {
    assert!(tables.limit() >= p.x_cutoff, "sieve does not cover X");
    let x = p.x_cutoff;
    let d = tables.d_ell_table(p.ell);
    let lam = match p.sign {
        CoeffSign::Minus => Some(tables.liouville_table()),
        CoeffSign::Plus => None,
    };

    let mut denominator = KahanSum::default();
    for n in 1..=x as usize {
        denominator.add(d[n] * d[n] / n as f64);
    }

    let mut numerator = KahanSum::default();
    for &k in tables.prime_powers() {
        if k > x {
            break;
        }
        let g = g_kernel(k, p.c, p.log_t);
        let lambda_k = lam.as_ref().map_or(1.0, |l| f64::from(l[k as usize]));
        let weight = lambda_k * g * tables.von_mangoldt(k);
        let mut inner = KahanSum::default();
        for n in 1..=(x / k) as usize {
            inner.add(d[n] * d[k as usize * n] / (k as usize * n) as f64);
        }
        numerator.add(weight * inner.value());
    }

    p.c - numerator.value() / denominator.value()
}
