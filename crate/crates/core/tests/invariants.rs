//! Cross-module property suites that are too heavy for inline unit tests:
//! dense-grid optimizer checks, bound domination over random parameters, the
//! large-r substitution limit, sieve-scale arithmetic identities, and the
//! conditional genuine-data statistics.

use std::f64::consts::PI;

use zeta_gaps::arithmetic::sieve_tables;
use zeta_gaps::asymptotic::asymptotic_objective;
use zeta_gaps::bounds::{
    certified_h_plus_upper, chord_slopes, theta_objective, vartheta_objective, BoundScheme,
};
use zeta_gaps::hfun::{build_table, h_plus, HParams, TableKind};
use zeta_gaps::numerics::{exp_integral_e1, golden_max, QuadSpec};
use zeta_gaps::zeros::{load_zeros, normalized_gap};

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * ((self.next() >> 11) as f64 / (1u64 << 53) as f64)
    }
}

fn dense_grid_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let mut best_x = lo;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    (best_x, best_v)
}

/// Golden-section maximization lands on the dense-grid argmax for every
/// objective the acceptance constants rely on.
#[test]
fn golden_section_matches_dense_grid_scan() {
    type Objective = Box<dyn Fn(f64) -> f64>;
    let cases: Vec<(&str, Objective, f64, f64)> = vec![
        (
            "large-gap printed",
            Box::new(|b| theta_objective(b, BoundScheme::as_printed(2)).unwrap()),
            3.0,
            8.0,
        ),
        (
            "small-gap printed",
            Box::new(|b| vartheta_objective(b, BoundScheme::as_printed(1)).unwrap()),
            3.0,
            9.0,
        ),
        (
            "large-gap sixteen pieces",
            Box::new(|b| theta_objective(b, BoundScheme::rigorous(16)).unwrap()),
            3.0,
            8.0,
        ),
        (
            "closed-form scale",
            Box::new(asymptotic_objective),
            0.5,
            4.0,
        ),
    ];
    for (label, f, lo, hi) in cases {
        let x_tol = 1e-7;
        let opt = golden_max(&f, lo, hi, x_tol).unwrap();
        let (grid_x, grid_v) = dense_grid_argmax(&f, lo, hi, 100_000);
        let grid_step = (hi - lo) / 100_000.0;
        assert!(
            (opt.arg_star - grid_x).abs() <= grid_step + x_tol,
            "{label}: argmax {} vs grid {grid_x}",
            opt.arg_star
        );
        assert!(opt.val_star >= grid_v - 1e-12, "{label}: value below grid");
    }
}

/// Every emitted large-gap row certifies h < r and every small-gap row
/// h > r, across the full printed parameter sets.
#[test]
fn table_rows_carry_certificates() {
    let quad = QuadSpec::with_tol(1e-8);
    let large = [(1, 2.2), (2, 2.8), (3, 3.3), (4, 3.7), (5, 4.0)];
    let t = build_table(TableKind::Plus, &large, 0.0, quad);
    assert!(t.failures.is_empty(), "failures: {:?}", t.failures);
    assert_eq!(t.rows.len(), large.len());
    let printed_c = [2.337, 3.708, 4.994, 6.235, 7.448];
    for (row, want_c) in t.rows.iter().zip(printed_c) {
        assert!(row.h_value < f64::from(row.r), "row {row:?}");
        assert!((row.c - want_c).abs() < 5e-3, "row {row:?} vs c = {want_c}");
    }

    let small = [(1, 1.1), (2, 1.4), (3, 1.9), (4, 2.3), (5, 2.7)];
    let t = build_table(TableKind::Minus, &small, 0.0, quad);
    assert!(t.failures.is_empty(), "failures: {:?}", t.failures);
    let printed_c = [0.5172, 1.126, 1.831, 2.588, 3.375];
    for (row, want_c) in t.rows.iter().zip(printed_c) {
        assert!(row.h_value > f64::from(row.r), "row {row:?}");
        assert!((row.c - want_c).abs() < 5e-3, "row {row:?} vs c = {want_c}");
    }
}

/// The closed-form bound dominates the quadrature value everywhere on a
/// random grid, and the slack shrinks as the piece count grows.
#[test]
fn certified_upper_bound_dominates_quadrature() {
    let quad = QuadSpec::with_tol(1e-10);
    let mut rng = SplitMix64(0xd0b1);
    let mut slack_sums = [0.0f64; 3];
    for _ in 0..40 {
        let c = rng.range(0.5, 10.0);
        let ell = rng.range(1.0, 5.0);
        let h = h_plus(&HParams::new(c, ell, 0.0, quad).unwrap()).unwrap();
        for (i, k) in [1u32, 2, 4].into_iter().enumerate() {
            let upper = certified_h_plus_upper(c, ell, 0.0, BoundScheme::rigorous(k));
            assert!(upper >= h - 1e-8, "k={k} c={c} ell={ell}: {upper} < {h}");
            slack_sums[i] += upper - h;
        }
    }
    assert!(
        slack_sums[0] > slack_sums[1] && slack_sums[1] > slack_sums[2],
        "average slack should shrink with k: {slack_sums:?}"
    );
}

/// At large multiplicity the certified bound deficit, normalized by √r and
/// evaluated at ℓ = √(bc - 1) along c = r + θ√r, (a) dominates the b
/// objective (which keeps the lossy tail start b - 1), and (b) converges to
/// the same assembly with the tail started at b, reassembled here from the
/// public chord slopes.
#[test]
fn large_r_substitution_limit() {
    let r = 1e6f64;
    for (k, b) in [(1u32, 4.0f64), (2, 5.0), (2, 5.3), (4, 5.5)] {
        let scheme = BoundScheme::rigorous(k);
        let theta = theta_objective(b, scheme).unwrap();
        let c = r + theta * r.sqrt();
        let ell = (b * c - 1.0).sqrt();
        let deficit = (c - certified_h_plus_upper(c, ell, 0.0, scheme)) / r.sqrt();
        assert!(deficit >= theta - 1e-9, "k={k} b={b}: {deficit} < {theta}");

        let slopes = chord_slopes(k);
        let kf = f64::from(k);
        let mut bracket = slopes[0] / 2.0;
        for j in 1..k as usize {
            bracket -= (slopes[j - 1] - slopes[j]) / 2.0 * (-b * j as f64 / (2.0 * kf)).exp();
        }
        bracket -= slopes[k as usize - 1] / 2.0 * (-b / 2.0).exp();
        let limit = 2.0 * b.sqrt() * (2.0 / (PI * b) * bracket - exp_integral_e1(b).unwrap() / PI);
        assert!(
            (deficit - limit).abs() <= 1e-3,
            "k={k} b={b}: deficit {deficit} vs limit {limit}"
        );
    }
}

/// The closed-form objective is unimodal: its finite-difference slope
/// changes sign exactly once on a 10^4-point grid of [0.1, 10].
#[test]
fn asymptotic_objective_unimodal() {
    let n = 10_000;
    let (lo, hi) = (0.1f64, 10.0f64);
    let mut sign_changes = 0;
    let mut prev_slope = 0.0f64;
    for i in 0..n {
        let x0 = lo + (hi - lo) * i as f64 / n as f64;
        let x1 = lo + (hi - lo) * (i + 1) as f64 / n as f64;
        let slope = asymptotic_objective(x1) - asymptotic_objective(x0);
        if i > 0 && slope.signum() != prev_slope.signum() {
            sign_changes += 1;
        }
        prev_slope = slope;
    }
    assert_eq!(sign_changes, 1);
}

/// Σ_{n≤X} d₂(n)/n² approaches ζ(2)² within the divisor-count tail bound
/// 4/√X, with the partial sum built by direct divisor-count summation.
#[test]
fn dirichlet_series_identity_for_d2() {
    let x = 10_000usize;
    let mut d = vec![0u32; x + 1];
    for i in 1..=x {
        for j in (i..=x).step_by(i) {
            d[j] += 1;
        }
    }
    let tables = sieve_tables(x as u64).unwrap();
    let mut partial = 0.0f64;
    for n in 1..=x {
        assert_eq!(u64::from(d[n]), tables.d_ell(n as u64, 2), "d_2({n})");
        partial += f64::from(d[n]) / (n as f64 * n as f64);
    }
    let zeta2_squared = (PI * PI / 6.0) * (PI * PI / 6.0);
    let tail_bound = 4.0 / (x as f64).sqrt();
    assert!(
        (zeta2_squared - partial).abs() <= tail_bound,
        "partial {partial} vs {zeta2_squared}"
    );
    assert!(partial < zeta2_squared);
}

/// Growth of the normalized mean values Σ d_ℓ(n)²/n / (log x)^{ℓ²} between
/// x = 10^5 and 10^6: under 10% for ℓ = 1; for ℓ = 2 the drift measures
/// ~14% at these heights (lower-order terms of the cubic mean polynomial),
/// bounded here at 20%.
#[test]
fn mean_value_growth_is_slow() {
    let x_hi = 1_000_000u64;
    let x_lo = 100_000u64;
    let tables = sieve_tables(x_hi).unwrap();

    for (ell, band) in [(1u32, 0.10f64), (2, 0.20)] {
        let mut sum = 0.0f64;
        let mut at_lo = 0.0f64;
        for n in 1..=x_hi {
            let dn = tables.d_ell(n, ell) as f64;
            sum += dn * dn / n as f64;
            if n == x_lo {
                at_lo = sum;
            }
        }
        let exponent = (ell * ell) as i32;
        let norm_lo = at_lo / (x_lo as f64).ln().powi(exponent);
        let norm_hi = sum / (x_hi as f64).ln().powi(exponent);
        let variation = (norm_lo / norm_hi - 1.0).abs();
        assert!(
            variation < band,
            "ell={ell}: variation {variation} exceeds {band}"
        );
    }
}

#[test]
fn prime_count_to_one_million() {
    let tables = sieve_tables(1_000_000).unwrap();
    assert_eq!(tables.prime_count(), 78_498);
}

/// Conditional on a user-supplied genuine zero table: the average
/// normalized gap over the window [N, 2N] must lie in [0.85, 1.15] for
/// every admissible N ≥ 10³.
#[test]
fn genuine_mean_normalization_window() {
    let path = match std::env::var("ZETA_ZEROS_FILE") {
        Ok(p) => p,
        Err(_) => {
            println!("genuine mean-normalization window skipped: no ZETA_ZEROS_FILE");
            return;
        }
    };
    let file = std::fs::File::open(&path).expect("cannot open ZETA_ZEROS_FILE");
    let table = load_zeros(std::io::BufReader::new(file), &path).unwrap();
    let mut n = 1000usize;
    let mut windows = 0;
    while 2 * n < table.len() {
        let mut sum = 0.0;
        for i in n..2 * n {
            sum += normalized_gap(&table, i, 1).unwrap();
        }
        let mean = sum / n as f64;
        println!("window [{n}, {}): mean normalized gap {mean:.4}", 2 * n);
        assert!(
            (0.85..=1.15).contains(&mean),
            "window [{n}, {}): mean {mean} outside [0.85, 1.15]",
            2 * n
        );
        n *= 2;
        windows += 1;
    }
    assert!(windows > 0, "table too short for any window");
}
