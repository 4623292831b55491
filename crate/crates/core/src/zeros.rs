//! Ingestion of zero-ordinate tables and normalized r-gap statistics.
//!
//! File format: text, one ordinate per line as a decimal literal, lines
//! beginning with '#' ignored, values strictly positive and nondecreasing.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::BufRead;
use thiserror::Error;

/// Large-gap threshold constant used by default in reports.
pub const DEFAULT_THETA: f64 = 0.574271;
/// Small-gap threshold constant used by default in reports.
pub const DEFAULT_VARTHETA: f64 = 0.299856;

#[derive(Debug, Error)]
pub enum ZerosError {
    #[error("line {line}: cannot parse ordinate from {content:?}")]
    Parse { line: usize, content: String },
    #[error("line {line}: ordinate {value} is not positive")]
    NonPositive { line: usize, value: f64 },
    #[error("line {line}: ordinate {value} decreases below its predecessor {prev}")]
    Decreasing { line: usize, value: f64, prev: f64 },
    #[error("no ordinates found in input")]
    Empty,
    #[error("index n = {n} with r = {r} is out of range for {len} ordinates")]
    IndexOutOfRange { n: usize, r: u32, len: usize },
    #[error("ordinate {value} at index {n} is not above 1, its logarithm cannot normalize a gap")]
    LogDomain { n: usize, value: f64 },
    #[error("height {t} is outside the table range (last ordinate {last})")]
    HeightOutOfRange { t: f64, last: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Validated ascending table of zero ordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    pub source: String,
}

impl ZeroTable {
    /// Validate and wrap a pre-built ordinate list (strictly positive,
    /// nondecreasing, nonempty). Equal consecutive values are permitted.
    pub fn from_ordinates(ordinates: Vec<f64>, source: &str) -> Result<Self, ZerosError> {
        if ordinates.is_empty() {
            return Err(ZerosError::Empty);
        }
        let mut prev = 0.0f64;
        for (i, &v) in ordinates.iter().enumerate() {
            if !(v > 0.0) {
                return Err(ZerosError::NonPositive {
                    line: i + 1,
                    value: v,
                });
            }
            if v < prev {
                return Err(ZerosError::Decreasing {
                    line: i + 1,
                    value: v,
                    prev,
                });
            }
            prev = v;
        }
        Ok(Self {
            ordinates,
            source: source.to_string(),
        })
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// Parse a zero table from a reader, keeping line numbers for error reports.
pub fn load_zeros<R: BufRead>(reader: R, source: &str) -> Result<ZeroTable, ZerosError> {
    let mut ordinates = Vec::new();
    let mut prev = 0.0f64;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| ZerosError::Parse {
            line: line_no,
            content: text.to_string(),
        })?;
        if !(value > 0.0) {
            return Err(ZerosError::NonPositive {
                line: line_no,
                value,
            });
        }
        if value < prev {
            return Err(ZerosError::Decreasing {
                line: line_no,
                value,
                prev,
            });
        }
        prev = value;
        ordinates.push(value);
    }
    if ordinates.is_empty() {
        return Err(ZerosError::Empty);
    }
    Ok(ZeroTable {
        ordinates,
        source: source.to_string(),
    })
}

/// Normalized r-gap (γ_{n+r} - γ_n)·log γ_n/(2πr) at the 1-based index n.
///
/// The left-endpoint logarithm is used exactly as the statistic is defined;
/// no midpoint smoothing.
pub fn normalized_gap(table: &ZeroTable, n: usize, r: u32) -> Result<f64, ZerosError> {
    let len = table.ordinates.len();
    if n < 1 || r < 1 || n + r as usize > len {
        return Err(ZerosError::IndexOutOfRange { n, r, len });
    }
    let g_n = table.ordinates[n - 1];
    let g_nr = table.ordinates[n - 1 + r as usize];
    if !(g_n > 1.0) {
        return Err(ZerosError::LogDomain { n, value: g_n });
    }
    Ok((g_nr - g_n) * g_n.ln() / (2.0 * PI * f64::from(r)))
}

/// Extremes and threshold exceedance counts of the normalized r-gaps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub r: u32,
    pub max_norm: f64,
    /// 1-based index attaining the maximum (first occurrence).
    pub argmax: usize,
    pub min_norm: f64,
    /// 1-based index attaining the minimum (first occurrence).
    pub argmin: usize,
    /// Gaps exceeding 1 + θ/√r.
    pub count_above: u64,
    /// Gaps below 1 - ϑ/√r.
    pub count_below: u64,
    pub theta_used: f64,
    pub vartheta_used: f64,
    pub n_gaps: usize,
}

/// Single deterministic pass over all normalized r-gaps of the table.
pub fn gap_report(
    table: &ZeroTable,
    r: u32,
    theta: f64,
    vartheta: f64,
) -> Result<GapReport, ZerosError> {
    let len = table.ordinates.len();
    if r < 1 || (r as usize) + 1 > len {
        return Err(ZerosError::IndexOutOfRange { n: 1, r, len });
    }
    let n_gaps = len - r as usize;
    let upper = 1.0 + theta / f64::from(r).sqrt();
    let lower = 1.0 - vartheta / f64::from(r).sqrt();

    let mut max_norm = f64::NEG_INFINITY;
    let mut argmax = 0usize;
    let mut min_norm = f64::INFINITY;
    let mut argmin = 0usize;
    let mut count_above = 0u64;
    let mut count_below = 0u64;

    for n in 1..=n_gaps {
        let g = normalized_gap(table, n, r)?;
        if g > max_norm {
            max_norm = g;
            argmax = n;
        }
        if g < min_norm {
            min_norm = g;
            argmin = n;
        }
        if g > upper {
            count_above += 1;
        }
        if g < lower {
            count_below += 1;
        }
    }

    Ok(GapReport {
        r,
        max_norm,
        argmax,
        min_norm,
        argmin,
        count_above,
        count_below,
        theta_used: theta,
        vartheta_used: vartheta,
        n_gaps,
    })
}

/// Zero count up to a height against the leading counting term, with a
/// refined term reported alongside.
///
/// At accessible heights the leading form (T/2π)·log T overshoots by a
/// visible band, so the refined (T/2π)·log(T/2π) - T/2π is emitted next to
/// it; both are labeled, neither is "corrected".
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingCheck {
    pub empirical: u64,
    pub main_term: f64,
    pub refined_main_term: f64,
}

pub fn counting_check(table: &ZeroTable, t: f64) -> Result<CountingCheck, ZerosError> {
    let last = *table.ordinates.last().expect("table is nonempty");
    if !(t > 0.0) || t > last {
        return Err(ZerosError::HeightOutOfRange { t, last });
    }
    let empirical = table.ordinates.partition_point(|&g| g <= t) as u64;
    let half_turns = t / (2.0 * PI);
    Ok(CountingCheck {
        empirical,
        main_term: half_turns * t.ln(),
        refined_main_term: half_turns * half_turns.ln() - half_turns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn table(ordinates: &[f64]) -> ZeroTable {
        ZeroTable::from_ordinates(ordinates.to_vec(), "test").unwrap()
    }

    #[test]
    fn load_three_ordinates() {
        let input = "14.134725\n21.022040\n25.010858\n";
        let t = load_zeros(Cursor::new(input), "inline").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.ordinates()[0], 14.134725);
        assert_eq!(t.source, "inline");
    }

    #[test]
    fn load_detects_monotonicity_violation_with_line() {
        let input = "# header\n14.1\n13.9\n";
        match load_zeros(Cursor::new(input), "inline") {
            Err(ZerosError::Decreasing { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected Decreasing, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_empty_and_bad_lines() {
        assert!(matches!(
            load_zeros(Cursor::new(""), "x"),
            Err(ZerosError::Empty)
        ));
        assert!(matches!(
            load_zeros(Cursor::new("# only comments\n\n"), "x"),
            Err(ZerosError::Empty)
        ));
        match load_zeros(Cursor::new("14.1\nnot-a-number\n"), "x") {
            Err(ZerosError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Parse, got {other:?}"),
        }
        match load_zeros(Cursor::new("0.0\n"), "x") {
            Err(ZerosError::NonPositive { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected NonPositive, got {other:?}"),
        }
    }

    #[test]
    fn load_permits_equal_consecutive_values() {
        let t = load_zeros(Cursor::new("2.0\n2.0\n3.0\n"), "x").unwrap();
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn normalized_gap_first_published_pair() {
        let t = table(&[14.134725, 21.022040]);
        let g = normalized_gap(&t, 1, 1).unwrap();
        assert!((g - 2.90330134724).abs() < 1e-9, "got {g}");
    }

    #[test]
    fn normalized_gap_synthetic_integers() {
        let ordinates: Vec<f64> = (1..=200).map(f64::from).collect();
        let t = table(&ordinates);
        let g = normalized_gap(&t, 100, 1).unwrap();
        assert!((g - 0.732935598879).abs() < 1e-10, "got {g}");
    }

    #[test]
    fn normalized_gap_repeated_ordinate_is_zero() {
        let t = table(&[5.0, 5.0, 6.0]);
        assert_eq!(normalized_gap(&t, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn normalized_gap_domain_errors() {
        let t = table(&[14.0, 21.0]);
        assert!(matches!(
            normalized_gap(&t, 2, 1),
            Err(ZerosError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            normalized_gap(&t, 0, 1),
            Err(ZerosError::IndexOutOfRange { .. })
        ));
        let low = table(&[0.5, 2.0]);
        assert!(matches!(
            normalized_gap(&low, 1, 1),
            Err(ZerosError::LogDomain { .. })
        ));
    }

    /// Ordinates built so that every normalized 1-gap equals 1.
    fn unit_normalized_table(len: usize) -> ZeroTable {
        let mut ordinates = vec![20.0f64];
        for _ in 1..len {
            let g = *ordinates.last().unwrap();
            ordinates.push(g + 2.0 * PI / g.ln());
        }
        table(&ordinates)
    }

    #[test]
    fn gap_report_unit_normalized() {
        let t = unit_normalized_table(500);
        let rep = gap_report(&t, 1, DEFAULT_THETA, DEFAULT_VARTHETA).unwrap();
        assert_eq!(rep.count_above, 0);
        assert_eq!(rep.count_below, 0);
        assert_eq!(rep.n_gaps, 499);
        assert!((rep.max_norm - 1.0).abs() < 1e-12);
        assert!((rep.min_norm - 1.0).abs() < 1e-12);
        assert!(rep.max_norm >= rep.min_norm);
    }

    #[test]
    fn gap_report_consistency_invariants() {
        let t = table(&[14.134725, 21.022040, 25.010858, 30.424876, 32.935062]);
        for r in [1u32, 2] {
            let rep = gap_report(&t, r, DEFAULT_THETA, DEFAULT_VARTHETA).unwrap();
            assert_eq!(rep.n_gaps, t.len() - r as usize);
            assert!(rep.count_above + rep.count_below <= rep.n_gaps as u64);
            let upper = 1.0 + rep.theta_used / f64::from(r).sqrt();
            let lower = 1.0 - rep.vartheta_used / f64::from(r).sqrt();
            assert_eq!(rep.max_norm > upper, rep.count_above >= 1);
            assert_eq!(rep.min_norm < lower, rep.count_below >= 1);
        }
    }

    #[test]
    fn gap_report_additivity_over_subgaps() {
        // r·(2π/log γ_n)·normalized_gap(n, r) telescopes over the r single gaps
        let t = table(&[14.134725, 21.022040, 25.010858, 30.424876]);
        let r = 3u32;
        let total =
            normalized_gap(&t, 1, r).unwrap() * f64::from(r) * 2.0 * PI / t.ordinates()[0].ln();
        let direct = t.ordinates()[3] - t.ordinates()[0];
        assert!((total - direct).abs() < 1e-12);
    }

    #[test]
    fn gap_report_rejects_short_table() {
        let t = table(&[14.0, 21.0]);
        assert!(gap_report(&t, 2, DEFAULT_THETA, DEFAULT_VARTHETA).is_err());
    }

    #[test]
    fn counting_synthetic() {
        let ordinates: Vec<f64> = (1..=10).map(f64::from).collect();
        let t = table(&ordinates);
        let c = counting_check(&t, 5.0).unwrap();
        assert_eq!(c.empirical, 5);
        let c = counting_check(&t, 0.5).unwrap();
        assert_eq!(c.empirical, 0);
        assert!(counting_check(&t, 11.0).is_err());
    }

    #[test]
    fn counting_terms_at_height_100() {
        let ordinates: Vec<f64> = (1..=120).map(f64::from).collect();
        let t = table(&ordinates);
        let c = counting_check(&t, 100.0).unwrap();
        assert!((c.main_term - 73.2935598879).abs() < 1e-9);
        assert!((c.refined_main_term - 28.1273435873).abs() < 1e-9);
        assert_eq!(c.empirical, 100);
    }

    #[test]
    fn deterministic_reports_from_identical_bytes() {
        let input = "14.134725\n21.022040\n25.010858\n30.424876\n";
        let a = load_zeros(Cursor::new(input), "x").unwrap();
        let b = load_zeros(Cursor::new(input), "x").unwrap();
        assert_eq!(a, b);
        let ra = gap_report(&a, 1, DEFAULT_THETA, DEFAULT_VARTHETA).unwrap();
        let rb = gap_report(&b, 1, DEFAULT_THETA, DEFAULT_VARTHETA).unwrap();
        assert_eq!(ra, rb);
    }
}
