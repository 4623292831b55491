//! Command-line surface over the zeta-gaps library: every operation is
//! reachable from one of the subcommands, and reports are emitted as
//! key-sorted JSON or headered CSV with byte-stable output.
//!
//! Floating-point output carries 9 significant digits; reports are rounded
//! before serialization so that emitted JSON parses back into the same
//! record.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use zeta_gaps::arithmetic::{
    h_discrete_with_tables, sieve_tables_with_budget, CoeffSign, DiscreteParams,
    DEFAULT_SIEVE_BUDGET,
};
use zeta_gaps::asymptotic::{
    asymptotic_integral, asymptotic_objective, finite_r_defect, h_minus_large_r, h_plus_large_r,
    optimize_scale, r_threshold, tail_integral, tail_majorant, AsympParams,
};
use zeta_gaps::bounds::{certified_h_plus_upper, optimize_theta, optimize_vartheta, BoundScheme};
use zeta_gaps::hfun::{build_table, h_minus, h_plus, HParams, TableKind};
use zeta_gaps::numerics::{integrate_semi_infinite, Boundary, QuadSpec};
use zeta_gaps::zeros::{counting_check, gap_report, load_zeros, DEFAULT_THETA, DEFAULT_VARTHETA};

/// Environment variable capping sieve memory for the discrete command, in
/// bytes.
pub const SIEVE_BUDGET_ENV: &str = "ZETA_GAPS_SIEVE_BUDGET";

#[derive(Debug)]
pub enum CliError {
    /// Invalid parameters or unparseable input content (exit 2).
    Domain { message: String },
    /// File I/O failure (exit 74).
    Io { message: String },
}

impl CliError {
    pub fn kind_label(&self) -> &'static str {
        match self {
            CliError::Domain { .. } => "domain",
            CliError::Io { .. } => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Domain { message } | CliError::Io { message } => message,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 2,
            CliError::Io { .. } => 74,
        }
    }

    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain {
            message: e.to_string(),
        }
    }
}

/// Machine-readable error object, emitted on stdout before a nonzero exit.
pub fn error_object(err: &CliError) -> String {
    let v = serde_json::json!({
        "error": { "kind": err.kind_label(), "message": err.message() }
    });
    let mut s = serde_json::to_string(&v).expect("error object serializes");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Plus,
    Minus,
}

#[derive(Parser, Debug)]
#[command(
    name = "zeta-gaps",
    version,
    about = "Gap functionals, closed-form bound constants, and zero-gap statistics"
)]
pub struct RunConfig {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Output file (stdout when absent); written once, atomically.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate h+ or h- at (c, ell, delta).
    EvalH(EvalHArgs),
    /// Search certified c for each r:ell row and tabulate h there.
    Table(TableArgs),
    /// Maximize the large-gap bound objective over b.
    OptimizeTheta(OptimizeArgs),
    /// Maximize the small-gap bound objective over b.
    OptimizeVartheta(OptimizeArgs),
    /// Large-multiplicity closed form: optimize, evaluate, tails, thresholds.
    Asymptotic(AsymptoticArgs),
    /// Evaluate the discrete prime-power form of h.
    Discrete(DiscreteArgs),
    /// Normalized gap statistics of a zero-ordinate table.
    ZerosStats(ZerosStatsArgs),
    /// Zero counts against the leading counting terms.
    Counting(CountingArgs),
}

#[derive(Args, Debug)]
pub struct EvalHArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub ell: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    /// Also emit the closed-form k-piece upper bound (h+ only).
    #[arg(long)]
    pub certified_k: Option<u32>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Rows as "r:ell" pairs, comma separated, e.g. "1:2.2,2:2.8".
    #[arg(long)]
    pub rows: String,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Number of chord pieces (default: the printed display's piece count).
    #[arg(long)]
    pub k: Option<u32>,
    /// Use the internally consistent k-piece scheme instead of the printed
    /// display constants.
    #[arg(long)]
    pub rigorous: bool,
    /// Lower end of the b bracket (default 3).
    #[arg(long)]
    pub b_min: Option<f64>,
    /// Upper end of the b bracket (default 8 for theta, 9 for vartheta).
    #[arg(long)]
    pub b_max: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AsymptoticArgs {
    /// Maximize the closed form over [b-min, b-max].
    #[arg(long)]
    pub optimize: bool,
    /// Evaluate the objective and its quadrature cross-check at this B.
    #[arg(long)]
    pub objective_at: Option<f64>,
    /// Tail integral from this r (uses --b).
    #[arg(long)]
    pub tail_at: Option<f64>,
    /// Bound h at this multiplicity r (uses --b and --theta / --vartheta).
    #[arg(long)]
    pub large_r: Option<f64>,
    /// Report the r beyond which the neglected tail term certifies below
    /// this tolerance (uses --b).
    #[arg(long)]
    pub threshold_tol: Option<f64>,
    /// Finite-r weight-replacement defect at this r (uses --b).
    #[arg(long)]
    pub defect_r: Option<f64>,
    #[arg(long, default_value_t = 1.502243)]
    pub b: f64,
    #[arg(long, default_value_t = 0.5)]
    pub b_min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub b_max: f64,
    /// Large-gap threshold constant for --large-r.
    #[arg(long, default_value_t = 0.9)]
    pub theta: f64,
    /// Use the small-gap mirror for --large-r.
    #[arg(long)]
    pub small: bool,
    /// Small-gap threshold constant for --large-r --small.
    #[arg(long, default_value_t = 0.29)]
    pub vartheta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
}

#[derive(Args, Debug)]
pub struct DiscreteArgs {
    /// Coefficient cutoff X.
    #[arg(long)]
    pub x: u64,
    /// log T; derived from --delta via log X/(1-delta) when absent.
    #[arg(long)]
    pub log_t: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long)]
    pub ell: u32,
    #[arg(long, value_enum)]
    pub sign: KindArg,
    #[arg(long)]
    pub c: f64,
}

#[derive(Args, Debug)]
pub struct ZerosStatsArgs {
    /// Zero-ordinate table: one decimal per line, '#' comments.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = DEFAULT_THETA)]
    pub theta: f64,
    #[arg(long, default_value_t = DEFAULT_VARTHETA)]
    pub vartheta: f64,
}

#[derive(Args, Debug)]
pub struct CountingArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Height T.
    #[arg(long)]
    pub t: f64,
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalHReport {
    pub kind: String,
    pub c: f64,
    pub ell: f64,
    pub delta: f64,
    pub h: f64,
    pub certified_upper: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub kind: String,
    pub delta: f64,
    pub rows: Vec<TableRowReport>,
    pub failures: Vec<TableFailureReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRowReport {
    pub r: u32,
    pub ell: f64,
    pub c: f64,
    pub h_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFailureReport {
    pub r: u32,
    pub ell: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub scheme: String,
    pub k: u32,
    pub b_star: f64,
    pub value: f64,
    pub constraint_ok: bool,
    pub boundary: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticOptReport {
    pub b_star: f64,
    pub value: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub boundary: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValueReport {
    pub b: f64,
    pub objective: f64,
    pub integral: f64,
    pub closed_form: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub r: f64,
    pub b: f64,
    pub tail: f64,
    /// The same tail recomputed through the generic semi-infinite routine.
    pub tail_cross_check: f64,
    pub majorant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargeRReport {
    pub kind: String,
    pub r: f64,
    pub b: f64,
    pub threshold_constant: f64,
    pub value: f64,
    pub certifies: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub b: f64,
    pub tol: f64,
    pub r_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub r: f64,
    pub b: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReport {
    pub x: u64,
    pub log_t: f64,
    pub ell: u32,
    pub sign: String,
    pub c: f64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStatsReport {
    pub r: u32,
    pub max_norm: f64,
    pub argmax: usize,
    pub min_norm: f64,
    pub argmin: usize,
    pub count_above: u64,
    pub count_below: u64,
    pub theta_used: f64,
    pub vartheta_used: f64,
    pub n_gaps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub t: f64,
    pub empirical: u64,
    pub main_term: f64,
    pub refined_main_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Report {
    EvalH(EvalHReport),
    Table(TableReport),
    Theta(ThetaReport),
    AsymptoticOpt(AsymptoticOptReport),
    AsymptoticValue(AsymptoticValueReport),
    Tail(TailReport),
    LargeR(LargeRReport),
    Threshold(ThresholdReport),
    Defect(DefectReport),
    Discrete(DiscreteReport),
    GapStats(GapStatsReport),
    Counting(CountingReport),
}

// ---------------------------------------------------------------------------
// Execution

fn boundary_label(b: Option<Boundary>) -> Option<String> {
    b.map(|side| {
        match side {
            Boundary::Lower => "lower",
            Boundary::Upper => "upper",
        }
        .to_string()
    })
}

fn kind_label(kind: KindArg) -> String {
    match kind {
        KindArg::Plus => "plus",
        KindArg::Minus => "minus",
    }
    .to_string()
}

fn parse_rows(rows: &str) -> Result<Vec<(u32, f64)>, CliError> {
    let mut out = Vec::new();
    for piece in rows.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let (r, ell) = piece.split_once(':').ok_or_else(|| CliError::Domain {
            message: format!("row {piece:?} is not of the form r:ell"),
        })?;
        let r: u32 = r.trim().parse().map_err(|_| CliError::Domain {
            message: format!("row {piece:?}: bad r"),
        })?;
        let ell: f64 = ell.trim().parse().map_err(|_| CliError::Domain {
            message: format!("row {piece:?}: bad ell"),
        })?;
        out.push((r, ell));
    }
    Ok(out)
}

fn open_table(path: &PathBuf) -> Result<zeta_gaps::ZeroTable, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io {
        message: format!("cannot open {}: {e}", path.display()),
    })?;
    load_zeros(BufReader::new(file), &path.display().to_string()).map_err(|e| match e {
        zeta_gaps::zeros::ZerosError::Io(io) => CliError::Io {
            message: io.to_string(),
        },
        other => CliError::domain(other),
    })
}

fn sieve_budget_from_env() -> u64 {
    std::env::var(SIEVE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SIEVE_BUDGET)
}

fn quad_from(abs_tol: f64) -> Result<QuadSpec, CliError> {
    if !(abs_tol > 0.0) {
        return Err(CliError::Domain {
            message: format!("abs-tol must be positive, got {abs_tol}"),
        });
    }
    Ok(QuadSpec::with_tol(abs_tol))
}

/// Execute one parsed command and produce its report. Pure computation; no
/// output side effects.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match &config.command {
        Command::EvalH(a) => {
            let quad = quad_from(a.abs_tol)?;
            let p = HParams::new(a.c, a.ell, a.delta, quad).map_err(CliError::domain)?;
            let h = match a.kind {
                KindArg::Plus => h_plus(&p),
                KindArg::Minus => h_minus(&p),
            }
            .map_err(CliError::domain)?;
            let certified_upper =
                match (a.kind, a.certified_k) {
                    (KindArg::Plus, Some(k)) if k >= 1 && a.c > 0.0 => Some(
                        certified_h_plus_upper(a.c, a.ell, a.delta, BoundScheme::rigorous(k)),
                    ),
                    (_, Some(_)) => {
                        return Err(CliError::Domain {
                            message: "certified-k needs kind = plus, k >= 1 and c > 0".into(),
                        })
                    }
                    _ => None,
                };
            Ok(Report::EvalH(EvalHReport {
                kind: kind_label(a.kind),
                c: a.c,
                ell: a.ell,
                delta: a.delta,
                h,
                certified_upper,
            }))
        }
        Command::Table(a) => {
            let rows = parse_rows(&a.rows)?;
            let kind = match a.kind {
                KindArg::Plus => TableKind::Plus,
                KindArg::Minus => TableKind::Minus,
            };
            let built = build_table(kind, &rows, a.delta, quad_from(a.abs_tol)?);
            Ok(Report::Table(TableReport {
                kind: kind_label(a.kind),
                delta: a.delta,
                rows: built
                    .rows
                    .iter()
                    .map(|r| TableRowReport {
                        r: r.r,
                        ell: r.ell,
                        c: r.c,
                        h_value: r.h_value,
                    })
                    .collect(),
                failures: built
                    .failures
                    .iter()
                    .map(|f| TableFailureReport {
                        r: f.r,
                        ell: f.ell,
                        error: f.error.clone(),
                    })
                    .collect(),
            }))
        }
        Command::OptimizeTheta(a) => {
            let k = a.k.unwrap_or(2);
            let scheme = if a.rigorous {
                BoundScheme::rigorous(k)
            } else {
                BoundScheme::as_printed(k)
            };
            let (lo, hi) = (a.b_min.unwrap_or(3.0), a.b_max.unwrap_or(8.0));
            let r = optimize_theta(scheme, (lo, hi)).map_err(CliError::domain)?;
            Ok(Report::Theta(ThetaReport {
                scheme: scheme.mode_label().to_string(),
                k: scheme.k,
                b_star: r.b_star,
                value: r.theta,
                constraint_ok: r.constraint_ok,
                boundary: boundary_label(r.boundary),
            }))
        }
        Command::OptimizeVartheta(a) => {
            let k = a.k.unwrap_or(1);
            let scheme = if a.rigorous {
                BoundScheme::rigorous(k)
            } else {
                BoundScheme::as_printed(k)
            };
            let (lo, hi) = (a.b_min.unwrap_or(3.0), a.b_max.unwrap_or(9.0));
            let r = optimize_vartheta(scheme, (lo, hi)).map_err(CliError::domain)?;
            Ok(Report::Theta(ThetaReport {
                scheme: scheme.mode_label().to_string(),
                k: scheme.k,
                b_star: r.b_star,
                value: r.theta,
                constraint_ok: r.constraint_ok,
                boundary: boundary_label(r.boundary),
            }))
        }
        Command::Asymptotic(a) => run_asymptotic(a),
        Command::Discrete(a) => {
            let log_t = match a.log_t {
                Some(v) => v,
                None => {
                    if !(0.0..1.0).contains(&a.delta) {
                        return Err(CliError::Domain {
                            message: format!("delta must lie in [0, 1), got {}", a.delta),
                        });
                    }
                    (a.x as f64).ln() / (1.0 - a.delta)
                }
            };
            let sign = match a.sign {
                KindArg::Plus => CoeffSign::Plus,
                KindArg::Minus => CoeffSign::Minus,
            };
            let p = DiscreteParams::new(a.x, log_t, a.ell, sign, a.c).map_err(CliError::domain)?;
            let tables =
                sieve_tables_with_budget(a.x, sieve_budget_from_env()).map_err(CliError::domain)?;
            let h = h_discrete_with_tables(&tables, &p);
            Ok(Report::Discrete(DiscreteReport {
                x: a.x,
                log_t,
                ell: a.ell,
                sign: kind_label(a.sign),
                c: a.c,
                h,
            }))
        }
        Command::ZerosStats(a) => {
            let table = open_table(&a.input)?;
            let rep = gap_report(&table, a.r, a.theta, a.vartheta).map_err(CliError::domain)?;
            Ok(Report::GapStats(GapStatsReport {
                r: rep.r,
                max_norm: rep.max_norm,
                argmax: rep.argmax,
                min_norm: rep.min_norm,
                argmin: rep.argmin,
                count_above: rep.count_above,
                count_below: rep.count_below,
                theta_used: rep.theta_used,
                vartheta_used: rep.vartheta_used,
                n_gaps: rep.n_gaps,
            }))
        }
        Command::Counting(a) => {
            let table = open_table(&a.input)?;
            let c = counting_check(&table, a.t).map_err(CliError::domain)?;
            Ok(Report::Counting(CountingReport {
                t: a.t,
                empirical: c.empirical,
                main_term: c.main_term,
                refined_main_term: c.refined_main_term,
            }))
        }
    }
}

fn run_asymptotic(a: &AsymptoticArgs) -> Result<Report, CliError> {
    let quad = quad_from(a.abs_tol)?;
    let actions = usize::from(a.optimize)
        + usize::from(a.objective_at.is_some())
        + usize::from(a.tail_at.is_some())
        + usize::from(a.large_r.is_some())
        + usize::from(a.threshold_tol.is_some())
        + usize::from(a.defect_r.is_some());
    if actions != 1 {
        return Err(CliError::Domain {
            message: "pick exactly one of --optimize, --objective-at, --tail-at, --large-r, \
                      --threshold-tol, --defect-r"
                .into(),
        });
    }

    if a.optimize {
        let r = optimize_scale((a.b_min, a.b_max)).map_err(CliError::domain)?;
        return Ok(Report::AsymptoticOpt(AsymptoticOptReport {
            b_star: r.arg_star,
            value: r.val_star,
            bracket_lo: r.bracket.0,
            bracket_hi: r.bracket.1,
            boundary: boundary_label(r.boundary),
        }));
    }
    if let Some(b) = a.objective_at {
        if !(b > 0.0) {
            return Err(CliError::Domain {
                message: format!("B must be positive, got {b}"),
            });
        }
        let integral = asymptotic_integral(b, a.delta, quad).map_err(CliError::domain)?;
        return Ok(Report::AsymptoticValue(AsymptoticValueReport {
            b,
            objective: asymptotic_objective(b),
            integral,
            closed_form: (std::f64::consts::PI / (b * b)).atan() / std::f64::consts::PI,
        }));
    }
    if let Some(r) = a.tail_at {
        let tail = tail_integral(r, a.b, a.delta, quad).map_err(CliError::domain)?;
        // same tail through the generic semi-infinite routine as a cross-check
        let decay = a.b * a.b;
        let freq = 1.0 - a.delta;
        let cross = integrate_semi_infinite(
            move |w: f64| {
                (std::f64::consts::PI * freq * w).sin() / (std::f64::consts::PI * w)
                    * (-decay * w).exp()
            },
            r,
            quad,
            decay,
        )
        .map_err(CliError::domain)?;
        return Ok(Report::Tail(TailReport {
            r,
            b: a.b,
            tail,
            tail_cross_check: cross,
            majorant: tail_majorant(r, a.b),
        }));
    }
    if let Some(r) = a.large_r {
        let params = AsympParams::new(a.b, r, a.delta).map_err(CliError::domain)?;
        let (kind, constant, value, certifies) = if a.small {
            let v = h_minus_large_r(&params, a.vartheta, quad).map_err(CliError::domain)?;
            ("minus", a.vartheta, v, v > r)
        } else {
            let v = h_plus_large_r(&params, a.theta, quad).map_err(CliError::domain)?;
            ("plus", a.theta, v, v < r)
        };
        return Ok(Report::LargeR(LargeRReport {
            kind: kind.to_string(),
            r,
            b: a.b,
            threshold_constant: constant,
            value,
            certifies,
        }));
    }
    if let Some(tol) = a.threshold_tol {
        if !(tol > 0.0 && a.b > 0.0) {
            return Err(CliError::Domain {
                message: "threshold needs tol > 0 and B > 0".into(),
            });
        }
        return Ok(Report::Threshold(ThresholdReport {
            b: a.b,
            tol,
            r_threshold: r_threshold(a.b, tol),
        }));
    }
    let r = a.defect_r.expect("action counted above");
    let params = AsympParams::new(a.b, r, a.delta).map_err(CliError::domain)?;
    let defect = finite_r_defect(&params, quad).map_err(CliError::domain)?;
    Ok(Report::Defect(DefectReport { r, b: a.b, defect }))
}

// ---------------------------------------------------------------------------
// Emission

/// Round to 9 significant decimal digits.
fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let shift = 8 - magnitude;
    if !(-280..=280).contains(&shift) {
        return x;
    }
    let factor = 10f64.powi(shift);
    (x * factor).round() / factor
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Object(map) => {
            for (_, item) in map.iter_mut() {
                round_floats(item);
            }
        }
        Value::Array(items) => {
            for item in items.iter_mut() {
                round_floats(item);
            }
        }
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            if let Some(rounded) = serde_json::Number::from_f64(round_sig9(x)) {
                *v = Value::Number(rounded);
            }
        }
        _ => {}
    }
}

fn fmt_f(x: f64) -> String {
    format!("{}", round_sig9(x))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Report {
    fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Report::EvalH(r) => {
                out.push_str("kind,c,ell,delta,h,certified_upper\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.kind,
                    fmt_f(r.c),
                    fmt_f(r.ell),
                    fmt_f(r.delta),
                    fmt_f(r.h),
                    fmt_opt(r.certified_upper)
                );
            }
            Report::Table(t) => {
                out.push_str("r,ell,c,h_value\n");
                for row in &t.rows {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        row.r,
                        fmt_f(row.ell),
                        fmt_f(row.c),
                        fmt_f(row.h_value)
                    );
                }
            }
            Report::Theta(r) => {
                out.push_str("scheme,k,b_star,value\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    r.scheme,
                    r.k,
                    fmt_f(r.b_star),
                    fmt_f(r.value)
                );
            }
            Report::AsymptoticOpt(r) => {
                out.push_str("b_star,value,bracket_lo,bracket_hi,boundary\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_f(r.b_star),
                    fmt_f(r.value),
                    fmt_f(r.bracket_lo),
                    fmt_f(r.bracket_hi),
                    r.boundary.as_deref().unwrap_or_default()
                );
            }
            Report::AsymptoticValue(r) => {
                out.push_str("b,objective,integral,closed_form\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f(r.b),
                    fmt_f(r.objective),
                    fmt_f(r.integral),
                    fmt_f(r.closed_form)
                );
            }
            Report::Tail(r) => {
                out.push_str("r,b,tail,tail_cross_check,majorant\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_f(r.r),
                    fmt_f(r.b),
                    fmt_f(r.tail),
                    fmt_f(r.tail_cross_check),
                    fmt_f(r.majorant)
                );
            }
            Report::LargeR(r) => {
                out.push_str("kind,r,b,threshold_constant,value,certifies\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.kind,
                    fmt_f(r.r),
                    fmt_f(r.b),
                    fmt_f(r.threshold_constant),
                    fmt_f(r.value),
                    r.certifies
                );
            }
            Report::Threshold(r) => {
                out.push_str("b,tol,r_threshold\n");
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt_f(r.b),
                    fmt_f(r.tol),
                    fmt_f(r.r_threshold)
                );
            }
            Report::Defect(r) => {
                out.push_str("r,b,defect\n");
                let _ = writeln!(out, "{},{},{}", fmt_f(r.r), fmt_f(r.b), fmt_f(r.defect));
            }
            Report::Discrete(r) => {
                out.push_str("x,log_t,ell,sign,c,h\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.x,
                    fmt_f(r.log_t),
                    r.ell,
                    r.sign,
                    fmt_f(r.c),
                    fmt_f(r.h)
                );
            }
            Report::GapStats(r) => {
                out.push_str(
                    "r,max_norm,argmax,min_norm,argmin,count_above,count_below,theta_used,vartheta_used,n_gaps\n",
                );
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.r,
                    fmt_f(r.max_norm),
                    r.argmax,
                    fmt_f(r.min_norm),
                    r.argmin,
                    r.count_above,
                    r.count_below,
                    fmt_f(r.theta_used),
                    fmt_f(r.vartheta_used),
                    r.n_gaps
                );
            }
            Report::Counting(r) => {
                out.push_str("t,empirical,main_term,refined_main_term\n");
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f(r.t),
                    r.empirical,
                    fmt_f(r.main_term),
                    fmt_f(r.refined_main_term)
                );
            }
        }
        // failures, if any, ride along as comment lines to keep the CSV body
        // schema-stable
        if let Report::Table(t) = self {
            for f in &t.failures {
                let _ = writeln!(
                    out,
                    "# failure,{},{},{}",
                    f.r,
                    fmt_f(f.ell),
                    csv_escape(&f.error)
                );
            }
        }
        out
    }
}

/// Serialize a report: key-sorted, newline-terminated JSON (floats rounded
/// to 9 significant digits) or headered CSV. Byte-stable across runs.
pub fn emit(report: &Report, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut value = serde_json::to_value(report).expect("report serializes");
            round_floats(&mut value);
            let mut s = serde_json::to_string(&value).expect("value serializes");
            s.push('\n');
            s.into_bytes()
        }
        OutputFormat::Csv => report.to_csv().into_bytes(),
    }
}

/// Write the already-serialized report to the chosen sink in one shot; file
/// output goes through a rename so partial writes never land at the target.
pub fn write_output(bytes: &[u8], output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Io {
                    message: e.to_string(),
                })
        }
        Some(path) => {
            let tmp = path.with_extension("partial");
            std::fs::write(&tmp, bytes).map_err(|e| CliError::Io {
                message: format!("cannot write {}: {e}", tmp.display()),
            })?;
            std::fs::rename(&tmp, path).map_err(|e| CliError::Io {
                message: format!("cannot move report into {}: {e}", path.display()),
            })
        }
    }
}
