//! `chancf` command-line front end.
//!
//! Every subcommand builds a JSON value; `--format` decides whether it is
//! printed as JSON, CSV or plain `key: value` text. Exit codes: 0 on
//! success, 1 on domain errors from the library, 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use chancf::contraction::{audit_final_chain, qm};
use chancf::digits::{digit_law_test, sample_orbit, DEFAULT_BURN_IN, DEFAULT_POOL_ABOVE};
use chancf::expansion::{decode, encode, encode_exact, DigitSequence, ExpansionParams, Rational};
use chancf::gauss_kuzmin::{iterate_with_last, rate_estimate, DEFAULT_GRID_POINTS};
use chancf::measure::{gamma_cdf, gamma_density};
use chancf::{GridFunction64, MeasureParams64};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

mod grid_csv;

pub use grid_csv::{read_grid_csv, write_grid_csv};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHANCF_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(chancf::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Domain(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<chancf::Error> for CliError {
    fn from(e: chancf::Error) -> Self {
        CliError::Domain(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Plain,
}

#[derive(Debug, Parser)]
#[command(name = "chancf", version, about = "m-adic Chan continued fractions and their Gauss-Kuzmin problem")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expand x in (0,1) into digits; `p/q` inputs are expanded exactly.
    Expand {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 60)]
        digits: usize,
    },
    /// Evaluate a digit string such as `1,0,1`.
    Decode {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        digits: String,
    },
    /// Invariant distribution function, density and normalizing constant at x.
    Cdf {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Iterate the Gauss-Kuzmin operator and report sup-norm errors.
    Iterate {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        steps: usize,
        /// `lebesgue` or a CSV file with header `x,F`.
        #[arg(long, default_value = "lebesgue")]
        initial: String,
        /// Grid points, of the form 2^k + 1 and at least 17.
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Trailing reports used for the rate fit (default: min(10, steps)).
        #[arg(long)]
        window: Option<usize>,
        /// Write the last iterate as `x,F` CSV.
        #[arg(long)]
        output_grid: Option<PathBuf>,
    },
    /// Contraction constant q_m with a certified tail.
    Qm {
        #[arg(long, required_unless_present = "scan", conflicts_with = "scan")]
        m: Option<u32>,
        /// Inclusive range of bases, e.g. `2..16`.
        #[arg(long)]
        scan: Option<String>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Evaluate the closed-form bound on q_m next to the series value.
    Audit {
        #[arg(long)]
        m: u32,
    },
    /// Monte Carlo digit frequencies against the invariant digit law.
    Sample {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1_000_000)]
        points: u64,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Digits at or above this index share one chi-square cell.
        #[arg(long, default_value_t = DEFAULT_POOL_ABOVE)]
        pool_above: u32,
    },
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "{e}");
        return e.exit_code();
    }
    match execute(&cli.command).and_then(|v| render(&v, cli.format)) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool may already exist when run() is called more than once.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Number given as a decimal or as `p/q`.
#[derive(Clone, Debug, PartialEq)]
pub enum NumberArg {
    Decimal(f64),
    Ratio(Rational),
}

impl NumberArg {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if s.contains('/') {
            let r: Rational = s.parse().map_err(|_| usage(format!("malformed rational {s:?}")))?;
            Ok(NumberArg::Ratio(r))
        } else {
            let v: f64 = s.parse().map_err(|_| usage(format!("malformed number {s:?}")))?;
            Ok(NumberArg::Decimal(v))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            NumberArg::Decimal(v) => *v,
            NumberArg::Ratio(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

pub fn parse_digits(s: &str) -> Result<Vec<u32>, CliError> {
    let digits: Result<Vec<u32>, _> = s.split(',').map(|d| d.trim().parse::<u32>()).collect();
    match digits {
        Ok(d) if !d.is_empty() => Ok(d),
        _ => Err(usage(format!("malformed digit list {s:?}; expected e.g. 1,0,1"))),
    }
}

fn parse_scan(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || usage(format!("malformed scan range {s:?}; expected A..B"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn check_grid(points: usize) -> Result<(), CliError> {
    let intervals = points.wrapping_sub(1);
    if points < 17 || !intervals.is_power_of_two() {
        return Err(usage(format!("--grid must be 2^k + 1 and at least 17, got {points}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0) {
        return Err(usage(format!("--tol must be positive, got {tol}")));
    }
    Ok(())
}

fn ratio_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn execute(command: &Command) -> Result<Value, CliError> {
    match command {
        Command::Expand { m, x, digits } => {
            let params = ExpansionParams::new(*m)?;
            let seq = match NumberArg::parse(x)? {
                NumberArg::Ratio(r) => encode_exact(&r, &params, *digits)?,
                NumberArg::Decimal(v) => encode(v, &params, *digits)?,
            };
            Ok(json!({
                "m": m,
                "digits": seq.digits(),
                "terminated": seq.terminated(),
                "precision_warning": seq.precision_warning(),
            }))
        }
        Command::Decode { m, digits } => {
            let params = ExpansionParams::new(*m)?;
            let seq = DigitSequence::new(params, parse_digits(digits)?, false)?;
            let d = decode(&seq);
            Ok(json!({ "exact": ratio_string(&d.exact), "approx": d.approx }))
        }
        Command::Cdf { m, x } => {
            let mp = MeasureParams64::new(*m)?;
            let x = NumberArg::parse(x)?.to_f64();
            Ok(json!({
                "G": gamma_cdf(x, &mp)?,
                "density": gamma_density(x, &mp)?,
                "k": mp.k(),
            }))
        }
        Command::Iterate {
            m,
            steps,
            initial,
            grid,
            tol,
            window,
            output_grid,
        } => {
            check_grid(*grid)?;
            check_tol(*tol)?;
            if *steps == 0 {
                return Err(usage("--steps must be positive"));
            }
            let mp = MeasureParams64::new(*m)?;
            let f0 = if initial == "lebesgue" {
                GridFunction64::lebesgue(*grid)?
            } else {
                read_grid_csv(Path::new(initial), *grid)?
            };
            let (reports, last) = iterate_with_last(&f0, &mp, *steps, *tol)?;
            let window = window.unwrap_or(10).min(*steps).max(1);
            let fit = rate_estimate(&reports, window)?;
            if let Some(path) = output_grid {
                write_grid_csv(path, &last)?;
            }
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "sup_error": r.sup_error,
                        "ratio": r.ratio,
                        "deriv_max": r.deriv_max,
                    })
                })
                .collect();
            Ok(json!({
                "m": m,
                "grid": grid,
                "tol": tol,
                "reports": rows,
                "rate": fit.rate,
                "rate_window": window,
                "rate_points": fit.points,
                "rate_degenerate": fit.degenerate,
            }))
        }
        Command::Qm { m, scan, tol } => {
            check_tol(*tol)?;
            let record = |m: u32| -> Result<Value, CliError> {
                let q = qm::<f64>(m, *tol)?;
                Ok(json!({
                    "m": q.m,
                    "q_m": q.value,
                    "tail_bound": q.tail_bound,
                    "below_one": q.below_one,
                    "truncation_index": q.truncation_index,
                }))
            };
            match (m, scan) {
                (Some(m), None) => record(*m),
                (None, Some(scan)) => {
                    let (a, b) = parse_scan(scan)?;
                    (a..=b).map(record).collect::<Result<Vec<_>, _>>().map(Value::Array)
                }
                _ => Err(usage("give exactly one of --m or --scan")),
            }
        }
        Command::Audit { m } => {
            let audit = audit_final_chain::<f64>(*m)?;
            Ok(serde_json::to_value(audit).expect("serializable"))
        }
        Command::Sample {
            m,
            points,
            burn_in,
            seed,
            pool_above,
        } => {
            let mp = MeasureParams64::new(*m)?;
            let report = sample_orbit(*seed, *points, *burn_in, &mp)?;
            let test = match digit_law_test(&report, *pool_above) {
                Ok(t) => serde_json::to_value(t).expect("serializable"),
                Err(chancf::Error::InsufficientExpected { .. }) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            let mut value = serde_json::to_value(&report).expect("serializable");
            value
                .as_object_mut()
                .expect("report is an object")
                .insert("test".into(), test);
            Ok(value)
        }
    }
}

fn render(value: &Value, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => Ok(format!("{value}\n")),
        OutputFormat::Plain => {
            let mut s = String::new();
            render_plain(value, "", &mut s);
            Ok(s)
        }
        OutputFormat::Csv => render_csv(value),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_plain(value: &Value, prefix: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                render_plain(v, &key, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                let key = if prefix.is_empty() {
                    i.to_string()
                } else {
                    format!("{prefix}[{i}]")
                };
                render_plain(v, &key, out);
            }
        }
        other => {
            let text = match other {
                Value::Array(items) => items.iter().map(scalar_text).collect::<Vec<_>>().join(","),
                v => scalar_text(v),
            };
            out.push_str(&format!("{prefix}: {text}\n"));
        }
    }
}

/// Array of objects becomes one row per object; an object holding a
/// `reports` array renders that table; any other object is a single row.
fn render_csv(value: &Value) -> Result<String, CliError> {
    let rows: Vec<&Map<String, Value>> = match value {
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        Value::Object(map) => match map.get("reports") {
            Some(Value::Array(items)) => items.iter().filter_map(Value::as_object).collect(),
            _ => vec![map],
        },
        _ => Vec::new(),
    };
    let Some(first) = rows.first() else {
        return Ok(String::new());
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&String> = first.keys().collect();
    let io = |e: csv::Error| usage(format!("csv output: {e}"));
    w.write_record(header.iter().map(|k| k.as_str())).map_err(io)?;
    for row in rows {
        w.write_record(header.iter().map(|k| row.get(*k).map(scalar_text).unwrap_or_default()))
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_parsing() {
        assert_eq!(NumberArg::parse("0.25").unwrap(), NumberArg::Decimal(0.25));
        let r = NumberArg::parse("3/10").unwrap();
        assert!(matches!(&r, NumberArg::Ratio(q) if ratio_string(q) == "3/10"));
        assert_eq!(r.to_f64(), 0.3);
        assert!(NumberArg::parse("three").is_err());
        assert!(NumberArg::parse("1/0").is_err());
    }

    #[test]
    fn digit_list_parsing() {
        assert_eq!(parse_digits("1,0,1").unwrap(), vec![1, 0, 1]);
        assert_eq!(parse_digits(" 4 ").unwrap(), vec![4]);
        assert!(parse_digits("").is_err());
        assert!(parse_digits("1,,2").is_err());
        assert!(parse_digits("1,-2").is_err());
    }

    #[test]
    fn scan_and_grid_checks() {
        assert_eq!(parse_scan("2..16").unwrap(), (2, 16));
        assert!(parse_scan("5..2").is_err());
        assert!(parse_scan("2-3").is_err());
        assert!(check_grid(4097).is_ok());
        assert!(check_grid(17).is_ok());
        assert!(check_grid(9).is_err());
        assert!(check_grid(100).is_err());
    }

    #[test]
    fn csv_render_shapes() {
        let v = json!({"reports": [{"n": 0, "e": 0.5}, {"n": 1, "e": 0.25}], "rate": 0.5});
        assert_eq!(render_csv(&v).unwrap(), "n,e\n0,0.5\n1,0.25\n");
        let v = json!({"m": 2, "q_m": 0.84});
        assert_eq!(render_csv(&v).unwrap(), "m,q_m\n2,0.84\n");
    }
}
