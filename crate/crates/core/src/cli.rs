//! Command-line front end. [`run`] takes the argument vector and returns the
//! exact bytes to print plus the exit status, so tests can drive it without
//! spawning a process.

use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Value};

use crate::extremal::{conjecture_scan, max_entry, PrecisionPolicy, PRECISION_CEILING_ENV};
use crate::limits::{limit_max, LimitMax};
use crate::scalar::decimal::{
    format_radius, format_significant, fractional_digits, parse_rational,
};
use crate::scalar::{Ball, BaseSpec, Real};
use crate::suite::verify_base;
use crate::symfunc::{sigma_bruteforce, sigma_finite, SigmaQuery};
use crate::vandinv::{inverse_matrix, residual_norm_for, GeometricVandermonde};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const MAX_DIGITS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Output settings shared by every subcommand.
#[derive(Clone, Copy, Debug)]
pub struct OutputFormat {
    pub kind: Format,
    pub digits: usize,
}

#[derive(Parser, Debug)]
#[command(
    name = "vangeo",
    version,
    about = "Inverses of Vandermonde matrices on geometric nodes 1, b, b², …"
)]
pub struct Cli {
    /// Base b > 1: an integer, "p/q", a finite decimal, "tau" or "alpha".
    #[arg(long, global = true)]
    pub base: Option<String>,
    /// Matrix dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Dimension range "lo:hi", inclusive.
    #[arg(long, global = true)]
    pub range: Option<String>,
    /// Absolute tolerance for limits, e.g. 1e-18.
    #[arg(long, global = true)]
    pub tol: Option<String>,
    /// Significant decimal digits to print.
    #[arg(long, global = true, default_value_t = 20)]
    pub digits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest working precision in bits before a comparison is declared undecidable.
    #[arg(long, global = true, env = PRECISION_CEILING_ENV)]
    pub precision_ceiling: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the signed inverse matrix.
    Inverse,
    /// Evaluate σ(i, j, n; x).
    Sigma {
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        /// Evaluation point x > 0; defaults to the base.
        #[arg(long)]
        x: Option<String>,
        /// Also enumerate subsets and compare.
        #[arg(long)]
        bruteforce: bool,
    },
    /// Largest entry magnitude M_b(n) and where it is attained.
    Max,
    /// Limits of the entry magnitudes as n grows.
    Limit,
    /// Recompute the reference table of limits and certify each printed value.
    Table,
    /// Run the invariant suite for one base; exit status 1 on any failure.
    Verify {
        #[arg(long)]
        n_max: usize,
    },
    /// Report, per dimension, whether a diagonal entry attains the maximum.
    Conjecture,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| usage(format!("missing required flag --{flag}")))
}

fn parse_base(cli: &Cli) -> Result<BaseSpec> {
    let text = need(&cli.base, "base")?;
    let spec: BaseSpec = text.parse()?;
    spec.value()?;
    Ok(spec)
}

fn parse_tol(cli: &Cli) -> Result<BigRational> {
    let tol = parse_rational(need(&cli.tol, "tol")?)?;
    if !tol.is_positive() {
        return Err(usage("--tol must be positive"));
    }
    Ok(tol)
}

fn parse_range(cli: &Cli) -> Result<(usize, usize)> {
    let text = need(&cli.range, "range")?;
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| usage(format!("--range expects lo:hi, got {text:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| usage(format!("--range bound {s:?} is not a nonnegative integer")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn policy(cli: &Cli) -> PrecisionPolicy {
    match cli.precision_ceiling {
        Some(c) => PrecisionPolicy::with_ceiling(c),
        None => PrecisionPolicy::default(),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn pairs(p: &[(usize, usize)]) -> String {
    p.iter()
        .map(|(i, j)| format!("({i},{j})"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_inverse(cli: &Cli, out: OutputFormat) -> Result<String> {
    let base = parse_base(cli)?;
    let n = *need(&cli.n, "n")?;
    let gv = GeometricVandermonde::new(base.clone(), n)?;
    let bits = precision_for_digits(out.digits);
    let inv = inverse_matrix(&gv, bits)?;
    Ok(match out.kind {
        Format::Json => pretty(&inv.to_json(&base, out.digits)),
        Format::Csv => inv.to_csv(out.digits),
        Format::Text => {
            let mut s = inv.to_text(out.digits);
            if let Real::Enclosure(r) = residual_norm_for(&gv, &inv, bits)? {
                let _ = writeln!(
                    s,
                    "residual |V·C − I| <= {}",
                    format_radius(&r.upper().to_rational())
                );
            }
            s
        }
    })
}

/// Working bits for `digits` decimal digits plus headroom.
fn precision_for_digits(digits: usize) -> u32 {
    ((digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 64).max(128)
}

fn cmd_sigma(
    cli: &Cli,
    out: OutputFormat,
    i: usize,
    j: usize,
    x: &Option<String>,
    brute: bool,
) -> Result<String> {
    let n = *need(&cli.n, "n")?;
    let text = match x {
        Some(t) => t.clone(),
        None => need(&cli.base, "base or --x")?.clone(),
    };
    let spec: BaseSpec = text.parse()?;
    let (value, oracle) = match spec.exact()? {
        Some(r) => {
            let q = SigmaQuery::new(i, j, n, r);
            let v = sigma_finite(&q)?;
            let o = if brute {
                Some(Real::Exact(sigma_bruteforce(&q)?))
            } else {
                None
            };
            (Real::Exact(v), o)
        }
        None => {
            let b = spec.value()?.enclose(precision_for_digits(out.digits));
            let q = SigmaQuery::new(i, j, n, b);
            let v = sigma_finite(&q)?;
            let o = if brute {
                Some(Real::Enclosure(sigma_bruteforce(&q)?))
            } else {
                None
            };
            (Real::Enclosure(v), o)
        }
    };
    let agree = oracle.as_ref().map(|o| o.agrees(&value));
    Ok(match out.kind {
        Format::Json => pretty(&json!({
            "i": i, "j": j, "n": n, "x": spec.to_string(),
            "backend": value.backend(),
            "value": value.render(out.digits),
            "decimal": value.render_decimal(out.digits),
            "radius": format_radius(&value.radius()),
            "bruteforce_agrees": agree,
        })),
        Format::Csv => format!(
            "i,j,n,x,value\n{i},{j},{n},{spec},{}\n",
            value.render(out.digits)
        ),
        Format::Text => {
            let mut s = format!("σ({i},{j},{n}; {spec}) = {}\n", value.render(out.digits));
            if let Some(a) = agree {
                let _ = writeln!(s, "bruteforce {}", if a { "agrees" } else { "DISAGREES" });
            }
            s
        }
    })
}

fn cmd_max(cli: &Cli, out: OutputFormat) -> Result<String> {
    let base = parse_base(cli)?;
    let n = *need(&cli.n, "n")?;
    let r = max_entry(&GeometricVandermonde::new(base, n)?, policy(cli))?;
    Ok(match out.kind {
        Format::Json => pretty(&r.to_json(out.digits)),
        Format::Csv => format!(
            "base,n,n_zero,max,argmax,diagonal\n{},{},{},{},{},{}\n",
            r.base,
            r.n,
            r.n_zero,
            r.max_value.render_decimal(out.digits),
            pairs(&r.argmax),
            r.diagonal_argmax
        ),
        Format::Text => {
            let mut s = format!("M = {}\n", r.max_value.render_decimal(out.digits));
            if let Real::Exact(v) = &r.max_value {
                let _ = writeln!(s, "exact = {}", crate::scalar::decimal::format_fraction(v));
            }
            let _ = writeln!(s, "argmax = {}", pairs(&r.argmax));
            let _ = writeln!(s, "n_zero = {}", r.n_zero);
            let _ = writeln!(s, "diagonal = {}", r.diagonal_argmax);
            if r.tie_undecided {
                s.push_str("tie undecided at the precision ceiling\n");
            }
            s
        }
    })
}

fn limit_text(m: &LimitMax, digits: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "base {}  n_zero {}", m.base, m.n_zero);
    for e in &m.entries {
        let _ = writeln!(
            s,
            "l({},{}) = {} ± {}  [sigma cutoff {}, product cutoff {}]",
            e.i,
            e.j,
            format_significant(&e.value.mid_rational(), digits),
            format_radius(&e.value.rad_rational()),
            e.sigma_cutoff,
            e.product_cutoff
        );
    }
    let _ = writeln!(
        s,
        "max = {}",
        format_significant(&m.value.mid_rational(), digits)
    );
    let _ = writeln!(s, "argmax = {}", pairs(&m.argmax));
    if let Some(r) = m.regime {
        let _ = writeln!(s, "regime = {}", r.name());
    }
    if m.tie_undecided {
        s.push_str("tie undecided at the precision ceiling\n");
    }
    s
}

fn cmd_limit(cli: &Cli, out: OutputFormat) -> Result<String> {
    let base = parse_base(cli)?;
    let tol = parse_tol(cli)?;
    let m = limit_max(&base, &tol, policy(cli))?;
    Ok(match out.kind {
        Format::Json => pretty(&m.to_json(out.digits)),
        Format::Csv => {
            let mut s = String::from("i,j,value,radius,sigma_cutoff,product_cutoff\n");
            for e in &m.entries {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    e.i,
                    e.j,
                    format_significant(&e.value.mid_rational(), out.digits),
                    format_radius(&e.value.rad_rational()),
                    e.sigma_cutoff,
                    e.product_cutoff
                );
            }
            s
        }
        Format::Text => limit_text(&m, out.digits),
    })
}

/// Reference limits `lim M_b(n)` as printed, one per base.
pub const REFERENCE_TABLE: [(&str, &str); 8] = [
    ("3", "1.785312341998534190367486"),
    ("alpha", "2.4862447382651613433"),
    ("2", "5.194119929182595417"),
    ("tau", "26.788216012030303413"),
    ("1.5", "67.3672156"),
    ("1.4", "282.398"),
    ("1.3", "3069.44"),
    ("1.2", "422349.8"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    /// The enclosure lies within half a unit of the last printed digit.
    Match,
    /// The enclosure lies entirely outside that window.
    Mismatch,
    Undecided,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Match => "match",
            RowStatus::Mismatch => "mismatch",
            RowStatus::Undecided => "undecided",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub base: BaseSpec,
    pub printed: &'static str,
    pub limit: LimitMax,
    pub status: RowStatus,
}

impl TableRow {
    fn significant_digits(&self) -> usize {
        self.printed.chars().filter(char::is_ascii_digit).count()
    }
}

fn half_ulp(printed: &str) -> BigRational {
    let d = fractional_digits(printed) as u32;
    BigRational::new(BigInt::from(5), BigInt::from(10).pow(d + 1))
}

fn classify_row(value: &Ball, printed: &BigRational, h: &BigRational) -> RowStatus {
    let lo = value.lower().to_rational();
    let hi = value.upper().to_rational();
    if printed - h <= lo && hi <= printed + h {
        RowStatus::Match
    } else if hi < printed - h || lo > printed + h {
        RowStatus::Mismatch
    } else {
        RowStatus::Undecided
    }
}

/// Recomputes every reference row and certifies its printed digits.
pub fn reproduce_table(policy: PrecisionPolicy) -> Result<Vec<TableRow>> {
    use rayon::prelude::*;
    REFERENCE_TABLE
        .par_iter()
        .map(|&(b, printed)| {
            let base: BaseSpec = b.parse()?;
            let p = parse_rational(printed)?;
            let h = half_ulp(printed);
            let mut tol = &h / BigInt::from(1u64 << 20);
            let mut limit = limit_max(&base, &tol, policy)?;
            let mut status = classify_row(&limit.value, &p, &h);
            for _ in 0..3 {
                if status != RowStatus::Undecided {
                    break;
                }
                tol /= BigInt::from(1u64 << 40);
                limit = limit_max(&base, &tol, policy)?;
                status = classify_row(&limit.value, &p, &h);
            }
            Ok(TableRow {
                base,
                printed,
                limit,
                status,
            })
        })
        .collect()
}

fn cmd_table(cli: &Cli, out: OutputFormat) -> Result<(String, bool)> {
    let rows = reproduce_table(policy(cli))?;
    let all = rows.iter().all(|r| r.status == RowStatus::Match);
    let computed = |r: &TableRow| {
        format_significant(
            &r.limit.value.mid_rational(),
            r.significant_digits().max(out.digits),
        )
    };
    let text = match out.kind {
        Format::Json => pretty(&Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "base": r.base.to_string(),
                        "n_zero": r.limit.n_zero,
                        "argmax": r.limit.argmax.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>(),
                        "printed": r.printed,
                        "computed": computed(r),
                        "radius": format_radius(&r.limit.value.rad_rational()),
                        "status": r.status.name(),
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            let mut s = String::from("base,n_zero,argmax,printed,computed,radius,status\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.base,
                    r.limit.n_zero,
                    pairs(&r.limit.argmax),
                    r.printed,
                    computed(r),
                    format_radius(&r.limit.value.rad_rational()),
                    r.status.name()
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<6} n0={} argmax={:<12} printed {:<28} computed {} ± {}  {}",
                    r.base.to_string(),
                    r.limit.n_zero,
                    pairs(&r.limit.argmax),
                    r.printed,
                    computed(r),
                    format_radius(&r.limit.value.rad_rational()),
                    r.status.name()
                );
            }
            s
        }
    };
    Ok((text, all))
}

fn cmd_verify(cli: &Cli, out: OutputFormat, n_max: usize) -> Result<(String, bool)> {
    let base = parse_base(cli)?;
    let summary = verify_base(&base, n_max, policy(cli))?;
    let text = match out.kind {
        Format::Json => pretty(&summary.to_json()),
        _ => summary.to_text(),
    };
    Ok((text, summary.passed()))
}

fn cmd_conjecture(cli: &Cli, out: OutputFormat) -> Result<String> {
    let base = parse_base(cli)?;
    let (lo, hi) = parse_range(cli)?;
    let scan = conjecture_scan(&base, lo, hi, policy(cli))?;
    let nd = scan.non_diagonal();
    Ok(match out.kind {
        Format::Json => pretty(&json!({
            "base": base.to_string(),
            "rows": scan.to_json(out.digits),
            "non_diagonal": nd,
        })),
        Format::Csv => {
            let mut s = String::from("n,n_zero,max,argmax,diagonal\n");
            for r in &scan.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.n,
                    r.n_zero,
                    r.max.render_decimal(out.digits),
                    pairs(&r.argmax),
                    r.diagonal
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &scan.rows {
                let _ = writeln!(
                    s,
                    "n={:<4} n0={} max={} argmax={}{}",
                    r.n,
                    r.n_zero,
                    r.max.render_decimal(out.digits),
                    pairs(&r.argmax),
                    if r.diagonal { "" } else { "  non-diagonal" }
                );
            }
            let _ = writeln!(s, "{} non-diagonal case(s) in n = {lo}..{hi}", nd.len());
            s
        }
    })
}

fn dispatch(cli: &Cli) -> Result<(String, i32)> {
    if cli.digits == 0 || cli.digits > MAX_DIGITS {
        return Err(usage(format!(
            "--digits must be between 1 and {MAX_DIGITS}"
        )));
    }
    let out = OutputFormat {
        kind: cli.format,
        digits: cli.digits,
    };
    let ok = |s: String| (s, EXIT_OK);
    let checked = |(s, pass): (String, bool)| (s, if pass { EXIT_OK } else { EXIT_CHECK_FAILED });
    Ok(match &cli.command {
        Command::Inverse => ok(cmd_inverse(cli, out)?),
        Command::Sigma {
            i,
            j,
            x,
            bruteforce,
        } => ok(cmd_sigma(cli, out, *i, *j, x, *bruteforce)?),
        Command::Max => ok(cmd_max(cli, out)?),
        Command::Limit => ok(cmd_limit(cli, out)?),
        Command::Table => checked(cmd_table(cli, out)?),
        Command::Verify { n_max } => checked(cmd_verify(cli, out, *n_max)?),
        Command::Conjecture => ok(cmd_conjecture(cli, out)?),
    })
}

/// Parses `args` (program name first) and runs one command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            } else {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok((stdout, code)) => Outcome {
            stdout,
            stderr: String::new(),
            code,
        },
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: EXIT_USAGE,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(args: &[&str]) -> Outcome {
        run(std::iter::once("vangeo").chain(args.iter().copied()))
    }

    #[test]
    fn half_ulps() {
        assert_eq!(
            half_ulp("282.398"),
            BigRational::new(5.into(), 10000.into())
        );
        assert_eq!(half_ulp("3"), BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(go(&["inverse", "--n", "2"]).code, EXIT_USAGE);
        assert_eq!(go(&["inverse", "--base", "1", "--n", "2"]).code, EXIT_USAGE);
        assert_eq!(go(&["inverse", "--base", "2", "--n", "0"]).code, EXIT_USAGE);
        assert_eq!(go(&["bogus"]).code, EXIT_USAGE);
        assert_eq!(
            go(&["max", "--base", "2", "--n", "2", "--digits", "1001"]).code,
            EXIT_USAGE
        );
        assert_eq!(go(&["limit", "--base", "2", "--tol", "0"]).code, EXIT_USAGE);
        assert_eq!(
            go(&["conjecture", "--base", "2", "--range", "5"]).code,
            EXIT_USAGE
        );
    }

    #[test]
    fn small_commands() {
        let o = go(&["inverse", "--base", "2", "--n", "2", "--format", "csv"]);
        assert_eq!((o.stdout.as_str(), o.code), ("2,-1\n-1,1\n", 0));
        assert_eq!(go(&["inverse", "--base", "3/2", "--n", "1"]).stdout, "1\n");
        let o = go(&["max", "--base", "2", "--n", "2"]);
        assert!(
            o.stdout.contains("argmax = (0,0)") && o.stdout.contains("n_zero = 1"),
            "{}",
            o.stdout
        );
        let o = go(&[
            "sigma",
            "--i",
            "2",
            "--j",
            "1",
            "--n",
            "4",
            "--x",
            "2",
            "--bruteforce",
        ]);
        assert!(o.stdout.starts_with("σ(2,1,4; 2) = 44\n") && o.stdout.contains("agrees"));
    }
}
