//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{asymptotic_constant, asymptotic_window, BoundSet, UpperBranch};
use crate::eigen::{default_max_iter, largest_eigenvalue, validate_tol, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::gegenbauer::{build_operator, GegenbauerParam, ProblemSize};
use crate::par::{with_jobs, Execution};
use crate::verifier::sweep::{sweep, GridSpec, ReportFormat};
use crate::verifier::{dense_cap_from_env, verify_point, Outcome, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "gegenbauer-markov",
    version,
    about = "Markov constants in the Gegenbauer-weighted L2 norm"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Point {
    /// Polynomial degree n >= 1.
    #[arg(long)]
    n: usize,
    /// Gegenbauer parameter lambda >= -0.499.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print c_n(lambda), or its square with --squared.
    Compute {
        #[command(flatten)]
        point: Point,
        /// Relative residual target for the eigenvalue.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        squared: bool,
    },
    /// Print every applicable closed-form bound on c_n(lambda)^2.
    Bounds {
        #[command(flatten)]
        point: Point,
        /// Print bounds on c_n instead of c_n^2.
        #[arg(long)]
        c_scale: bool,
    },
    /// Check all bounds and identities at one point.
    Verify {
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Print the record as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Verify a grid of points and write a report.
    Sweep {
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        #[arg(long, default_value_t = 1)]
        n_step: usize,
        /// Comma-separated lambda values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Evaluate points on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Print the limit c_n / n^2 and its closed-form window.
    Asymptotic {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
}

/// Formats with 15 significant digits, dropping trailing zeros.
pub fn format_sig15(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.14e}");
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Overflow(_) | Error::Convergence { .. } | Error::Bracket(_) | Error::Report(_) => {
            EXIT_NUMERICAL
        }
        _ => EXIT_USAGE,
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Report(e.to_string())
}

fn point(p: &Point) -> Result<(ProblemSize, GegenbauerParam)> {
    Ok((ProblemSize::new(p.n)?, GegenbauerParam::new(p.lambda)?))
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Compute { point: p, tol, squared } => {
            let (size, lambda) = point(&p)?;
            validate_tol(tol)?;
            let op = build_operator(size, lambda)?;
            let r = largest_eigenvalue(&op, tol, default_max_iter(op.dim()))?;
            let v = if squared { r.mu_max } else { r.mu_max.sqrt() };
            writeln!(out, "{}", format_sig15(v)).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Bounds { point: p, c_scale } => {
            let (size, lambda) = point(&p)?;
            let op = build_operator(size, lambda)?;
            let set = BoundSet::compute(&op)?;
            let scale = if c_scale { "c_n" } else { "c_n^2" };
            writeln!(out, "bounds on {scale} at n = {}, lambda = {}", p.n, p.lambda).map_err(io)?;
            writeln!(out, "{:<22} {:<6} {:<24} {:<22} formula", "tag", "kind", "value", "applies")
                .map_err(io)?;
            for e in &set.entries {
                let v = if c_scale { e.value.sqrt() } else { e.value };
                let kind = match e.kind {
                    crate::bounds::BoundKind::Lower => "lower",
                    crate::bounds::BoundKind::Upper => "upper",
                    crate::bounds::BoundKind::Exact => "exact",
                };
                writeln!(
                    out,
                    "{:<22} {:<6} {:<24} {:<22} {}",
                    e.tag.label(),
                    kind,
                    format_sig15(v),
                    e.tag.condition(),
                    e.tag.description()
                )
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { point: p, tol, json } => {
            point(&p)?;
            validate_tol(tol)?;
            let cfg = VerifyConfig { tol, dense_cap: dense_cap_from_env()?, check_monotone: true };
            let rec = verify_point(p.n, p.lambda, &cfg)?;
            if json {
                serde_json::to_writer_pretty(&mut *out, &rec).map_err(|e| Error::Report(e.to_string()))?;
                writeln!(out).map_err(io)?;
            } else {
                let opt = |v: Option<f64>| v.map(format_sig15).unwrap_or_else(|| "-".into());
                writeln!(out, "n = {}, lambda = {}", rec.n, rec.lambda).map_err(io)?;
                writeln!(out, "mu_max = {}", opt(rec.mu_max)).map_err(io)?;
                writeln!(out, "residual = {}", opt(rec.residual)).map_err(io)?;
                if let Some(m) = rec.method {
                    writeln!(out, "method = {}", m.as_str()).map_err(io)?;
                }
                if let Some(e) = &rec.error {
                    writeln!(out, "error = {e}").map_err(io)?;
                }
                for b in &rec.bounds {
                    writeln!(
                        out,
                        "{:<22} {:<24} slack {:<24} {}",
                        b.tag.label(),
                        format_sig15(b.value),
                        format_sig15(b.signed_slack),
                        b.outcome.as_str()
                    )
                    .map_err(io)?;
                }
                for c in &rec.identities {
                    writeln!(
                        out,
                        "{:<22} {:<24} {}",
                        c.kind.label(),
                        format_sig15(c.value),
                        c.outcome.as_str()
                    )
                    .map_err(io)?;
                }
                writeln!(out, "status = {}", rec.outcome.as_str()).map_err(io)?;
            }
            Ok(if rec.outcome == Outcome::Fail { EXIT_VERIFY_FAILED } else { EXIT_OK })
        }
        Command::Sweep { n_from, n_to, n_step, lambdas, out: path, format, tol, jobs, sequential } => {
            let mut grid = GridSpec::new(GridSpec::n_range(n_from, n_to, n_step)?, lambdas);
            grid.tol = tol;
            grid.dense_cap = dense_cap_from_env()?;
            grid.format = format.parse::<ReportFormat>()?;
            grid.output = Some(path.clone());
            grid.validate()?;
            if jobs == Some(0) {
                return Err(Error::Validation("--jobs must be positive".into()));
            }
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let report = with_jobs(jobs, || sweep(&grid, exec))?;
            let s = report.summary;
            writeln!(
                out,
                "{} points: {} passed, {} failed, {} inconclusive; report written to {}",
                s.total,
                s.passed,
                s.failed,
                s.inconclusive,
                path.display()
            )
            .map_err(io)?;
            Ok(if s.failed > 0 { EXIT_VERIFY_FAILED } else { EXIT_OK })
        }
        Command::Asymptotic { lambda } => {
            let param = GegenbauerParam::new(lambda)?;
            let c = asymptotic_constant(param)?;
            let w = asymptotic_window(param);
            let branch = match w.branch {
                UpperBranch::Main => "main",
                UpperBranch::LargeLambda => "large-lambda",
            };
            writeln!(out, "{}", format_sig15(c)).map_err(io)?;
            writeln!(
                out,
                "window: {} < c_* < {} ({branch} upper branch)",
                format_sig15(w.lower.sqrt()),
                format_sig15(w.upper.sqrt())
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
