//! Command-line front end.
//!
//! Every subcommand prints one report to standard output, JSON by default or
//! CSV (`path,value` rows, numbers with 17 significant digits). Exit codes:
//! 0 when every check the command asserts holds, 1 when a check fails or a
//! computation errors, 2 on usage errors or inputs outside the supported
//! domain.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::blfactor::{self, CylinderParams};
use crate::correlate::{self, CorrelationPath, CorrelationRequest};
use crate::elliptic;
use crate::error::{Error, Result};
use crate::oracle::{self, OracleSpace};
use crate::rotation::{self, Frame};
use crate::selfcheck;
use crate::spectral::{self, CouplingParams, Sector};
use crate::spinme;
use crate::VERSION;

#[derive(Debug, Parser)]
#[command(name = "periodic-ising", version, about = "Exact finite-size computations for the periodic 2D Ising model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Column half-width: the lattice has 2M+1 columns.
    #[arg(long = "M", global = true, default_value_t = 2)]
    pub m: usize,
    /// Row half-height: the torus has 2N+1 rows.
    #[arg(long = "N", global = true, default_value_t = 1)]
    pub n: usize,
    /// Horizontal coupling.
    #[arg(long = "K1", global = true, default_value_t = 0.5)]
    pub k1: f64,
    /// Vertical coupling.
    #[arg(long = "K2", global = true, default_value_t = 0.5)]
    pub k2: f64,
    /// Output format; `selfcheck` prints plain lines unless one is given.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomised checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Override the tolerance of the command's checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Upper bound on worker threads. Computations currently run on one thread.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Symmetric,
    Row,
}

impl From<FrameArg> for Frame {
    fn from(f: FrameArg) -> Self {
        match f {
            FrameArg::Symmetric => Frame::Symmetric,
            FrameArg::Row => Frame::Row,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Torus,
    Cylinder,
    Both,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-mode energies, largest eigenvalues and the eigenvalue tables of both sectors.
    Spectrum,
    /// Torus partition function from the transfer matrix and by exhaustive summation.
    Partition,
    /// The blocks A, B, C, D and their orthogonality residuals.
    Abcd,
    /// Spin-element ratio tables and the oracle cross-check.
    Spinme {
        #[arg(long, value_enum, default_value_t = FrameArg::Symmetric)]
        frame: FrameArg,
    },
    /// Two-point correlation on the torus and on the cylinder.
    Correlate {
        /// Row separation.
        #[arg(long, default_value_t = 1)]
        rowsep: usize,
        /// Column of the first spin.
        #[arg(long = "col-i", default_value_t = 0, allow_negative_numbers = true)]
        col_i: i64,
        /// Column of the second spin.
        #[arg(long = "col-j", default_value_t = 0, allow_negative_numbers = true)]
        col_j: i64,
        #[arg(long, value_enum, default_value_t = PathArg::Both)]
        path: PathArg,
        /// Excitation cap of the cylinder sum (at most 2·max-k modes); defaults to M.
        #[arg(long = "max-k")]
        max_k: Option<usize>,
    },
    /// Product formula against the inverse of D (report only).
    VerifyBl,
    /// Factorisation identities of the summability kernels and the spectral products.
    VerifyFactorization,
    /// Jacobian identity suite, uniformisation and cycle checks.
    Elliptic,
    /// Run every acceptance criterion.
    Selfcheck,
}

/// A finished command: the report and whether its checks held.
struct Outcome {
    results: Value,
    tolerance: Option<f64>,
    passed: Option<bool>,
}

fn complex_matrix(m: &DMatrix<Complex64>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
    json!(rows)
}

fn params_of(cli: &Cli) -> Result<CouplingParams> {
    CouplingParams::new(cli.k1, cli.k2)
}

fn spectrum(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let mut sectors = serde_json::Map::new();
    for sector in [Sector::P, Sector::A] {
        let table = spectral::gamma_table(&params, cli.m, sector)?;
        let values = spectral::enumerate_eigenvalues(&params, cli.m, sector)?;
        sectors.insert(
            sector.to_string(),
            json!({
                "theta": table.iter().map(|e| e.point.theta).collect::<Vec<_>>(),
                "gamma": table.iter().map(|e| e.gamma).collect::<Vec<_>>(),
                "lambda0": spectral::largest_eigenvalue(&params, cli.m, sector)?,
                "log_lambda0": spectral::log_largest_eigenvalue(&params, cli.m, sector)?,
                "eigenvalues": values,
            }),
        );
    }
    Ok(Outcome { results: Value::Object(sectors), tolerance: None, passed: None })
}

fn partition(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let tol = cli.tol.unwrap_or(selfcheck::TOL_PARTITION);
    let space = OracleSpace::build(cli.m, &params)?;
    let trace = space.partition_trace(cli.n);
    let exhaustive = oracle::exhaustive_partition(cli.m, cli.n, cli.k1, cli.k2)?;
    let rel = (trace - exhaustive).abs() / exhaustive;
    Ok(Outcome {
        results: json!({ "trace": trace, "exhaustive": exhaustive, "relative_difference": rel }),
        tolerance: Some(tol),
        passed: Some(rel < tol),
    })
}

fn abcd(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let tol = cli.tol.unwrap_or(selfcheck::TOL_ABCD);
    let closed = rotation::abcd(&params, cli.m)?;
    let projected = rotation::abcd_projected(&params, cli.m, Frame::Symmetric)?;
    let orth = closed.orthogonality();
    let diff = closed.max_difference(&projected);
    Ok(Outcome {
        results: json!({
            "A": complex_matrix(&closed.a),
            "B": complex_matrix(&closed.b),
            "C": complex_matrix(&closed.c),
            "D": complex_matrix(&closed.d),
            "orthogonality": orth,
            "closed_vs_projected": diff,
            "d_condition": closed.d_condition(),
        }),
        tolerance: Some(tol),
        passed: Some(orth.max() < tol && diff < tol),
    })
}

fn spin(cli: &Cli, frame: Frame) -> Result<Outcome> {
    let params = params_of(cli)?;
    let tol = cli.tol.unwrap_or(selfcheck::TOL_SPIN_ORACLE);
    let table = spinme::table_for(&params, cli.m, frame)?;
    let mut results = json!({
        "frame": frame,
        "a": complex_matrix(&table.weighted_a()),
        "b": complex_matrix(&table.weighted_b()),
        "c": complex_matrix(&table.weighted_c()),
        "d_condition": table.d_condition,
        "skew_residual": table.skew_residual,
    });
    let mut passed = table.skew_residual < tol;
    if cli.m <= 3 {
        let cv = spinme::cross_validate_oracle(&params, cli.m, frame)?;
        passed &= cv.worst < tol;
        results["oracle"] = json!(cv);
    } else {
        results["oracle"] = Value::Null;
    }
    Ok(Outcome { results, tolerance: Some(tol), passed: Some(passed) })
}

fn correlation(cli: &Cli, rowsep: usize, i: i64, j: i64, path: PathArg, max_k: Option<usize>) -> Result<Outcome> {
    let params = params_of(cli)?;
    let max_k = max_k.unwrap_or(cli.m);
    let mut results = json!({ "rowsep": rowsep, "i": i, "j": j });
    let mut values = Vec::new();
    if matches!(path, PathArg::Torus | PathArg::Both) {
        let req = CorrelationRequest {
            m: cli.m,
            n_half: cli.n,
            params,
            rowsep,
            i,
            j,
            path: CorrelationPath::TorusTrace,
            max_k,
        };
        let v = correlate::torus_two_point(&req)?;
        results["torus"] = json!(v);
        values.push(v);
    }
    if matches!(path, PathArg::Cylinder | PathArg::Both) {
        if i != j {
            return Err(Error::Unsupported("the cylinder sum is implemented for equal columns only".into()));
        }
        let c = correlate::cylinder_two_point(&params, cli.m, rowsep, max_k)?;
        values.push(c.value);
        results["cylinder"] = json!(c);
    }
    if values.len() == 2 {
        results["difference"] = json!((values[0] - values[1]).abs());
    }
    Ok(Outcome { results, tolerance: None, passed: None })
}

fn verify_bl(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let report = blfactor::compare_bl_vs_abcd(&params, cli.m)?;
    let cyl = CylinderParams::new(&params, cli.m)?;
    Ok(Outcome {
        results: json!({ "comparison": report, "xi": cyl.xi, "xi_t": cyl.xi_t, "vacuum": cyl.vacuum() }),
        tolerance: None,
        passed: None,
    })
}

fn verify_factorization(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let tol = cli.tol.unwrap_or(selfcheck::TOL_FACTORIZATION);
    let ctx = elliptic::solve_a(&params)?;
    let cyl = CylinderParams::new(&params, cli.m)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
    let (kq, kp) = (ctx.kq, ctx.kp);
    let mut samples = vec![Complex64::new(kq, kp), Complex64::new(kq, -kp), Complex64::new(kq, 0.0)];
    for s in 0..100 {
        let re = rng.random_range(0.05 * kq..1.95 * kq);
        let off = rng.random_range(-0.1 * kp..0.1 * kp);
        samples.push(if s % 2 == 0 { Complex64::new(re, off) } else { Complex64::new(re, kp.copysign(off) - off) });
    }
    let checked = blfactor::check_factorization(&ctx, &cyl, &samples)?;
    let worst = checked.iter().map(|s| s.residual).fold(0.0, f64::max);
    let identities = [Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.8), Complex64::new(-1.7, 0.4)]
        .iter()
        .map(|&z| blfactor::product_identity(&params, cli.m, z))
        .collect::<Result<Vec<_>>>()?;
    let id_worst = identities.iter().map(|p| p.residual()).fold(0.0, f64::max);
    Ok(Outcome {
        results: json!({
            "worst_residual": worst,
            "product_identity_residual": id_worst,
            "samples": checked,
            "product_identities": identities,
        }),
        tolerance: Some(tol),
        passed: Some(worst < tol && id_worst < tol),
    })
}

fn elliptic_cmd(cli: &Cli) -> Result<Outcome> {
    let params = params_of(cli)?;
    let tol = cli.tol.unwrap_or(selfcheck::TOL_ELLIPTIC);
    let ctx = elliptic::solve_a(&params)?;
    let suite = elliptic::identity_suite(&ctx, &params, cli.seed, 500)?;
    Ok(Outcome {
        results: json!({ "context": ctx, "residuals": suite }),
        tolerance: Some(tol),
        passed: Some(suite.max() < tol),
    })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::Number(n) => {
            let text = match (n.as_i64(), n.as_u64()) {
                (Some(i), _) => i.to_string(),
                (_, Some(u)) => u.to_string(),
                _ => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
            };
            out.push((prefix.to_string(), text));
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
    }
}

fn emit(format: Format, report: &Value, out: &mut impl Write) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["path", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum => "spectrum",
        Command::Partition => "partition",
        Command::Abcd => "abcd",
        Command::Spinme { .. } => "spinme",
        Command::Correlate { .. } => "correlate",
        Command::VerifyBl => "verify-bl",
        Command::VerifyFactorization => "verify-factorization",
        Command::Elliptic => "elliptic",
        Command::Selfcheck => "selfcheck",
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Capacity(_) | Error::Unsupported(_) => 2,
        _ => 1,
    }
}

/// Parse `argv`, run the command, write the report to `out` and return the exit code.
pub fn run_with<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    if !(cli.k1.is_finite() && cli.k2.is_finite()) || cli.tol.is_some_and(|t| !(t > 0.0)) {
        let _ = writeln!(err, "error: couplings must be finite and --tol positive");
        return 2;
    }

    if let Command::Selfcheck = cli.command {
        let results = selfcheck::run_all(cli.seed);
        let all = results.iter().all(|r| r.pass);
        let written = match cli.format {
            None => results.iter().try_for_each(|r| writeln!(out, "{r}")),
            Some(f) => emit(
                f,
                &json!({
                    "command": "selfcheck",
                    "version": VERSION,
                    "parameters": { "seed": cli.seed },
                    "passed": all,
                    "results": results,
                }),
                out,
            ),
        };
        if written.is_err() {
            return 1;
        }
        return if all { 0 } else { 1 };
    }

    let outcome = match &cli.command {
        Command::Spectrum => spectrum(&cli),
        Command::Partition => partition(&cli),
        Command::Abcd => abcd(&cli),
        Command::Spinme { frame } => spin(&cli, (*frame).into()),
        Command::Correlate { rowsep, col_i, col_j, path, max_k } => {
            correlation(&cli, *rowsep, *col_i, *col_j, *path, *max_k)
        }
        Command::VerifyBl => verify_bl(&cli),
        Command::VerifyFactorization => verify_factorization(&cli),
        Command::Elliptic => elliptic_cmd(&cli),
        Command::Selfcheck => unreachable!("handled above"),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {} failed: {e}", command_name(&cli.command));
            return exit_code_for(&e);
        }
    };
    let report = json!({
        "command": command_name(&cli.command),
        "version": VERSION,
        "parameters": { "M": cli.m, "N": cli.n, "K1": cli.k1, "K2": cli.k2, "seed": cli.seed, "threads": cli.threads },
        "tolerance": outcome.tolerance,
        "passed": outcome.passed,
        "results": outcome.results,
    });
    if emit(cli.format.unwrap_or(Format::Json), &report, out).is_err() {
        return 1;
    }
    match outcome.passed {
        Some(false) => {
            let _ = writeln!(err, "error: {} checks exceeded tolerance", command_name(&cli.command));
            1
        }
        _ => 0,
    }
}

/// Entry point for the binary: process arguments and standard streams.
pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
