//! Batch command front end. Every command produces one JSON document; the
//! process exit status is 0 on success, 1 on domain errors and 2 on usage
//! errors.
//!
//! Report schemas (all floats are decimals with 17 significant digits, all
//! complex numbers are `{"re": …, "im": …}`):
//!
//! * `count`: `{"nu", "nu_hat", "orbits"}`, where `orbits` is the number of
//!   cycles formed by the nonzero points of minimal period `m`;
//! * `enumerate`: `{"n", "m", "modulus", "count", "orbits"}`, `orbits` being
//!   a list of residue lists, each one cycle in dynamical order starting at
//!   its smallest residue;
//! * `derivs`: `{"n", "m", "columns", "rows", "max_rel_err"}`, one row per
//!   nonzero point of period `m` (plus `"infinity"` when `m = 1`), each entry
//!   holding `j`, `closed`, `numeric` and `rel_err`;
//! * `cert`, `explore`: the certificate document;
//! * `verify`: `{"verified": true, "verification": {…}}`;
//! * errors: `{"error": kind, "message": text}` plus a `details` object for
//!   `ConditionsNotMet` and `Exhausted`.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::certificate::{
    construct_certificate, explore_beyond_conditions, verify_certificate, CertOptions, Certificate,
    ConditionReport, Verification, DEFAULT_MAX_BACKTRACK, DEFAULT_TOL,
};
use crate::decimal::{self, Dec17};
use crate::derivatives::{
    dlambda_closed, dlambda_infinity, dlambda_numeric, relative_error, ORACLE_STEP,
};
use crate::error::{Error, ExhaustionReport};
use crate::exec;
use crate::periodic::{count_nonzero, count_periodic, enumerate_periodic, modulus_for, RootPoint};
use crate::ratmap::param_indices;

/// Largest number of points `enumerate` and `derivs` will materialize.
pub const MAX_POINTS: u64 = 1 << 20;

/// Mantissa width of the only supported floating-point format.
pub const NATIVE_PRECISION_BITS: u32 = f64::MANTISSA_DIGITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Count,
    Enumerate,
    Derivs,
    Cert,
    Verify,
    Explore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: Option<u32>,
    pub periods: Option<Vec<u32>>,
    pub m: Option<u32>,
    pub tol: f64,
    pub h: f64,
    pub precision_bits: Option<u32>,
    pub max_backtrack: usize,
    /// Certificate to check (`verify` only); standard input when absent.
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            n: None,
            periods: None,
            m: None,
            tol: DEFAULT_TOL,
            h: ORACLE_STEP,
            precision_bits: None,
            max_backtrack: DEFAULT_MAX_BACKTRACK,
            input_path: None,
            output_path: None,
        }
    }

    fn options(&self) -> CertOptions {
        CertOptions {
            tol: self.tol,
            h: self.h,
            max_backtrack: self.max_backtrack,
        }
    }

    /// Checks the command-specific required fields and numeric ranges.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("--tol must be positive, got {}", self.tol));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(format!("--h must be positive, got {}", self.h));
        }
        if self.max_backtrack == 0 {
            return Err("--max-backtrack must be at least 1".into());
        }
        if let Some(bits) = self.precision_bits {
            if bits == 0 || bits > NATIVE_PRECISION_BITS {
                return Err(format!(
                    "--precision-bits {bits} is not supported; only binary64 arithmetic \
                     (up to {NATIVE_PRECISION_BITS} bits) is available"
                ));
            }
        }
        let need_n = || self.n.ok_or_else(|| "--n is required".to_string());
        match self.command {
            Command::Count | Command::Enumerate | Command::Derivs => {
                need_n()?;
                match self.m {
                    None => return Err("--m is required".into()),
                    Some(0) => return Err("--m must be at least 1".into()),
                    Some(_) => {}
                }
            }
            Command::Cert | Command::Explore => {
                need_n()?;
                if self.periods.is_none() {
                    return Err("--periods is required".into());
                }
            }
            Command::Verify => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    DomainError = 1,
    UsageError = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// What a command produced: the status and the JSON document to emit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: String,
}

#[derive(Serialize)]
struct CountReport {
    nu: u64,
    nu_hat: u64,
    orbits: u64,
}

#[derive(Serialize)]
struct EnumerateReport {
    n: u32,
    m: u32,
    modulus: u64,
    count: usize,
    orbits: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct DerivEntry {
    j: u32,
    #[serde(with = "decimal::complex17")]
    closed: Complex64,
    #[serde(with = "decimal::complex17")]
    numeric: Complex64,
    #[serde(with = "decimal::f64_17")]
    rel_err: f64,
}

#[derive(Serialize)]
struct DerivRow {
    point: RootPoint,
    entries: Vec<DerivEntry>,
}

#[derive(Serialize)]
struct DerivsReport {
    n: u32,
    m: u32,
    columns: Vec<u32>,
    rows: Vec<DerivRow>,
    #[serde(with = "decimal::f64_17")]
    max_rel_err: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    verified: bool,
    verification: Verification,
}

#[derive(Serialize)]
struct ExhaustionDetails {
    deepest_slot: usize,
    deepest_index: u32,
    #[serde(with = "decimal::f64_17_vec")]
    candidate_dets: Vec<f64>,
    /// Absent when the search stopped before scoring any candidate.
    threshold: Option<Dec17>,
    nodes_visited: usize,
    budget_hit: bool,
}

impl From<&ExhaustionReport> for ExhaustionDetails {
    fn from(r: &ExhaustionReport) -> Self {
        Self {
            deepest_slot: r.deepest_slot,
            deepest_index: r.deepest_index,
            candidate_dets: r.candidate_dets.clone(),
            threshold: r.threshold.is_finite().then_some(Dec17(r.threshold)),
            nodes_visited: r.nodes_visited,
            budget_hit: r.budget_hit,
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum Details {
    Conditions(ConditionReport),
    Exhaustion(ExhaustionDetails),
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Details>,
}

/// Failure while running a command.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(Error),
    /// Domain failure that has no library error kind.
    Other {
        kind: &'static str,
        message: String,
    },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type CmdResult = std::result::Result<String, Failure>;

fn to_json<T: Serialize>(value: &T) -> CmdResult {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Other {
        kind: "Serialization",
        message: e.to_string(),
    })
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> std::result::Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("{flag} is required")))
}

fn check_size(n: u32, m: u32) -> std::result::Result<u64, Failure> {
    let count = count_nonzero(n, m)?;
    if count > MAX_POINTS {
        return Err(Failure::Other {
            kind: "TooManyPoints",
            message: format!("{count} points of period {m} exceed the limit of {MAX_POINTS}"),
        });
    }
    Ok(count)
}

fn count(config: &RunConfig) -> CmdResult {
    let n = require(config.n, "--n")?;
    let m = require(config.m, "--m")?;
    let nu = count_periodic(n, m)?;
    let nu_hat = count_nonzero(n, m)?;
    to_json(&CountReport {
        nu,
        nu_hat,
        orbits: nu_hat / m as u64,
    })
}

fn enumerate(config: &RunConfig) -> CmdResult {
    let n = require(config.n, "--n")?;
    let m = require(config.m, "--m")?;
    check_size(n, m)?;
    let modulus = modulus_for(n, m)?;
    let points = enumerate_periodic(n, m)?;
    let mut orbits = Vec::new();
    for p in &points {
        // Points come in ascending order, so a cycle is listed once: at its
        // smallest residue.
        let mut cycle = vec![residue(p)];
        let mut q = p.image(n);
        while q != *p {
            if residue(&q) < residue(p) {
                break;
            }
            cycle.push(residue(&q));
            q = q.image(n);
        }
        if q == *p {
            orbits.push(cycle);
        }
    }
    to_json(&EnumerateReport {
        n,
        m,
        modulus,
        count: points.len(),
        orbits,
    })
}

fn residue(p: &RootPoint) -> u64 {
    match *p {
        RootPoint::Finite { residue, .. } => residue,
        RootPoint::Infinity => u64::MAX,
    }
}

fn derivs(config: &RunConfig) -> CmdResult {
    let n = require(config.n, "--n")?;
    let m = require(config.m, "--m")?;
    if n < 2 {
        return Err(Error::InvalidDegree { min: 2, got: n }.into());
    }
    check_size(n, m)?;
    let mut points = enumerate_periodic(n, m)?;
    if m == 1 {
        points.push(RootPoint::Infinity);
    }
    let columns = param_indices(n);
    let h = config.h;
    let rows = exec::try_map(&points, |p| -> crate::Result<DerivRow> {
        let entries = columns
            .iter()
            .map(|&j| {
                let closed = match p {
                    RootPoint::Infinity => dlambda_infinity(n, j)?,
                    RootPoint::Finite { .. } => dlambda_closed(n, m, j, p)?,
                };
                let numeric = dlambda_numeric(n, m, j, p, h)?;
                Ok(DerivEntry {
                    j,
                    closed,
                    numeric,
                    rel_err: relative_error(closed, numeric),
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(DerivRow { point: *p, entries })
    })?;
    let max_rel_err = rows
        .iter()
        .flat_map(|r| r.entries.iter().map(|e| e.rel_err))
        .fold(0.0, f64::max);
    to_json(&DerivsReport {
        n,
        m,
        columns,
        rows,
        max_rel_err,
    })
}

fn periods_of(config: &RunConfig) -> std::result::Result<(u32, &[u32]), Failure> {
    let n = require(config.n, "--n")?;
    let periods = config
        .periods
        .as_deref()
        .ok_or_else(|| Failure::Usage("--periods is required".into()))?;
    Ok((n, periods))
}

fn certificate_json(c: &Certificate) -> CmdResult {
    c.to_json().map_err(|e| Failure::Other {
        kind: "Serialization",
        message: e.to_string(),
    })
}

fn cert(config: &RunConfig) -> CmdResult {
    let (n, periods) = periods_of(config)?;
    certificate_json(&construct_certificate(n, periods, &config.options())?)
}

fn explore(config: &RunConfig) -> CmdResult {
    let (n, periods) = periods_of(config)?;
    certificate_json(&explore_beyond_conditions(n, periods, &config.options())?)
}

fn read_input(config: &RunConfig) -> std::result::Result<String, Failure> {
    let io_failure = |e: std::io::Error| Failure::Other {
        kind: "Io",
        message: e.to_string(),
    };
    match &config.input_path {
        Some(path) => std::fs::read_to_string(path).map_err(io_failure),
        None => std::io::read_to_string(std::io::stdin()).map_err(io_failure),
    }
}

fn verify(config: &RunConfig) -> CmdResult {
    let text = read_input(config)?;
    let c = Certificate::from_json(&text).map_err(|e| Failure::Other {
        kind: "InvalidCertificate",
        message: e.to_string(),
    })?;
    let verification = verify_certificate(&c, config.h, config.tol)?;
    to_json(&VerifyReport {
        verified: true,
        verification,
    })
}

fn error_report(kind: &str, message: String, details: Option<Details>) -> String {
    let report = ErrorReport {
        error: kind.to_string(),
        message,
        details,
    };
    serde_json::to_string_pretty(&report).expect("error reports always serialize")
}

/// Runs one command without touching standard output or the output file.
pub fn run(config: &RunConfig) -> Outcome {
    let result = config
        .validate()
        .map_err(Failure::Usage)
        .and_then(|()| match config.command {
            Command::Count => count(config),
            Command::Enumerate => enumerate(config),
            Command::Derivs => derivs(config),
            Command::Cert => cert(config),
            Command::Verify => verify(config),
            Command::Explore => explore(config),
        });
    match result {
        Ok(report) => Outcome {
            status: ExitStatus::Success,
            report,
        },
        Err(Failure::Usage(message)) => Outcome {
            status: ExitStatus::UsageError,
            report: error_report("UsageError", message, None),
        },
        Err(Failure::Domain(e)) => {
            let details = match &e {
                Error::ConditionsNotMet(r) => Some(Details::Conditions(r.clone())),
                Error::Exhausted(r) => Some(Details::Exhaustion(r.as_ref().into())),
                _ => None,
            };
            Outcome {
                status: ExitStatus::DomainError,
                report: error_report(e.kind(), e.to_string(), details),
            }
        }
        Err(Failure::Other { kind, message }) => Outcome {
            status: ExitStatus::DomainError,
            report: error_report(kind, message, None),
        },
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "multindep",
    version,
    about = "Periodic orbits of z^n with independent multipliers"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Count points of minimal period m of z^n.
    Count(PointArgs),
    /// List the nonzero points of minimal period m, grouped into cycles.
    Enumerate(PointArgs),
    /// Tabulate closed-form and finite-difference multiplier derivatives.
    Derivs(DerivArgs),
    /// Build a certificate for a period vector satisfying both conditions.
    Cert(CertArgs),
    /// Re-check a certificate read from FILE (or standard input).
    Verify(VerifyArgs),
    /// Run the certificate search without requiring condition (ii).
    Explore(CertArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Requested floating-point precision; at most 53 bits are supported.
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DerivArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    /// Central-difference step.
    #[arg(long, default_value_t = ORACLE_STEP)]
    h: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CertArgs {
    #[arg(long)]
    n: u32,
    /// Comma-separated minimal periods, 2n - 2 of them.
    #[arg(long, value_delimiter = ',', required = true)]
    periods: Vec<u32>,
    /// Allowed relative deviation between closed form and oracle.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = ORACLE_STEP)]
    h: f64,
    /// Node budget of the depth-first search.
    #[arg(long, default_value_t = DEFAULT_MAX_BACKTRACK)]
    max_backtrack: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Certificate file; standard input when omitted.
    file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = ORACLE_STEP)]
    h: f64,
    #[command(flatten)]
    common: Common,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let base = |command, common: Common| RunConfig {
            precision_bits: common.precision_bits,
            output_path: common.output,
            ..RunConfig::new(command)
        };
        let points = |command, a: PointArgs| RunConfig {
            n: Some(a.n),
            m: Some(a.m),
            ..base(command, a.common)
        };
        let search = |command, a: CertArgs| RunConfig {
            n: Some(a.n),
            periods: Some(a.periods),
            tol: a.tol,
            h: a.h,
            max_backtrack: a.max_backtrack,
            ..base(command, a.common)
        };
        match cli.command {
            CliCommand::Count(a) => points(Command::Count, a),
            CliCommand::Enumerate(a) => points(Command::Enumerate, a),
            CliCommand::Derivs(a) => RunConfig {
                n: Some(a.n),
                m: Some(a.m),
                h: a.h,
                ..base(Command::Derivs, a.common)
            },
            CliCommand::Cert(a) => search(Command::Cert, a),
            CliCommand::Explore(a) => search(Command::Explore, a),
            CliCommand::Verify(a) => RunConfig {
                tol: a.tol,
                h: a.h,
                input_path: a.file,
                ..base(Command::Verify, a.common)
            },
        }
    }
}

/// Parses command-line arguments (including the program name). Help and
/// version requests come back as `Err` with exit status 0.
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args).map(RunConfig::from)
}

fn emit(config: &RunConfig, outcome: &Outcome) -> std::io::Result<()> {
    if outcome.status == ExitStatus::UsageError {
        eprintln!("{}", outcome.report);
        return Ok(());
    }
    match &config.output_path {
        Some(path) => std::fs::write(path, format!("{}\n", outcome.report)),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", outcome.report)?;
            out.flush()
        }
    }
}

/// Full process behaviour: parse, run, write the report, return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(args) {
        Ok(config) => config,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitStatus::UsageError.code()
            } else {
                ExitStatus::Success.code()
            };
        }
    };
    let outcome = run(&config);
    if let Err(e) = emit(&config, &outcome) {
        eprintln!("cannot write report: {e}");
        return ExitStatus::DomainError.code();
    }
    outcome.status.code()
}
