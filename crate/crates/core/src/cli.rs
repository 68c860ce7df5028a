//! Command-line front end. Commands return an exit code instead of exiting so
//! that they can be driven from tests.
//!
//! Exit codes: 0 ok or decomposable, 1 not decomposable, 2 invalid operator,
//! 3 parse or configuration error, 4 forge budget exceeded, 5 unknown,
//! 6 consistency fault.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::decomposer::{decide_decomposability, DecideOptions, DecompositionCertificate, Verdict};
use crate::error::Error;
use crate::forge::{orthogonalize, ForgeOptions, ForgeTrace};
use crate::generator::{
    random_rpotent, GeneratorConfig, ScalarMode, SuiteGrid, ValueMode, WeightMode,
};
use crate::io::{read_operator_file, to_json_string, OperatorFile};
use crate::measure_space::{AtomSet, MeasurableFunction, ToleranceConfig};
use crate::operator::{
    inspect_matrix, kernel_nonnegative_witness, NonnegativeOperator, ValidationReport,
};
use crate::suite::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_DECOMPOSABLE: i32 = 1;
pub const EXIT_INVALID_OPERATOR: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_UNKNOWN: i32 = 5;
pub const EXIT_CONSISTENCY: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "rpotent",
    version,
    about = "Nonnegative r-potent operator toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().tol_support)]
    pub tol_support: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().tol_potency)]
    pub tol_potency: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().tol_rank)]
    pub tol_rank: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().tol_orth)]
    pub tol_orth: f64,
}

impl ToleranceArgs {
    pub fn config(&self) -> ToleranceConfig {
        ToleranceConfig {
            tol_support: self.tol_support,
            tol_potency: self.tol_potency,
            tol_rank: self.tol_rank,
            tol_orth: self.tol_orth,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check nonnegativity and r-potency of an operator file.
    Validate { path: PathBuf },
    /// Build a nonnegative, support-disjoint basis of the range.
    Orthogonalize {
        path: PathBuf,
        /// Include the rule-by-rule trace.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide decomposability and write a certificate.
    Decompose {
        path: PathBuf,
        #[arg(long, default_value_t = 16)]
        oracle_limit: usize,
        /// Include the forge trace in the certificate.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an operator with known structure.
    Generate(GenerateArgs),
    /// Run the generated test suite and print a summary.
    Suite {
        /// Parameter grid: default, small or boundary.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "N")]
    pub range_dim: usize,
    #[arg(long)]
    pub r: u32,
    /// Comma separated cycle lengths, e.g. "2,1".
    #[arg(long)]
    pub cycles: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Choice::Unit)]
    pub scalars: Choice,
    #[arg(long, value_enum, default_value_t = Choice::Unit)]
    pub weights: Choice,
    #[arg(long, value_enum, default_value_t = Choice::Unit)]
    pub values: Choice,
    #[arg(long, default_value_t = 0)]
    pub leftover: usize,
    /// Require a cycle of length r - 1.
    #[arg(long)]
    pub exact: bool,
    /// Assign atoms to blocks in random order.
    #[arg(long)]
    pub shuffle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Choice {
    Unit,
    Random,
}

/// Exit code for an error reaching the command boundary.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NegativeEntry { .. }
        | Error::InvalidOperator(_)
        | Error::NotPotent { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidSpace(_) => EXIT_INVALID_OPERATOR,
        Error::Json(_) | Error::Io(_) | Error::Config(_) | Error::InvalidTolerance(_) => EXIT_PARSE,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::OracleRefused { .. } => EXIT_UNKNOWN,
        _ => EXIT_CONSISTENCY,
    }
}

/// Runs a parsed command, writing JSON to `out` (or to `--out`) and
/// diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = cli.tolerances.config();
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_PARSE;
    }
    let result = match &cli.command {
        Command::Validate { path } => cmd_validate(path, &cfg, out),
        Command::Orthogonalize {
            path,
            trace,
            out: dest,
        } => cmd_orthogonalize(path, *trace, dest.as_deref(), &cfg, out),
        Command::Decompose {
            path,
            oracle_limit,
            trace,
            out: dest,
        } => cmd_decompose(path, *oracle_limit, *trace, dest.as_deref(), &cfg, out),
        Command::Generate(args) => cmd_generate(args, out),
        Command::Suite {
            grid,
            count,
            seed,
            out: dest,
        } => cmd_suite(grid, *count, *seed, dest.as_deref(), &cfg, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let Error::BudgetExceeded { trace, .. } = &e {
                if let Ok(text) = to_json_string(trace) {
                    let _ = write!(out, "{text}");
                }
            }
            exit_code(&e)
        }
    }
}

fn emit<T: Serialize>(value: &T, dest: Option<&Path>, out: &mut dyn Write) -> crate::Result<()> {
    let text = to_json_string(value)?;
    match dest {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(path: &Path, cfg: &ToleranceConfig) -> crate::Result<(OperatorFile, ValidationReport)> {
    let file = read_operator_file(path)?;
    let (_, matrix) = file.parts()?;
    let report = inspect_matrix(&matrix, file.r, cfg);
    Ok((file, report))
}

/// Loads and validates, turning validation failures into an error.
fn load_operator(path: &Path, cfg: &ToleranceConfig) -> crate::Result<NonnegativeOperator> {
    let (file, report) = load(path, cfg)?;
    let op = file.to_operator(cfg)?;
    if !report.potent {
        return Err(Error::NotPotent {
            r: file.r,
            residual: report.potency_residual,
            bound: cfg.tol_potency * report.frobenius_norm.max(1.0),
        });
    }
    Ok(op)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    r: u32,
    passed: bool,
    #[serde(flatten)]
    report: &'a ValidationReport,
}

pub fn cmd_validate(path: &Path, cfg: &ToleranceConfig, out: &mut dyn Write) -> crate::Result<i32> {
    let (file, report) = load(path, cfg)?;
    let passed = report.passed() && file.r >= 2;
    emit(
        &ValidateOutput {
            r: file.r,
            passed,
            report: &report,
        },
        None,
        out,
    )?;
    Ok(if passed {
        EXIT_OK
    } else {
        EXIT_INVALID_OPERATOR
    })
}

#[derive(Serialize)]
struct BasisOutput {
    basis: Vec<MeasurableFunction>,
    supports: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kernel_witness: Option<MeasurableFunction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<ForgeTrace>,
}

pub fn cmd_orthogonalize(
    path: &Path,
    with_trace: bool,
    dest: Option<&Path>,
    cfg: &ToleranceConfig,
    out: &mut dyn Write,
) -> crate::Result<i32> {
    let op = load_operator(path, cfg)?;
    let witness = kernel_nonnegative_witness(&op, cfg)?;
    let mut notes = Vec::new();
    if witness.is_some() {
        notes.push(
            "the kernel holds a nonnegative function, so the operator is decomposable".to_string(),
        );
    }
    let output = match orthogonalize(&op, cfg, &ForgeOptions::default()) {
        Ok((basis, trace)) => {
            let supports = basis.supports().to_vec();
            let mut pairs: Vec<_> = supports.into_iter().zip(basis.into_functions()).collect();
            pairs.sort_by(|a, b| a.0.cmp(&b.0));
            let (supports, basis): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            BasisOutput {
                supports: supports.iter().map(AtomSet::to_one_based).collect(),
                basis,
                kernel_witness: witness,
                notes,
                trace: with_trace.then_some(trace),
            }
        }
        Err(e) if witness.is_some() && !matches!(e, Error::BudgetExceeded { .. }) => {
            notes.push(format!("forge stopped: {e}"));
            BasisOutput {
                basis: Vec::new(),
                supports: Vec::new(),
                kernel_witness: witness,
                notes,
                trace: None,
            }
        }
        Err(e) => return Err(e),
    };
    emit(&output, dest, out)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CertificateFile<'a> {
    #[serde(flatten)]
    certificate: &'a DecompositionCertificate,
    tool_version: &'static str,
    tolerances: ToleranceConfig,
}

pub fn cmd_decompose(
    path: &Path,
    oracle_limit: usize,
    with_trace: bool,
    dest: Option<&Path>,
    cfg: &ToleranceConfig,
    out: &mut dyn Write,
) -> crate::Result<i32> {
    let op = load_operator(path, cfg)?;
    let opts = DecideOptions {
        oracle_limit,
        ..DecideOptions::default()
    };
    let mut cert = decide_decomposability(&op, cfg, &opts)?;
    if !with_trace {
        cert.trace = None;
    }
    emit(
        &CertificateFile {
            certificate: &cert,
            tool_version: env!("CARGO_PKG_VERSION"),
            tolerances: *cfg,
        },
        dest,
        out,
    )?;
    Ok(match cert.verdict {
        Verdict::DecomposableByKernel | Verdict::DecomposableByU => EXIT_OK,
        Verdict::NotDecomposable => EXIT_NOT_DECOMPOSABLE,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

pub fn parse_cycles(text: &str) -> crate::Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Config(format!("cycle length {s:?} is not a positive integer")))
        })
        .collect()
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> crate::Result<i32> {
    let pick = |c: Choice| c == Choice::Random;
    let config = GeneratorConfig {
        n: args.n,
        range_dim: args.range_dim,
        r: args.r,
        cycles: parse_cycles(&args.cycles)?,
        scalar_mode: if pick(args.scalars) {
            ScalarMode::RandomCycleProductOne
        } else {
            ScalarMode::Unit
        },
        weight_mode: if pick(args.weights) {
            WeightMode::Random
        } else {
            WeightMode::Uniform
        },
        value_mode: if pick(args.values) {
            ValueMode::Random
        } else {
            ValueMode::Unit
        },
        leftover: args.leftover,
        exact_potency: args.exact,
        shuffle_atoms: args.shuffle,
        seed: args.seed,
    };
    let generated = random_rpotent(&config)?;
    let file = OperatorFile::from_operator(
        &generated.operator,
        Some(generated.ground_truth(&config.cycles)),
    );
    emit(&file, args.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

pub fn cmd_suite(
    grid: &str,
    count: usize,
    seed: u64,
    dest: Option<&Path>,
    cfg: &ToleranceConfig,
    out: &mut dyn Write,
) -> crate::Result<i32> {
    let grid = SuiteGrid::named(grid)?;
    let summary = run_suite(count, &grid, seed, cfg)?;
    emit(&summary, dest, out)?;
    // a failed invariant family is a fault of the toolkit, not an open verdict
    Ok(if summary.all_pass && summary.consistency_faults == 0 {
        EXIT_OK
    } else {
        EXIT_CONSISTENCY
    })
}
