//! Batch driver for the fuzzy-sphere construction and its check suites.
//!
//! Every command reads a `(dim, cutoff)` instance, produces one
//! machine-readable artifact (JSON or CSV), and reports through the exit
//! code: 0 pass, 1 check failure, 2 usage error, 3 resource budget.
//! Identical flags and seed give byte-identical output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzy_sphere::algebra::FuzzyAlgebra;
use fuzzy_sphere::products::{convergence_report, witness_report};
use fuzzy_sphere::radial::radial_table;
use fuzzy_sphere::report::{self, SuiteReport};
use fuzzy_sphere::{Error, TensorBudget};

#[derive(Parser)]
#[command(
    name = "fsk",
    version,
    about = "Fuzzy-sphere operator algebras: build them, check them, tabulate their spectra",
    after_help = "Exit codes: 0 success, 1 failed check, 2 usage error, 3 tensor budget exceeded.\n\
                  FSK_MAX_TENSOR_BYTES overrides the memory budget for dense tensor work."
)]
struct Cli {
    /// Seed for all sampling-based cross-checks.
    #[arg(long, global = true, default_value_t = 17)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct one algebra and dump its operators and spectrum as JSON.
    Build(BuildArgs),
    /// Run a verification suite and report per-check residuals.
    Check(CheckArgs),
    /// Tabulate the eigenvalues of the squared-radius observable.
    Spectrum(SpectrumArgs),
    /// Tabulate truncation residuals over a range of cutoffs.
    Convergence(ConvergenceArgs),
    /// Compare closed-form radial levels against the independent solver.
    Radial(RadialArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Ambient dimension D (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Harmonic degree cutoff; 0 gives the trivial one-dimensional algebra.
    #[arg(long, default_value_t = 2)]
    cutoff: usize,

    /// Well stiffness; defaults to [cutoff(cutoff+dim-2)]^2.
    #[arg(long)]
    k: Option<f64>,

    /// Destination file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SuiteKind {
    Projectors,
    Relations,
    Isomorphism,
    Convergence,
    Radial,
    All,
}

#[derive(Args)]
struct CheckArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value_t = SuiteKind::All)]
    suite: SuiteKind,

    /// Ambient dimension D (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Harmonic degree cutoff. The projector suite reads this as the top
    /// tensor rank to sweep; the convergence suite as the top cutoff.
    #[arg(long, default_value_t = 2)]
    cutoff: usize,

    /// Well stiffness override (relations and radial suites).
    #[arg(long)]
    k: Option<f64>,

    /// Residual tolerance; defaults per suite (1e-12 projectors, 1e-10 rest).
    #[arg(long)]
    tol: Option<f64>,

    /// Corrupt one operator entry first; the run must then exit 1.
    #[arg(long)]
    inject_error: bool,

    /// Also write the full JSON report here.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Ambient dimension D (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Harmonic degree cutoff.
    #[arg(long, default_value_t = 2)]
    cutoff: usize,

    /// Well stiffness; defaults to [cutoff(cutoff+dim-2)]^2.
    #[arg(long)]
    k: Option<f64>,

    /// Observable to tabulate; only the squared radius `x2` exists.
    #[arg(long, default_value = "x2")]
    observable: String,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Destination file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Ambient dimension D (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Keep only rows for this test function id (e.g. t1, pair-product).
    #[arg(long)]
    f: Option<String>,

    /// Inclusive cutoff range, written lo:hi.
    #[arg(long, value_parser = parse_range, default_value = "2:4")]
    lambda_range: (usize, usize),

    /// Append the operator-norm non-convergence witness rows.
    #[arg(long)]
    witness: bool,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Destination file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RadialArgs {
    /// Ambient dimension D (at least 2).
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Angular sector to solve in.
    #[arg(long, default_value_t = 0)]
    l: usize,

    /// Well stiffness; the independent solver needs at least 1000.
    #[arg(long, default_value_t = 1e4)]
    k: f64,

    /// How many radial levels to report (n = 0..levels).
    #[arg(long, default_value_t = 3)]
    levels: usize,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Destination file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

enum Failure {
    Core(Error),
    Io(std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::BudgetExceeded { .. }) => 3,
            // A solver that fails to settle is a failed check, not misuse.
            Failure::Core(Error::NoConvergence(_)) => 1,
            Failure::Core(_) | Failure::Io(_) | Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn budget_from_env() -> Result<TensorBudget, Failure> {
    match std::env::var("FSK_MAX_TENSOR_BYTES") {
        Ok(raw) => raw
            .trim()
            .parse::<u128>()
            .map(TensorBudget::with_max_bytes)
            .map_err(|e| {
                Failure::Usage(format!(
                    "FSK_MAX_TENSOR_BYTES must be an integer byte count, got {raw:?}: {e}"
                ))
            }),
        Err(std::env::VarError::NotPresent) => Ok(TensorBudget::default()),
        Err(e) => Err(Failure::Usage(format!("FSK_MAX_TENSOR_BYTES: {e}"))),
    }
}

/// Writes through a dot-tmp sibling and renames, so readers never see a
/// half-written artifact and concurrent instances cannot interleave.
fn write_artifact(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| {
        Failure::Usage(format!("output path {} has no file name", path.display()))
    })?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Failure::Io(e)
    })
}

fn emit(output: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match output {
        Some(path) => write_artifact(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value is already in memory");
    s.push('\n');
    s
}

fn cmd_build(args: &BuildArgs, budget: &TensorBudget) -> CmdResult {
    let k = args
        .k
        .unwrap_or_else(|| fuzzy_sphere::algebra::default_coupling(args.dim, args.cutoff));
    let alg = FuzzyAlgebra::with_budget(args.dim, args.cutoff, k, budget)?;
    emit(args.output.as_deref(), &pretty(&alg.to_json()?))?;
    Ok(0)
}

fn cmd_check(args: &CheckArgs, budget: &TensorBudget, seed: u64) -> CmdResult {
    let tol = |fallback: f64| args.tol.unwrap_or(fallback);
    if let Some(t) = args.tol {
        if !(t > 0.0) {
            return Err(Failure::Usage(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }

    let mut suites: Vec<SuiteReport> = match args.suite {
        SuiteKind::Projectors => vec![report::projector_suite(
            args.dim,
            args.cutoff.max(1),
            tol(1e-12),
            budget,
        )?],
        SuiteKind::Relations => vec![report::relation_suite(
            args.dim,
            args.cutoff,
            args.k,
            tol(1e-10),
            budget,
        )?],
        SuiteKind::Isomorphism => vec![report::isomorphism_suite(
            args.dim,
            args.cutoff.max(1),
            tol(1e-10),
            seed,
            budget,
        )?],
        SuiteKind::Convergence => {
            vec![report::convergence_suite(args.dim, 2, args.cutoff.max(3), budget)?.0]
        }
        SuiteKind::Radial => vec![report::radial_suite(args.dim, args.k.unwrap_or(1e4), 2, 1)?.0],
        SuiteKind::All => report::full_suite(args.dim, args.cutoff, tol(1e-10), seed, budget)?,
    };

    if args.inject_error {
        suites.push(report::injected_relation_suite(
            args.dim,
            args.cutoff.max(1),
            args.k,
            tol(1e-10),
            budget,
        )?);
    }

    let mut passed = 0usize;
    let mut total = 0usize;
    for suite in &suites {
        for check in &suite.checks {
            total += 1;
            let verdict = if check.passed {
                passed += 1;
                "PASS"
            } else {
                "FAIL"
            };
            println!(
                "{verdict} [{}] {}: residual {:.3e} (tol {:.1e})",
                suite.suite, check.name, check.residual, check.tolerance
            );
        }
    }
    println!("{passed}/{total} checks passed");

    if let Some(path) = args.output.as_deref() {
        write_artifact(path, &report::suites_json(&suites))?;
    }
    Ok(u8::from(passed != total))
}

fn cmd_spectrum(args: &SpectrumArgs, budget: &TensorBudget) -> CmdResult {
    if args.observable != "x2" {
        return Err(Failure::Usage(format!(
            "unknown observable {:?}; only x2 is tabulated",
            args.observable
        )));
    }
    let k = args
        .k
        .unwrap_or_else(|| fuzzy_sphere::algebra::default_coupling(args.dim, args.cutoff));
    let alg = FuzzyAlgebra::with_budget(args.dim, args.cutoff, k, budget)?;
    let lines = alg.spectrum()?;
    let body = match args.format {
        Format::Csv => report::spectrum_csv(&lines),
        Format::Json => pretty(&serde_json::to_value(&lines).expect("plain records")),
    };
    emit(args.output.as_deref(), &body)?;
    Ok(0)
}

fn cmd_convergence(args: &ConvergenceArgs, budget: &TensorBudget) -> CmdResult {
    let (lo, hi) = args.lambda_range;
    if lo < 1 {
        return Err(Failure::Usage(
            "cutoff range must start at 1 or above".into(),
        ));
    }
    let cutoffs: Vec<usize> = (lo..=hi).collect();
    let mut rows = convergence_report(args.dim, &cutoffs, budget)?;
    if args.witness {
        rows.extend(witness_report(args.dim, &cutoffs, budget)?);
    }
    if let Some(id) = &args.f {
        rows.retain(|r| &r.test_id == id);
        if rows.is_empty() {
            return Err(Failure::Usage(format!(
                "no convergence rows for test id {id:?}"
            )));
        }
    }
    let body = match args.format {
        Format::Csv => report::convergence_csv(&rows),
        Format::Json => pretty(&serde_json::to_value(&rows).expect("plain records")),
    };
    emit(args.output.as_deref(), &body)?;
    Ok(0)
}

fn cmd_radial(args: &RadialArgs, _budget: &TensorBudget) -> CmdResult {
    if args.levels == 0 {
        return Err(Failure::Usage("need at least one radial level".into()));
    }
    let rows = radial_table(args.dim, &[args.l], args.levels - 1, args.k)?;
    let body = match args.format {
        Format::Csv => report::radial_csv(&rows),
        Format::Json => pretty(&serde_json::to_value(&rows).expect("plain records")),
    };
    emit(args.output.as_deref(), &body)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = budget_from_env().and_then(|budget| match &cli.command {
        Command::Build(a) => cmd_build(a, &budget),
        Command::Check(a) => cmd_check(a, &budget, cli.seed),
        Command::Spectrum(a) => cmd_spectrum(a, &budget),
        Command::Convergence(a) => cmd_convergence(a, &budget),
        Command::Radial(a) => cmd_radial(a, &budget),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("fsk: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
