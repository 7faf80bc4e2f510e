use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mahm::SolverMode;
use mahm_cli::run::{self, Dataset, Source};
use mahm_cli::{io, CliError, Result, RunConfig};

/// Multi-signal adaptive harmonic decomposition.
///
/// Splits an ensemble of signals that share instantaneous phases into
/// components `a(t)cos θ(t) + b(t)sin θ(t)`, one phase per component.
#[derive(Parser, Debug)]
#[command(name = "mahm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a dataset into shared-phase components
    Decompose(RunArgs),
    /// Write a synthetic dataset as CSV
    Generate(GenerateArgs),
    /// Track cable tension by fusing the harmonics of the fundamental
    Cable(RunArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Periodic,
    Nonperiodic,
    Robust,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Builtin {
    Example1,
    Cable,
}

impl From<Builtin> for Dataset {
    fn from(b: Builtin) -> Self {
        match b {
            Builtin::Example1 => Dataset::Example1,
            Builtin::Cable => Dataset::Cable,
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the built-in generators
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    max_components: Option<usize>,
    /// Relative residual energy at which to stop adding components
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["input", "generate"])]
struct RunArgs {
    /// Dataset file, CSV or JSON
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use a built-in dataset instead of a file
    #[arg(long, value_enum)]
    generate: Option<Builtin>,
    /// Directory for the result files
    #[arg(long, default_value = ".")]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    dataset: Builtin,
    /// Output CSV file
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    common: Common,
}

/// Config file first, then flags on top.
fn settings(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(m) = c.mode {
        cfg.driver.solver.mode = match m {
            Mode::Periodic => SolverMode::Periodic,
            Mode::Nonperiodic => SolverMode::Nonperiodic,
            Mode::Robust => SolverMode::Robust,
        };
    }
    if let Some(k) = c.max_components {
        cfg.driver.max_components = k;
    }
    if let Some(t) = c.tol {
        cfg.driver.residual_tol = t;
    }
    Ok(cfg)
}

fn source(a: &RunArgs) -> Source {
    match (&a.input, a.generate) {
        (Some(p), _) => Source::File(p.clone()),
        (None, Some(b)) => Source::Generated(b.into()),
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Decompose(a) => {
            let cfg = settings(&a.common)?;
            let e = run::load(&source(&a), &cfg)?;
            run::run_decompose(&e, &cfg, &a.output)
        }
        Command::Cable(a) => {
            let cfg = settings(&a.common)?;
            let e = run::load(&source(&a), &cfg)?;
            run::run_cable(&e, &cfg, &a.output)
        }
        Command::Generate(a) => {
            let cfg = settings(&a.common)?;
            let e = run::generate(a.dataset.into(), &cfg)?;
            io::write_dataset(&a.output, &e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => report(&err),
    }
}

fn report(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code())
}
