//! Command-line front end.
//!
//! ```text
//! grushin-lab <subcommand> --config <path> [--out <dir>] [--threads <n>]
//! ```
//!
//! Exit codes: 0 success, 1 invariant violation, 2 configuration error,
//! 3 numerical non-convergence.

use clap::{Args, Parser, Subcommand};
use grushin_lab::config::{load_config, ExperimentKind};
use grushin_lab::error::Error;
use grushin_lab::runner::run_experiment;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "grushin-lab",
    version,
    about = "Numerical laboratory for degenerate-elliptic monotonicity formulas",
    long_about = "Solves Dirichlet problems for a degenerate-elliptic operator on an \
                  anisotropic grid, then measures frequency functions, spherical \
                  spectra, blow-up limits, and Pohozaev-type balances on gauge balls. \
                  All outputs are byte-deterministic and digest-manifested."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path of the run configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory (overrides `output.dir` from the configuration).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).  Output bytes do not depend
    /// on this.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Dirichlet problem and store the solution field.
    Solve(RunArgs),
    /// Trace the frequency function of the solved field over gauge spheres.
    Frequency(RunArgs),
    /// Solve the spherical eigenvalue problem sector by sector.
    Spectrum(RunArgs),
    /// Rescale the solved field and extract its blow-up profile.
    Blowup(RunArgs),
    /// Evaluate Pohozaev and integration-by-parts balances on gauge balls.
    Pohozaev(RunArgs),
    /// Run structural self-checks and tabulate the eigenvalue formula.
    Report(RunArgs),
}

impl Command {
    fn split(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::Solve(a) => (ExperimentKind::Solve, a),
            Command::Frequency(a) => (ExperimentKind::Frequency, a),
            Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
            Command::Blowup(a) => (ExperimentKind::Blowup, a),
            Command::Pohozaev(a) => (ExperimentKind::Pohozaev, a),
            Command::Report(a) => (ExperimentKind::Report, a),
        }
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), Error> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("  --threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("  thread pool: {e}")))?;
    }
    let config = load_config(&args.config)?;
    let outcome = run_experiment(kind, &config, args.out.as_deref())?;
    for line in &outcome.summary_lines {
        println!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2))
        }
    }
}
