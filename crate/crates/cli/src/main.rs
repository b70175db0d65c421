//! `hexwalk`: experiment runner.

mod check;
mod coin_parse;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hexwalk_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    /// Identity checks that ran but did not hold.
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hexwalk_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Numerical { .. } | E::Fit(_) | E::Contract(_)) | CliError::Checks(_) => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hexwalk", version, about = "Disordered coined quantum walks on the hexagonal lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML file with the command's parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory; defaults to `hexwalk-out/<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads, 0 = all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Band structure over a k-grid.
    Bands(CommonArgs),
    /// Probability of a spectral gap around z at C0, closed form and Monte Carlo.
    Gapprob(CommonArgs),
    /// Disorder-averaged fractional moments of the Green function along a ray.
    Fracmom(CommonArgs),
    /// Disorder-averaged sup over time of transition amplitudes along a ray.
    Dynloc(CommonArgs),
    /// Transport index of a path in the scattering picture.
    Index(CommonArgs),
    /// Identity and invariant suite.
    Check(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (name, args) = match &cli.command {
        Command::Bands(a) => ("bands", a),
        Command::Gapprob(a) => ("gapprob", a),
        Command::Fracmom(a) => ("fracmom", a),
        Command::Dynloc(a) => ("dynloc", a),
        Command::Index(a) => ("index", a),
        Command::Check(a) => ("check", a),
    };
    if args.common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(args.common.threads).build_global() {
            eprintln!("hexwalk: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(name, &args.common) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hexwalk {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
