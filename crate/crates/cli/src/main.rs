//! `eprsim` command-line front end.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Outputs, RunOptions};
use config::ScenarioConfig;
use error::CliError;
use eprsim::Execution;

#[derive(Parser)]
#[command(name = "eprsim", version, about = "Simulate EPR-state preparation in two trapped atoms driven by a parametric amplifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps (results do not depend on it).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the Fock truncation (levels per mode).
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// Write run metadata and summaries as JSON to this file.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Squeezing spectra of the amplifier outputs (CSV).
    NopaSpectrum(Common),
    /// Fock-space steady state of the motional master equation (JSON).
    SteadyState {
        #[command(flatten)]
        common: Common,
        /// Also dump the nonzero density-matrix elements as CSV.
        #[arg(long)]
        density_out: Option<PathBuf>,
    },
    /// Moment trajectory from the motional vacuum (CSV).
    Evolve(Common),
    /// Four-dimensional Wigner function on a grid (CSV).
    Wigner(Common),
    /// CHSH values of displaced-parity correlations over (r, J) (CSV).
    BellSweep(Common),
    /// Validity checks for experimental parameters (JSON).
    Feasibility(Common),
    /// Cascaded amplifier-to-atoms model against the white-noise limit (CSV).
    Cascade(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, density_out) = match &cli.command {
        Command::SteadyState { common, density_out } => (common.clone(), density_out.clone()),
        Command::NopaSpectrum(c)
        | Command::Evolve(c)
        | Command::Wigner(c)
        | Command::BellSweep(c)
        | Command::Feasibility(c)
        | Command::Cascade(c) => (c.clone(), None),
    };
    let cfg = ScenarioConfig::load(&common.config)?;
    if let Some(0) = common.workers {
        return Err(CliError::config("--workers", "must be >= 1"));
    }
    if let Some(n) = common.n_max {
        if n < 2 {
            return Err(CliError::config("--n-max", "must be >= 2"));
        }
    }
    let opts = RunOptions {
        n_max: common.n_max,
        exec: Execution::default(),
    };
    let outputs = with_workers(common.workers, || match &cli.command {
        Command::NopaSpectrum(_) => commands::nopa_spectrum(&cfg, &opts),
        Command::SteadyState { .. } => commands::steady_state(&cfg, &opts, density_out.is_some()),
        Command::Evolve(_) => commands::evolve(&cfg, &opts),
        Command::Wigner(_) => commands::wigner(&cfg, &opts),
        Command::BellSweep(_) => commands::bell(&cfg, &opts),
        Command::Feasibility(_) => commands::feasibility(&cfg),
        Command::Cascade(_) => commands::cascade(&cfg, &opts),
    })??;
    emit(&common, density_out, outputs)
}

#[cfg(feature = "parallel")]
fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T) -> Result<T, CliError> {
    if workers.is_some() {
        log::info!("built without the `parallel` feature; --workers ignored");
    }
    Ok(f())
}

fn emit(common: &Common, density_out: Option<PathBuf>, out: Outputs) -> Result<(), CliError> {
    if let (Some(path), Some(text)) = (&density_out, &out.density_csv) {
        output::write_atomic(path, text)?;
    }
    match (&common.meta, &out.meta) {
        (Some(path), Some(meta)) => output::write_atomic(path, &output::json_string(meta))?,
        (Some(path), None) => output::write_atomic(path, "{}\n")?,
        (None, _) => {
            if let Some(s) = &out.summary {
                eprintln!("{s}");
            }
        }
    }
    match &common.out {
        Some(path) => output::write_atomic(path, &out.primary),
        None => std::io::stdout()
            .write_all(out.primary.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EPRSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eprsim: {e}");
            e.exit_code()
        }
    }
}
