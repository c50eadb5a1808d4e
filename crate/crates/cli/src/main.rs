use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qbm_sbs_cli::{run, CliError, Command, Overrides, RunConfig};

/// Decoherence and spectrum broadcast structure in a finite oscillator bath.
#[derive(Debug, Parser)]
#[command(name = "qbm-sbs", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed of the bath frequency sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV output path; the sidecar gets the same stem with `.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Formation threshold for both factors.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Worker threads for `scan`.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true)]
    temperature: Option<f64>,
    #[arg(long, global = true)]
    squeezing: Option<f64>,
    /// Dimensionless inverse temperature of the measurement limit.
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true)]
    t_steps: Option<usize>,
    /// Averaging window [s].
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    n_samples: Option<usize>,
    /// Number of traced-out oscillators.
    #[arg(long, global = true)]
    unobserved: Option<usize>,
    /// Macrofraction sizes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    mac: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Measurement limit: Gaussian decay of both factors.
    Qml,
    /// Bath self-Hamiltonians kept, central system static.
    Pqml,
    /// Full model with central oscillator frequency and squeezing.
    Full,
    /// Time-averaged factors over a (temperature, squeezing) grid.
    Scan,
    /// Cross-regime identity checks.
    Selftest,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            epsilon: self.epsilon,
            temperature: self.temperature,
            squeezing: self.squeezing,
            beta: self.beta,
            t_max: self.t_max,
            t_steps: self.t_steps,
            tau: self.tau,
            n_samples: self.n_samples,
            unobserved: self.unobserved,
            mac: self.mac.clone(),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&cli.overrides());
    let command = match cli.command {
        Cmd::Qml => Command::Qml,
        Cmd::Pqml => Command::Pqml,
        Cmd::Full => Command::Full,
        Cmd::Scan => Command::Scan,
        Cmd::Selftest => Command::Selftest,
    };
    run(command, config, cli.threads, &mut std::io::stdout().lock())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            (&e).into()
        }
    }
}
