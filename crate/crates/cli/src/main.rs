use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crossover_lab::commands;
use crossover_lab::config::RunConfig;
use crossover_lab::CliError;

const THREADS_ENV: &str = "CROSSOVER_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "crossover-lab",
    version,
    about = "Crossover indicators of a three-qubit probe system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Write the indicator table over the J_C grid as CSV.
    Sweep,
    /// Locate crossings, Fisher zeros, obesity zeros and probability inversions.
    Critical,
    /// Run the self-checks; exits 1 if any fails.
    Verify {
        /// Check to skip (repeatable).
        #[arg(long, value_name = "CHECK")]
        skip: Vec<String>,
    },
    /// Map circuit parameters to the model and print them.
    Circuit {
        /// Also sweep flux_AC = flux_BC and write the indicator table.
        #[arg(long)]
        sweep: bool,
    },
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    omega0: Option<f64>,
    #[arg(long, global = true)]
    omega_c: Option<f64>,
    #[arg(long, global = true)]
    j: Option<f64>,
    #[arg(long, global = true)]
    jc: Option<f64>,
    #[arg(long, global = true)]
    jc_min: Option<f64>,
    #[arg(long, global = true)]
    jc_max: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Finite-difference stride relative to max(1, |J_C|).
    #[arg(long, global = true)]
    fd_step: Option<f64>,
    #[arg(long, global = true)]
    scan_points: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    flux_ab: Option<f64>,
    #[arg(long, global = true)]
    flux_ac: Option<f64>,
    #[arg(long, global = true)]
    flux_bc: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.params.omega0, self.omega0);
        set(&mut cfg.params.omega_c, self.omega_c);
        set(&mut cfg.params.j, self.j);
        set(&mut cfg.params.j_c, self.jc);
        set(&mut cfg.sweep.jc_min, self.jc_min);
        set(&mut cfg.sweep.jc_max, self.jc_max);
        set(&mut cfg.numerics.fd_step, self.fd_step);
        set(&mut cfg.numerics.tol, self.tol);
        if let Some(n) = self.points {
            cfg.sweep.points = n;
        }
        if let Some(n) = self.scan_points {
            cfg.numerics.scan_points = n;
        }
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        let fluxes = [self.flux_ab, self.flux_ac, self.flux_bc];
        if fluxes.iter().any(Option::is_some) {
            let c = cfg.circuit.as_mut().ok_or_else(|| {
                CliError::Config("flux overrides need a \"circuit\" section in the config".into())
            })?;
            set(&mut c.coupler.flux_ab, self.flux_ab);
            set(&mut c.coupler.flux_ac, self.flux_ac);
            set(&mut c.coupler.flux_bc, self.flux_bc);
        }
        Ok(())
    }
}

fn worker_count(cfg: &RunConfig) -> Result<usize, CliError> {
    let mut n = cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let cap: usize = v.trim().parse().ok().filter(|&c| c > 0).ok_or_else(|| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        })?;
        n = n.min(cap);
    }
    Ok(n)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(&cfg)?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Critical => commands::cmd_critical(&cfg),
        Command::Verify { skip } => commands::cmd_verify(&cfg, skip),
        Command::Circuit { sweep } => commands::cmd_circuit(&cfg, *sweep),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::VerifyFailed) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
