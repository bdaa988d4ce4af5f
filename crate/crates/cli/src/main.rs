use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fgsim::config::{InitialState, ModelName};
use fgsim::ensemble::{resolve_workers, WORKERS_ENV};
use fgsim::{experiments, report, ExperimentConfig, ExperimentKind, Overrides, RunError};

#[derive(Parser)]
#[command(name = "fgsim", version, about = "Fermionic Gaussian open-system simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment selected by --experiment or by the config file.
    Run(RunArgs),
    /// Integrate the Lindblad covariance equation directly.
    Lindblad(RunArgs),
    /// Quantum-trajectory ensemble of a Lindblad model.
    Trajectories(RunArgs),
    /// Random Gaussian circuits.
    Circuit(RunArgs),
    /// Continuously monitored Kitaev chain.
    Monitor(RunArgs),
    /// Identity checks against the dense oracle and the Grassmann expansion.
    OracleCheck(RunArgs),
    /// Summarize a run directory.
    Report { dir: PathBuf },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML configuration file or a previous run manifest.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    gamma_over_j: Option<f64>,
    #[arg(long)]
    mu_over_delta: Option<f64>,
    #[arg(long)]
    j_over_delta: Option<f64>,
    #[arg(long)]
    gamma_over_delta: Option<f64>,
    #[arg(long, value_enum)]
    initial: Option<InitialState>,
    /// Final time in model units.
    #[arg(long)]
    t_max: Option<f64>,
    /// Final time in units of 1/γ.
    #[arg(long)]
    t_max_gamma: Option<f64>,
    /// Step in model units.
    #[arg(long)]
    dt: Option<f64>,
    /// Step in units of 1/γ.
    #[arg(long)]
    dt_gamma: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write one row per sample.
    #[arg(long)]
    per_trajectory: bool,
    #[arg(long)]
    layers: Option<usize>,
    /// Per-mode measurement probability of a circuit layer.
    #[arg(long = "p")]
    measure_probability: Option<f64>,
    #[arg(long)]
    max_modes: Option<usize>,
    #[arg(long)]
    cases: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

impl RunArgs {
    fn overrides(&self, preset: Option<ExperimentKind>) -> Overrides {
        Overrides {
            experiment: self.experiment.or(preset),
            model: self.model,
            l: self.l,
            gamma_over_j: self.gamma_over_j,
            mu_over_delta: self.mu_over_delta,
            j_over_delta: self.j_over_delta,
            gamma_over_delta: self.gamma_over_delta,
            initial: self.initial,
            t_max: self.t_max,
            t_max_gamma: self.t_max_gamma,
            dt: self.dt,
            dt_gamma: self.dt_gamma,
            record_every: self.record_every,
            samples: self.samples,
            seed: self.seed,
            per_trajectory: self.per_trajectory,
            layers: self.layers,
            measure_probability: self.measure_probability,
            max_modes: self.max_modes,
            cases: self.cases,
            out: self.out.clone(),
        }
    }
}

fn load(args: &RunArgs, preset: Option<ExperimentKind>) -> Result<ExperimentConfig, RunError> {
    ExperimentConfig::load(args.config.as_deref(), &args.overrides(preset))
}

fn run(args: &RunArgs, preset: Option<ExperimentKind>) -> Result<(), RunError> {
    let cfg = load(args, preset)?;
    let workers = resolve_workers(args.workers);
    let manifest = experiments::run(&cfg, workers)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} finished in {:.2} s; wrote {} file(s) to {}",
        manifest.experiment,
        manifest.wall_time_seconds,
        manifest.tables.len() + 1,
        cfg.output.dir.display()
    );
    if cfg.experiment == ExperimentKind::OracleCheck {
        print!("{}", report::summarize(&cfg.output.dir)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a, None),
        Command::Lindblad(a) => run(a, Some(ExperimentKind::LindbladDirect)),
        Command::Trajectories(a) => run(a, Some(ExperimentKind::Trajectories)),
        Command::Circuit(a) => run(a, Some(ExperimentKind::Circuit)),
        Command::Monitor(a) => run(a, Some(ExperimentKind::Monitor)),
        Command::OracleCheck(a) => run(a, Some(ExperimentKind::OracleCheck)),
        Command::Report { dir } => report::summarize(dir).map(|s| print!("{s}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
