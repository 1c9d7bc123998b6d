//! Command-line front end for the dynamic Erdős–Rényi toolkit.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{Format, RunConfig};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 1;
/// Exit status for invalid parameters.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when every sample hit the time cap.
pub const EXIT_CAPPED: i32 = 3;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "DYNER_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] dyner::Error),
    #[error("no usable result: {0}")]
    Capped(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Model(_) => EXIT_VALIDATION,
            CliError::Capped(_) => EXIT_CAPPED,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dyner", version, about = "Exact analytics and simulation of the dynamic Erdős–Rényi graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form quantities.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Edge-count chain simulations.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Labelled-graph component simulations.
    #[command(subcommand)]
    Components(ComponentsCommand),
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    /// Single-edge transition probabilities and separation at time --t.
    Transition(Flags),
    /// Mean and law of the fastest time to stationarity.
    Stationarity(Flags),
    /// Expected first-passage time of the edge count from --from to --to.
    Hitting(Flags),
    /// Fluid-limit travel time between densities --from and --to.
    Fluid(Flags),
    /// Relative-entropy exponent at density --c.
    Entropy(Flags),
    /// Binomial upper tail at count --to with exponential bounds.
    Tail(Flags),
    /// Sweep of the two component-emergence rate functions.
    Rates(Flags),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// One edge-count path from --from up to --horizon.
    Trajectory(Flags),
    /// First-passage times from --from to --to.
    Hitting(Flags),
    /// Samples of the fastest time to stationarity.
    Stationarity(Flags),
    /// Regenerative estimate of the hitting time of density --c.
    Renewal(Flags),
    /// Probability of reaching --to before --lower from --from.
    Escape(Flags),
}

#[derive(Debug, Subcommand)]
pub enum ComponentsCommand {
    /// Time to a component of size ceil(eps n), paired with the edge-count passage.
    Emergence(Flags),
    /// Largest component of G(n, m) with m = --m or [c_eps n].
    Static(Flags),
}

/// Flags shared by every subcommand; each uses the subset it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Key=value file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for replicas (results do not depend on it).
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Per-edge death rate (default 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Birth-rate scale (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Start: edge count, or density for `analytic fluid`.
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Target: edge count, or density for `analytic fluid`.
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Lower absorbing edge count for `simulate escape`.
    #[arg(long)]
    pub lower: Option<u64>,
    /// Supercritical edge density.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Component fraction.
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Density margin for the paired edge-count target.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Edge count of the static graph.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Master seed; drawn from system entropy and echoed when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Censoring time for first passages (default 1e4 times the mean stationarity time).
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Also write an SVG chart to this path (`analytic rates`).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl Flags {
    pub fn to_config(&self) -> RunConfig {
        RunConfig {
            n: self.n,
            alpha: self.alpha,
            beta: self.beta,
            from: self.from,
            to: self.to,
            lower: self.lower,
            c: self.c,
            eps: self.eps,
            delta: self.delta,
            m: self.m,
            t: self.t,
            horizon: self.horizon,
            replicas: self.replicas,
            seed: self.seed,
            cap: self.cap,
            eps_min: self.eps_min,
            eps_max: self.eps_max,
            step: self.step,
            svg: self.svg.clone(),
            format: self.format,
            output: self.output.clone(),
        }
    }

    /// File configuration overlaid with the explicit flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(&self.to_config()))
    }
}

fn flags_of(command: &Command) -> &Flags {
    match command {
        Command::Analytic(c) => match c {
            AnalyticCommand::Transition(f)
            | AnalyticCommand::Stationarity(f)
            | AnalyticCommand::Hitting(f)
            | AnalyticCommand::Fluid(f)
            | AnalyticCommand::Entropy(f)
            | AnalyticCommand::Tail(f)
            | AnalyticCommand::Rates(f) => f,
        },
        Command::Simulate(c) => match c {
            SimulateCommand::Trajectory(f)
            | SimulateCommand::Hitting(f)
            | SimulateCommand::Stationarity(f)
            | SimulateCommand::Renewal(f)
            | SimulateCommand::Escape(f) => f,
        },
        Command::Components(c) => match c {
            ComponentsCommand::Emergence(f) | ComponentsCommand::Static(f) => f,
        },
    }
}

/// Output of a run: the table plus a failure to report after writing it.
pub struct Outcome {
    pub table: output::Table,
    pub failure: Option<CliError>,
}

/// Executes a parsed command and returns its table.
pub fn execute(command: &Command) -> Result<(Outcome, RunConfig), CliError> {
    let flags = flags_of(command);
    let cfg = flags.resolve()?;
    let work = || commands::dispatch(command, &cfg);
    let outcome = match flags.workers {
        Some(0) => return Err(CliError::Validation("--workers must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start {k} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok((outcome, cfg))
}

fn emit(outcome: &Outcome, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let format = cfg.format.unwrap_or_default();
    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            outcome.table.write(format, std::io::BufWriter::new(file))
        }
        None => outcome.table.write(format, stdout),
    }
}

/// Parses `args`, runs the command, writes the result and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = execute(&cli.command).and_then(|(outcome, cfg)| {
        emit(&outcome, &cfg, stdout)?;
        match outcome.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
