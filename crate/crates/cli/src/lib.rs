//! Command-line driver for `halfwalk`.
//!
//! [`run`] takes the full argument vector and returns the process exit code:
//! 0 on success, 2 for a bad config, 3 when the simulation produced a
//! non-finite amplitude and 4 when `--strict` is set and a result came out
//! inconclusive. Other failures (I/O) exit with 1.

pub mod config;
mod commands;
pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};

pub use config::Settings;
pub use error::CliError;
pub use manifest::RunManifest;

use manifest::{timestamp, OutputSet};

#[derive(Debug, Parser)]
#[command(name = "halfwalk", version, about = "Quantum walk on the half line with 2-periodic hopping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the walk and write the amplitude history.
    Simulate(SimulateArgs),
    /// Write the long-time limit amplitude and measure.
    Limit(LimitArgs),
    /// Compare numerical Laplace transforms against the closed form.
    Oracle(OracleArgs),
    /// Classify a grid of coupling pairs by simulation.
    Sweep(SweepArgs),
    /// Write the invariant state and its eigen-equation residuals.
    Invariant(InvariantArgs),
    /// Track P(X_t = 0) against its limit at a list of times.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Flat TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "halfwalk-out")]
    out: PathBuf,
    /// Exit with 4 when a result is inconclusive.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct CouplingFlags {
    #[arg(long, allow_hyphen_values = true)]
    gamma0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<f64>,
}

#[derive(Debug, Args)]
struct WalkFlags {
    #[arg(long)]
    n_sites: Option<usize>,
    /// `half_line` or `finite_line`.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// `reference` or `euler`.
    #[arg(long)]
    integrator: Option<String>,
    /// Record every k-th step.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    couplings: CouplingFlags,
    #[command(flatten)]
    walk: WalkFlags,
    /// Highest site written to the trajectory CSV.
    #[arg(long)]
    max_site: Option<usize>,
    /// `delta` or `invariant`.
    #[arg(long)]
    initial: Option<String>,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    couplings: CouplingFlags,
    /// Number of sites written.
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    couplings: CouplingFlags,
    #[command(flatten)]
    walk: WalkFlags,
    /// Comma-separated positive Laplace variables.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    /// Comma-separated sites.
    #[arg(long, value_delimiter = ',')]
    sites: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    walk: WalkFlags,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delocalized_below: Option<f64>,
    /// Highest site written for archived trajectories.
    #[arg(long)]
    max_site: Option<usize>,
}

#[derive(Debug, Args)]
struct InvariantArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    couplings: CouplingFlags,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    phi0_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi0_im: Option<f64>,
    /// Scale to unit norm (localized regime only).
    #[arg(long)]
    normalized: bool,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    run: RunFlags,
    #[command(flatten)]
    couplings: CouplingFlags,
    #[arg(long)]
    n_sites: Option<usize>,
    /// Comma-separated increasing times.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
}

impl CouplingFlags {
    fn fill(&self, s: &mut Settings) {
        s.gamma0 = self.gamma0;
        s.gamma1 = self.gamma1;
    }
}

impl WalkFlags {
    fn fill(&self, s: &mut Settings) {
        s.n_sites = self.n_sites;
        s.topology = self.topology.clone();
        s.dt = self.dt;
        s.t_max = self.t_max;
        s.integrator = self.integrator.clone();
        s.stride = self.stride;
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Limit(_) => "limit",
            Command::Oracle(_) => "oracle",
            Command::Sweep(_) => "sweep",
            Command::Invariant(_) => "invariant",
            Command::Convergence(_) => "convergence",
        }
    }

    fn run_flags(&self) -> &RunFlags {
        match self {
            Command::Simulate(a) => &a.run,
            Command::Limit(a) => &a.run,
            Command::Oracle(a) => &a.run,
            Command::Sweep(a) => &a.run,
            Command::Invariant(a) => &a.run,
            Command::Convergence(a) => &a.run,
        }
    }

    /// The values given on the command line, as a sparse [`Settings`].
    fn flag_settings(&self) -> Settings {
        let mut s = Settings {
            workers: self.run_flags().workers,
            ..Settings::default()
        };
        match self {
            Command::Simulate(a) => {
                a.couplings.fill(&mut s);
                a.walk.fill(&mut s);
                s.max_site = a.max_site;
                s.initial = a.initial.clone();
            }
            Command::Limit(a) => {
                a.couplings.fill(&mut s);
                s.cutoff = a.cutoff;
            }
            Command::Oracle(a) => {
                a.couplings.fill(&mut s);
                a.walk.fill(&mut s);
                s.s = a.s.clone();
                s.sites = a.sites.clone();
            }
            Command::Sweep(a) => {
                a.walk.fill(&mut s);
                s.grid_points = a.grid_points;
                s.grid_min = a.grid_min;
                s.grid_max = a.grid_max;
                s.epsilon = a.epsilon;
                s.delocalized_below = a.delocalized_below;
                s.max_site = a.max_site;
            }
            Command::Invariant(a) => {
                a.couplings.fill(&mut s);
                s.n_sites = a.n_sites;
                s.phi0_re = a.phi0_re;
                s.phi0_im = a.phi0_im;
                s.normalized = a.normalized.then_some(true);
            }
            Command::Convergence(a) => {
                a.couplings.fill(&mut s);
                s.n_sites = a.n_sites;
                s.checkpoints = a.checkpoints.clone();
            }
        }
        s
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli.command, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("halfwalk: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, argv: Vec<String>) -> Result<(), CliError> {
    let started = Utc::now();
    let flags = command.run_flags();
    let file = match &flags.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let mut ctx = commands::Context::new(file.overlay(&command.flag_settings()), flags.strict);
    let mut out = OutputSet::new(&flags.out)?;

    let result = match command {
        Command::Simulate(_) => commands::simulate(&mut ctx, &mut out),
        Command::Limit(_) => commands::limit(&mut ctx, &mut out),
        Command::Oracle(_) => commands::oracle(&mut ctx, &mut out),
        Command::Sweep(_) => commands::sweep(&mut ctx, &mut out),
        Command::Invariant(_) => commands::invariant(&mut ctx, &mut out),
        Command::Convergence(_) => commands::convergence(&mut ctx, &mut out),
    };
    if let Err(CliError::Config { .. }) = result {
        return result;
    }

    let dir = out.dir().to_path_buf();
    let manifest = RunManifest {
        command: command.name().to_string(),
        argv,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_at: timestamp(started),
        finished_at: timestamp(Utc::now()),
        exit_code: result.as_ref().err().map_or(0, CliError::exit_code),
        config: ctx.resolved_json(),
        outputs: out.into_files(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, json + "\n").map_err(|e| manifest::io_err(&path, e))?;
    result
}
