//! `attnflow`: runs the particle-flow experiments and writes CSV tables plus a
//! JSON manifest that replays the run.
//!
//! Exit codes: 0 on success, 1 for bad input or I/O failures, 2 when the
//! numerics fail (overflow, degenerate projection, negative density).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod manifest;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use attnflow::{Normalization, Sign};
use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentConfig};
use manifest::Manifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Lib(#[from] attnflow::Error),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 2,
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "attnflow", version, about = "Attention particle dynamics on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Replay a manifest (or a plain config) written by an earlier run.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base seed; drawn at random and recorded in the manifest when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel build.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for the CSV tables and manifest.json (stdout/stderr otherwise).
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Euler flow from uniform random particles; energy and residual per step.
    Simulate {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Count one- and two-cluster outcomes for D = diag(1, lambda2).
    SweepClusters {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        radius_tol: Option<f64>,
    },
    /// Minimizing flow from four symmetric peaks for D = diag(1, lambda2).
    FourPeak {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Mirror-descent minimizer on the circle for D = Id + eps M.
    Density {
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        /// Diagonal of M.
        #[arg(long, allow_hyphen_values = true, value_name = "A,B")]
        diag: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Repeated flows with cluster detection, compared to the closed-form extremum.
    MaximizeNd {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        radius_tol: Option<f64>,
        #[arg(long)]
        max_k: Option<usize>,
    },
    /// Energies of a single cluster and antipodal pairs for D = diag(-1, lambda2).
    IndefiniteEnergy {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Stationarity residuals of the known candidate measures.
    CheckStationary {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Quadrature constants of the perturbation expansion, as JSON.
    Constants {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Diagonal of D, e.g. 1,3,4.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "matrix", value_name = "LIST")]
    diag: Option<String>,
    /// Full symmetric D with rows separated by ';', e.g. "1,0.5;0.5,2".
    #[arg(long, allow_hyphen_values = true, value_name = "ROWS")]
    matrix: Option<String>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// start:stop:step (inclusive), a comma list, or one value.
    #[arg(long, allow_hyphen_values = true, value_name = "RANGE")]
    lambda2: Option<String>,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// maximize or minimize.
    #[arg(long, value_parser = parse_sign)]
    sign: Option<Sign>,
    /// constant or partition.
    #[arg(long, value_parser = parse_normalization)]
    normalization: Option<Normalization>,
    #[arg(long)]
    n_particles: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown sign {s:?}"))
}

fn parse_normalization(s: &str) -> Result<Normalization, String> {
    serde_json::from_value(serde_json::Value::String(s.into())).map_err(|_| format!("unknown normalization {s:?}"))
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl MatrixArgs {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(d) = self.diag {
            cfg.set_matrix(config::diag_rows(&config::list(&d)?));
        }
        if let Some(m) = self.matrix {
            cfg.set_matrix(config::rows(&m)?);
        }
        Ok(())
    }
}

impl FlowArgs {
    fn apply(self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.tau, self.tau);
        set(&mut cfg.steps, self.steps);
        set(&mut cfg.sign, self.sign);
        set(&mut cfg.normalization, self.normalization);
        set(&mut cfg.n_particles, self.n_particles);
        set(&mut cfg.record_every, self.record_every);
    }
}

impl GridArgs {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(r) = self.lambda2 {
            cfg.lambda2 = config::range(&r)?;
        }
        Ok(())
    }
}

fn build_config(command: Command) -> Result<ExperimentConfig, CliError> {
    let cfg = match command {
        Command::Simulate { matrix, flow } => {
            let mut c = ExperimentConfig::defaults(Experiment::Simulate);
            matrix.apply(&mut c)?;
            flow.apply(&mut c);
            c
        }
        Command::SweepClusters {
            grid,
            flow,
            trials,
            radius_tol,
        } => {
            let mut c = ExperimentConfig::defaults(Experiment::SweepClusters);
            grid.apply(&mut c)?;
            flow.apply(&mut c);
            set(&mut c.trials, trials);
            set(&mut c.radius_tol, radius_tol);
            c
        }
        Command::FourPeak { grid, flow } => {
            let mut c = ExperimentConfig::defaults(Experiment::FourPeak);
            grid.apply(&mut c)?;
            if flow.sign == Some(Sign::Maximize) {
                return Err(CliError::Config("four-peak always minimizes".into()));
            }
            flow.apply(&mut c);
            c
        }
        Command::Density {
            eps,
            diag,
            grid,
            tau,
            iters,
        } => {
            let mut c = ExperimentConfig::defaults(Experiment::Density);
            set(&mut c.eps, eps);
            if let Some(d) = diag {
                c.set_matrix(config::diag_rows(&config::list(&d)?));
            }
            set(&mut c.grid, grid);
            set(&mut c.tau, tau);
            set(&mut c.iters, iters);
            c
        }
        Command::MaximizeNd {
            matrix,
            flow,
            trials,
            radius_tol,
            max_k,
        } => {
            let mut c = ExperimentConfig::defaults(Experiment::MaximizeNd);
            matrix.apply(&mut c)?;
            flow.apply(&mut c);
            set(&mut c.trials, trials);
            set(&mut c.radius_tol, radius_tol);
            set(&mut c.max_k, max_k);
            c
        }
        Command::IndefiniteEnergy { grid } => {
            let mut c = ExperimentConfig::defaults(Experiment::IndefiniteEnergy);
            grid.apply(&mut c)?;
            c
        }
        Command::CheckStationary { matrix, resolution } => {
            let mut c = ExperimentConfig::defaults(Experiment::CheckStationary);
            matrix.apply(&mut c)?;
            set(&mut c.resolution, resolution);
            c
        }
        Command::Constants { dim, resolution } => {
            let mut c = ExperimentConfig::defaults(Experiment::Constants);
            c.matrix = Vec::new();
            set(&mut c.dim, dim);
            set(&mut c.resolution, resolution);
            c
        }
    };
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    eprintln!("note: built without the parallel feature; --threads {n} has no effect");
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match (cli.command, &cli.config) {
        (Some(_), Some(_)) => return Err(CliError::Config("--config replays a run; drop the subcommand".into())),
        (None, None) => {
            return Err(CliError::Config(
                "a subcommand or --config is required (see --help)".into(),
            ))
        }
        (Some(cmd), None) => build_config(cmd)?,
        (None, Some(path)) => manifest::load(path)?,
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(dir) = &cli.output {
        cfg.output = Some(dir.display().to_string());
    }
    init_threads(cfg.threads)?;
    let seed = cfg.seed.unwrap_or_else(rand::random::<u64>);

    let start = Instant::now();
    let report = run::run(&cfg, seed)?;
    let manifest = Manifest::new(cfg.clone(), seed, start.elapsed().as_secs_f64());
    let manifest_json = manifest.to_json();

    match &cfg.output {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            for a in &report.artifacts {
                let path = dir.join(&a.name);
                std::fs::write(&path, &a.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            let path = dir.join(manifest::FILE_NAME);
            std::fs::write(&path, &manifest_json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            for n in &report.notes {
                eprintln!("{n}");
            }
        }
        None => {
            print!("{}", report.artifacts[0].contents);
            for n in &report.notes {
                eprintln!("{n}");
            }
            eprint!("{manifest_json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
