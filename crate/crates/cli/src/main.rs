//! `negcurv`: command-line driver for the prescribed negative curvature
//! experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::{Config, ConfigError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] negcurv::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("NEGCURV_THREADS: {0}")]
    Threads(String),
}

impl CliError {
    /// 2 for failures of the numerics on valid input, 1 for everything else.
    fn exit_code(&self) -> u8 {
        use negcurv::Error as E;
        match self {
            CliError::Numeric(
                E::CflViolation { .. }
                | E::ShiftTooLarge { .. }
                | E::SignatureLost { .. }
                | E::StepTooLarge { .. }
                | E::NonFinite { .. }
                | E::OutsideDomainOfDependence { .. },
            ) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "negcurv", version, about = "Prescribed negative Gauss curvature experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// INI-style configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "negcurv-out", global = true)]
    out: PathBuf,
    /// Seed for randomized probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature of a catalog surface on a cube grid.
    Curvature(SurfaceArgs),
    /// Taylor and identity defects of the linearized operator.
    LinearizeCheck(SurfaceArgs),
    /// Linearized Cauchy problem on the hyperbolic paraboloid.
    SolveLinear {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Newton iteration for a perturbed paraboloid.
    SolveNonlinear {
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Double-null instability experiment.
    Instability {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        extent: Option<f64>,
    },
    /// Kernel-orthogonality test for a compactly supported source.
    Localization {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        source: Option<String>,
    },
    /// Refinement study of a registered check.
    Convergence {
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        levels: Option<String>,
    },
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Cells per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// `analytic` or `finite-difference`.
    #[arg(long)]
    mode: Option<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curvature(_) => "curvature",
            Command::LinearizeCheck(_) => "linearize-check",
            Command::SolveLinear { .. } => "solve-linear",
            Command::SolveNonlinear { .. } => "solve-nonlinear",
            Command::Instability { .. } => "instability",
            Command::Localization { .. } => "localization",
            Command::Convergence { .. } => "convergence",
        }
    }

    /// Copies shorthand flags into the configuration.
    fn apply(&self, c: &mut Config) {
        fn put<V: ToString>(c: &mut Config, key: &str, v: &Option<V>) {
            if let Some(v) = v {
                c.set(key, v.to_string());
            }
        }
        match self {
            Command::Curvature(s) | Command::LinearizeCheck(s) => {
                put(c, "surface.kind", &s.surface);
                put(c, "surface.dim", &s.n);
                put(c, "grid.cells", &s.grid);
                put(c, "surface.mode", &s.mode);
            }
            Command::SolveLinear { n, cells, source } => {
                put(c, "linear.dim", n);
                put(c, "linear.cells", cells);
                put(c, "linear.source", source);
            }
            Command::SolveNonlinear { cells, amplitude } => {
                put(c, "nonlinear.cells", cells);
                put(c, "nonlinear.amplitude", amplitude);
            }
            Command::Instability { delta, extent } => {
                put(c, "instability.delta", delta);
                put(c, "instability.extent", extent);
                put(c, "instability.extent_bar", extent);
            }
            Command::Localization { n, cells, source } => {
                put(c, "localization.dim", n);
                put(c, "localization.cells", cells);
                put(c, "localization.source", source);
            }
            Command::Convergence { check, levels } => {
                put(c, "convergence.check", check);
                put(c, "convergence.levels", levels);
            }
        }
    }
}

/// Defaults, then the file, then shorthand flags, then `--set` in order.
fn build_config(cli: &Cli) -> Result<Config, CliError> {
    let mut c = Config::default();
    if let Some(path) = &cli.common.config {
        c.load_file(path)?;
    }
    if let Some(seed) = cli.common.seed {
        c.set("run.seed", seed);
    }
    cli.command.apply(&mut c);
    for (i, s) in cli.common.set.iter().enumerate() {
        c.apply_override(s, i + 1)?;
    }
    Ok(c)
}

fn thread_pool() -> Result<usize, CliError> {
    match std::env::var("NEGCURV_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Threads(format!("expected a positive integer, got {v:?}")))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Threads(e.to_string()))?;
            Ok(n)
        }
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let threads = thread_pool()?;
    let cfg = build_config(&cli)?;
    let start = Instant::now();
    let result = match &cli.command {
        Command::Curvature(_) => commands::curvature(&cfg),
        Command::LinearizeCheck(_) => commands::linearize_check(&cfg),
        Command::SolveLinear { .. } => commands::solve_linear(&cfg),
        Command::SolveNonlinear { .. } => commands::solve_nonlinear(&cfg),
        Command::Instability { .. } => commands::instability(&cfg),
        Command::Localization { .. } => commands::localization(&cfg),
        Command::Convergence { .. } => commands::convergence(&cfg),
    }?;
    let ctx = output::Context {
        command: cli.command.name(),
        config: serde_json::to_value(cfg.echo())?,
        threads,
        seconds: start.elapsed().as_secs_f64(),
    };
    let manifest = output::finish(&cli.common.out, &result, &ctx)?;
    match &result.failure {
        None => {
            println!("{}: ok, manifest {}", ctx.command, manifest.display());
            Ok(0)
        }
        Some(reason) => {
            eprintln!("{}: {reason}; artifacts in {}", ctx.command, cli.common.out.display());
            Ok(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
