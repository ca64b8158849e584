//! `qvme`: sweeps, oracle comparisons, Monte Carlo runs and bound checks.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
//! 3 solver or evaluation failure.

mod commands;
mod grid;
mod report;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::grid::GridArgs;
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "qvme", version, about = "Measurement-engine thermodynamics from the ground-state energy shift")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML spin-model description.
    #[arg(long, global = true, value_name = "PATH", conflicts_with_all = ["model", "table"])]
    pub config: Option<PathBuf>,
    /// Bundled model; see `qvme models`.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "table")]
    pub model: Option<String>,
    /// Model parameter override, repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VAL", value_parser = parse_pair)]
    pub params: Vec<(String, String)>,
    /// CSV of `lambda,delta` samples to interpolate.
    #[arg(long, global = true, value_name = "PATH")]
    pub table: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seeds Monte Carlo runs and, unless given as a parameter, random couplings.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Tolerance override: compare, bound, degeneracy, lanczos, z or chi_confidence.
    #[arg(long = "tol-override", global = true, value_name = "KEY=VAL", value_parser = parse_pair)]
    pub tol_overrides: Vec<(String, String)>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every observable over a coupling grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Skip spectral sums (d2, ebar, qfi and what depends on them).
        #[arg(long)]
        ground_only: bool,
        /// Report the small-coupling limit 1/2 for the efficiency at zero coupling.
        #[arg(long)]
        eta_limit: bool,
    },
    /// Maximum deviation of a bundled model from its exact counterpart.
    Compare {
        #[command(flatten)]
        grid: GridArgs,
        /// Reference model; defaults to the one registered for --model.
        #[arg(long)]
        oracle: Option<String>,
    },
    /// Sample measurement cycles and test them against the exact distribution.
    Montecarlo {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Check the fluctuation bounds over a coupling grid.
    Verify {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// List the bundled models.
    Models,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got `{s}`"))?;
    let key = k.trim();
    if key.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    Ok((key.to_string(), v.trim().to_string()))
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and failed; the report was still written.
    Check,
    Usage(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Check => 1,
            Self::Usage(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

/// Tolerances a run may override.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative deviation allowed by `compare`; per-site absolute for limit oracles.
    pub compare: Option<f64>,
    pub bound: f64,
    pub degeneracy: f64,
    pub lanczos: f64,
    pub z: f64,
    pub chi_confidence: f64,
}

impl Tolerances {
    fn from_overrides(pairs: &[(String, String)]) -> Result<Self, Failure> {
        let eigen = qvme::eigensolve::EigenOptions::default();
        let mut t = Self {
            compare: None,
            bound: qvme::thermo::BOUND_TOL,
            degeneracy: eigen.degeneracy_tol,
            lanczos: eigen.lanczos_tol,
            z: 4.0,
            chi_confidence: 0.999,
        };
        for (key, raw) in pairs {
            let value: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v > 0.0)
                .ok_or_else(|| Failure::Usage(format!("tolerance `{key}` needs a positive number, got `{raw}`")))?;
            match key.as_str() {
                "compare" => t.compare = Some(value),
                "bound" => t.bound = value,
                "degeneracy" => t.degeneracy = value,
                "lanczos" => t.lanczos = value,
                "z" => t.z = value,
                "chi_confidence" if value < 1.0 => t.chi_confidence = value,
                "chi_confidence" => return Err(Failure::Usage("chi_confidence must lie in (0, 1)".into())),
                other => return Err(Failure::Usage(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(t)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tol = Tolerances::from_overrides(&cli.global.tol_overrides)?;
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    let (table, verdict) = match &cli.command {
        Command::Sweep { grid, ground_only, eta_limit } => {
            let points = grid.points().map_err(Failure::Usage)?;
            (commands::sweep(g, &tol, &points, *ground_only, *eta_limit)?, Ok(()))
        }
        Command::Compare { grid, oracle } => {
            let points = grid.points().map_err(Failure::Usage)?;
            commands::compare(g, &tol, &points, oracle.as_deref())?
        }
        Command::Montecarlo { lambda, samples } => commands::montecarlo(g, &tol, *lambda, *samples)?,
        Command::Verify { grid } => {
            let points = grid.points().map_err(Failure::Usage)?;
            commands::verify(g, &tol, &points)?
        }
        Command::Models => (commands::models(), Ok(())),
    };
    let mut sink: Box<dyn Write> = match &g.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    table
        .write(g.format, &mut sink)
        .and_then(|()| sink.flush())
        .map_err(|e| Failure::Usage(format!("writing report: {e}")))?;
    verdict
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check => eprintln!("qvme: check failed"),
                Failure::Usage(msg) => eprintln!("qvme: {msg}"),
                Failure::Solver(msg) => eprintln!("qvme: evaluation failed: {msg}"),
            }
            ExitCode::from(f.code())
        }
    }
}

/// Collects repeated `--param` pairs; later values win.
pub fn param_map(pairs: &[(String, String)]) -> BTreeMap<String, String> {
    pairs.iter().cloned().collect()
}
