// Negated float comparisons like `!(t > 0.0)` are deliberate: NaN
// flag values must fail validation, which `t <= 0.0` would not catch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `dynwalk`: reproducible experiment runner for dynamical walks on Z^2.
//!
//! Exit codes: 0 success, 1 runtime failure (e.g. an undefined ratio),
//! 2 configuration error (including flag parse failures).

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunError;
use config::{resolve, validate, Config};

#[derive(Parser)]
#[command(
    name = "dynwalk",
    version,
    about = "Dynamical simple random walks on Z^2: exceptional-time scans and estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct CommonArgs {
    /// Schedule: "paper M" | "desk M RHO LAMBDA" | "quad M C LAMBDA" |
    /// "explicit s0,s1,... r1,... R1,..."
    #[arg(long)]
    schedule: Option<String>,
    /// Truncate the schedule to this many levels.
    #[arg(long = "M")]
    m: Option<usize>,
    /// Walk length (or ball radius for hitting-prob); defaults to s_M.
    #[arg(long = "N")]
    n: Option<u64>,
    /// Time horizon of sampled realizations.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Master seed; generated and recorded when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo samples (or realizations for second-moment).
    #[arg(long)]
    samples: Option<u64>,
    /// Time gap(s), comma separated.
    #[arg(long)]
    t: Option<String>,
    /// Barrier exponent correction.
    #[arg(long)]
    eps: Option<f64>,
    /// Pure-power barrier exponent (escape-rate; overrides eps).
    #[arg(long)]
    alpha: Option<f64>,
    /// Schedule level for windowed estimators.
    #[arg(long)]
    k: Option<usize>,
    /// Start point(s): "x,y" or "x1,y1;x2,y2;...".
    #[arg(long)]
    x: Option<String>,
    /// Second start point for joint estimates.
    #[arg(long)]
    y: Option<String>,
    /// Dyadic box-counting depths, comma separated.
    #[arg(long)]
    depths: Option<String>,
    /// Escape-rate grid spacing.
    #[arg(long)]
    grid: Option<f64>,
    /// Worker threads for sample-parallel estimators.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Config file (TOML, same keys); flags override it.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Exact event-driven scan of the good-time set over [0, t-max].
    ScanExc {
        #[command(flatten)]
        common: CommonArgs,
        /// Also dump the realization to this binary container file.
        #[arg(long = "dump-realization")]
        dump_realization: Option<String>,
    },
    /// Return probability over the level-k window from start x.
    EstimateReturn {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Coupled two-time joint return probability.
    EstimateJoint {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Probability of the level-M good event at a fixed time.
    EstimateEm {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Two-time ratio P(E(0) and E(t)) / P(E(0))^2 over a t list.
    EstimateRatio {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Level-by-level conditional table and fitted constant.
    CheckSummary {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Exact hitting probability, Monte Carlo check, and bound fit.
    HittingProb {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Good-time measures over many realizations and the second-moment
    /// lower bound.
    SecondMoment {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Barrier survival over a time grid.
    EscapeRate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Box-counting dimension of a scanned good-time set.
    Dimension {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ScanExc { .. } => "scan-exc",
            Command::EstimateReturn { .. } => "estimate-return",
            Command::EstimateJoint { .. } => "estimate-joint",
            Command::EstimateEm { .. } => "estimate-em",
            Command::EstimateRatio { .. } => "estimate-ratio",
            Command::CheckSummary { .. } => "check-summary",
            Command::HittingProb { .. } => "hitting-prob",
            Command::SecondMoment { .. } => "second-moment",
            Command::EscapeRate { .. } => "escape-rate",
            Command::Dimension { .. } => "dimension",
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::ScanExc { common, .. }
            | Command::EstimateReturn { common }
            | Command::EstimateJoint { common }
            | Command::EstimateEm { common }
            | Command::EstimateRatio { common }
            | Command::CheckSummary { common }
            | Command::HittingProb { common }
            | Command::SecondMoment { common }
            | Command::EscapeRate { common }
            | Command::Dimension { common } => common,
        }
    }
}

fn to_config(a: &CommonArgs) -> Config {
    Config {
        schedule: a.schedule.clone(),
        m: a.m,
        n: a.n,
        t_max: a.t_max,
        seed: a.seed,
        samples: a.samples,
        t: a.t.clone(),
        eps: a.eps,
        alpha: a.alpha,
        k: a.k,
        x: a.x.clone(),
        y: a.y.clone(),
        depths: a.depths.clone(),
        grid: a.grid,
        workers: a.workers,
        out: a.out.clone(),
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let common = cli.command.common();
    let mut cfg = to_config(common);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("config file {path}: {e}")))?;
        let file_cfg: Config =
            toml::from_str(&text).map_err(|e| RunError::Config(format!("config file: {e}")))?;
        cfg = cfg.or(file_cfg);
    }
    let resolved = resolve(&cfg).map_err(RunError::Config)?;
    let issues = validate(cli.command.name(), &resolved);
    if !issues.is_empty() {
        return Err(RunError::Config(issues.join("; ")));
    }
    if let Some(workers) = resolved.workers {
        // Ignore the error when a pool already exists (tests call run
        // repeatedly in one process).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    match &cli.command {
        Command::ScanExc {
            dump_realization, ..
        } => commands::scan_exc(&resolved, dump_realization.as_deref()),
        Command::EstimateReturn { .. } => commands::estimate_return(&resolved),
        Command::EstimateJoint { .. } => commands::estimate_joint(&resolved),
        Command::EstimateEm { .. } => commands::estimate_em(&resolved),
        Command::EstimateRatio { .. } => commands::estimate_ratio_cmd(&resolved),
        Command::CheckSummary { .. } => commands::check_summary_cmd(&resolved),
        Command::HittingProb { .. } => commands::hitting_prob(&resolved),
        Command::SecondMoment { .. } => commands::second_moment(&resolved),
        Command::EscapeRate { .. } => commands::escape_rate(&resolved),
        Command::Dimension { .. } => commands::dimension(&resolved),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
