//! `ecoplatoon` — train, evaluate and study eco-driving platoon controllers.
//!
//! Exit codes: 0 on success, 1 for invalid input (configuration, flags,
//! checkpoint/scenario mismatch), 2 for failures while running.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ecoplatoon_core::config::RewardMode;
use ecoplatoon_core::error::{ConfigError, PolicyError};

#[derive(Debug, Parser)]
#[command(name = "ecoplatoon", version, about = "Mixed-platoon eco-driving simulator and ARS trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a linear policy with Augmented Random Search.
    Train(TrainArgs),
    /// Evaluate a controller on the evaluation seed set.
    Eval(EvalArgs),
    /// Run one of the end-to-end studies.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Render a trajectory CSV as a time–space diagram.
    ExportPlots(PlotArgs),
}

#[derive(Debug, Subcommand)]
enum ExperimentKind {
    /// Episodic-delayed vs distributed reward ablation.
    ErVsDr(AblationArgs),
    /// Sweep over the (omega1, omega2) weighting.
    WeightSweep(WeightArgs),
    /// Platoon-size study against the IDM and GLOSA baselines.
    SizeSweep(SizeArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario TOML; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for every artifact of the run.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel rollouts (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Episodic,
    Distributed,
}

impl From<ModeArg> for RewardMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Episodic => RewardMode::EpisodicDelayed,
            ModeArg::Distributed => RewardMode::Distributed,
        }
    }
}

/// Flag overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub omega1: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    /// Number of human-driven vehicles behind the ego vehicle.
    #[arg(long)]
    pub platoon_size: Option<usize>,
    #[arg(long, value_enum)]
    pub reward_mode: Option<ModeArg>,
    /// Evaluation episodes.
    #[arg(long)]
    pub episodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Training seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerArg {
    Idm,
    Glosa,
    Policy,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
    /// First evaluation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "policy")]
    pub controller: ControllerArg,
    /// Policy checkpoint (required with `--controller policy`).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Write one trajectory CSV per episode under `trajectories/`.
    #[arg(long)]
    pub export_trajectories: bool,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Base training seed; agent i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 5)]
    pub agents: usize,
    #[arg(long, default_value_t = 5)]
    pub episodes_per_agent: usize,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated omega1/omega2 ratios, e.g. `1/6,1/1,6/1`.
    #[arg(long, value_delimiter = ',', value_parser = parse_ratio)]
    pub ratios: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated platoon sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 8])]
    pub sizes: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trajectory CSV written by `eval --export-trajectories`.
    #[arg(long)]
    pub trajectories: PathBuf,
    #[arg(long, default_value = "Time-space diagram")]
    pub title: String,
}

fn parse_ratio(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once('/')
        .ok_or_else(|| format!("expected OMEGA1/OMEGA2, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Input the user can fix (bad flag combination and the like).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn is_validation(err: &anyhow::Error) -> bool {
    use ecoplatoon_core::Error as E;
    err.chain().any(|e| {
        e.is::<ConfigError>()
            || e.is::<UsageError>()
            || matches!(e.downcast_ref::<PolicyError>(), Some(PolicyError::DimensionMismatch { .. }))
            || matches!(
                e.downcast_ref::<E>(),
                Some(E::Config(_)) | Some(E::Policy(PolicyError::DimensionMismatch { .. }))
            )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Experiment { kind } => match kind {
            ExperimentKind::ErVsDr(a) => commands::er_vs_dr(&a),
            ExperimentKind::WeightSweep(a) => commands::weight_sweep(&a),
            ExperimentKind::SizeSweep(a) => commands::size_sweep(&a),
        },
        Command::ExportPlots(a) => commands::export_plots(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_validation(&err) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
