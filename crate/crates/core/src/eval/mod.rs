//! Baseline controllers, trajectory metrics, plots and the experiment drivers.

pub mod controller;
pub mod experiments;
pub mod metrics;
pub mod plot;

pub use controller::{eval_seeds, glosa_advice, run_controller, run_episode, Controller, ControllerRun, EpisodeRun};
pub use experiments::{
    ablation_er_vs_dr, ratio_label, rows_to_csv, sweep_platoon_size, sweep_weights, train_agent, Ablation,
    AblationRow, SizeRow, SizeSweep, SizeTrajectory, WeightRow, WeightSweep, DEFAULT_RATIOS, DEFAULT_SIZES,
};
pub use metrics::{
    count_stops, episode_metrics, read_csv, write_csv, EpisodeMetrics, MetricParams, Metrics, TrajectoryLogger,
    TrajectoryRow,
};
pub use plot::{time_space_svg, write_bands_csv};
