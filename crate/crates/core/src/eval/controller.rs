use rayon::prelude::*;

use super::metrics::{
    episode_metrics, EpisodeMetrics, MetricParams, Metrics, TrajectoryLogger, TrajectoryRow,
};
use crate::ars::LinearPolicy;
use crate::config::ScenarioConfig;
use crate::env::{EpisodeRecord, PlatoonEnv};
use crate::error::{Error, PolicyError};
use crate::traffic::SignalState;

/// Who drives the ego vehicle.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Policy(LinearPolicy),
    /// The ego follows the IDM like every other vehicle.
    Idm,
    /// Green-light speed advisory, blind to followers.
    Glosa,
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Policy(_) => "ars",
            Controller::Idm => "idm",
            Controller::Glosa => "glosa",
        }
    }
}

/// Target speed that lets a vehicle `d` metres from the line arrive on green.
///
/// Keep the speed limit when the current green can be made at the current
/// speed; otherwise spread the distance over the wait for the next green
/// onset, bounded below by a crawl speed.
pub fn glosa_advice(
    d: f64,
    v: f64,
    signal: &SignalState,
    until_next_green: f64,
    speed_limit: f64,
    crawl: f64,
) -> f64 {
    if signal.approach_proceed && v > 0.0 && d / v <= signal.remaining {
        return speed_limit;
    }
    (d / until_next_green).clamp(crawl, speed_limit)
}

/// Output of one evaluation episode.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub seed: u64,
    pub record: EpisodeRecord,
    pub rows: Vec<TrajectoryRow>,
    pub metrics: EpisodeMetrics,
}

fn controller_action(controller: &Controller, env: &PlatoonEnv, obs: &[f64]) -> Result<f64, Error> {
    let cfg = env.config();
    let world = env.world().expect("reset before acting");
    let (lo, hi) = world.accel_bounds();
    match controller {
        Controller::Policy(p) => Ok(p.act(obs, (lo, hi))?),
        Controller::Idm => Ok(env.ego_idm_bound().unwrap_or(0.0)),
        Controller::Glosa => {
            let d = obs[0];
            let v = obs[1];
            if d <= 0.0 {
                return Ok(env.ego_idm_bound().unwrap_or(0.0));
            }
            let t = world.time();
            let target = glosa_advice(
                d,
                v,
                &world.signal_state(),
                world.signal().time_until_next_green_start(t),
                cfg.world.speed_limit_mps,
                cfg.eval.glosa_crawl_mps,
            );
            Ok(((target - v) / world.dt()).clamp(lo, hi))
        }
    }
}

/// Runs one episode with `controller` on the ego and logs its trajectory.
pub fn run_episode(cfg: &ScenarioConfig, controller: &Controller, seed: u64) -> Result<EpisodeRun, Error> {
    let mut env = PlatoonEnv::new(cfg.clone())?;
    if let Controller::Policy(p) = controller {
        if p.dim() != env.obs_dim() {
            return Err(PolicyError::DimensionMismatch {
                expected: p.dim(),
                found: env.obs_dim(),
            }
            .into());
        }
    }
    let mut obs = env.reset(seed)?;
    let mut logger = TrajectoryLogger::new();
    logger.record(env.world().expect("just reset"));
    loop {
        let action = controller_action(controller, &env, &obs)?;
        let (_, done) = env.advance(action)?;
        logger.record(env.world().expect("just reset"));
        if done {
            break;
        }
        env.observe_into(&mut obs);
    }
    let rows = logger.into_rows();
    let metrics = episode_metrics(&rows, &MetricParams::from_config(cfg))?;
    Ok(EpisodeRun {
        seed,
        record: env.into_record().expect("episode ran"),
        rows,
        metrics,
    })
}

#[derive(Debug, Clone)]
pub struct ControllerRun {
    pub metrics: Metrics,
    pub episodes: Vec<EpisodeRun>,
}

/// Evaluates `controller` on every seed (in parallel, results in seed order).
pub fn run_controller(
    cfg: &ScenarioConfig,
    controller: &Controller,
    seeds: &[u64],
) -> Result<ControllerRun, Error> {
    let episodes: Vec<EpisodeRun> = seeds
        .par_iter()
        .map(|&s| run_episode(cfg, controller, s))
        .collect::<Result<_, _>>()?;
    let per: Vec<EpisodeMetrics> = episodes.iter().map(|e| e.metrics.clone()).collect();
    Ok(ControllerRun {
        metrics: Metrics::aggregate(&per),
        episodes,
    })
}

/// The evaluation seed set of a scenario: `count` consecutive seeds from
/// `eval.seed`. Every controller compared in one experiment uses the same set.
pub fn eval_seeds(cfg: &ScenarioConfig, offset: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| cfg.eval.seed + offset + i).collect()
}
