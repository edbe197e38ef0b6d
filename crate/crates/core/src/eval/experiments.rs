//! End-to-end study drivers: reward-setting ablation, weighting sweep and
//! platoon-size sweep. Every comparison within a study evaluates all
//! controllers on the same environment seeds.

use serde::Serialize;

use super::controller::{eval_seeds, run_controller, Controller, EpisodeRun};
use super::metrics::Metrics;
use crate::ars::{train, IterationReport, LinearPolicy, PlatoonRollout};
use crate::config::{RewardMode, ScenarioConfig};
use crate::error::Error;

/// (ω1, ω2) pairs in the order 1/1, 1/2 … 1/6, 2/1 … 6/1.
pub const DEFAULT_RATIOS: [(f64, f64); 11] = [
    (1.0, 1.0),
    (1.0, 2.0),
    (1.0, 3.0),
    (1.0, 4.0),
    (1.0, 5.0),
    (1.0, 6.0),
    (2.0, 1.0),
    (3.0, 1.0),
    (4.0, 1.0),
    (5.0, 1.0),
    (6.0, 1.0),
];

pub const DEFAULT_SIZES: [usize; 4] = [1, 3, 5, 8];

pub fn ratio_label(omega1: f64, omega2: f64) -> String {
    format!("{omega1}/{omega2}")
}

/// Trains one agent on `cfg` with training seed `seed`.
pub fn train_agent(cfg: &ScenarioConfig, seed: u64) -> Result<(LinearPolicy, Vec<IterationReport>), Error> {
    let mut cfg = cfg.clone();
    cfg.ars.seed = seed;
    let env = PlatoonRollout::new(cfg.clone())?;
    Ok(train(&cfg.ars, &env, env.action_bounds(), |_, _| {})?)
}

fn improvement_pct(baseline: f64, value: f64) -> f64 {
    (baseline - value) / baseline.abs() * 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub setting: String,
    pub episodes: usize,
    pub delay_per_vehicle: f64,
    pub total_energy: f64,
    pub total_energy_var: f64,
    pub delay_var: f64,
    pub stop_free_fraction: f64,
}

impl AblationRow {
    fn new(setting: &str, m: &Metrics) -> Self {
        Self {
            setting: setting.into(),
            episodes: m.episodes,
            delay_per_vehicle: m.delay_per_vehicle,
            total_energy: m.total_energy,
            total_energy_var: m.total_energy_var,
            delay_var: m.delay_var,
            stop_free_fraction: m.stop_free_fraction,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ablation {
    pub episodic: Metrics,
    pub distributed: Metrics,
    pub idm: Metrics,
}

impl Ablation {
    pub fn rows(&self) -> Vec<AblationRow> {
        vec![
            AblationRow::new("ars_episodic", &self.episodic),
            AblationRow::new("ars_distributed", &self.distributed),
            AblationRow::new("idm", &self.idm),
        ]
    }
}

/// Trains `agents` agents per reward setting (agent `i` uses training seed
/// `ars.seed + i` in both settings) and evaluates each on its own block of
/// `episodes_per_agent` seeds, shared across settings and the IDM baseline.
pub fn ablation_er_vs_dr(
    cfg: &ScenarioConfig,
    agents: usize,
    episodes_per_agent: usize,
    log: &mut dyn FnMut(String),
) -> Result<Ablation, Error> {
    let mut per_mode = Vec::new();
    let mut all_seeds = Vec::new();
    for i in 0..agents {
        all_seeds.extend(eval_seeds(cfg, (i * episodes_per_agent) as u64, episodes_per_agent));
    }
    for mode in [RewardMode::EpisodicDelayed, RewardMode::Distributed] {
        let mut mode_cfg = cfg.clone();
        mode_cfg.reward.mode = mode;
        let mut episodes = Vec::new();
        for i in 0..agents {
            log(format!("training {mode:?} agent {}/{agents}", i + 1));
            let (policy, _) = train_agent(&mode_cfg, cfg.ars.seed + i as u64)?;
            let seeds = &all_seeds[i * episodes_per_agent..(i + 1) * episodes_per_agent];
            let run = run_controller(&mode_cfg, &Controller::Policy(policy), seeds)?;
            episodes.extend(run.episodes.into_iter().map(|e| e.metrics));
        }
        per_mode.push(Metrics::aggregate(&episodes));
    }
    let idm = run_controller(cfg, &Controller::Idm, &all_seeds)?.metrics;
    let distributed = per_mode.pop().expect("two modes");
    let episodic = per_mode.pop().expect("two modes");
    Ok(Ablation {
        episodic,
        distributed,
        idm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightRow {
    pub ratio: String,
    pub omega1: f64,
    pub omega2: f64,
    pub delay_per_vehicle: f64,
    pub energy_per_vehicle: f64,
    pub delay_improvement_pct: f64,
    pub energy_improvement_pct: f64,
    pub stop_free_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct WeightSweep {
    pub idm: Metrics,
    pub rows: Vec<WeightRow>,
}

/// One agent per (ω1, ω2), all trained with `ars.seed`, compared with the
/// IDM baseline on `eval.episodes` shared seeds.
pub fn sweep_weights(
    cfg: &ScenarioConfig,
    ratios: &[(f64, f64)],
    log: &mut dyn FnMut(String),
) -> Result<WeightSweep, Error> {
    let seeds = eval_seeds(cfg, 0, cfg.eval.episodes);
    let idm = run_controller(cfg, &Controller::Idm, &seeds)?.metrics;
    let mut rows = Vec::new();
    for &(omega1, omega2) in ratios {
        log(format!("training ratio {}", ratio_label(omega1, omega2)));
        let mut c = cfg.clone();
        c.reward.omega1 = omega1;
        c.reward.omega2 = omega2;
        let (policy, _) = train_agent(&c, cfg.ars.seed)?;
        let m = run_controller(&c, &Controller::Policy(policy), &seeds)?.metrics;
        rows.push(WeightRow {
            ratio: ratio_label(omega1, omega2),
            omega1,
            omega2,
            delay_per_vehicle: m.delay_per_vehicle,
            energy_per_vehicle: m.energy_per_vehicle,
            delay_improvement_pct: improvement_pct(idm.delay_per_vehicle, m.delay_per_vehicle),
            energy_improvement_pct: improvement_pct(idm.energy_per_vehicle, m.energy_per_vehicle),
            stop_free_fraction: m.stop_free_fraction,
        });
    }
    Ok(WeightSweep { idm, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub platoon_size: usize,
    pub controller: String,
    pub delay_per_vehicle: f64,
    pub energy_per_vehicle: f64,
    pub full_stops: f64,
    pub stop_free_fraction: f64,
}

/// A representative episode per (size, controller) for time–space plots.
#[derive(Debug, Clone)]
pub struct SizeTrajectory {
    pub platoon_size: usize,
    pub controller: String,
    pub cfg: ScenarioConfig,
    pub episode: EpisodeRun,
}

#[derive(Debug, Clone)]
pub struct SizeSweep {
    pub rows: Vec<SizeRow>,
    pub trajectories: Vec<SizeTrajectory>,
}

impl SizeSweep {
    pub fn metrics_of(&self, size: usize, controller: &str) -> Option<&SizeRow> {
        self.rows
            .iter()
            .find(|r| r.platoon_size == size && r.controller == controller)
    }
}

/// Trains one agent per platoon size and compares it with the IDM and GLOSA
/// baselines on `eval.episodes` shared seeds.
pub fn sweep_platoon_size(
    cfg: &ScenarioConfig,
    sizes: &[usize],
    log: &mut dyn FnMut(String),
) -> Result<SizeSweep, Error> {
    let seeds = eval_seeds(cfg, 0, cfg.eval.episodes);
    let mut rows = Vec::new();
    let mut trajectories = Vec::new();
    for &n in sizes {
        let mut c = cfg.clone();
        c.world.platoon_size = n;
        c.validate()?;
        log(format!("training platoon size {n}"));
        let (policy, _) = train_agent(&c, cfg.ars.seed)?;
        for controller in [Controller::Policy(policy), Controller::Idm, Controller::Glosa] {
            let run = run_controller(&c, &controller, &seeds)?;
            let m = &run.metrics;
            rows.push(SizeRow {
                platoon_size: n,
                controller: controller.name().into(),
                delay_per_vehicle: m.delay_per_vehicle,
                energy_per_vehicle: m.energy_per_vehicle,
                full_stops: m.full_stops,
                stop_free_fraction: m.stop_free_fraction,
            });
            if let Some(first) = run.episodes.into_iter().next() {
                trajectories.push(SizeTrajectory {
                    platoon_size: n,
                    controller: controller.name().into(),
                    cfg: c.clone(),
                    episode: first,
                });
            }
        }
    }
    Ok(SizeSweep { rows, trajectories })
}

/// Serialises any row type as CSV.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Trajectory(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Trajectory(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
