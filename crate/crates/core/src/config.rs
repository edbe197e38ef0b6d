//! Scenario configuration.
//!
//! A scenario is a TOML document with one section per subsystem. Every key
//! carries its unit in the name, and every key is optional: missing keys take
//! the defaults below, unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::EvParams;
use crate::error::ConfigError;
use crate::traffic::{IdmParams, SignalProgram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub lane_length_m: f64,
    pub speed_limit_mps: f64,
    pub hourly_volume_vph: f64,
    pub preload_min_s: f64,
    pub preload_max_s: f64,
    /// Number of human-driven vehicles following the ego vehicle.
    pub platoon_size: usize,
    pub dt_s: f64,
    pub seed: u64,
    pub vehicle_length_m: f64,
    pub accel_min_mps2: f64,
    pub accel_max_mps2: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            lane_length_m: 500.0,
            speed_limit_mps: 13.88,
            hourly_volume_vph: 400.0,
            preload_min_s: 180.0,
            preload_max_s: 220.0,
            platoon_size: 3,
            dt_s: 1.0,
            seed: 0,
            vehicle_length_m: 5.0,
            accel_min_mps2: -4.5,
            accel_max_mps2: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    /// Green time of each phase, in cycle order.
    pub green_s: Vec<f64>,
    pub yellow_s: f64,
    pub offset_s: f64,
    /// Index of the phase serving the ego approach.
    pub approach_phase: usize,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            green_s: vec![30.0; 4],
            yellow_s: 3.0,
            offset_s: 0.0,
            approach_phase: 0,
        }
    }
}

impl SignalConfig {
    pub fn program(&self) -> Result<SignalProgram, ConfigError> {
        SignalProgram::fixed_cycle(&self.green_s, self.yellow_s, self.offset_s, self.approach_phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Single terminal reward once the whole platoon has crossed.
    EpisodicDelayed,
    /// Per-step energy and distance proxy.
    Distributed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub mode: RewardMode,
    /// Episode horizon measured from platoon injection.
    pub horizon_s: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            omega1: 6.0,
            omega2: 1.0,
            mode: RewardMode::EpisodicDelayed,
            horizon_s: 600.0,
        }
    }
}

/// Fill values for the leader block of the observation when no vehicle is
/// within sensing range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    pub leader_range_m: f64,
    pub no_leader_dv_mps: f64,
    pub no_leader_da_mps2: f64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            leader_range_m: 500.0,
            no_leader_dv_mps: 13.88,
            no_leader_da_mps2: 7.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArsConfig {
    pub step_size: f64,
    pub directions: usize,
    pub noise_std: f64,
    pub top_directions: usize,
    pub iterations: usize,
    /// Evaluate the unperturbed policy every this many iterations; 0 disables.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub seed: u64,
}

impl Default for ArsConfig {
    fn default() -> Self {
        Self {
            step_size: 0.015,
            directions: 32,
            noise_std: 0.2,
            top_directions: 16,
            iterations: 300,
            eval_interval: 10,
            eval_episodes: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub episodes: usize,
    pub seed: u64,
    pub glosa_crawl_mps: f64,
    pub stop_speed_mps: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            episodes: 25,
            seed: 1_000_003,
            glosa_crawl_mps: 2.0,
            stop_speed_mps: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub world: WorldConfig,
    pub idm: IdmParams,
    pub signal: SignalConfig,
    pub energy: EvParams,
    pub reward: RewardConfig,
    pub observation: ObservationConfig,
    pub ars: ArsConfig,
    pub eval: EvalConfig,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// Dimension of the observation vector for this scenario.
    pub fn obs_dim(&self) -> usize {
        crate::env::obs_dim(self.world.platoon_size, 2 * self.signal.green_s.len())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let w = &self.world;
        check("world.lane_length_m", w.lane_length_m > 0.0, "must be > 0")?;
        check("world.speed_limit_mps", w.speed_limit_mps > 0.0, "must be > 0")?;
        check("world.dt_s", w.dt_s > 0.0, "must be > 0")?;
        check("world.hourly_volume_vph", w.hourly_volume_vph >= 0.0, "must be >= 0")?;
        check("world.preload_min_s", w.preload_min_s >= 0.0, "must be >= 0")?;
        check(
            "world.preload_max_s",
            w.preload_min_s <= w.preload_max_s,
            "must be >= world.preload_min_s",
        )?;
        check("world.vehicle_length_m", w.vehicle_length_m > 0.0, "must be > 0")?;
        check("world.accel_min_mps2", w.accel_min_mps2 < 0.0, "must be < 0")?;
        check("world.accel_max_mps2", w.accel_max_mps2 > 0.0, "must be > 0")?;

        self.idm.validate()?;
        self.signal.program()?;
        self.energy.validate()?;

        let r = &self.reward;
        check("reward.omega1", r.omega1 >= 0.0, "must be >= 0")?;
        check("reward.omega2", r.omega2 >= 0.0, "must be >= 0")?;
        check("reward.horizon_s", r.horizon_s > 0.0, "must be > 0")?;

        let o = &self.observation;
        check("observation.leader_range_m", o.leader_range_m > 0.0, "must be > 0")?;

        let a = &self.ars;
        check("ars.step_size", a.step_size > 0.0, "must be > 0")?;
        check("ars.noise_std", a.noise_std > 0.0, "must be > 0")?;
        check("ars.directions", a.directions >= 1, "must be >= 1")?;
        check(
            "ars.top_directions",
            a.top_directions >= 1 && a.top_directions <= a.directions,
            "must satisfy 1 <= top_directions <= directions",
        )?;

        let e = &self.eval;
        check("eval.glosa_crawl_mps", e.glosa_crawl_mps > 0.0, "must be > 0")?;
        check(
            "eval.glosa_crawl_mps",
            e.glosa_crawl_mps <= w.speed_limit_mps,
            "must not exceed world.speed_limit_mps",
        )?;
        check("eval.stop_speed_mps", e.stop_speed_mps > 0.0, "must be > 0")?;
        Ok(())
    }
}

pub(crate) fn check(field: &str, ok: bool, reason: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_document_is_default() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn partial_override() {
        let cfg = ScenarioConfig::from_toml_str(
            "[world]\nplatoon_size = 5\n[reward]\nomega1 = 1.0\nomega2 = 6.0\nmode = \"distributed\"\n",
        )
        .unwrap();
        assert_eq!(cfg.world.platoon_size, 5);
        assert_eq!(cfg.world.lane_length_m, 500.0);
        assert_eq!(cfg.reward.mode, RewardMode::Distributed);
        assert_eq!(cfg.obs_dim(), 24);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ScenarioConfig::from_toml_str("[world]\nlane_length = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn invalid_field_is_named() {
        let err = ScenarioConfig::from_toml_str("[ars]\ntop_directions = 40\n").unwrap_err();
        match err {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "ars.top_directions"),
            other => panic!("unexpected {other:?}"),
        }
        let err = ScenarioConfig::from_toml_str("[world]\ndt_s = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("world.dt_s"));
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.world.seed = 99;
        cfg.reward.mode = RewardMode::Distributed;
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
