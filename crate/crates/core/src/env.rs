//! Episodic decision process around the traffic world.
//!
//! The agent controls only the ego vehicle's longitudinal acceleration. Each
//! candidate action is clipped to the physical acceleration bounds and then
//! capped by the IDM acceleration toward the ego's effective leader, so the
//! ego can never close on a vehicle or a red stop line faster than a human
//! driver would.
//!
//! Observation layout (length `obs_dim(n, phase_dim)`):
//!
//! | slot                 | content                                        |
//! |----------------------|------------------------------------------------|
//! | 0, 1                 | distance to stop line, ego speed               |
//! | 2 .. 2+2n            | position and speed of each following HDV        |
//! | next 3               | gap, speed and accel difference to the leader  |
//! | next 1               | remaining time of the current signal interval  |
//! | last `phase_dim`     | one-hot of (phase, green/yellow)               |

use crate::config::{RewardMode, ScenarioConfig};
use crate::error::{ConfigError, EnvError, LookupError};
use crate::traffic::{SignalProgram, VehicleClass, World};

/// Observation length for a platoon of `n` followers and a signal encoding of
/// `phase_dim` slots.
pub fn obs_dim(n: usize, phase_dim: usize) -> usize {
    2 + 2 * n + 3 + 1 + phase_dim
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    AllCrossed,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub time: f64,
    /// Policy output after NaN sanitising, before any clipping.
    pub raw: f64,
    /// IDM acceleration toward the ego's effective leader (clamped to bounds).
    pub idm_bound: f64,
    pub applied: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleOutcome {
    pub id: u32,
    pub class: VehicleClass,
    pub crossed_at: Option<f64>,
    pub energy_wh: f64,
}

/// Everything needed to recompute an episode's terminal reward.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub preload_s: f64,
    /// Platoon injection time.
    pub t0: f64,
    pub end_time: f64,
    /// Ego first, then followers in platoon order.
    pub vehicles: Vec<VehicleOutcome>,
    pub steps: Vec<StepLog>,
    pub termination: Option<Termination>,
}

impl EpisodeRecord {
    pub fn energy(&self, id: u32) -> Result<f64, LookupError> {
        self.outcome(id).map(|v| v.energy_wh)
    }

    pub fn outcome(&self, id: u32) -> Result<&VehicleOutcome, LookupError> {
        self.vehicles
            .iter()
            .find(|v| v.id == id)
            .ok_or(LookupError::UnknownVehicle(id))
    }

    pub fn total_energy(&self) -> f64 {
        self.vehicles.iter().map(|v| v.energy_wh).sum()
    }

    /// Crossing time, or the episode end for a vehicle that never crossed.
    pub fn finish_time(&self, id: u32) -> Result<f64, LookupError> {
        Ok(self.outcome(id)?.crossed_at.unwrap_or(self.end_time))
    }

    /// Delay against free-flow traversal of the lane.
    pub fn delay(&self, id: u32, free_flow_s: f64) -> Result<f64, LookupError> {
        Ok(self.finish_time(id)? - self.t0 - free_flow_s)
    }

    /// Weighted energy-plus-delay penalty summed over the platoon.
    pub fn terminal_reward(&self, omega1: f64, omega2: f64, free_flow_s: f64) -> f64 {
        self.vehicles
            .iter()
            .map(|v| {
                let finish = v.crossed_at.unwrap_or(self.end_time);
                let delay = finish - self.t0 - free_flow_s;
                -omega1 * v.energy_wh - omega2 * delay
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct PlatoonEnv {
    cfg: ScenarioConfig,
    signal: SignalProgram,
    world: Option<World>,
    record: Option<EpisodeRecord>,
}

impl PlatoonEnv {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let signal = cfg.signal.program()?;
        Ok(Self {
            cfg,
            signal,
            world: None,
            record: None,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn obs_dim(&self) -> usize {
        obs_dim(self.cfg.world.platoon_size, self.signal.phase_dim())
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    pub fn record(&self) -> Option<&EpisodeRecord> {
        self.record.as_ref()
    }

    pub fn into_record(self) -> Option<EpisodeRecord> {
        self.record
    }

    pub fn is_done(&self) -> bool {
        self.record.as_ref().is_some_and(|r| r.termination.is_some())
    }

    /// Free-flow traversal time of the lane.
    pub fn free_flow_time(&self) -> f64 {
        self.cfg.world.lane_length_m / self.cfg.world.speed_limit_mps
    }

    /// Builds a fresh world, preloads background traffic and injects the
    /// platoon.
    pub fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError> {
        let mut world = World::new(&self.cfg, seed).expect("config validated at construction");
        let preload_s = world.preload()?;
        let t0 = world.time();
        let vehicles = world
            .platoon_ids()
            .iter()
            .map(|&id| {
                let v = world.vehicle(id).expect("platoon vehicle exists");
                VehicleOutcome {
                    id,
                    class: v.class,
                    crossed_at: None,
                    energy_wh: 0.0,
                }
            })
            .collect();
        self.record = Some(EpisodeRecord {
            seed,
            preload_s,
            t0,
            end_time: t0,
            vehicles,
            steps: Vec::new(),
            termination: None,
        });
        self.world = Some(world);
        Ok(self.observe())
    }

    /// Current observation. Panics before the first reset.
    pub fn observe(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.obs_dim()];
        self.observe_into(&mut out);
        out
    }

    pub fn observe_into(&self, out: &mut [f64]) {
        let world = self.world.as_ref().expect("observe called before reset");
        assert_eq!(out.len(), self.obs_dim(), "observation buffer length");
        let lane = self.cfg.world.lane_length_m;
        let ids = world.platoon_ids();
        let ego = world.vehicle(ids[0]).expect("ego exists");

        out[0] = (lane - ego.position).clamp(0.0, lane);
        out[1] = ego.speed;
        let mut k = 2;
        for &id in &ids[1..] {
            let v = world.vehicle(id).expect("platoon vehicle exists");
            out[k] = v.position;
            out[k + 1] = v.speed;
            k += 2;
        }

        let o = &self.cfg.observation;
        let leader = world
            .lane_index(ego.id)
            .and_then(|i| i.checked_sub(1))
            .map(|i| &world.vehicles()[i])
            .filter(|l| l.position - ego.position <= o.leader_range_m);
        match leader {
            Some(l) => {
                out[k] = l.position - ego.position;
                out[k + 1] = l.speed - ego.speed;
                out[k + 2] = l.accel - ego.accel;
            }
            None => {
                out[k] = o.leader_range_m;
                out[k + 1] = o.no_leader_dv_mps;
                out[k + 2] = o.no_leader_da_mps2;
            }
        }
        k += 3;

        let signal = world.signal_state();
        out[k] = signal.remaining;
        k += 1;
        out[k..].fill(0.0);
        out[k + SignalProgram::encoding_index(&signal)] = 1.0;
    }

    /// IDM acceleration of the ego toward its effective leader, clamped to
    /// the acceleration bounds; `None` once the ego has left the lane.
    pub fn ego_idm_bound(&self) -> Option<f64> {
        let world = self.world.as_ref()?;
        let idx = world.lane_index(world.ego_id()?)?;
        Some(
            world
                .idm_recommendation(idx)
                .expect("lane ordering keeps gaps positive"),
        )
    }

    /// Safety filter: clips `raw` to the acceleration bounds and caps it by
    /// the IDM recommendation. NaN is treated as zero.
    pub fn apply_action(&self, raw: f64) -> f64 {
        let world = self.world.as_ref().expect("apply_action called before reset");
        let (lo, hi) = world.accel_bounds();
        let raw = if raw.is_nan() { 0.0 } else { raw };
        let clipped = raw.clamp(lo, hi);
        match self.ego_idm_bound() {
            Some(bound) => clipped.min(bound),
            None => clipped,
        }
    }

    pub fn step(&mut self, raw: f64) -> Result<StepOutcome, EnvError> {
        let (reward, done) = self.advance(raw)?;
        Ok(StepOutcome {
            observation: self.observe(),
            reward,
            done,
        })
    }

    /// Like [`step`](Self::step) but without building the observation.
    pub fn advance(&mut self, raw: f64) -> Result<(f64, bool), EnvError> {
        let (Some(world), Some(record)) = (self.world.as_ref(), self.record.as_ref()) else {
            return Err(EnvError::NotReset);
        };
        if record.termination.is_some() {
            return Err(EnvError::EpisodeFinished);
        }
        let lane = self.cfg.world.lane_length_m;
        let ego_id = record.vehicles[0].id;
        let ego = world.vehicle(ego_id).expect("ego exists");
        let ego_before = ego.position.min(lane);
        let ego_crossed = ego.crossed_at.is_some();
        let energy_before: f64 = record.vehicles.iter().map(|v| v.energy_wh).sum();

        let raw = if raw.is_nan() { 0.0 } else { raw };
        let bound = self.ego_idm_bound();
        let applied = self.apply_action(raw);
        let time = world.time();

        let world = self.world.as_mut().expect("checked above");
        if ego_crossed {
            // the agent's job ends at the stop line
            world.step(None)?;
        } else {
            world.step(Some(applied))?;
        }

        let record = self.record.as_mut().expect("checked above");
        for v in &mut record.vehicles {
            let state = world.vehicle(v.id).expect("platoon vehicle exists");
            v.crossed_at = state.crossed_at;
            v.energy_wh = state.energy_wh;
        }
        record.end_time = world.time();

        let all_crossed = record.vehicles.iter().all(|v| v.crossed_at.is_some());
        let termination = if all_crossed {
            Some(Termination::AllCrossed)
        } else if world.time() - record.t0 >= self.cfg.reward.horizon_s - 1e-9 {
            Some(Termination::Truncated)
        } else {
            None
        };
        record.termination = termination;

        let r = &self.cfg.reward;
        let reward = match r.mode {
            RewardMode::EpisodicDelayed => match termination {
                Some(_) => record.terminal_reward(r.omega1, r.omega2, lane / self.cfg.world.speed_limit_mps),
                None => 0.0,
            },
            RewardMode::Distributed => {
                let energy_after: f64 = record.vehicles.iter().map(|v| v.energy_wh).sum();
                let ego_after = world.vehicle(ego_id).expect("ego exists").position.min(lane);
                -r.omega1 * (energy_after - energy_before)
                    + r.omega2 * (ego_after - ego_before) / self.cfg.world.speed_limit_mps
            }
        };

        let applied_logged = if ego_crossed {
            world.vehicle(ego_id).expect("ego exists").accel
        } else {
            applied
        };
        record.steps.push(StepLog {
            time,
            raw,
            idm_bound: bound.unwrap_or(applied_logged),
            applied: applied_logged,
            reward,
        });
        Ok((reward, termination.is_some()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::VehicleClass;

    fn quiet(n: usize) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.world.hourly_volume_vph = 0.0;
        cfg.world.preload_min_s = 0.0;
        cfg.world.preload_max_s = 0.0;
        cfg.world.platoon_size = n;
        cfg
    }

    #[test]
    fn dimension_arithmetic() {
        assert_eq!(obs_dim(3, 8), 20);
        assert_eq!(obs_dim(5, 8), 24);
        let env = PlatoonEnv::new(quiet(3)).unwrap();
        assert_eq!(env.obs_dim(), 2 + 6 + 3 + 1 + 8);
    }

    #[test]
    fn empty_road_first_observation() {
        let mut env = PlatoonEnv::new(quiet(3)).unwrap();
        let obs = env.reset(5).unwrap();
        assert_eq!(obs[0], 500.0);
        assert_eq!(obs[1], 13.88);
        assert_eq!(&obs[8..11], &[500.0, 13.88, 7.5]);
        assert_eq!(obs[11], 30.0);
        assert_eq!(obs[12], 1.0);
        assert_eq!(obs[12..].iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn reset_is_deterministic() {
        let mut env = PlatoonEnv::new(ScenarioConfig::default()).unwrap();
        let a = env.reset(42).unwrap();
        let b = env.reset(42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn leader_block_differences() {
        let mut env = PlatoonEnv::new(quiet(0)).unwrap();
        env.reset(0).unwrap();
        env.world.as_mut().unwrap().place_vehicle(VehicleClass::BackgroundHdv, 100.0, 5.0);
        let obs = env.observe();
        assert_eq!(&obs[2..5], &[100.0, 5.0 - 13.88, 0.0]);
    }

    #[test]
    fn leader_beyond_range_is_filled() {
        let mut cfg = quiet(0);
        cfg.world.lane_length_m = 1000.0;
        let mut env = PlatoonEnv::new(cfg).unwrap();
        env.reset(0).unwrap();
        env.world.as_mut().unwrap().place_vehicle(VehicleClass::BackgroundHdv, 600.0, 5.0);
        let obs = env.observe();
        assert_eq!(&obs[2..5], &[500.0, 13.88, 7.5]);
    }

    #[test]
    fn action_is_capped_by_idm() {
        let mut env = PlatoonEnv::new(quiet(0)).unwrap();
        env.reset(0).unwrap();
        env.world.as_mut().unwrap().place_vehicle(VehicleClass::BackgroundHdv, 25.0, 0.0);
        let bound = env.ego_idm_bound().unwrap();
        assert!(bound < 0.0);
        assert_eq!(env.apply_action(3.0), bound);
        assert_eq!(env.apply_action(-4.5), -4.5);
        assert_eq!(env.apply_action(f64::NAN), bound.min(0.0));
    }

    #[test]
    fn open_road_leaves_action_alone() {
        let mut env = PlatoonEnv::new(quiet(0)).unwrap();
        env.reset(0).unwrap();
        assert_eq!(env.apply_action(-4.5), -4.5);
        assert_eq!(env.apply_action(10.0), env.ego_idm_bound().unwrap().min(3.0));
    }

    #[test]
    fn step_before_reset_and_after_done() {
        let mut cfg = quiet(0);
        cfg.reward.horizon_s = 2.0;
        let mut env = PlatoonEnv::new(cfg).unwrap();
        assert_eq!(env.step(0.0).unwrap_err(), EnvError::NotReset);
        env.reset(0).unwrap();
        assert!(!env.step(0.0).unwrap().done);
        let last = env.step(0.0).unwrap();
        assert!(last.done);
        assert_eq!(env.record().unwrap().termination, Some(Termination::Truncated));
        assert_eq!(env.step(0.0).unwrap_err(), EnvError::EpisodeFinished);
    }

    #[test]
    fn solo_cruise_has_no_delay() {
        let mut cfg = quiet(0);
        cfg.signal.green_s = vec![600.0];
        let mut env = PlatoonEnv::new(cfg).unwrap();
        env.reset(0).unwrap();
        let mut rewards = Vec::new();
        loop {
            let out = env.step(3.0).unwrap();
            rewards.push(out.reward);
            if out.done {
                break;
            }
        }
        let rec = env.record().unwrap();
        assert_eq!(rec.termination, Some(Termination::AllCrossed));
        let id = rec.vehicles[0].id;
        let delay = rec.delay(id, env.free_flow_time()).unwrap();
        assert!(delay.abs() <= 1.0, "delay {delay}");
        assert!(rewards[..rewards.len() - 1].iter().all(|&r| r == 0.0));
        let expected = -6.0 * rec.energy(id).unwrap() - delay;
        assert!((rewards.last().unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn terminal_reward_hand_example() {
        let rec = EpisodeRecord {
            seed: 0,
            preload_s: 0.0,
            t0: 0.0,
            end_time: 36.0,
            vehicles: vec![VehicleOutcome {
                id: 0,
                class: VehicleClass::EgoCav,
                crossed_at: Some(36.0),
                energy_wh: 50.0,
            }],
            steps: Vec::new(),
            termination: Some(Termination::AllCrossed),
        };
        let r = rec.terminal_reward(6.0, 1.0, 500.0 / 13.88);
        assert!((r - (-300.0 + (500.0 / 13.88 - 36.0))).abs() < 1e-12);
        assert!((r + 299.98).abs() < 0.01);
        assert_eq!(rec.energy(7), Err(LookupError::UnknownVehicle(7)));
    }

    #[test]
    fn truncation_charges_horizon_delay() {
        let mut cfg = quiet(1);
        cfg.reward.horizon_s = 20.0;
        let mut env = PlatoonEnv::new(cfg).unwrap();
        env.reset(0).unwrap();
        let mut last = None;
        for _ in 0..20 {
            let out = env.step(-4.5).unwrap();
            last = Some(out.reward);
        }
        let rec = env.record().unwrap();
        assert_eq!(rec.termination, Some(Termination::Truncated));
        assert_eq!(rec.end_time, 20.0);
        let free = 500.0 / 13.88;
        let expected: f64 = rec
            .vehicles
            .iter()
            .map(|v| -6.0 * v.energy_wh - (20.0 - free))
            .sum();
        assert!((last.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn distributed_reward_sums_proxy() {
        let mut cfg = quiet(1);
        cfg.reward.mode = RewardMode::Distributed;
        cfg.signal.green_s = vec![600.0];
        let mut env = PlatoonEnv::new(cfg).unwrap();
        env.reset(0).unwrap();
        let mut total = 0.0;
        loop {
            let out = env.step(0.0).unwrap();
            total += out.reward;
            if out.done {
                break;
            }
        }
        let rec = env.record().unwrap();
        let expected = -6.0 * rec.total_energy() + 500.0 / 13.88;
        assert!((total - expected).abs() < 1e-9);
    }
}
