use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use super::{idm_acceleration, IdmParams, SignalProgram, SignalState, VehicleClass, VehicleState};
use crate::config::ScenarioConfig;
use crate::energy::{step_energy, EvParams};
use crate::error::{ConfigError, TrafficError};

/// Longest time the platoon injection waits for the lane origin to clear.
const MAX_INJECTION_WAIT_S: f64 = 600.0;

/// A front bumper passing the stop line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub id: u32,
    pub class: VehicleClass,
    pub time: f64,
    /// Crossed while the approach showed neither green nor its own yellow.
    pub on_red: bool,
}

/// Deterministic single-lane world. Vehicles are kept ordered front to back
/// (descending position); nobody overtakes.
#[derive(Debug, Clone)]
pub struct World {
    lane_length: f64,
    speed_limit: f64,
    dt: f64,
    vehicle_length: f64,
    accel_min: f64,
    accel_max: f64,
    hourly_volume: f64,
    preload_range: (f64, f64),
    platoon_size: usize,
    idm: IdmParams,
    ev: EvParams,
    signal: SignalProgram,

    time: f64,
    vehicles: Vec<VehicleState>,
    /// Platoon vehicles that have left the lane, kept for accounting.
    departed: Vec<VehicleState>,
    platoon_ids: Vec<u32>,
    next_id: u32,

    rng: ChaCha8Rng,
    arrival_gap: Option<Exp<f64>>,
    next_arrival: f64,
    pending_arrivals: u32,
    arrivals: u64,
    inserted_background: u64,

    crossings: Vec<Crossing>,
    scratch: Vec<f64>,
}

impl World {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let w = &cfg.world;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arrival_gap = (w.hourly_volume_vph > 0.0)
            .then(|| Exp::new(w.hourly_volume_vph / 3600.0).expect("positive rate"));
        let next_arrival = match &arrival_gap {
            Some(exp) => rng.sample(exp),
            None => f64::INFINITY,
        };
        Ok(Self {
            lane_length: w.lane_length_m,
            speed_limit: w.speed_limit_mps,
            dt: w.dt_s,
            vehicle_length: w.vehicle_length_m,
            accel_min: w.accel_min_mps2,
            accel_max: w.accel_max_mps2,
            hourly_volume: w.hourly_volume_vph,
            preload_range: (w.preload_min_s, w.preload_max_s),
            platoon_size: w.platoon_size,
            idm: cfg.idm.clone(),
            ev: cfg.energy.clone(),
            signal: cfg.signal.program()?,
            time: 0.0,
            vehicles: Vec::new(),
            departed: Vec::new(),
            platoon_ids: Vec::new(),
            next_id: 0,
            rng,
            arrival_gap,
            next_arrival,
            pending_arrivals: 0,
            arrivals: 0,
            inserted_background: 0,
            crossings: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn set_signal(&mut self, signal: SignalProgram) {
        self.signal = signal;
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lane_length(&self) -> f64 {
        self.lane_length
    }

    pub fn speed_limit(&self) -> f64 {
        self.speed_limit
    }

    pub fn accel_bounds(&self) -> (f64, f64) {
        (self.accel_min, self.accel_max)
    }

    pub fn idm(&self) -> &IdmParams {
        &self.idm
    }

    pub fn signal(&self) -> &SignalProgram {
        &self.signal
    }

    pub fn signal_state(&self) -> SignalState {
        self.signal.query(self.time)
    }

    /// Vehicles on the lane, front to back.
    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    /// Ego first, then the following human-driven vehicles.
    pub fn platoon_ids(&self) -> &[u32] {
        &self.platoon_ids
    }

    pub fn ego_id(&self) -> Option<u32> {
        self.platoon_ids.first().copied()
    }

    /// Looks a vehicle up on the lane or among departed platoon vehicles.
    pub fn vehicle(&self, id: u32) -> Option<&VehicleState> {
        self.vehicles
            .iter()
            .chain(self.departed.iter())
            .find(|v| v.id == id)
    }

    pub fn lane_index(&self, id: u32) -> Option<usize> {
        self.vehicles.iter().position(|v| v.id == id)
    }

    pub fn pending_arrivals(&self) -> u32 {
        self.pending_arrivals
    }

    /// Background arrivals generated so far (inserted or still queued).
    pub fn background_arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn background_inserted(&self) -> u64 {
        self.inserted_background
    }

    /// Every stop-line crossing so far, in time order.
    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    /// Places a vehicle on the lane, keeping front-to-back order. For tests
    /// and hand-built scenarios.
    pub fn place_vehicle(&mut self, class: VehicleClass, position: f64, speed: f64) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        let vehicle = VehicleState::new(id, class, position, speed, self.vehicle_length);
        let at = self
            .vehicles
            .iter()
            .position(|v| v.position < position)
            .unwrap_or(self.vehicles.len());
        self.vehicles.insert(at, vehicle);
        if class == VehicleClass::EgoCav {
            self.platoon_ids.insert(0, id);
        } else if class == VehicleClass::PlatoonHdv {
            self.platoon_ids.push(id);
        }
        id
    }

    /// Gap an inserted vehicle needs ahead of it at the lane origin.
    pub fn insertion_gap(&self) -> f64 {
        self.idm.min_gap + self.idm.time_headway * self.speed_limit
    }

    /// Whether a vehicle at `position` moving at `speed` has to hold at the
    /// stop line under `signal`.
    ///
    /// Red always holds. On the approach's yellow a vehicle proceeds only if
    /// it reaches the line before the yellow ends even under maximum braking;
    /// such a vehicle clears whatever it does next, and any other vehicle
    /// holds.
    pub fn must_hold(&self, position: f64, speed: f64, signal: &SignalState) -> bool {
        if position >= self.lane_length || signal.approach_proceed {
            return false;
        }
        if signal.is_yellow && signal.approach_phase_active {
            return match self.braking_crossing_time(position, speed) {
                Some(t) => t >= signal.remaining,
                None => true,
            };
        }
        true
    }

    /// Time until the front bumper reaches the stop line when braking at the
    /// lower acceleration bound from now on; `None` if it stops first.
    fn braking_crossing_time(&self, mut position: f64, mut speed: f64) -> Option<f64> {
        let mut elapsed = 0.0;
        loop {
            speed = (speed + self.accel_min * self.dt).max(0.0);
            if speed <= 0.0 {
                return None;
            }
            let next = position + speed * self.dt;
            if next >= self.lane_length {
                return Some(elapsed + self.dt * (self.lane_length - position) / (next - position));
            }
            position = next;
            elapsed += self.dt;
        }
    }

    /// Leader that the vehicle at lane index `index` reacts to: the closer of
    /// its physical predecessor and, when it must hold, a stationary
    /// zero-length obstacle on the stop line.
    pub fn effective_leader(&self, index: usize) -> Option<VehicleState> {
        self.effective_leader_with(index, &self.signal_state())
    }

    fn effective_leader_with(&self, index: usize, signal: &SignalState) -> Option<VehicleState> {
        let vehicle = &self.vehicles[index];
        let physical = index.checked_sub(1).map(|i| &self.vehicles[i]);
        if !self.must_hold(vehicle.position, vehicle.speed, signal) {
            return physical.cloned();
        }
        let stop_line = VehicleState::stop_line(self.lane_length);
        match physical {
            Some(lead) if vehicle.gap_to(lead) <= vehicle.gap_to(&stop_line) => Some(lead.clone()),
            _ => Some(stop_line),
        }
    }

    /// Clamped IDM acceleration of the vehicle at `index` toward its
    /// effective leader.
    pub fn idm_recommendation(&self, index: usize) -> Result<f64, TrafficError> {
        let leader = self.effective_leader(index);
        let a = idm_acceleration(&self.vehicles[index], leader.as_ref(), &self.idm)?;
        Ok(a.clamp(self.accel_min, self.accel_max))
    }

    /// Generates background arrivals for the coming step and inserts at most
    /// one queued vehicle at the lane origin if the insertion gap is free.
    pub fn spawn_background(&mut self) {
        if let Some(exp) = self.arrival_gap {
            while self.next_arrival < self.time + self.dt {
                self.pending_arrivals += 1;
                self.arrivals += 1;
                self.next_arrival += self.rng.sample(exp);
            }
        }
        if self.pending_arrivals > 0 && self.try_insert(VehicleClass::BackgroundHdv).is_some() {
            self.pending_arrivals -= 1;
            self.inserted_background += 1;
        }
    }

    /// Inserts a vehicle with its front bumper on the lane origin when the
    /// upstream-most vehicle has left the insertion gap free. The entry speed
    /// is the speed limit, reduced if needed so the newcomer can still brake
    /// comfortably behind its leader.
    fn try_insert(&mut self, class: VehicleClass) -> Option<u32> {
        let speed = self.entry_speed()?;
        let id = self.next_id;
        self.next_id += 1;
        self.vehicles
            .push(VehicleState::new(id, class, 0.0, speed, self.vehicle_length));
        Some(id)
    }

    fn entry_speed(&self) -> Option<f64> {
        match self.vehicles.last() {
            None => Some(self.speed_limit),
            Some(last) => {
                let gap = last.rear();
                if gap < self.insertion_gap() {
                    return None;
                }
                let safe = (last.speed * last.speed
                    + 2.0 * self.idm.comfort_decel * (gap - self.idm.min_gap))
                    .sqrt();
                Some(safe.min(self.speed_limit))
            }
        }
    }

    /// Injects the ego vehicle at the lane origin with its followers queued
    /// behind it at the insertion gap. Returns false if the origin is blocked.
    pub fn try_inject_platoon(&mut self) -> bool {
        let Some(ego) = self.try_insert(VehicleClass::EgoCav) else {
            return false;
        };
        let speed = self.vehicles.last().expect("just inserted").speed;
        self.platoon_ids.push(ego);
        let spacing = self.vehicle_length + self.insertion_gap();
        for k in 1..=self.platoon_size {
            let id = self.next_id;
            self.next_id += 1;
            let position = -(k as f64) * spacing;
            self.vehicles.push(VehicleState::new(
                id,
                VehicleClass::PlatoonHdv,
                position,
                speed,
                self.vehicle_length,
            ));
            self.platoon_ids.push(id);
        }
        true
    }

    /// Warms the lane up with background traffic for a uniformly drawn
    /// duration, then injects the platoon (waiting for the origin to clear if
    /// necessary). Returns the drawn duration.
    pub fn preload(&mut self) -> Result<f64, TrafficError> {
        let (low, high) = self.preload_range;
        let duration = if high > low {
            self.rng.random_range(low..high)
        } else {
            low
        };
        let steps = (duration / self.dt).round() as usize;
        for _ in 0..steps {
            self.step(None)?;
        }
        let mut waited = 0.0;
        while !self.try_inject_platoon() {
            if waited >= MAX_INJECTION_WAIT_S {
                return Err(TrafficError::InjectionBlocked { waited_s: waited });
            }
            self.step(None)?;
            waited += self.dt;
        }
        Ok(duration)
    }

    /// Advances one step. Background vehicles (and the ego, when
    /// `ego_accel` is `None`) follow the IDM toward their effective leader;
    /// every acceleration is computed from the pre-step state, then all
    /// vehicles integrate with semi-implicit Euler.
    pub fn step(&mut self, ego_accel: Option<f64>) -> Result<(), TrafficError> {
        self.spawn_background();
        let signal = self.signal_state();
        let ego = self.ego_id();

        let mut accels = std::mem::take(&mut self.scratch);
        accels.clear();
        for i in 0..self.vehicles.len() {
            let vehicle = &self.vehicles[i];
            let a = match ego_accel {
                Some(a) if Some(vehicle.id) == ego => a,
                _ => {
                    let leader = self.effective_leader_with(i, &signal);
                    idm_acceleration(vehicle, leader.as_ref(), &self.idm)?
                }
            };
            accels.push(a.clamp(self.accel_min, self.accel_max));
        }

        let t_old = self.time;
        let t_new = t_old + self.dt;
        let stop_line = self.lane_length;
        for (vehicle, &a) in self.vehicles.iter_mut().zip(&accels) {
            let v_prev = vehicle.speed;
            let x_prev = vehicle.position;
            let v_new = (v_prev + a * self.dt).clamp(0.0, self.speed_limit);
            let x_new = x_prev + v_new * self.dt;
            vehicle.accel = a;
            vehicle.speed = v_new;
            vehicle.position = x_new;
            if vehicle.crossed_at.is_none() {
                vehicle.energy_wh += step_energy(v_prev, v_new, self.dt, &self.ev);
                if x_prev < stop_line && x_new >= stop_line {
                    let time = t_old + (t_new - t_old) * (stop_line - x_prev) / (x_new - x_prev);
                    vehicle.crossed_at = Some(time);
                    let at = self.signal.query(time);
                    let on_red = !(at.approach_proceed || (at.is_yellow && at.approach_phase_active));
                    self.crossings.push(Crossing {
                        id: vehicle.id,
                        class: vehicle.class,
                        time,
                        on_red,
                    });
                }
            }
        }
        self.scratch = accels;
        self.time = t_new;

        for pair in self.vehicles.windows(2) {
            let gap = pair[1].gap_to(&pair[0]);
            if gap <= 0.0 {
                return Err(TrafficError::Collision {
                    time: self.time,
                    follower: pair[1].id,
                    leader: pair[0].id,
                    gap,
                });
            }
        }

        // vehicles leave once the rear bumper is past the stop line
        if self.vehicles.first().is_some_and(|v| v.rear() >= stop_line) {
            let (gone, stay): (Vec<_>, Vec<_>) = std::mem::take(&mut self.vehicles)
                .into_iter()
                .partition(|v| v.rear() >= stop_line);
            self.departed
                .extend(gone.into_iter().filter(|v| v.class.in_platoon()));
            self.vehicles = stay;
        }
        Ok(())
    }

    pub fn hourly_volume(&self) -> f64 {
        self.hourly_volume
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quiet_config() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.world.hourly_volume_vph = 0.0;
        cfg.world.preload_min_s = 0.0;
        cfg.world.preload_max_s = 0.0;
        cfg
    }

    fn quiet_world() -> World {
        World::new(&quiet_config(), 1).unwrap()
    }

    #[test]
    fn red_forces_stop_line_target() {
        let mut w = quiet_world();
        w.time = 50.0; // phase 1 green: approach red
        let id = w.place_vehicle(VehicleClass::EgoCav, 400.0, 10.0);
        let leader = w.effective_leader(w.lane_index(id).unwrap()).unwrap();
        assert!(leader.is_virtual());
        assert_eq!((leader.position, leader.speed, leader.length), (500.0, 0.0, 0.0));
    }

    #[test]
    fn green_returns_physical_leader() {
        let mut w = quiet_world();
        w.place_vehicle(VehicleClass::BackgroundHdv, 450.0, 10.0);
        let id = w.place_vehicle(VehicleClass::EgoCav, 400.0, 10.0);
        let leader = w.effective_leader(w.lane_index(id).unwrap()).unwrap();
        assert_eq!(leader.position, 450.0);
    }

    #[test]
    fn green_and_clear_road_has_no_leader() {
        let mut w = quiet_world();
        let id = w.place_vehicle(VehicleClass::EgoCav, 400.0, 10.0);
        assert!(w.effective_leader(w.lane_index(id).unwrap()).is_none());
    }

    #[test]
    fn yellow_close_to_line_clears() {
        let mut w = quiet_world();
        w.time = 32.0; // 1 s of yellow left
        let id = w.place_vehicle(VehicleClass::EgoCav, 499.0, 13.0);
        assert!(w.effective_leader(w.lane_index(id).unwrap()).is_none());
    }

    #[test]
    fn yellow_far_from_line_holds() {
        let mut w = quiet_world();
        w.time = 30.0;
        let id = w.place_vehicle(VehicleClass::EgoCav, 400.0, 13.88);
        assert!(w.effective_leader(w.lane_index(id).unwrap()).unwrap().is_virtual());
    }

    #[test]
    fn red_prefers_closer_physical_leader() {
        let mut w = quiet_world();
        w.time = 50.0;
        w.place_vehicle(VehicleClass::BackgroundHdv, 480.0, 0.0);
        let id = w.place_vehicle(VehicleClass::EgoCav, 400.0, 10.0);
        let leader = w.effective_leader(w.lane_index(id).unwrap()).unwrap();
        assert_eq!(leader.position, 480.0);
    }

    #[test]
    fn cruise_advances_by_speed() {
        let mut w = quiet_world();
        let id = w.place_vehicle(VehicleClass::EgoCav, 100.0, 10.0);
        w.step(Some(0.0)).unwrap();
        assert_eq!(w.vehicle(id).unwrap().position, 110.0);
    }

    #[test]
    fn speed_never_negative() {
        let mut w = quiet_world();
        let id = w.place_vehicle(VehicleClass::EgoCav, 100.0, 0.5);
        w.step(Some(-4.5)).unwrap();
        let v = w.vehicle(id).unwrap();
        assert_eq!(v.speed, 0.0);
        assert_eq!(v.position, 100.0);
    }

    #[test]
    fn speed_capped_at_limit() {
        let mut w = quiet_world();
        let id = w.place_vehicle(VehicleClass::EgoCav, 100.0, 13.5);
        w.step(Some(3.0)).unwrap();
        assert_eq!(w.vehicle(id).unwrap().speed, 13.88);
    }

    #[test]
    fn ego_accel_is_clamped() {
        let mut w = quiet_world();
        let id = w.place_vehicle(VehicleClass::EgoCav, 100.0, 10.0);
        w.step(Some(-20.0)).unwrap();
        let v = w.vehicle(id).unwrap();
        assert_eq!(v.accel, -4.5);
        assert_eq!(v.speed, 5.5);
    }

    #[test]
    fn crossing_time_is_interpolated() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        let id = w.place_vehicle(VehicleClass::EgoCav, 495.0, 10.0);
        w.step(Some(0.0)).unwrap();
        assert_eq!(w.vehicle(id).unwrap().crossed_at, Some(0.5));
        assert!(!w.crossings()[0].on_red);
    }

    #[test]
    fn energy_stops_accruing_after_crossing() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        let id = w.place_vehicle(VehicleClass::EgoCav, 495.0, 10.0);
        w.step(Some(0.0)).unwrap();
        let e = w.vehicle(id).unwrap().energy_wh;
        assert!(e > 0.0);
        w.step(Some(0.0)).unwrap();
        assert_eq!(w.vehicle(id).unwrap().energy_wh, e);
    }

    #[test]
    fn departed_platoon_vehicles_remain_queryable() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        let id = w.place_vehicle(VehicleClass::EgoCav, 490.0, 13.88);
        w.step(Some(0.0)).unwrap();
        assert!(w.lane_index(id).is_some());
        w.step(Some(0.0)).unwrap();
        assert!(w.lane_index(id).is_none());
        assert!(w.vehicle(id).unwrap().crossed_at.is_some());
    }

    #[test]
    fn no_volume_no_spawns() {
        let mut w = quiet_world();
        for _ in 0..3600 {
            w.step(None).unwrap();
        }
        assert_eq!(w.background_arrivals(), 0);
        assert!(w.vehicles().is_empty());
    }

    #[test]
    fn blocked_insertions_are_queued_not_dropped() {
        let mut cfg = quiet_config();
        cfg.world.hourly_volume_vph = 3600.0;
        let mut w = World::new(&cfg, 3).unwrap();
        // a vehicle held by a red stop line just past the origin blocks entry
        w.lane_length = 10.0;
        w.set_signal(SignalProgram::fixed_cycle(&[10_000.0, 1.0], 0.0, 0.0, 1).unwrap());
        w.place_vehicle(VehicleClass::BackgroundHdv, 8.0, 0.0);
        for _ in 0..20 {
            w.step(None).unwrap();
        }
        assert_eq!(w.background_inserted(), 0);
        assert!(w.pending_arrivals() > 0);
        assert_eq!(w.pending_arrivals() as u64, w.background_arrivals());
        // open the road: the blocker drives away and queued vehicles enter
        w.set_signal(SignalProgram::always_green());
        for _ in 0..200 {
            w.step(None).unwrap();
        }
        assert!(w.background_inserted() > 0);
        assert_eq!(
            w.background_inserted() + w.pending_arrivals() as u64,
            w.background_arrivals()
        );
    }

    #[test]
    fn insertion_respects_gap() {
        let mut cfg = quiet_config();
        cfg.world.hourly_volume_vph = 3600.0 * 5.0;
        let mut w = World::new(&cfg, 4).unwrap();
        w.set_signal(SignalProgram::always_green());
        for _ in 0..300 {
            w.step(None).unwrap();
            for pair in w.vehicles().windows(2) {
                assert!(pair[1].gap_to(&pair[0]) > 0.0);
            }
        }
    }

    #[test]
    fn preload_with_empty_range_injects_immediately() {
        let mut w = quiet_world();
        let tp = w.preload().unwrap();
        assert_eq!(tp, 0.0);
        assert_eq!(w.time(), 0.0);
        assert_eq!(w.platoon_ids().len(), 4);
        let ego = w.vehicle(w.ego_id().unwrap()).unwrap();
        assert_eq!((ego.position, ego.speed), (0.0, 13.88));
    }

    #[test]
    fn platoon_is_ordered_ego_first() {
        let mut w = World::new(&ScenarioConfig::default(), 11).unwrap();
        w.preload().unwrap();
        let positions: Vec<f64> = w
            .platoon_ids()
            .iter()
            .map(|&id| w.vehicle(id).unwrap().position)
            .collect();
        assert!(positions.windows(2).all(|p| p[0] > p[1]));
        assert_eq!(w.vehicle(w.platoon_ids()[0]).unwrap().class, VehicleClass::EgoCav);
        let gap = w.vehicle(w.platoon_ids()[1]).unwrap().gap_to(w.vehicle(w.platoon_ids()[0]).unwrap());
        assert!((gap - 15.88).abs() < 1e-9);
    }

    #[test]
    fn preload_duration_mean() {
        let mut sum = 0.0;
        let mut cfg = ScenarioConfig::default();
        cfg.world.hourly_volume_vph = 0.0;
        for seed in 0..1000 {
            let mut w = World::new(&cfg, seed).unwrap();
            let tp = w.preload().unwrap();
            assert!((180.0..220.0).contains(&tp));
            sum += tp;
        }
        let mean = sum / 1000.0;
        assert!((mean - 200.0).abs() < 2.0, "mean {mean}");
    }

    #[test]
    fn idm_pair_from_rest_keeps_min_gap() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        w.lane_length = 1.0e6;
        w.place_vehicle(VehicleClass::BackgroundHdv, 30.0, 0.0);
        w.place_vehicle(VehicleClass::BackgroundHdv, 20.0, 0.0);
        for _ in 0..1000 {
            w.step(None).unwrap();
            let v = w.vehicles();
            assert!(v[1].gap_to(&v[0]) >= w.idm.min_gap);
        }
    }

    #[test]
    fn idm_platoon_at_equilibrium_stays_there() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        w.lane_length = 1.0e7;
        let v_eq = 10.0;
        let spacing = w.idm.equilibrium_gap(v_eq) + w.vehicle_length;
        w.place_vehicle(VehicleClass::EgoCav, 0.0, v_eq);
        for k in 1..=5 {
            w.place_vehicle(VehicleClass::PlatoonHdv, -(k as f64) * spacing, v_eq);
        }
        for _ in 0..5000 {
            w.step(Some(0.0)).unwrap();
            for v in w.vehicles() {
                assert!(v.accel.abs() < 1e-6, "accel {}", v.accel);
            }
        }
    }

    #[test]
    fn collision_is_reported() {
        let mut w = quiet_world();
        w.set_signal(SignalProgram::always_green());
        w.place_vehicle(VehicleClass::BackgroundHdv, 110.0, 0.0);
        w.place_vehicle(VehicleClass::EgoCav, 100.0, 13.88);
        let err = w.step(Some(3.0)).unwrap_err();
        assert!(matches!(err, TrafficError::Collision { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn identical_seeds_identical_worlds(seed in any::<u64>()) {
            let cfg = ScenarioConfig::default();
            let mut a = World::new(&cfg, seed).unwrap();
            let mut b = World::new(&cfg, seed).unwrap();
            a.preload().unwrap();
            b.preload().unwrap();
            for _ in 0..100 {
                a.step(None).unwrap();
                b.step(None).unwrap();
            }
            prop_assert_eq!(a.vehicles(), b.vehicles());
        }
    }
}
