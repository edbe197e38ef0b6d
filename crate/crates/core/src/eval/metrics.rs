//! Trajectory logs and the metrics derived from them.
//!
//! Metrics are computed only from trajectory rows, never from simulator
//! internals, so the numbers recomputed from an exported CSV are identical to
//! the in-memory ones.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::traffic::{SignalProgram, VehicleClass, VehicleState, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time_s: f64,
    pub vehicle_id: u32,
    pub class: String,
    pub position_m: f64,
    pub speed_mps: f64,
    pub accel_mps2: f64,
    pub energy_wh: f64,
    /// One-hot slot of the signal state: 2·phase + 1 during that phase's yellow.
    pub signal_phase: usize,
    pub signal_remaining_s: f64,
}

impl TrajectoryRow {
    pub fn from_state(time: f64, v: &VehicleState, signal_phase: usize, remaining: f64) -> Self {
        Self {
            time_s: time,
            vehicle_id: v.id,
            class: v.class.as_str().to_string(),
            position_m: v.position,
            speed_mps: v.speed,
            accel_mps2: v.accel,
            energy_wh: v.energy_wh,
            signal_phase,
            signal_remaining_s: remaining,
        }
    }

    pub fn in_platoon(&self) -> bool {
        VehicleClass::parse(&self.class).is_some_and(|c| c.in_platoon())
    }
}

/// Records rows for every vehicle on the lane, plus one final row for each
/// platoon vehicle in the step it leaves the lane.
#[derive(Debug, Default)]
pub struct TrajectoryLogger {
    rows: Vec<TrajectoryRow>,
    departed: Vec<u32>,
}

impl TrajectoryLogger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, world: &World) {
        let time = world.time();
        let signal = world.signal_state();
        let slot = SignalProgram::encoding_index(&signal);
        for v in world.vehicles() {
            self.rows
                .push(TrajectoryRow::from_state(time, v, slot, signal.remaining));
        }
        for &id in world.platoon_ids() {
            if world.lane_index(id).is_none() && !self.departed.contains(&id) {
                self.departed.push(id);
                let v = world.vehicle(id).expect("platoon vehicle exists");
                self.rows
                    .push(TrajectoryRow::from_state(time, v, slot, signal.remaining));
            }
        }
    }

    pub fn into_rows(self) -> Vec<TrajectoryRow> {
        self.rows
    }
}

pub fn write_csv<W: Write>(rows: &[TrajectoryRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Trajectory(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRow>, Error> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| Error::Trajectory(e.to_string())))
        .collect()
}

/// Per-episode platoon metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub vehicles: usize,
    pub delay_per_vehicle: f64,
    pub energy_per_vehicle: f64,
    pub total_energy: f64,
    pub full_stops: usize,
    pub all_crossed: bool,
}

/// Thresholds and geometry needed to turn rows into metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    pub lane_length: f64,
    pub speed_limit: f64,
    pub stop_speed: f64,
}

impl MetricParams {
    pub fn from_config(cfg: &crate::config::ScenarioConfig) -> Self {
        Self {
            lane_length: cfg.world.lane_length_m,
            speed_limit: cfg.world.speed_limit_mps,
            stop_speed: cfg.eval.stop_speed_mps,
        }
    }
}

/// Number of debounced stops in a speed trace: each maximal run of at least
/// two consecutive samples below `threshold` counts once.
pub fn count_stops(speeds: impl IntoIterator<Item = f64>, threshold: f64) -> usize {
    let mut stops = 0;
    let mut run = 0;
    for v in speeds {
        if v < threshold {
            run += 1;
            if run == 2 {
                stops += 1;
            }
        } else {
            run = 0;
        }
    }
    stops
}

/// Platoon metrics of one episode from its trajectory rows.
///
/// The episode starts at the ego's first row and ends at the last row. A
/// crossing is interpolated between the two rows that straddle the stop
/// line; a vehicle that never crosses is charged delay up to the end.
pub fn episode_metrics(rows: &[TrajectoryRow], params: &MetricParams) -> Result<EpisodeMetrics, Error> {
    let mut traces: BTreeMap<u32, Vec<&TrajectoryRow>> = BTreeMap::new();
    let mut t0 = None;
    let mut end = f64::NEG_INFINITY;
    for row in rows {
        end = end.max(row.time_s);
        if !row.in_platoon() {
            continue;
        }
        if row.class == VehicleClass::EgoCav.as_str() && t0.is_none() {
            t0 = Some(row.time_s);
        }
        traces.entry(row.vehicle_id).or_default().push(row);
    }
    let t0 = t0.ok_or_else(|| Error::Trajectory("no ego vehicle rows".into()))?;
    let free_flow = params.lane_length / params.speed_limit;

    let mut delay_sum = 0.0;
    let mut energy_sum = 0.0;
    let mut stops = 0;
    let mut all_crossed = true;
    for trace in traces.values() {
        let mut crossing = None;
        let mut before_line = Vec::with_capacity(trace.len());
        for (i, row) in trace.iter().enumerate() {
            if row.position_m >= params.lane_length {
                if i > 0 {
                    let prev = trace[i - 1];
                    if prev.position_m < params.lane_length {
                        crossing = Some(
                            prev.time_s
                                + (row.time_s - prev.time_s) * (params.lane_length - prev.position_m)
                                    / (row.position_m - prev.position_m),
                        );
                    }
                }
                break;
            }
            before_line.push(row.speed_mps);
        }
        if crossing.is_none() {
            all_crossed = false;
        }
        delay_sum += crossing.unwrap_or(end) - t0 - free_flow;
        energy_sum += trace.last().expect("non-empty trace").energy_wh;
        stops += count_stops(before_line, params.stop_speed);
    }
    let n = traces.len();
    Ok(EpisodeMetrics {
        vehicles: n,
        delay_per_vehicle: delay_sum / n as f64,
        energy_per_vehicle: energy_sum / n as f64,
        total_energy: energy_sum,
        full_stops: stops,
        all_crossed,
    })
}

/// Means (and a few spreads) over a set of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub delay_per_vehicle: f64,
    pub energy_per_vehicle: f64,
    pub total_energy: f64,
    /// Mean full stops per episode, summed over the platoon.
    pub full_stops: f64,
    pub stop_free_fraction: f64,
    /// Population variance of the per-episode platoon energy.
    pub total_energy_var: f64,
    pub delay_var: f64,
}

impl Metrics {
    pub fn aggregate(episodes: &[EpisodeMetrics]) -> Self {
        let n = episodes.len().max(1) as f64;
        let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| episodes.iter().map(f).sum::<f64>() / n;
        let var = |f: &dyn Fn(&EpisodeMetrics) -> f64| {
            let m = mean(f);
            episodes.iter().map(|e| (f(e) - m).powi(2)).sum::<f64>() / n
        };
        Self {
            episodes: episodes.len(),
            delay_per_vehicle: mean(&|e| e.delay_per_vehicle),
            energy_per_vehicle: mean(&|e| e.energy_per_vehicle),
            total_energy: mean(&|e| e.total_energy),
            full_stops: mean(&|e| e.full_stops as f64),
            stop_free_fraction: mean(&|e| if e.full_stops == 0 { 1.0 } else { 0.0 }),
            total_energy_var: var(&|e| e.total_energy),
            delay_var: var(&|e| e.delay_per_vehicle),
        }
    }
}
