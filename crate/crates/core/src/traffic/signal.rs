use std::collections::BTreeSet;

use crate::config::check;
use crate::error::ConfigError;

/// Movement name of the simulated approach.
pub const APPROACH_MOVEMENT: &str = "ego_through";

const DEFAULT_MOVEMENTS: [&[&str]; 4] = [
    &[APPROACH_MOVEMENT, "opposing_through"],
    &["ego_left", "opposing_left"],
    &["cross_through", "cross_opposing_through"],
    &["cross_left", "cross_opposing_left"],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SignalPhase {
    pub green: f64,
    pub served_movements: BTreeSet<String>,
}

/// Fixed-time program: each phase's green is followed by a yellow of the
/// same length for every phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalProgram {
    phases: Vec<SignalPhase>,
    yellow: f64,
    offset: f64,
    approach_movement: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalState {
    pub phase_index: usize,
    pub is_yellow: bool,
    /// Time until the current green or yellow interval ends.
    pub remaining: f64,
    /// True only during a green interval that serves the approach.
    pub approach_proceed: bool,
    /// True during the green or yellow of a phase serving the approach.
    pub approach_phase_active: bool,
}

impl SignalProgram {
    pub fn new(
        phases: Vec<SignalPhase>,
        yellow: f64,
        offset: f64,
        approach_movement: impl Into<String>,
    ) -> Result<Self, ConfigError> {
        let approach_movement = approach_movement.into();
        check("signal.green_s", !phases.is_empty(), "needs at least one phase")?;
        check(
            "signal.green_s",
            phases.iter().all(|p| p.green.is_finite() && p.green > 0.0),
            "every green must be > 0",
        )?;
        check("signal.yellow_s", yellow.is_finite() && yellow >= 0.0, "must be >= 0")?;
        check("signal.offset_s", offset.is_finite(), "must be finite")?;
        check(
            "signal.approach_phase",
            phases.iter().any(|p| p.served_movements.contains(&approach_movement)),
            "no phase serves the approach",
        )?;
        Ok(Self {
            phases,
            yellow,
            offset,
            approach_movement,
        })
    }

    /// Program with one movement set per phase; phase `approach_phase` serves
    /// the simulated approach.
    pub fn fixed_cycle(
        greens: &[f64],
        yellow: f64,
        offset: f64,
        approach_phase: usize,
    ) -> Result<Self, ConfigError> {
        check(
            "signal.approach_phase",
            approach_phase < greens.len(),
            "must index one of the phases in signal.green_s",
        )?;
        let mut others = DEFAULT_MOVEMENTS[1..].iter();
        let phases = greens
            .iter()
            .enumerate()
            .map(|(i, &green)| {
                let served_movements = if i == approach_phase {
                    DEFAULT_MOVEMENTS[0].iter().map(|m| m.to_string()).collect()
                } else {
                    match others.next() {
                        Some(set) => set.iter().map(|m| m.to_string()).collect(),
                        None => [format!("phase_{i}")].into_iter().collect(),
                    }
                };
                SignalPhase {
                    green,
                    served_movements,
                }
            })
            .collect();
        Self::new(phases, yellow, offset, APPROACH_MOVEMENT)
    }

    /// Permanent green for the approach.
    pub fn always_green() -> Self {
        Self::fixed_cycle(&[3600.0], 0.0, 0.0, 0).expect("static program is valid")
    }

    pub fn phases(&self) -> &[SignalPhase] {
        &self.phases
    }

    pub fn yellow(&self) -> f64 {
        self.yellow
    }

    pub fn cycle_length(&self) -> f64 {
        self.phases.iter().map(|p| p.green).sum::<f64>() + self.phases.len() as f64 * self.yellow
    }

    /// Length of the phase one-hot encoding: one slot per green and one per
    /// trailing yellow.
    pub fn phase_dim(&self) -> usize {
        2 * self.phases.len()
    }

    pub fn encoding_index(state: &SignalState) -> usize {
        2 * state.phase_index + usize::from(state.is_yellow)
    }

    fn serves_approach(&self, phase: usize) -> bool {
        self.phases[phase].served_movements.contains(&self.approach_movement)
    }

    pub fn query(&self, t: f64) -> SignalState {
        let mut tau = (t - self.offset).rem_euclid(self.cycle_length());
        for (i, phase) in self.phases.iter().enumerate() {
            let serves = self.serves_approach(i);
            if tau < phase.green {
                return SignalState {
                    phase_index: i,
                    is_yellow: false,
                    remaining: phase.green - tau,
                    approach_proceed: serves,
                    approach_phase_active: serves,
                };
            }
            tau -= phase.green;
            if tau < self.yellow {
                return SignalState {
                    phase_index: i,
                    is_yellow: true,
                    remaining: self.yellow - tau,
                    approach_proceed: false,
                    approach_phase_active: serves,
                };
            }
            tau -= self.yellow;
        }
        // rem_euclid can return exactly the cycle length after rounding
        self.query_at_cycle_start()
    }

    fn query_at_cycle_start(&self) -> SignalState {
        let serves = self.serves_approach(0);
        SignalState {
            phase_index: 0,
            is_yellow: false,
            remaining: self.phases[0].green,
            approach_proceed: serves,
            approach_phase_active: serves,
        }
    }

    /// Time from `t` until the approach next shows green; zero while it is green.
    pub fn time_until_green(&self, t: f64) -> f64 {
        let cycle = self.cycle_length();
        let tau = (t - self.offset).rem_euclid(cycle);
        let mut start = 0.0;
        let mut best = f64::INFINITY;
        for (i, phase) in self.phases.iter().enumerate() {
            if self.serves_approach(i) {
                if tau >= start && tau < start + phase.green {
                    return 0.0;
                }
                let wait = (start - tau).rem_euclid(cycle);
                best = best.min(wait);
            }
            start += phase.green + self.yellow;
        }
        best
    }

    /// Time from `t` until the next onset of an approach green. Unlike
    /// [`time_until_green`](Self::time_until_green) this is positive while
    /// the approach is green: it points at the following green.
    pub fn time_until_next_green_start(&self, t: f64) -> f64 {
        let cycle = self.cycle_length();
        let tau = (t - self.offset).rem_euclid(cycle);
        let mut start = 0.0;
        let mut best = f64::INFINITY;
        for (i, phase) in self.phases.iter().enumerate() {
            if self.serves_approach(i) {
                let mut wait = (start - tau).rem_euclid(cycle);
                if wait == 0.0 {
                    wait = cycle;
                }
                best = best.min(wait);
            }
            start += phase.green + self.yellow;
        }
        best
    }

    /// Approach signal colour intervals covering `[t0, t1]`, for plotting.
    pub fn approach_bands(&self, t0: f64, t1: f64) -> Vec<(f64, f64, SignalColor)> {
        let mut out: Vec<(f64, f64, SignalColor)> = Vec::new();
        let mut t = t0;
        while t < t1 {
            let s = self.query(t);
            let colour = if s.approach_proceed {
                SignalColor::Green
            } else if s.is_yellow && s.approach_phase_active {
                SignalColor::Yellow
            } else {
                SignalColor::Red
            };
            let end = (t + s.remaining).min(t1);
            match out.last_mut() {
                Some(last) if last.2 == colour && last.1 == t => last.1 = end,
                _ => out.push((t, end, colour)),
            }
            t = end;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalColor {
    Green,
    Yellow,
    Red,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_program() -> SignalProgram {
        SignalProgram::fixed_cycle(&[30.0; 4], 3.0, 0.0, 0).unwrap()
    }

    #[test]
    fn cycle_arithmetic() {
        let p = default_program();
        assert_eq!(p.cycle_length(), 132.0);
        assert_eq!(p.phase_dim(), 8);
    }

    #[test]
    fn cycle_start() {
        let s = default_program().query(0.0);
        assert_eq!((s.phase_index, s.is_yellow, s.remaining, s.approach_proceed), (0, false, 30.0, true));
    }

    #[test]
    fn inside_first_yellow() {
        let s = default_program().query(31.5);
        assert_eq!((s.phase_index, s.is_yellow, s.remaining, s.approach_proceed), (0, true, 1.5, false));
        assert!(s.approach_phase_active);
    }

    #[test]
    fn full_cycle_repeats() {
        let p = default_program();
        assert_eq!(p.query(132.0), p.query(0.0));
    }

    #[test]
    fn other_phases_block_approach() {
        let p = default_program();
        let s = p.query(40.0);
        assert_eq!(s.phase_index, 1);
        assert!(!s.approach_proceed && !s.approach_phase_active);
    }

    #[test]
    fn offset_shifts_timeline() {
        let p = SignalProgram::fixed_cycle(&[30.0; 4], 3.0, 10.0, 0).unwrap();
        assert_eq!(p.query(10.0), default_program().query(0.0));
        assert_eq!(p.query(5.0), default_program().query(127.0));
    }

    #[test]
    fn approach_on_later_phase() {
        let p = SignalProgram::fixed_cycle(&[30.0; 4], 3.0, 0.0, 2).unwrap();
        assert!(!p.query(0.0).approach_proceed);
        assert!(p.query(70.0).approach_proceed);
        assert_eq!(p.time_until_green(0.0), 66.0);
    }

    #[test]
    fn time_until_green() {
        let p = default_program();
        assert_eq!(p.time_until_green(10.0), 0.0);
        assert_eq!(p.time_until_green(30.0), 102.0);
        assert_eq!(p.time_until_green(112.0), 20.0);
    }

    #[test]
    fn next_green_start_skips_current_green() {
        let p = default_program();
        assert_eq!(p.time_until_next_green_start(10.0), 122.0);
        assert_eq!(p.time_until_next_green_start(0.0), 132.0);
        assert_eq!(p.time_until_next_green_start(112.0), 20.0);
    }

    #[test]
    fn rejects_bad_programs() {
        assert!(SignalProgram::fixed_cycle(&[], 3.0, 0.0, 0).is_err());
        assert!(SignalProgram::fixed_cycle(&[30.0, 0.0], 3.0, 0.0, 0).is_err());
        assert!(SignalProgram::fixed_cycle(&[30.0; 4], -1.0, 0.0, 0).is_err());
        assert!(SignalProgram::fixed_cycle(&[30.0; 4], 3.0, 0.0, 4).is_err());
    }

    #[test]
    fn bands_cover_cycle() {
        let bands = default_program().approach_bands(0.0, 132.0);
        assert_eq!(
            bands,
            vec![
                (0.0, 30.0, SignalColor::Green),
                (30.0, 33.0, SignalColor::Yellow),
                (33.0, 132.0, SignalColor::Red)
            ]
        );
    }

    proptest! {
        #[test]
        fn periodic(t in 0.0f64..10_000.0) {
            let p = default_program();
            let a = p.query(t);
            let b = p.query(t + p.cycle_length());
            prop_assert_eq!(a.phase_index, b.phase_index);
            prop_assert_eq!(a.is_yellow, b.is_yellow);
            prop_assert!((a.remaining - b.remaining).abs() < 1e-9);
        }

        #[test]
        fn remaining_is_positive_and_bounded(t in 0.0f64..10_000.0) {
            let s = default_program().query(t);
            prop_assert!(s.remaining > 0.0 && s.remaining <= 30.0);
        }
    }
}
