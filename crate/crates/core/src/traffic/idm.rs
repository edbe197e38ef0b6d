use serde::{Deserialize, Serialize};

use super::VehicleState;
use crate::config::check;
use crate::error::{ConfigError, TrafficError};

/// Intelligent Driver Model parameters. `comfort_decel` is a positive
/// magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmParams {
    #[serde(rename = "max_accel_mps2")]
    pub max_accel: f64,
    #[serde(rename = "desired_speed_mps")]
    pub desired_speed: f64,
    #[serde(rename = "min_gap_m")]
    pub min_gap: f64,
    #[serde(rename = "time_headway_s")]
    pub time_headway: f64,
    #[serde(rename = "comfort_decel_mps2")]
    pub comfort_decel: f64,
    /// Free-road exponent. 4 is the usual IDM; 1 gives the linear free-road term.
    pub delta: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            max_accel: 3.0,
            desired_speed: 13.88,
            min_gap: 2.0,
            time_headway: 1.0,
            comfort_decel: 2.8,
            delta: 4.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("idm.max_accel_mps2", self.max_accel > 0.0, "must be > 0")?;
        check("idm.desired_speed_mps", self.desired_speed > 0.0, "must be > 0")?;
        check("idm.min_gap_m", self.min_gap >= 0.0, "must be >= 0")?;
        check("idm.time_headway_s", self.time_headway >= 0.0, "must be >= 0")?;
        check("idm.comfort_decel_mps2", self.comfort_decel > 0.0, "must be > 0 (magnitude)")?;
        check("idm.delta", self.delta >= 1.0, "must be >= 1")?;
        Ok(())
    }

    /// Desired dynamic gap s* for speed `v` closing at `approach_rate`.
    pub fn desired_gap(&self, v: f64, approach_rate: f64) -> f64 {
        self.min_gap
            + self.time_headway * v
            + v * approach_rate / (2.0 * (self.max_accel * self.comfort_decel).sqrt())
    }

    /// Gap at which a follower at steady speed `v` behind a leader at the
    /// same speed has zero acceleration. Infinite at or above the desired speed.
    pub fn equilibrium_gap(&self, v: f64) -> f64 {
        let free = 1.0 - self.free_road_term(v);
        if free <= 0.0 {
            f64::INFINITY
        } else {
            self.desired_gap(v, 0.0) / free.sqrt()
        }
    }

    fn free_road_term(&self, v: f64) -> f64 {
        let ratio = v / self.desired_speed;
        if self.delta == 4.0 {
            let sq = ratio * ratio;
            sq * sq
        } else {
            ratio.powf(self.delta)
        }
    }
}

/// Unclamped IDM acceleration of `follower`. Without a leader the
/// interaction term vanishes.
pub fn idm_acceleration(
    follower: &VehicleState,
    leader: Option<&VehicleState>,
    p: &IdmParams,
) -> Result<f64, TrafficError> {
    let v = follower.speed;
    let free = 1.0 - p.free_road_term(v);
    let interaction = match leader {
        None => 0.0,
        Some(lead) => {
            let gap = follower.gap_to(lead);
            if gap <= 0.0 {
                return Err(TrafficError::NonPositiveGap {
                    follower: follower.id,
                    leader: lead.id,
                    gap,
                });
            }
            let ratio = p.desired_gap(v, v - lead.speed) / gap;
            ratio * ratio
        }
    };
    Ok(p.max_accel * (free - interaction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::VehicleClass;

    fn car(position: f64, speed: f64) -> VehicleState {
        VehicleState::new(1, VehicleClass::PlatoonHdv, position, speed, 5.0)
    }

    #[test]
    fn free_flow_from_rest_is_full_accel() {
        let a = idm_acceleration(&car(0.0, 0.0), None, &IdmParams::default()).unwrap();
        assert_eq!(a, 3.0);
    }

    #[test]
    fn desired_speed_is_fixed_point() {
        let a = idm_acceleration(&car(0.0, 13.88), None, &IdmParams::default()).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn following_at_minimum_dynamic_gap() {
        let p = IdmParams::default();
        let gap = p.min_gap + p.time_headway * 10.0;
        let follower = car(100.0, 10.0);
        let leader = VehicleState::new(2, VehicleClass::PlatoonHdv, 100.0 + gap + 5.0, 10.0, 5.0);
        let a = idm_acceleration(&follower, Some(&leader), &p).unwrap();
        // independent scalar evaluation of the closed form
        let expected = 3.0 * (1.0 - (10.0f64 / 13.88).powi(4) - 1.0);
        assert!((a - expected).abs() < 1e-12);
        assert!((a + 0.809).abs() < 1e-3);
    }

    #[test]
    fn linear_free_road_term() {
        let p = IdmParams {
            delta: 1.0,
            ..IdmParams::default()
        };
        let a = idm_acceleration(&car(0.0, 6.94), None, &p).unwrap();
        assert!((a - 1.5).abs() < 1e-12);
    }

    #[test]
    fn overlap_is_an_error() {
        let follower = car(100.0, 5.0);
        let leader = VehicleState::new(2, VehicleClass::PlatoonHdv, 104.0, 5.0, 5.0);
        let err = idm_acceleration(&follower, Some(&leader), &IdmParams::default()).unwrap_err();
        assert!(matches!(err, TrafficError::NonPositiveGap { .. }));
    }

    #[test]
    fn equilibrium_gap_zeroes_acceleration() {
        let p = IdmParams::default();
        for v in [2.0, 7.5, 10.0, 13.0] {
            let gap = p.equilibrium_gap(v);
            let follower = car(0.0, v);
            let leader = VehicleState::new(2, VehicleClass::PlatoonHdv, gap + 5.0, v, 5.0);
            let a = idm_acceleration(&follower, Some(&leader), &p).unwrap();
            assert!(a.abs() < 1e-9, "v={v} a={a}");
        }
        assert!(p.equilibrium_gap(13.88).is_infinite());
    }
}
