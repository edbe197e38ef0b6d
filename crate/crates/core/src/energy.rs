//! Longitudinal-physics battery draw of an electric vehicle with regenerative
//! braking.
//!
//! Per step, the mechanical demand is the change in kinetic energy plus the
//! aerodynamic and rolling losses at the mean speed of the step. Positive
//! demand is drawn through the propulsion efficiency; negative demand is
//! partially recovered through the recuperation efficiency. The road is flat.

use serde::{Deserialize, Serialize};

use crate::config::check;
use crate::error::ConfigError;

pub const JOULES_PER_WH: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvParams {
    pub mass_kg: f64,
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub roll_coeff: f64,
    pub air_density_kgpm3: f64,
    pub propulsion_eff: f64,
    pub recuperation_eff: f64,
    pub aux_power_w: f64,
    pub gravity_mps2: f64,
}

impl Default for EvParams {
    fn default() -> Self {
        Self {
            mass_kg: 1600.0,
            frontal_area_m2: 2.5,
            drag_coeff: 0.29,
            roll_coeff: 0.012,
            air_density_kgpm3: 1.225,
            propulsion_eff: 0.9,
            recuperation_eff: 0.6,
            aux_power_w: 0.0,
            gravity_mps2: 9.81,
        }
    }
}

impl EvParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("energy.mass_kg", self.mass_kg > 0.0, "must be > 0")?;
        check(
            "energy.propulsion_eff",
            self.propulsion_eff > 0.0 && self.propulsion_eff <= 1.0,
            "must be in (0, 1]",
        )?;
        check(
            "energy.recuperation_eff",
            (0.0..=1.0).contains(&self.recuperation_eff),
            "must be in [0, 1]",
        )?;
        check("energy.frontal_area_m2", self.frontal_area_m2 >= 0.0, "must be >= 0")?;
        check("energy.drag_coeff", self.drag_coeff >= 0.0, "must be >= 0")?;
        check("energy.roll_coeff", self.roll_coeff >= 0.0, "must be >= 0")?;
        check("energy.air_density_kgpm3", self.air_density_kgpm3 >= 0.0, "must be >= 0")?;
        check("energy.aux_power_w", self.aux_power_w >= 0.0, "must be >= 0")?;
        check("energy.gravity_mps2", self.gravity_mps2 >= 0.0, "must be >= 0")?;
        Ok(())
    }

    /// Resistive power (W) at a constant speed.
    pub fn loss_power(&self, speed: f64) -> f64 {
        0.5 * self.air_density_kgpm3 * self.frontal_area_m2 * self.drag_coeff * speed.powi(3)
            + self.roll_coeff * self.mass_kg * self.gravity_mps2 * speed
    }
}

/// Battery energy (Wh) drawn over one step from `v_prev` to `v_new`.
/// Negative values are energy recovered into the battery.
pub fn step_energy(v_prev: f64, v_new: f64, dt: f64, p: &EvParams) -> f64 {
    let kinetic = 0.5 * p.mass_kg * (v_new * v_new - v_prev * v_prev);
    let mean_speed = 0.5 * (v_prev + v_new);
    let demand = kinetic + p.loss_power(mean_speed) * dt;
    let aux = p.aux_power_w * dt;
    let draw = if demand >= 0.0 {
        demand / p.propulsion_eff + aux
    } else {
        (demand * p.recuperation_eff + aux).max(-demand.abs())
    };
    draw / JOULES_PER_WH
}
