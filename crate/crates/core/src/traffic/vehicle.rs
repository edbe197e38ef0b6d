use serde::{Deserialize, Serialize};

/// Id carried by the virtual stop-line leader.
pub const VIRTUAL_LEADER_ID: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VehicleClass {
    EgoCav,
    PlatoonHdv,
    BackgroundHdv,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::EgoCav => "ego_cav",
            VehicleClass::PlatoonHdv => "platoon_hdv",
            VehicleClass::BackgroundHdv => "background_hdv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ego_cav" => Some(VehicleClass::EgoCav),
            "platoon_hdv" => Some(VehicleClass::PlatoonHdv),
            "background_hdv" => Some(VehicleClass::BackgroundHdv),
            _ => None,
        }
    }

    pub fn in_platoon(self) -> bool {
        !matches!(self, VehicleClass::BackgroundHdv)
    }
}

/// Kinematic state of one vehicle. `position` is the front bumper, measured
/// from the lane origin toward the stop line.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: u32,
    pub class: VehicleClass,
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    pub length: f64,
    pub crossed_at: Option<f64>,
    pub energy_wh: f64,
}

impl VehicleState {
    pub fn new(id: u32, class: VehicleClass, position: f64, speed: f64, length: f64) -> Self {
        Self {
            id,
            class,
            position,
            speed,
            accel: 0.0,
            length,
            crossed_at: None,
            energy_wh: 0.0,
        }
    }

    /// Zero-length stationary obstacle standing on the stop line.
    pub fn stop_line(stop_line: f64) -> Self {
        Self::new(VIRTUAL_LEADER_ID, VehicleClass::BackgroundHdv, stop_line, 0.0, 0.0)
    }

    pub fn rear(&self) -> f64 {
        self.position - self.length
    }

    /// Bumper-to-bumper distance from `self` to `leader`.
    pub fn gap_to(&self, leader: &VehicleState) -> f64 {
        leader.rear() - self.position
    }

    pub fn is_virtual(&self) -> bool {
        self.id == VIRTUAL_LEADER_ID
    }
}
