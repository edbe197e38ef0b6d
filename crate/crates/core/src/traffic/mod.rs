//! Single-lane approach to a fixed-time signalized intersection.

mod idm;
mod signal;
mod vehicle;
mod world;

pub use idm::{idm_acceleration, IdmParams};
pub use signal::{SignalColor, SignalPhase, SignalProgram, SignalState, APPROACH_MOVEMENT};
pub use vehicle::{VehicleClass, VehicleState, VIRTUAL_LEADER_ID};
pub use world::{Crossing, World};
