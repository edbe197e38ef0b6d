//! Mixed-platoon eco-driving at a fixed-time signal: a single-lane traffic
//! world, an electric-vehicle energy model, the episodic control problem
//! around them, and an Augmented Random Search trainer for linear policies.

pub mod ars;
pub mod config;
pub mod energy;
pub mod env;
pub mod error;
pub mod eval;
pub mod traffic;

pub use config::ScenarioConfig;
pub use error::Error;
