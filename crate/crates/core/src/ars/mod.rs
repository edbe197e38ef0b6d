//! Augmented Random Search over a linear policy with observation whitening.

pub mod checkpoint;
mod normalizer;
mod policy;
mod trainer;

pub use normalizer::RunningStat;
pub use policy::{LinearPolicy, PolicySnapshot, VARIANCE_FLOOR};
pub use trainer::{
    collect_rollouts, episode_seed, evaluate, sample_directions, train, update_policy,
    IterationReport, PlatoonRollout, QuadraticObjective, RolloutEnv, SMOOTHING,
};
