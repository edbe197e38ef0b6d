use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("could not parse scenario: {0}")]
    Parse(String),
    #[error("could not read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    /// A follower reached or overlapped the rear bumper of its leader.
    #[error("collision at t={time:.3}s: vehicle {follower} behind {leader}, gap {gap:.4} m")]
    Collision {
        time: f64,
        follower: u32,
        leader: u32,
        gap: f64,
    },
    #[error("non-positive gap {gap:.4} m between vehicle {follower} and leader {leader}")]
    NonPositiveGap { follower: u32, leader: u32, gap: f64 },
    #[error("platoon could not be injected within {waited_s:.0}s: lane origin stayed blocked")]
    InjectionBlocked { waited_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("step called on a finished episode; call reset first")]
    EpisodeFinished,
    #[error("step called before reset")]
    NotReset,
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LookupError {
    #[error("vehicle {0} is not part of this episode record")]
    UnknownVehicle(u32),
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("observation dimension mismatch: policy has p={expected}, found p={found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("checkpoint is malformed: {0}")]
    Malformed(String),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("directions_per_iter must be >= 1")]
    NoDirections,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Top-level error for the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Lookup(#[from] LookupError),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trajectory data: {0}")]
    Trajectory(String),
}
