use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{LinearPolicy, PolicySnapshot, RunningStat};
use crate::config::{ArsConfig, ScenarioConfig};
use crate::env::PlatoonEnv;
use crate::error::TrainError;

/// Weight of the previous value in the reward moving average.
pub const SMOOTHING: f64 = 0.8;
/// Weight of the newest value; kept as its own literal so the recursion is
/// exactly `0.8·prev + 0.2·new`.
const SMOOTHING_NEW: f64 = 0.2;

const EVAL_SALT: u64 = 0x5EED_E7A1_0000_0001;

/// Something that can run one complete episode under a fixed policy and
/// report its total reward. Implementations must be deterministic in `seed`.
pub trait RolloutEnv: Sync {
    fn obs_dim(&self) -> usize;

    /// Runs one episode. When `visited` is given, every observation the
    /// policy acted on is pushed into it.
    fn rollout(
        &self,
        policy: &PolicySnapshot,
        seed: u64,
        visited: Option<&mut RunningStat>,
    ) -> Result<f64, TrainError>;
}

/// Full platoon episodes; the return is the undiscounted sum of step rewards.
#[derive(Debug, Clone)]
pub struct PlatoonRollout {
    cfg: ScenarioConfig,
    dim: usize,
}

impl PlatoonRollout {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, crate::error::ConfigError> {
        let dim = PlatoonEnv::new(cfg.clone())?.obs_dim();
        Ok(Self { cfg, dim })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn action_bounds(&self) -> (f64, f64) {
        (self.cfg.world.accel_min_mps2, self.cfg.world.accel_max_mps2)
    }
}

impl RolloutEnv for PlatoonRollout {
    fn obs_dim(&self) -> usize {
        self.dim
    }

    fn rollout(
        &self,
        policy: &PolicySnapshot,
        seed: u64,
        mut visited: Option<&mut RunningStat>,
    ) -> Result<f64, TrainError> {
        let mut env = PlatoonEnv::new(self.cfg.clone()).expect("validated at construction");
        let mut obs = env.reset(seed)?;
        let mut total = 0.0;
        loop {
            if let Some(stat) = visited.as_deref_mut() {
                stat.push(&obs);
            }
            let action = policy.act(&obs)?;
            let (reward, done) = env.advance(action)?;
            total += reward;
            if done {
                return Ok(total);
            }
            env.observe_into(&mut obs);
        }
    }
}

/// Synthetic one-step task: reward is `-|w - target|²` of the (perturbed)
/// weights themselves. Used to check the optimiser in isolation.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub target: Vec<f64>,
}

impl RolloutEnv for QuadraticObjective {
    fn obs_dim(&self) -> usize {
        self.target.len()
    }

    fn rollout(
        &self,
        policy: &PolicySnapshot,
        _seed: u64,
        _visited: Option<&mut RunningStat>,
    ) -> Result<f64, TrainError> {
        Ok(-policy
            .weights
            .iter()
            .zip(&self.target)
            .map(|(w, t)| (w - t).powi(2))
            .sum::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    /// (r+, r-) for every direction, in sampling order.
    pub rewards: Vec<(f64, f64)>,
    pub mean_reward: f64,
    pub smoothed_reward: f64,
    pub eval_reward: Option<f64>,
    pub update_norm: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Environment seed for direction `k` of iteration `j`. Both signs of a
/// direction share it so each pair sees the same traffic.
pub fn episode_seed(base: u64, iteration: u64, direction: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ iteration) ^ direction)
}

/// `count` independent standard-normal directions of length `dim`.
pub fn sample_directions(
    count: usize,
    dim: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, TrainError> {
    if count == 0 {
        return Err(TrainError::NoDirections);
    }
    Ok((0..count)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect())
}

/// Population standard deviation.
fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Top-b update of `theta`. Directions are ranked by max(r+, r-) (ties keep
/// sampling order); the step is scaled by the standard deviation of the 2b
/// retained rewards and skipped when that is zero. Returns the update norm.
pub fn update_policy(
    theta: &mut [f64],
    directions: &[Vec<f64>],
    rewards: &[(f64, f64)],
    step_size: f64,
    top: usize,
) -> f64 {
    assert_eq!(directions.len(), rewards.len(), "one reward pair per direction");
    let top = top.min(directions.len());
    let mut order: Vec<usize> = (0..directions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = rewards[a].0.max(rewards[a].1);
        let rb = rewards[b].0.max(rewards[b].1);
        rb.total_cmp(&ra)
    });
    let kept = &order[..top];

    let retained: Vec<f64> = kept
        .iter()
        .flat_map(|&k| [rewards[k].0, rewards[k].1])
        .collect();
    let sigma_r = std_dev(&retained);
    if sigma_r == 0.0 || !sigma_r.is_finite() {
        return 0.0;
    }

    let scale = step_size / (top as f64 * sigma_r);
    let mut step = vec![0.0; theta.len()];
    for &k in kept {
        let diff = rewards[k].0 - rewards[k].1;
        for (s, m) in step.iter_mut().zip(&directions[k]) {
            *s += diff * m;
        }
    }
    let mut norm2 = 0.0;
    for (t, s) in theta.iter_mut().zip(&step) {
        let delta = scale * s;
        *t += delta;
        norm2 += delta * delta;
    }
    norm2.sqrt()
}

/// Runs both signs of every direction (in parallel) and returns the paired
/// rewards together with the merged statistics of all visited states. The
/// merge order is fixed, so results do not depend on scheduling.
pub fn collect_rollouts<E: RolloutEnv>(
    policy: &LinearPolicy,
    directions: &[Vec<f64>],
    env: &E,
    cfg: &ArsConfig,
    iteration: u64,
    bounds: (f64, f64),
) -> Result<(Vec<(f64, f64)>, RunningStat), TrainError> {
    let jobs: Vec<(usize, f64)> = (0..directions.len())
        .flat_map(|k| [(k, 1.0), (k, -1.0)])
        .collect();
    let results: Vec<Result<(f64, RunningStat), TrainError>> = jobs
        .par_iter()
        .map(|&(k, sign)| {
            let snap = policy.snapshot(Some((sign, &directions[k])), cfg.noise_std, bounds);
            let mut seen = RunningStat::new(policy.dim());
            let seed = episode_seed(cfg.seed, iteration, k as u64);
            let r = env.rollout(&snap, seed, Some(&mut seen))?;
            Ok((r, seen))
        })
        .collect();

    let mut visited = RunningStat::new(policy.dim());
    let mut rewards = vec![(0.0, 0.0); directions.len()];
    for (&(k, sign), res) in jobs.iter().zip(results) {
        let (r, seen) = res?;
        if sign > 0.0 {
            rewards[k].0 = r;
        } else {
            rewards[k].1 = r;
        }
        visited.merge(&seen);
    }
    Ok((rewards, visited))
}

/// Mean reward of the unperturbed policy; the normaliser is not updated.
pub fn evaluate<E: RolloutEnv>(
    policy: &LinearPolicy,
    env: &E,
    seeds: &[u64],
    bounds: (f64, f64),
) -> Result<f64, TrainError> {
    let snap = policy.snapshot(None, 0.0, bounds);
    let rewards: Vec<Result<f64, TrainError>> = seeds
        .par_iter()
        .map(|&s| env.rollout(&snap, s, None))
        .collect();
    let mut total = 0.0;
    for r in rewards {
        total += r?;
    }
    Ok(total / seeds.len() as f64)
}

/// Full training loop. `on_iteration` sees every report and the policy right
/// after the corresponding update.
pub fn train<E: RolloutEnv>(
    cfg: &ArsConfig,
    env: &E,
    bounds: (f64, f64),
    mut on_iteration: impl FnMut(&IterationReport, &LinearPolicy),
) -> Result<(LinearPolicy, Vec<IterationReport>), TrainError> {
    if cfg.directions == 0 {
        return Err(TrainError::NoDirections);
    }
    let mut policy = LinearPolicy::zeros(env.obs_dim());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reports = Vec::with_capacity(cfg.iterations);
    let mut smoothed: Option<f64> = None;

    for j in 0..cfg.iterations {
        let directions = sample_directions(cfg.directions, policy.dim(), &mut rng)?;
        let (rewards, visited) = collect_rollouts(&policy, &directions, env, cfg, j as u64, bounds)?;
        let update_norm = update_policy(
            &mut policy.theta,
            &directions,
            &rewards,
            cfg.step_size,
            cfg.top_directions,
        );
        policy.update_normalizer(&visited);

        let mean_reward =
            rewards.iter().map(|(a, b)| a + b).sum::<f64>() / (2 * rewards.len()) as f64;
        let s = match smoothed {
            Some(prev) => SMOOTHING * prev + SMOOTHING_NEW * mean_reward,
            None => mean_reward,
        };
        smoothed = Some(s);

        let last = j + 1 == cfg.iterations;
        let due = cfg.eval_interval > 0 && ((j + 1) % cfg.eval_interval == 0 || last);
        let eval_reward = if due && cfg.eval_episodes > 0 {
            let seeds: Vec<u64> = (0..cfg.eval_episodes as u64)
                .map(|e| episode_seed(cfg.seed ^ EVAL_SALT, j as u64, e))
                .collect();
            Some(evaluate(&policy, env, &seeds, bounds)?)
        } else {
            None
        };

        let report = IterationReport {
            iteration: j,
            rewards,
            mean_reward,
            smoothed_reward: s,
            eval_reward,
            update_norm,
        };
        on_iteration(&report, &policy);
        reports.push(report);
    }
    Ok((policy, reports))
}
