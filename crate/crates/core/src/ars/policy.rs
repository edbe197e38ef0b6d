use super::RunningStat;
use crate::error::PolicyError;

/// Variance floor applied before the inverse square root.
pub const VARIANCE_FLOOR: f64 = 1e-8;

/// Linear policy with a single action output and running observation
/// statistics used for whitening.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    pub theta: Vec<f64>,
    stats: RunningStat,
}

impl LinearPolicy {
    /// Zero weights, zero mean, unit variance.
    pub fn zeros(dim: usize) -> Self {
        Self {
            theta: vec![0.0; dim],
            stats: RunningStat::new(dim),
        }
    }

    pub fn from_parts(theta: Vec<f64>, stats: RunningStat) -> Result<Self, PolicyError> {
        if theta.len() != stats.dim() {
            return Err(PolicyError::DimensionMismatch {
                expected: theta.len(),
                found: stats.dim(),
            });
        }
        Ok(Self { theta, stats })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn stats(&self) -> &RunningStat {
        &self.stats
    }

    pub fn obs_count(&self) -> u64 {
        self.stats.count()
    }

    /// Normalisation mean σ.
    pub fn norm_mean(&self) -> Vec<f64> {
        self.stats.mean().to_vec()
    }

    /// Diagonal of Σ: the running variance, or the identity before any
    /// observation has been seen.
    pub fn norm_var(&self) -> Vec<f64> {
        if self.stats.count() == 0 {
            vec![1.0; self.dim()]
        } else {
            self.stats.variance()
        }
    }

    pub fn update_normalizer(&mut self, batch: &RunningStat) {
        self.stats.merge(batch);
    }

    /// Read-only view for rollouts, optionally perturbed by `sign·ν·μ`.
    pub fn snapshot(
        &self,
        perturbation: Option<(f64, &[f64])>,
        noise_std: f64,
        bounds: (f64, f64),
    ) -> PolicySnapshot {
        let weights = match perturbation {
            Some((sign, mu)) => self
                .theta
                .iter()
                .zip(mu)
                .map(|(t, m)| t + sign * noise_std * m)
                .collect(),
            None => self.theta.clone(),
        };
        PolicySnapshot {
            weights,
            mean: self.norm_mean(),
            inv_std: self
                .norm_var()
                .iter()
                .map(|v| 1.0 / v.max(VARIANCE_FLOOR).sqrt())
                .collect(),
            bounds,
        }
    }

    /// Unperturbed action for `obs`.
    pub fn act(&self, obs: &[f64], bounds: (f64, f64)) -> Result<f64, PolicyError> {
        self.snapshot(None, 0.0, bounds).act(obs)
    }
}

/// Frozen weights and whitening parameters; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySnapshot {
    pub weights: Vec<f64>,
    pub mean: Vec<f64>,
    pub inv_std: Vec<f64>,
    pub bounds: (f64, f64),
}

impl PolicySnapshot {
    /// Whitened linear response before clipping.
    pub fn raw(&self, obs: &[f64]) -> Result<f64, PolicyError> {
        if obs.len() != self.weights.len() {
            return Err(PolicyError::DimensionMismatch {
                expected: self.weights.len(),
                found: obs.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(obs)
            .zip(self.mean.iter().zip(&self.inv_std))
            .map(|((w, x), (m, s))| w * (x - m) * s)
            .sum())
    }

    pub fn act(&self, obs: &[f64]) -> Result<f64, PolicyError> {
        let (lo, hi) = self.bounds;
        let a = self.raw(obs)?;
        Ok(if a.is_nan() { 0.0 } else { a.clamp(lo, hi) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUNDS: (f64, f64) = (-4.5, 3.0);

    #[test]
    fn zero_policy_outputs_zero() {
        let p = LinearPolicy::zeros(4);
        assert_eq!(p.act(&[1.0, -3.0, 7.0, 2.0], BOUNDS).unwrap(), 0.0);
        assert_eq!(p.norm_var(), vec![1.0; 4]);
    }

    #[test]
    fn perturbed_basis_direction() {
        let p = LinearPolicy::zeros(3);
        let mu = [1.0, 0.0, 0.0];
        let s = p.snapshot(Some((1.0, &mu)), 0.2, BOUNDS);
        assert!((s.raw(&[5.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-12);
        let s = p.snapshot(Some((-1.0, &mu)), 0.2, BOUNDS);
        assert!((s.raw(&[5.0, 0.0, 0.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn centred_input_gives_zero() {
        let mut stat = RunningStat::new(2);
        stat.push(&[1.0, 2.0]);
        stat.push(&[3.0, 6.0]);
        let p = LinearPolicy::from_parts(vec![5.0, -7.0], stat).unwrap();
        assert_eq!(p.act(&[2.0, 4.0], BOUNDS).unwrap(), 0.0);
    }

    #[test]
    fn output_is_clipped() {
        let mut p = LinearPolicy::zeros(1);
        p.theta[0] = 100.0;
        assert_eq!(p.act(&[1.0], BOUNDS).unwrap(), 3.0);
        assert_eq!(p.act(&[-1.0], BOUNDS).unwrap(), -4.5);
    }

    #[test]
    fn constant_dimension_is_floored() {
        let mut stat = RunningStat::new(1);
        stat.push(&[2.0]);
        stat.push(&[2.0]);
        let p = LinearPolicy::from_parts(vec![1e-6], stat).unwrap();
        let s = p.snapshot(None, 0.0, BOUNDS);
        assert_eq!(s.inv_std[0], 1e4);
        assert!((s.raw(&[3.0]).unwrap() - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = LinearPolicy::zeros(20);
        let err = p.act(&[0.0; 24], BOUNDS).unwrap_err();
        assert!(err.to_string().contains("p=20"));
        assert!(err.to_string().contains("p=24"));
    }
}
