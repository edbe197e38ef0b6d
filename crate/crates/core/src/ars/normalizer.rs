/// Running per-dimension mean and population variance (Welford), with an
/// exact merge of independently accumulated batches (Chan et al.).
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStat {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStat {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    /// Rebuilds a statistic from its summary; `var` is the population variance.
    pub fn from_parts(count: u64, mean: Vec<f64>, var: &[f64]) -> Self {
        let m2 = var.iter().map(|v| v * count as f64).collect();
        Self { count, mean, m2 }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim());
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &xi) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = xi - *m;
            *m += delta / n;
            *s += delta * (xi - *m);
        }
    }

    pub fn merge(&mut self, other: &RunningStat) {
        debug_assert_eq!(other.dim(), self.dim());
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            self.clone_from(other);
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
    }

    /// Population variance; zero before any sample.
    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![0.0; self.dim()];
        }
        self.m2.iter().map(|s| s / self.count as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_pass(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let var = (0..dim)
            .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
            .collect();
        (mean, var)
    }

    #[test]
    fn constant_states_have_zero_variance() {
        let mut s = RunningStat::new(2);
        for _ in 0..50 {
            s.push(&[3.0, -1.0]);
        }
        assert_eq!(s.mean(), &[3.0, -1.0]);
        assert_eq!(s.variance(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_stat() {
        let s = RunningStat::new(3);
        assert_eq!(s.count(), 0);
        assert_eq!(s.mean(), &[0.0; 3]);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let mut a = RunningStat::new(1);
        a.push(&[2.0]);
        let before = a.clone();
        a.merge(&RunningStat::new(1));
        assert_eq!(a, before);
        let mut e = RunningStat::new(1);
        e.merge(&before);
        assert_eq!(e, before);
    }

    proptest! {
        #[test]
        fn split_batches_match_two_pass(
            rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 2..60),
            cut in 0usize..60,
        ) {
            let cut = cut.min(rows.len());
            let mut a = RunningStat::new(3);
            let mut b = RunningStat::new(3);
            rows[..cut].iter().for_each(|r| a.push(r));
            rows[cut..].iter().for_each(|r| b.push(r));
            a.merge(&b);
            let (mean, var) = two_pass(&rows);
            for j in 0..3 {
                prop_assert!((a.mean()[j] - mean[j]).abs() < 1e-9);
                prop_assert!((a.variance()[j] - var[j]).abs() < 1e-9);
            }
        }
    }
}
