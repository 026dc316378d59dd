//! The classic mixed-exploration bandit baseline.
//!
//! Arm distribution `(1-γ) w_i/Σw + γ/n`; after playing arm `i` with reward
//! `r`, only that arm updates, by `w_i *= exp(γ (r/bound)/p_i / n)`. Rewards
//! are normalized by the declared bound so the importance-weighted estimate
//! stays in the regime the tuning below assumes.

use crate::graph::FeedbackGraph;
use crate::policies::{recenter, softmax, Policy, PolicyError, PolicyMetadata};

#[derive(Clone, Debug)]
pub struct Exp3 {
    n: usize,
    gamma: f64,
    bound: f64,
    log_weights: Vec<f64>,
}

impl Exp3 {
    /// `n` arms with uniform-mixing weight `gamma` and reward bound `bound`.
    /// A single arm degenerates gracefully: `gamma = 0` is then a no-op.
    pub fn new(n: usize, gamma: f64, bound: f64) -> Result<Self, PolicyError> {
        if n == 0 {
            return Err(PolicyError::KTooSmall {
                name: "exp3",
                min: 1,
                k: n,
            });
        }
        let gamma_ok = if n == 1 {
            (0.0..=1.0).contains(&gamma)
        } else {
            gamma > 0.0 && gamma <= 1.0
        };
        if !gamma_ok {
            return Err(PolicyError::InvalidParameter {
                name: "gamma",
                value: gamma,
                reason: "must lie in (0, 1]".into(),
            });
        }
        if !bound.is_finite() || bound <= 0.0 {
            return Err(PolicyError::InvalidParameter {
                name: "bound",
                value: bound,
                reason: "must be positive".into(),
            });
        }
        Ok(Exp3 {
            n,
            gamma,
            bound,
            log_weights: vec![0.0; n],
        })
    }

    /// `min(1, sqrt(n ln n / ((e-1) horizon)))`; zero for one arm.
    pub fn tune_gamma(n: usize, horizon: usize) -> f64 {
        if n <= 1 {
            return 0.0;
        }
        let n_f = n as f64;
        let t = horizon.max(1) as f64;
        (n_f * n_f.ln() / ((std::f64::consts::E - 1.0) * t))
            .sqrt()
            .min(1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn distribution(&self) -> Vec<f64> {
        let base = softmax(&self.log_weights);
        base.iter()
            .map(|w| (1.0 - self.gamma) * w + self.gamma / self.n as f64)
            .collect()
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<(), PolicyError> {
        debug_assert!(arm < self.n);
        if !(0.0..=self.bound + 1e-12).contains(&reward) {
            return Err(PolicyError::RewardOutOfBounds {
                value: reward,
                bound: self.bound,
            });
        }
        let p = self.distribution();
        let estimate = (reward / self.bound) / p[arm];
        self.log_weights[arm] += self.gamma * estimate / self.n as f64;
        recenter(&mut self.log_weights);
        Ok(())
    }
}

/// Plain bandit policy over the `k` actions; side observations are ignored.
pub struct Exp3Policy {
    exp3: Exp3,
}

impl Exp3Policy {
    pub fn new(exp3: Exp3) -> Self {
        Exp3Policy { exp3 }
    }
}

impl Policy for Exp3Policy {
    fn begin_round(&mut self, _t: usize, graph: &FeedbackGraph) -> Result<Vec<f64>, PolicyError> {
        if graph.k() != self.exp3.n() {
            return Err(PolicyError::GraphMismatch {
                expected_k: self.exp3.n(),
                got_k: graph.k(),
            });
        }
        Ok(self.exp3.distribution())
    }

    fn observe(
        &mut self,
        _t: usize,
        _graph: &FeedbackGraph,
        chosen: usize,
        reward: f64,
        _estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError> {
        self.exp3.update(chosen, reward)
    }

    fn metadata(&self) -> PolicyMetadata {
        PolicyMetadata {
            name: "exp3".into(),
            gamma: Some(self.exp3.gamma()),
            ..PolicyMetadata::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_state_is_uniform() {
        let e = Exp3::new(4, 0.2, 1.0).unwrap();
        for p in e.distribution() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_reward_leaves_weights() {
        let mut e = Exp3::new(3, 0.3, 1.0).unwrap();
        let before = e.distribution();
        e.update(1, 0.0).unwrap();
        assert_eq!(before, e.distribution());
    }

    #[test]
    fn unit_reward_update_matches_closed_form() {
        let mut e = Exp3::new(2, 0.5, 1.0).unwrap();
        let p = e.distribution();
        assert!((p[0] - 0.5).abs() < 1e-15);
        e.update(0, 1.0).unwrap();
        // importance-weighted estimate 1/0.5 = 2, exponent 0.5*2/2 = 0.5
        assert!((e.log_weights[0] - 0.5).abs() < 1e-15);
        assert!(e.log_weights[1].abs() < 1e-15);
    }

    #[test]
    fn rewards_validated_against_bound() {
        let mut e = Exp3::new(2, 0.5, 1.0).unwrap();
        assert!(matches!(
            e.update(0, 1.5),
            Err(PolicyError::RewardOutOfBounds { .. })
        ));
        let mut e = Exp3::new(2, 0.5, 2.0).unwrap();
        e.update(0, 1.5).unwrap();
    }

    #[test]
    fn single_arm_is_inert() {
        let mut e = Exp3::new(1, 0.0, 1.0).unwrap();
        assert_eq!(e.distribution(), vec![1.0]);
        e.update(0, 0.7).unwrap();
        assert_eq!(e.distribution(), vec![1.0]);
    }

    #[test]
    fn tuned_gamma_values() {
        assert_eq!(Exp3::tune_gamma(1, 1000), 0.0);
        let g = Exp3::tune_gamma(100, 10_000);
        let expected =
            (100.0_f64 * 100.0_f64.ln() / ((std::f64::consts::E - 1.0) * 10_000.0)).sqrt();
        assert!((g - expected).abs() < 1e-15);
        assert_eq!(Exp3::tune_gamma(50, 1), 1.0); // clamped
        assert!(Exp3::new(5, 0.0, 1.0).is_err());
    }
}
