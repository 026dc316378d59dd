//! Exponentially weighted forecaster over one clique.
//!
//! Inside a clique every member's estimate arrives whenever any member is
//! played, so this is a full-information learner: it picks proportionally to
//! its weights and updates every member by `exp(β ĝ)`.

use crate::policies::{recenter, softmax, PolicyError};

#[derive(Clone, Debug)]
pub struct CliqueForecaster {
    members: Vec<usize>,
    log_weights: Vec<f64>,
    beta: f64,
    bound: f64,
}

impl CliqueForecaster {
    /// `beta` must stay below `1/bound`; it must be positive once there is a
    /// real choice to make (two or more members).
    pub fn new(members: Vec<usize>, beta: f64, bound: f64) -> Result<Self, PolicyError> {
        if members.is_empty() {
            return Err(PolicyError::KTooSmall {
                name: "forecaster",
                min: 1,
                k: 0,
            });
        }
        let beta_ok = if members.len() == 1 {
            (0.0..1.0 / bound).contains(&beta)
        } else {
            beta > 0.0 && beta < 1.0 / bound
        };
        if !beta_ok {
            return Err(PolicyError::InvalidParameter {
                name: "beta",
                value: beta,
                reason: format!("must lie in (0, {}) = (0, 1/b)", 1.0 / bound),
            });
        }
        let n = members.len();
        Ok(CliqueForecaster {
            members,
            log_weights: vec![0.0; n],
            beta,
            bound,
        })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Distribution over the members, aligned with [`members`](Self::members).
    pub fn step(&self) -> Vec<f64> {
        softmax(&self.log_weights)
    }

    /// Applies one multiplicative update; `estimates` must contain an entry
    /// for every member (extra actions are ignored).
    pub fn update(&mut self, estimates: &[(usize, f64)]) -> Result<(), PolicyError> {
        for (idx, &member) in self.members.iter().enumerate() {
            let Some(&(_, ghat)) = estimates.iter().find(|(j, _)| *j == member) else {
                return Err(PolicyError::MissingEstimate { action: member });
            };
            if ghat.abs() > self.bound + 1e-12 {
                return Err(PolicyError::EstimateOutOfBounds {
                    action: member,
                    value: ghat,
                    bound: self.bound,
                });
            }
            self.log_weights[idx] += self.beta * ghat;
        }
        recenter(&mut self.log_weights);
        Ok(())
    }
}
