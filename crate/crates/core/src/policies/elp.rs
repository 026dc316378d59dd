//! Exponential weights with LP-shaped exploration.
//!
//! Each round the play distribution mixes the weight distribution with the
//! exploration distribution from the max-min program:
//! `p_i(t) = (1-γ(t)) w_i(t)/Σ_l w_l(t) + γ(t) s_i(t)` with
//! `γ(t) = βb / min_j Σ_{l∈N_j(t)} s_l(t)`. After observing estimates for
//! every action `j` with `i_t ∈ N_j(t)`, weights update multiplicatively by
//! `exp(β ĝ_j(t) / Σ_{l∈N_j(t)} p_l(t))`.
//!
//! The `γ s` floor guarantees each estimate's denominator at least `βb`, so
//! the weight exponents never exceed 1. Weights live in log space; see
//! [`super::recenter`].

use crate::graph::FeedbackGraph;
use crate::lp::{self, ExplorationDistribution};
use crate::policies::{recenter, softmax, Policy, PolicyError, PolicyMetadata};

/// Learning rate for a horizon with total independence-number mass
/// `alpha_sum`: `min(sqrt(ln k / (3 b^2 alpha_sum)), (1-1e-9)/(2bk))`,
/// clamped into the open interval `(0, 1/(2bk))`.
///
/// For directed tuning pass the clique-partition sum instead.
pub fn tune_beta(alpha_sum: f64, b: f64, k: usize) -> Result<f64, PolicyError> {
    if !alpha_sum.is_finite() || alpha_sum <= 0.0 {
        return Err(PolicyError::InvalidParameter {
            name: "alpha_sum",
            value: alpha_sum,
            reason: "must be positive and finite".into(),
        });
    }
    if !b.is_finite() || b <= 0.0 {
        return Err(PolicyError::InvalidParameter {
            name: "b",
            value: b,
            reason: "must be positive and finite".into(),
        });
    }
    if k < 2 {
        return Err(PolicyError::KTooSmall {
            name: "tune_beta",
            min: 2,
            k,
        });
    }
    let tuned = ((k as f64).ln() / (3.0 * b * b * alpha_sum)).sqrt();
    let cap = (1.0 - 1e-9) / (2.0 * b * k as f64);
    Ok(tuned.min(cap))
}

/// Per-round exploration distribution and mixing weight for a graph:
/// `s` solves the max-min program and `γ = βb / value`.
pub fn round_params(g: &FeedbackGraph, beta: f64, b: f64) -> Result<(Vec<f64>, f64), PolicyError> {
    let cap = 1.0 / (2.0 * b * g.k() as f64);
    if !(beta > 0.0 && beta < cap) {
        return Err(PolicyError::InvalidParameter {
            name: "beta",
            value: beta,
            reason: format!("must lie in (0, {cap})"),
        });
    }
    let sol = lp::solve_max_min_exploration(g)?;
    let gamma = beta * b / sol.dist.value();
    debug_assert!(gamma > 0.0 && gamma <= 0.5);
    Ok((sol.dist.s().to_vec(), gamma))
}

/// `p_i = (1-γ) w_i / Σ_l w_l + γ s_i` for positive weights `w` and a
/// simplex vector `s`.
pub fn mixed_distribution(weights: &[f64], gamma: f64, s: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .zip(s)
        .map(|(&w, &si)| (1.0 - gamma) * w / total + gamma * si)
        .collect()
}

struct RoundState {
    t: usize,
    s: Vec<f64>,
    gamma: f64,
    p: Vec<f64>,
}

pub struct ElpPolicy {
    k: usize,
    beta: f64,
    b: f64,
    gamma_override: Option<f64>,
    log_weights: Vec<f64>,
    lp_cache: Option<(FeedbackGraph, ExplorationDistribution)>,
    round: Option<RoundState>,
    last_gamma: Option<f64>,
    meta: PolicyMetadata,
}

impl ElpPolicy {
    pub fn new(
        k: usize,
        beta: f64,
        b: f64,
        gamma_override: Option<f64>,
    ) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::KTooSmall {
                name: "elp",
                min: 1,
                k,
            });
        }
        let cap = 1.0 / (2.0 * b * k as f64);
        if !(beta > 0.0 && beta < cap) {
            return Err(PolicyError::InvalidParameter {
                name: "beta",
                value: beta,
                reason: format!("must lie in (0, {cap}) = (0, 1/(2*b*k))"),
            });
        }
        if let Some(gamma) = gamma_override {
            if !(gamma > 0.0 && gamma <= 0.5) {
                return Err(PolicyError::InvalidParameter {
                    name: "gamma",
                    value: gamma,
                    reason: "must lie in (0, 1/2]".into(),
                });
            }
        }
        Ok(ElpPolicy {
            k,
            beta,
            b,
            gamma_override,
            log_weights: vec![(1.0 / k as f64).ln(); k],
            lp_cache: None,
            round: None,
            last_gamma: None,
            meta: PolicyMetadata {
                name: "elp".into(),
                beta: Some(beta),
                gamma: gamma_override,
                ..PolicyMetadata::default()
            },
        })
    }

    pub(crate) fn set_tuning_info(
        &mut self,
        name: &str,
        alpha: Option<(f64, &'static str)>,
        chi: Option<f64>,
    ) {
        self.meta.name = name.into();
        if let Some((alpha_hat, source)) = alpha {
            self.meta.alpha_hat = Some(alpha_hat);
            self.meta.tuning_source = Some(source);
        }
        self.meta.chi_hat = chi;
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Exploration vector and mixing weight of the round in flight.
    pub fn round_params_in_flight(&self) -> Option<(&[f64], f64)> {
        self.round.as_ref().map(|r| (r.s.as_slice(), r.gamma))
    }

    /// Exploration solution for the round's graph; identical graphs reuse the
    /// cached solve, so fixed sequences pay for one LP total.
    fn exploration_for(
        &mut self,
        graph: &FeedbackGraph,
    ) -> Result<ExplorationDistribution, PolicyError> {
        if let Some((cached_graph, dist)) = &self.lp_cache {
            if cached_graph == graph {
                return Ok(dist.clone());
            }
        }
        let sol = lp::solve_max_min_exploration(graph)?;
        self.meta.lp_value = Some(sol.dist.value());
        self.lp_cache = Some((graph.clone(), sol.dist.clone()));
        Ok(sol.dist)
    }

    fn validate_estimates(
        &self,
        graph: &FeedbackGraph,
        chosen: usize,
        estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError> {
        let revealed = graph.revealed_by(chosen);
        if estimates.len() != revealed.len() {
            return Err(PolicyError::EstimateSetMismatch {
                detail: format!(
                    "choosing {chosen} reveals {} actions, got {} estimates",
                    revealed.len(),
                    estimates.len()
                ),
            });
        }
        let mut prev: Option<usize> = None;
        for &(j, ghat) in estimates {
            if j >= self.k || !revealed.contains(j) {
                return Err(PolicyError::EstimateSetMismatch {
                    detail: format!("estimate for {j} not revealed by choosing {chosen}"),
                });
            }
            if prev.is_some_and(|p| p >= j) {
                return Err(PolicyError::EstimateSetMismatch {
                    detail: "estimates must be strictly ascending by action".into(),
                });
            }
            prev = Some(j);
            if ghat.abs() > self.b + 1e-12 {
                return Err(PolicyError::EstimateOutOfBounds {
                    action: j,
                    value: ghat,
                    bound: self.b,
                });
            }
        }
        Ok(())
    }
}

impl Policy for ElpPolicy {
    fn begin_round(&mut self, t: usize, graph: &FeedbackGraph) -> Result<Vec<f64>, PolicyError> {
        if graph.k() != self.k {
            return Err(PolicyError::GraphMismatch {
                expected_k: self.k,
                got_k: graph.k(),
            });
        }
        let dist = self.exploration_for(graph)?;
        let gamma = match self.gamma_override {
            Some(gamma) => gamma,
            None => self.beta * self.b / dist.value(),
        };
        debug_assert!(gamma > 0.0 && gamma <= 0.5 + 1e-12);
        let base = softmax(&self.log_weights);
        let p = mixed_distribution(&base, gamma, dist.s());
        self.last_gamma = Some(gamma);
        self.round = Some(RoundState {
            t,
            s: dist.s().to_vec(),
            gamma,
            p: p.clone(),
        });
        Ok(p)
    }

    fn observe(
        &mut self,
        t: usize,
        graph: &FeedbackGraph,
        chosen: usize,
        _reward: f64,
        estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError> {
        let RoundState { t: round_t, p, .. } = match self.round.take() {
            Some(r) if r.t == t => r,
            _ => return Err(PolicyError::ObserveBeforeRound { t }),
        };
        debug_assert_eq!(round_t, t);
        self.validate_estimates(graph, chosen, estimates)?;
        for &(j, ghat) in estimates {
            let mass = graph.neighborhood_mass(j, &p);
            let scaled = self.beta * ghat / mass;
            assert!(
                scaled <= 1.0 + 1e-9,
                "weight exponent {scaled} > 1 at round {t}: exploration floor violated"
            );
            self.log_weights[j] += scaled;
        }
        recenter(&mut self.log_weights);
        Ok(())
    }

    fn metadata(&self) -> PolicyMetadata {
        let mut meta = self.meta.clone();
        if meta.gamma.is_none() {
            meta.gamma = self.last_gamma;
        }
        meta
    }
}
