//! Learner policies behind a single round-based interface.
//!
//! Each round the simulator asks the policy for a play distribution over the
//! `k` actions, samples from it, then feeds back the chosen action, its
//! realized reward, and the estimate set `{(j, ĝ_j) : i_t ∈ N_j(t)}` dictated
//! by the round's feedback graph.

mod elp;
mod exp3;
mod expban;
mod forecaster;
mod meta_elp;

pub use elp::{mixed_distribution, round_params, tune_beta, ElpPolicy};
pub use exp3::{Exp3, Exp3Policy};
pub use expban::{tune_forecaster_beta, ExpBanPolicy};
pub use forecaster::CliqueForecaster;
pub use meta_elp::MetaElpPolicy;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{FeedbackGraph, GraphError, GraphSequence, EXACT_ALPHA_LIMIT};
use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("parameter {name} = {value} rejected: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },
    #[error("unknown policy `{0}` (expected elp, elp-directed, expban, exp3 or meta-elp)")]
    UnknownPolicy(String),
    #[error("bad policy option `{0}` (expected beta=<x> or gamma=<x>)")]
    BadSpecToken(String),
    #[error("observe at round {t} without a matching begin_round")]
    ObserveBeforeRound { t: usize },
    #[error("estimate set does not match the feedback graph: {detail}")]
    EstimateSetMismatch { detail: String },
    #[error("estimate for action {action} is {value}, outside bound {bound}")]
    EstimateOutOfBounds {
        action: usize,
        value: f64,
        bound: f64,
    },
    #[error("no estimate supplied for clique member {action}")]
    MissingEstimate { action: usize },
    #[error("reward {value} outside [0, {bound}]")]
    RewardOutOfBounds { value: f64, bound: f64 },
    #[error("policy `{0}` requires a fixed feedback graph")]
    NeedsFixedGraph(&'static str),
    #[error("round graph differs from the construction graph")]
    GraphChanged,
    #[error("graph has {got_k} actions, policy was built for {expected_k}")]
    GraphMismatch { expected_k: usize, got_k: usize },
    #[error("policy `{name}` needs at least {min} actions, got {k}")]
    KTooSmall {
        name: &'static str,
        min: usize,
        k: usize,
    },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Round-based learner interface.
///
/// `begin_round` returns the play distribution for round `t`; the caller
/// samples `i_t` from it and calls `observe` with the same `t` and graph,
/// the realized reward, and the estimates for `{j : i_t ∈ N_j(t)}` in
/// ascending action order. Policies draw randomness only from generators
/// injected at construction.
pub trait Policy {
    fn begin_round(&mut self, t: usize, graph: &FeedbackGraph) -> Result<Vec<f64>, PolicyError>;

    fn observe(
        &mut self,
        t: usize,
        graph: &FeedbackGraph,
        chosen: usize,
        reward: f64,
        estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError>;

    fn metadata(&self) -> PolicyMetadata;
}

/// Tuning snapshot reported alongside run results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolicyMetadata {
    pub name: String,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Mean per-round independence-number estimate used for tuning.
    pub alpha_hat: Option<f64>,
    /// Mean per-round clique-partition size used for tuning.
    pub chi_hat: Option<f64>,
    /// Whether the tuning quantity came from the exact solver or the greedy
    /// surrogate.
    pub tuning_source: Option<&'static str>,
    pub copies: Option<usize>,
    /// Exploration LP value of the last solved round.
    pub lp_value: Option<f64>,
}

impl PolicyMetadata {
    pub fn summary(&self) -> String {
        let mut parts = vec![self.name.clone()];
        if let Some(beta) = self.beta {
            parts.push(format!("beta={beta:.6}"));
        }
        if let Some(gamma) = self.gamma {
            parts.push(format!("gamma={gamma:.6}"));
        }
        if let Some(a) = self.alpha_hat {
            let src = self.tuning_source.unwrap_or("?");
            parts.push(format!("alpha_hat={a:.2} ({src})"));
        }
        if let Some(c) = self.chi_hat {
            parts.push(format!("chi_hat={c:.2}"));
        }
        if let Some(m) = self.copies {
            parts.push(format!("copies={m}"));
        }
        if let Some(v) = self.lp_value {
            parts.push(format!("lp_value={v:.6}"));
        }
        parts.join(" ")
    }
}

/// Log-weight distributions are recentered once the leading exponent passes
/// this, which matches rescaling plain weights whenever the largest one
/// exceeds 1e100. A shared shift leaves every distribution unchanged.
const LOG_RESCALE_THRESHOLD: f64 = 230.0;

pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut out: Vec<f64> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}

pub(crate) fn recenter(log_weights: &mut [f64]) {
    let max = log_weights.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    if max.abs() > LOG_RESCALE_THRESHOLD {
        for lw in log_weights.iter_mut() {
            *lw -= max;
        }
    }
}

/// Which policy to run, parsed from a spec string such as
/// `elp`, `expban gamma=0.1`, or `meta-elp beta=0.01`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    Elp,
    ElpDirected,
    ExpBan,
    Exp3,
    MetaElp,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Elp => "elp",
            PolicyKind::ElpDirected => "elp-directed",
            PolicyKind::ExpBan => "expban",
            PolicyKind::Exp3 => "exp3",
            PolicyKind::MetaElp => "meta-elp",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

impl PolicySpec {
    pub fn parse(spec: &str) -> Result<Self, PolicyError> {
        let mut tokens = spec.split([' ', ',']).filter(|s| !s.is_empty());
        let name = tokens
            .next()
            .ok_or_else(|| PolicyError::UnknownPolicy(String::new()))?;
        let kind = match name {
            "elp" => PolicyKind::Elp,
            "elp-directed" => PolicyKind::ElpDirected,
            "expban" => PolicyKind::ExpBan,
            "exp3" => PolicyKind::Exp3,
            "meta-elp" => PolicyKind::MetaElp,
            other => return Err(PolicyError::UnknownPolicy(other.into())),
        };
        let mut beta = None;
        let mut gamma = None;
        for token in tokens {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| PolicyError::BadSpecToken(token.into()))?;
            let parsed: f64 = value
                .parse()
                .map_err(|_| PolicyError::BadSpecToken(token.into()))?;
            match key {
                "beta" => beta = Some(parsed),
                "gamma" => gamma = Some(parsed),
                _ => return Err(PolicyError::BadSpecToken(token.into())),
            }
        }
        Ok(PolicySpec { kind, beta, gamma })
    }

    /// Instantiates the policy for a graph sequence, horizon, and estimate
    /// bound, tuning parameters from the sequence unless overridden.
    pub fn build(
        &self,
        seq: &GraphSequence,
        horizon: usize,
        b: f64,
        rng: ChaCha8Rng,
    ) -> Result<Box<dyn Policy>, PolicyError> {
        let k = seq.k();
        match self.kind {
            PolicyKind::Elp => {
                let (sum, mean, source) = alpha_sum_estimate(seq, horizon);
                let beta = match self.beta {
                    Some(beta) => validate_elp_beta(beta, b, k)?,
                    None => tune_beta(sum, b, k)?,
                };
                let mut policy = ElpPolicy::new(k, beta, b, self.gamma)?;
                policy.set_tuning_info("elp", Some((mean, source)), None);
                Ok(Box::new(policy))
            }
            PolicyKind::ElpDirected => {
                let (sum, mean) = chi_sum_estimate(seq, horizon);
                let beta = match self.beta {
                    Some(beta) => validate_elp_beta(beta, b, k)?,
                    None => tune_beta(sum, b, k)?,
                };
                let mut policy = ElpPolicy::new(k, beta, b, self.gamma)?;
                policy.set_tuning_info("elp-directed", None, Some(mean));
                Ok(Box::new(policy))
            }
            PolicyKind::ExpBan => {
                let GraphSequence::Fixed(g) = seq else {
                    return Err(PolicyError::NeedsFixedGraph("expban"));
                };
                Ok(Box::new(ExpBanPolicy::new(
                    g, horizon, b, self.beta, self.gamma,
                )?))
            }
            PolicyKind::Exp3 => {
                let gamma = self.gamma.unwrap_or_else(|| Exp3::tune_gamma(k, horizon));
                let exp3 = Exp3::new(k, gamma, 1.0)?;
                Ok(Box::new(Exp3Policy::new(exp3)))
            }
            PolicyKind::MetaElp => Ok(Box::new(MetaElpPolicy::new(
                k, horizon, b, self.beta, self.gamma, rng,
            )?)),
        }
    }
}

fn validate_elp_beta(beta: f64, b: f64, k: usize) -> Result<f64, PolicyError> {
    let cap = 1.0 / (2.0 * b * k as f64);
    if beta <= 0.0 || beta >= cap || !beta.is_finite() {
        return Err(PolicyError::InvalidParameter {
            name: "beta",
            value: beta,
            reason: format!("must lie in (0, {cap}) = (0, 1/(2*b*k))"),
        });
    }
    Ok(beta)
}

/// Per-round independence-number estimates summed over the horizon, plus
/// their mean and whether they came from the exact solver.
fn alpha_sum_estimate(seq: &GraphSequence, horizon: usize) -> (f64, f64, &'static str) {
    match seq {
        GraphSequence::Fixed(g) => {
            let (alpha, source) = if g.k() <= EXACT_ALPHA_LIMIT {
                (
                    g.independence_number_exact()
                        .expect("k within exact limit")
                        .0,
                    "exact",
                )
            } else {
                (g.greedy_independent_set().len(), "greedy")
            };
            (alpha as f64 * horizon as f64, alpha as f64, source)
        }
        GraphSequence::PerRoundErdosRenyi { .. } => {
            // one greedy solve per round keeps tuning O(T k^2) even at large k
            let sum: usize = (0..horizon)
                .map(|t| seq.graph_at(t).greedy_independent_set().len())
                .sum();
            (sum as f64, sum as f64 / horizon as f64, "greedy")
        }
    }
}

fn chi_sum_estimate(seq: &GraphSequence, horizon: usize) -> (f64, f64) {
    match seq {
        GraphSequence::Fixed(g) => {
            let c = g.clique_partition_greedy().c();
            (c as f64 * horizon as f64, c as f64)
        }
        GraphSequence::PerRoundErdosRenyi { .. } => {
            let sum: usize = (0..horizon)
                .map(|t| seq.graph_at(t).clique_partition_greedy().c())
                .sum();
            (sum as f64, sum as f64 / horizon as f64)
        }
    }
}

/// Checks a play distribution: nonnegative entries summing to one.
pub fn check_distribution(p: &[f64], tol: f64) -> Result<(), String> {
    let mut total = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        if !pi.is_finite() || pi < 0.0 {
            return Err(format!("p[{i}] = {pi}"));
        }
        total += pi;
    }
    if (total - 1.0).abs() > tol {
        return Err(format!("sum(p) = {total}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_parse() {
        let s = PolicySpec::parse("elp").unwrap();
        assert_eq!(s.kind, PolicyKind::Elp);
        assert_eq!(s.beta, None);

        let s = PolicySpec::parse("expban beta=0.01 gamma=0.2").unwrap();
        assert_eq!(s.kind, PolicyKind::ExpBan);
        assert_eq!(s.beta, Some(0.01));
        assert_eq!(s.gamma, Some(0.2));

        let s = PolicySpec::parse("meta-elp,beta=0.001").unwrap();
        assert_eq!(s.kind, PolicyKind::MetaElp);

        assert!(matches!(
            PolicySpec::parse("ucb"),
            Err(PolicyError::UnknownPolicy(_))
        ));
        assert!(matches!(
            PolicySpec::parse("elp rho=2"),
            Err(PolicyError::BadSpecToken(_))
        ));
    }

    #[test]
    fn softmax_recenter_invariance() {
        let lw = vec![0.0, 1.0, -2.0];
        let mut shifted: Vec<f64> = lw.iter().map(|x| x + 500.0).collect();
        let p1 = softmax(&lw);
        recenter(&mut shifted);
        let p2 = softmax(&shifted);
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((p1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
