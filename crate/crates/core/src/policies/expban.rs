//! Clique-partition hybrid: a bandit over cliques of mutually observing
//! actions, each clique run by a full-information forecaster.
//!
//! The graph is split once into `c` cliques. Playing any action reveals every
//! member of its clique, so each clique hosts a [`CliqueForecaster`] treated
//! as one meta-arm of an [`Exp3`] bandit. The play distribution is the
//! mixture `Σ_c P_bandit(c) · P_forecaster_c(i)`; since cliques partition the
//! actions, the chosen action identifies its meta-arm. Only that clique's
//! forecaster sees the round's estimates. Requires the graph fixed across
//! rounds.

use crate::graph::{CliquePartition, FeedbackGraph};
use crate::policies::{CliqueForecaster, Exp3, Policy, PolicyError, PolicyMetadata};

/// Forecaster learning rate for a clique of `clique_size` actions over the
/// full horizon: `min(sqrt(ln n / (b^2 T)), (1-1e-9)/b)`; zero for
/// singletons, where the rate is irrelevant.
pub fn tune_forecaster_beta(clique_size: usize, b: f64, horizon: usize) -> f64 {
    if clique_size <= 1 {
        return 0.0;
    }
    let tuned = ((clique_size as f64).ln() / (b * b * horizon.max(1) as f64)).sqrt();
    tuned.min((1.0 - 1e-9) / b)
}

pub struct ExpBanPolicy {
    graph: FeedbackGraph,
    partition: CliquePartition,
    forecasters: Vec<CliqueForecaster>,
    bandit: Exp3,
    meta: PolicyMetadata,
}

impl ExpBanPolicy {
    pub fn new(
        g: &FeedbackGraph,
        horizon: usize,
        b: f64,
        beta_override: Option<f64>,
        gamma_override: Option<f64>,
    ) -> Result<Self, PolicyError> {
        let partition = g.clique_partition_greedy();
        let c = partition.c();
        let forecasters = partition
            .blocks()
            .iter()
            .map(|blk| {
                let beta =
                    beta_override.unwrap_or_else(|| tune_forecaster_beta(blk.len(), b, horizon));
                CliqueForecaster::new(blk.clone(), beta, b)
            })
            .collect::<Result<Vec<_>, _>>()?;
        // meta-arm rewards are realized rewards, bounded by one
        let gamma = gamma_override.unwrap_or_else(|| Exp3::tune_gamma(c, horizon));
        let bandit = Exp3::new(c, gamma, 1.0)?;
        let meta = PolicyMetadata {
            name: "expban".into(),
            beta: beta_override,
            gamma: Some(gamma),
            chi_hat: Some(c as f64),
            tuning_source: Some("greedy"),
            ..PolicyMetadata::default()
        };
        Ok(ExpBanPolicy {
            graph: g.clone(),
            partition,
            forecasters,
            bandit,
            meta,
        })
    }

    pub fn partition(&self) -> &CliquePartition {
        &self.partition
    }
}

impl Policy for ExpBanPolicy {
    fn begin_round(&mut self, _t: usize, graph: &FeedbackGraph) -> Result<Vec<f64>, PolicyError> {
        if *graph != self.graph {
            return Err(PolicyError::GraphChanged);
        }
        let over_cliques = self.bandit.distribution();
        let mut p = vec![0.0; self.graph.k()];
        for (c, blk) in self.partition.blocks().iter().enumerate() {
            let within = self.forecasters[c].step();
            for (idx, &action) in blk.iter().enumerate() {
                p[action] = over_cliques[c] * within[idx];
            }
        }
        Ok(p)
    }

    fn observe(
        &mut self,
        _t: usize,
        graph: &FeedbackGraph,
        chosen: usize,
        reward: f64,
        estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError> {
        if *graph != self.graph {
            return Err(PolicyError::GraphChanged);
        }
        let block = self.partition.block_of(chosen);
        self.bandit.update(block, reward)?;
        self.forecasters[block].update(estimates)
    }

    fn metadata(&self) -> PolicyMetadata {
        self.meta.clone()
    }
}
