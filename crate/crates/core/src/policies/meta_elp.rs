//! Doubling grid over the unknown tuning mass.
//!
//! The LP-exploration learner needs the horizon's total independence mass to
//! pick its learning rate. When that is unknown, run `⌈log2 k⌉` copies, copy
//! `i` tuned as if the mass were `2^(i-1)`, and let a bandit pick among the
//! copies each round. One of the guesses is off by at most a factor of two.
//!
//! Only the selected copy computes a distribution and receives the round's
//! estimates; the realized reward feeds the copy-selection bandit.

use rand_chacha::ChaCha8Rng;

use crate::graph::FeedbackGraph;
use crate::policies::{tune_beta, ElpPolicy, Exp3, Policy, PolicyError, PolicyMetadata};
use crate::rng::sample_index;

pub struct MetaElpPolicy {
    copies: Vec<ElpPolicy>,
    bandit: Exp3,
    rng: ChaCha8Rng,
    selected: Option<(usize, usize)>,
    meta: PolicyMetadata,
}

impl MetaElpPolicy {
    pub fn new(
        k: usize,
        horizon: usize,
        b: f64,
        beta_override: Option<f64>,
        gamma_override: Option<f64>,
        rng: ChaCha8Rng,
    ) -> Result<Self, PolicyError> {
        if k < 2 {
            return Err(PolicyError::KTooSmall {
                name: "meta-elp",
                min: 2,
                k,
            });
        }
        let copies_count = (k as f64).log2().ceil() as usize;
        let copies_count = copies_count.max(1);
        let copies = (1..=copies_count)
            .map(|i| {
                let assumed_mass = 2f64.powi(i as i32 - 1);
                let beta = match beta_override {
                    Some(beta) => beta,
                    None => tune_beta(assumed_mass, b, k)?,
                };
                ElpPolicy::new(k, beta, b, None)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let gamma = gamma_override.unwrap_or_else(|| Exp3::tune_gamma(copies_count, horizon));
        let bandit = Exp3::new(copies_count, gamma, 1.0)?;
        let meta = PolicyMetadata {
            name: "meta-elp".into(),
            gamma: Some(gamma),
            copies: Some(copies_count),
            ..PolicyMetadata::default()
        };
        Ok(MetaElpPolicy {
            copies,
            bandit,
            rng,
            selected: None,
            meta,
        })
    }

    pub fn copies(&self) -> usize {
        self.copies.len()
    }

    pub fn copy_betas(&self) -> Vec<f64> {
        self.copies.iter().map(|c| c.beta()).collect()
    }
}

impl Policy for MetaElpPolicy {
    fn begin_round(&mut self, t: usize, graph: &FeedbackGraph) -> Result<Vec<f64>, PolicyError> {
        let over_copies = self.bandit.distribution();
        let copy = sample_index(&over_copies, &mut self.rng);
        let p = self.copies[copy].begin_round(t, graph)?;
        self.selected = Some((t, copy));
        Ok(p)
    }

    fn observe(
        &mut self,
        t: usize,
        graph: &FeedbackGraph,
        chosen: usize,
        reward: f64,
        estimates: &[(usize, f64)],
    ) -> Result<(), PolicyError> {
        let (round_t, copy) = match self.selected.take() {
            Some(sel) if sel.0 == t => sel,
            _ => return Err(PolicyError::ObserveBeforeRound { t }),
        };
        debug_assert_eq!(round_t, t);
        self.bandit.update(copy, reward)?;
        self.copies[copy].observe(t, graph, chosen, reward, estimates)
    }

    fn metadata(&self) -> PolicyMetadata {
        self.meta.clone()
    }
}
