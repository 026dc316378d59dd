//! Oblivious adversaries and the side-observation channel.
//!
//! Reward sequences are drawn up front into a table, so they are a pure
//! function of the adversary spec and seed and cannot react to the learner.
//! The observation channel turns a chosen action into the estimate set
//! `{(j, ĝ_j) : i_t ∈ N_j(t)}`, exactly the actions the round's graph says
//! the choice reveals, with `E[ĝ_j] = g_j(t)` and `|ĝ_j| ≤ b` always.

use std::io::{BufRead, Write};

use rand::Rng;
use thiserror::Error;

use crate::graph::{ActionId, FeedbackGraph, GraphError, EXACT_ALPHA_LIMIT};
use crate::rng::{stream_rng, StreamId};

/// `1 / (8 ln(4/3))`: scales the hard-instance reward gap.
pub const LOWER_BOUND_C1: f64 = 0.434_507_670_865_387_34;

/// Regret floor coefficient: any learner suffers at least
/// `LOWER_BOUND_FLOOR * sqrt(alpha * T)` against the hard instance once the
/// horizon is long enough (`T >= 374 alpha^3`).
pub const LOWER_BOUND_FLOOR: f64 = 0.06;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("mean[{index}] = {value} outside [0, 1]")]
    MeanOutOfRange { index: usize, value: f64 },
    #[error("expected {expected} means, got {got}")]
    MeansLengthMismatch { expected: usize, got: usize },
    #[error("special action {special} out of range for k = {k}")]
    SpecialOutOfRange { special: usize, k: usize },
    #[error("horizon {t} too short for the hard instance: need T >= {required}")]
    HorizonTooShort { t: usize, required: usize },
    #[error("the hard-instance adversary requires an undirected graph")]
    DirectedUnsupported,
    #[error("means file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Realized rewards for a whole horizon, fixed before any policy acts.
#[derive(Clone, Debug, PartialEq)]
pub struct RewardTable {
    horizon: usize,
    k: usize,
    data: Vec<f64>,
}

impl RewardTable {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn reward(&self, t: usize, action: ActionId) -> f64 {
        self.data[t * self.k + action]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.k..(t + 1) * self.k]
    }

    /// Total reward of each fixed action over the whole horizon.
    pub fn column_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.k];
        for t in 0..self.horizon {
            for (i, total) in totals.iter_mut().enumerate() {
                *total += self.reward(t, i);
            }
        }
        totals
    }

    /// Audit export: one row per round, one column per action.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in 0..self.horizon {
            let row: Vec<String> = self.row(t).iter().map(f64::to_string).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn validate_means(means: &[f64]) -> Result<(), EnvError> {
    for (index, &value) in means.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(EnvError::MeanOutOfRange { index, value });
        }
    }
    Ok(())
}

fn bernoulli_with_rng(means: &[f64], horizon: usize, rng: &mut impl Rng) -> RewardTable {
    let k = means.len();
    let mut data = Vec::with_capacity(horizon * k);
    for _ in 0..horizon {
        for &mean in means {
            data.push(f64::from(rng.random::<f64>() < mean));
        }
    }
    RewardTable { horizon, k, data }
}

/// Independent Bernoulli draws per round and action; deterministic in `seed`.
pub fn gen_bernoulli_table(
    means: &[f64],
    horizon: usize,
    seed: u64,
) -> Result<RewardTable, EnvError> {
    validate_means(means)?;
    let mut rng = stream_rng(seed, StreamId::Adversary);
    Ok(bernoulli_with_rng(means, horizon, &mut rng))
}

/// One better arm among coin flips: mean 3/4 at `special`, 1/2 elsewhere.
pub fn fig1_adversary(k: usize, special: ActionId) -> Result<Vec<f64>, EnvError> {
    if special >= k {
        return Err(EnvError::SpecialOutOfRange { special, k });
    }
    let mut means = vec![0.5; k];
    means[special] = 0.75;
    Ok(means)
}

/// The randomized hard instance for a fixed undirected graph.
///
/// A maximum (or greedy, for large graphs) independent set `S` carries all
/// the reward: a uniformly drawn special member pays Bernoulli(1/2 + ε) with
/// `ε = sqrt(c1 |S| / T)`, the rest of `S` pays Bernoulli(1/2), and every
/// action outside `S` pays zero, exactly as if its neighborhood leaked no
/// information worth having.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundAdversarySpec {
    pub independent_set: Vec<ActionId>,
    pub special: ActionId,
    pub epsilon: f64,
}

impl LowerBoundAdversarySpec {
    pub fn alpha_hat(&self) -> usize {
        self.independent_set.len()
    }

    pub fn means(&self, k: usize) -> Vec<f64> {
        let mut means = vec![0.0; k];
        for &i in &self.independent_set {
            means[i] = 0.5;
        }
        means[self.special] = 0.5 + self.epsilon;
        means
    }
}

/// Draws the hard instance for `g` over `horizon` rounds.
pub fn lower_bound_adversary(
    g: &FeedbackGraph,
    horizon: usize,
    seed: u64,
) -> Result<(RewardTable, LowerBoundAdversarySpec), EnvError> {
    if g.directed() {
        return Err(EnvError::DirectedUnsupported);
    }
    let set = if g.k() <= EXACT_ALPHA_LIMIT {
        g.independence_number_exact()?.1
    } else {
        g.greedy_independent_set()
    };
    let alpha_hat = set.len();
    let epsilon = (LOWER_BOUND_C1 * alpha_hat as f64 / horizon as f64).sqrt();
    if epsilon > 0.5 {
        let required = (4.0 * LOWER_BOUND_C1 * alpha_hat as f64).ceil() as usize;
        return Err(EnvError::HorizonTooShort {
            t: horizon,
            required,
        });
    }
    let mut rng = stream_rng(seed, StreamId::Adversary);
    let special = set[rng.random_range(0..alpha_hat)];
    let spec = LowerBoundAdversarySpec {
        independent_set: set,
        special,
        epsilon,
    };
    let table = bernoulli_with_rng(&spec.means(g.k()), horizon, &mut rng);
    Ok((table, spec))
}

/// How estimates are produced from realized rewards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObservationModel {
    /// Estimates equal realized rewards; bound 1.
    Exact,
    /// Rewards plus independent uniform noise on `[-delta, delta]`; bound
    /// `1 + delta`. No clipping, which would bias the estimates.
    BoundedNoise { delta: f64 },
}

impl ObservationModel {
    pub fn bound(&self) -> f64 {
        match self {
            ObservationModel::Exact => 1.0,
            ObservationModel::BoundedNoise { delta } => 1.0 + delta,
        }
    }

    /// Estimates for every action revealed by choosing `chosen`, in
    /// ascending action order.
    pub fn observe(
        &self,
        g: &FeedbackGraph,
        chosen: ActionId,
        rewards: &[f64],
        rng: &mut impl Rng,
    ) -> Vec<(ActionId, f64)> {
        let bound = self.bound();
        g.revealed_by(chosen)
            .iter()
            .map(|j| {
                let ghat = match self {
                    ObservationModel::Exact => rewards[j],
                    ObservationModel::BoundedNoise { delta } => {
                        rewards[j] + (2.0 * rng.random::<f64>() - 1.0) * delta
                    }
                };
                assert!(
                    ghat.abs() <= bound + 1e-12,
                    "estimate {ghat} beyond bound {bound}"
                );
                (j, ghat)
            })
            .collect()
    }
}

/// Adversary selection, resolved against a graph and horizon per run.
#[derive(Clone, Debug, PartialEq)]
pub enum AdversarySpec {
    /// Fixed Bernoulli means per action.
    Bernoulli(Vec<f64>),
    /// The one-better-arm experiment instance.
    Fig1 { special: ActionId },
    /// The randomized hard instance on the run's graph.
    LowerBound,
}

/// A drawn reward table with the mean vector behind it.
#[derive(Clone, Debug)]
pub struct RealizedAdversary {
    pub table: RewardTable,
    pub means: Vec<f64>,
    pub lower_bound: Option<LowerBoundAdversarySpec>,
}

impl AdversarySpec {
    pub fn realize(
        &self,
        g: &FeedbackGraph,
        horizon: usize,
        seed: u64,
    ) -> Result<RealizedAdversary, EnvError> {
        match self {
            AdversarySpec::Bernoulli(means) => {
                if means.len() != g.k() {
                    return Err(EnvError::MeansLengthMismatch {
                        expected: g.k(),
                        got: means.len(),
                    });
                }
                Ok(RealizedAdversary {
                    table: gen_bernoulli_table(means, horizon, seed)?,
                    means: means.clone(),
                    lower_bound: None,
                })
            }
            AdversarySpec::Fig1 { special } => {
                let means = fig1_adversary(g.k(), *special)?;
                Ok(RealizedAdversary {
                    table: gen_bernoulli_table(&means, horizon, seed)?,
                    means,
                    lower_bound: None,
                })
            }
            AdversarySpec::LowerBound => {
                let (table, spec) = lower_bound_adversary(g, horizon, seed)?;
                let means = spec.means(g.k());
                Ok(RealizedAdversary {
                    table,
                    means,
                    lower_bound: Some(spec),
                })
            }
        }
    }
}

/// Parses a means file: whitespace-separated values in `[0, 1]`, `#` comments.
pub fn parse_means<R: BufRead>(reader: R) -> Result<Vec<f64>, EnvError> {
    let mut means = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        for field in text.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| EnvError::Parse {
                line: idx + 1,
                msg: format!("bad mean `{field}`"),
            })?;
            means.push(value);
        }
    }
    validate_means(&means)?;
    Ok(means)
}
