//! Adversarial online learning with graph-structured side observations.
//!
//! Each round a learner picks one of `k` actions and receives that action's
//! reward plus unbiased estimates of the rewards of every action whose
//! in-neighborhood contains the chosen one. The crate provides:
//!
//! - [`graph`]: feedback graphs, their combinatorial quantities (independence
//!   number, clique partitions) and fixture/random generators,
//! - [`lp`]: the max-min exploration linear program,
//! - [`policies`]: the learners (exponential-weights with LP exploration,
//!   clique-bandit hybrid, plain importance-weighted bandit, doubling grid),
//! - [`env`]: oblivious adversaries and the estimate channel,
//! - [`sim`]: a deterministic Monte Carlo round loop with regret accounting.

pub mod bitset;
pub mod env;
pub mod graph;
pub mod lp;
pub mod policies;
pub mod rng;
pub mod sim;
mod simplex;

pub use bitset::BitSet;
pub use env::{AdversarySpec, EnvError, ObservationModel, RewardTable};
pub use graph::{CliquePartition, FeedbackGraph, GraphError, GraphSequence};
pub use lp::{ExplorationDistribution, LpError};
pub use policies::{Policy, PolicyError, PolicyMetadata, PolicySpec};
pub use sim::{Aggregate, ResolvedConfig, RunConfig, RunResult, SimError};
