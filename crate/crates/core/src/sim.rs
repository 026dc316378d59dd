//! Deterministic round loop, regret accounting, and Monte Carlo aggregation.
//!
//! A run binds one policy to one pre-drawn reward table and one observation
//! model. Run `r` of an experiment derives its own seed (`seed ^ r`) and four
//! disjoint generator streams, so results are reproducible bit for bit no
//! matter how runs are scheduled across workers, and the adversary's table
//! never depends on the policy's randomness.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{AdversarySpec, EnvError, ObservationModel, RewardTable};
use crate::graph::{ActionId, FeedbackGraph, GraphSequence};
use crate::policies::{check_distribution, PolicyError, PolicyMetadata, PolicySpec};
use crate::rng::{mix_seed, run_seed, sample_index, stream_rng, StreamId};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config field `{field}`: {msg}")]
    Config { field: &'static str, msg: String },
    #[error("round {round}: {source}")]
    Policy {
        round: usize,
        #[source]
        source: PolicyError,
    },
    #[error("round {round}: invalid play distribution ({detail})")]
    InvalidDistribution { round: usize, detail: String },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("action trace has {got} entries, horizon is {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Experiment description as read from a JSON config file.
///
/// `graph`, `policy`, `adversary` and `observation` are spec strings, e.g.
/// `"erdos-renyi:100:0.25"`, `"elp beta=0.01"`, `"fig1:0"`, `"noise:0.25"`.
/// `k` is optional and validated against the graph when present.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub graph: String,
    pub policy: String,
    pub adversary: String,
    #[serde(default = "default_observation")]
    pub observation: String,
    pub seed: u64,
    pub runs: usize,
}

fn default_observation() -> String {
    "exact".into()
}

/// A validated configuration ready to run.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub horizon: usize,
    pub k: usize,
    pub sequence: GraphSequence,
    pub policy: PolicySpec,
    pub adversary: AdversarySpec,
    pub observation: ObservationModel,
    pub seed: u64,
    pub runs: usize,
}

fn config_err(field: &'static str, msg: impl Into<String>) -> SimError {
    SimError::Config {
        field,
        msg: msg.into(),
    }
}

/// Validates a [`RunConfig`]; relative file paths resolve against `base_dir`.
pub fn resolve(config: &RunConfig, base_dir: &Path) -> Result<ResolvedConfig, SimError> {
    if config.t == 0 {
        return Err(config_err("t", "horizon must be at least 1"));
    }
    if config.runs == 0 {
        return Err(config_err("runs", "must run at least once"));
    }
    let sequence = parse_graph_spec(&config.graph, config.seed, base_dir)?;
    let k = sequence.k();
    if let Some(config_k) = config.k {
        if config_k != k {
            return Err(config_err(
                "k",
                format!("config says {config_k} actions but the graph has {k}"),
            ));
        }
    }
    let policy =
        PolicySpec::parse(&config.policy).map_err(|e| config_err("policy", e.to_string()))?;
    let observation = parse_observation_spec(&config.observation)?;
    validate_overrides(&policy, k, observation.bound())?;
    let adversary = parse_adversary_spec(&config.adversary, base_dir)?;
    if matches!(adversary, AdversarySpec::LowerBound) {
        let GraphSequence::Fixed(g) = &sequence else {
            return Err(config_err("adversary", "lowerbound requires a fixed graph"));
        };
        // surface horizon/direction problems before any run starts
        AdversarySpec::LowerBound
            .realize(g, config.t, config.seed)
            .map_err(|e| config_err("adversary", e.to_string()))?;
    }
    Ok(ResolvedConfig {
        horizon: config.t,
        k,
        sequence,
        policy,
        adversary,
        observation,
        seed: config.seed,
        runs: config.runs,
    })
}

fn parse_graph_spec(spec: &str, seed: u64, base_dir: &Path) -> Result<GraphSequence, SimError> {
    const GRAPH_SEED_SALT: u64 = 0x6772_6170;
    let err = |msg: String| config_err("graph", msg);
    let parts: Vec<&str> = spec.split(':').collect();
    let parse_k = |s: &str| -> Result<usize, SimError> {
        s.parse()
            .map_err(|_| err(format!("bad action count `{s}`")))
    };
    let graph = match parts.as_slice() {
        ["file", path] => {
            let path = base_dir.join(path);
            let file =
                std::fs::File::open(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
            FeedbackGraph::parse(std::io::BufReader::new(file)).map_err(|e| err(e.to_string()))?
        }
        [name @ ("complete" | "empty" | "star" | "cycle" | "path"), k] => {
            FeedbackGraph::fixture(name, parse_k(k)?).map_err(|e| err(e.to_string()))?
        }
        ["disjoint-cliques", m, k] => {
            let m: usize = m
                .parse()
                .map_err(|_| err(format!("bad clique count `{m}`")))?;
            FeedbackGraph::fixture(&format!("disjoint_cliques({m})"), parse_k(k)?)
                .map_err(|e| err(e.to_string()))?
        }
        ["erdos-renyi", k, p, rest @ ..] => {
            let k = parse_k(k)?;
            let p: f64 = p
                .parse()
                .map_err(|_| err(format!("bad probability `{p}`")))?;
            let mut graph_seed = mix_seed(seed, GRAPH_SEED_SALT);
            let mut directed = false;
            for token in rest {
                if *token == "directed" {
                    directed = true;
                } else if let Ok(s) = token.parse::<u64>() {
                    graph_seed = s;
                } else {
                    return Err(err(format!("unexpected token `{token}`")));
                }
            }
            FeedbackGraph::erdos_renyi(k, p, graph_seed, directed)
                .map_err(|e| err(e.to_string()))?
        }
        ["per-round-erdos-renyi", k, p, rest @ ..] => {
            let k = parse_k(k)?;
            let p: f64 = p
                .parse()
                .map_err(|_| err(format!("bad probability `{p}`")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(err(format!("probability {p} outside [0, 1]")));
            }
            let mut graph_seed = mix_seed(seed, GRAPH_SEED_SALT);
            if let [s] = rest {
                graph_seed = s.parse().map_err(|_| err(format!("bad seed `{s}`")))?;
            } else if !rest.is_empty() {
                return Err(err("too many tokens".into()));
            }
            return Ok(GraphSequence::PerRoundErdosRenyi {
                k,
                p,
                seed: graph_seed,
                directed: false,
            });
        }
        _ => return Err(err(format!("unrecognized graph spec `{spec}`"))),
    };
    Ok(GraphSequence::Fixed(graph))
}

fn parse_adversary_spec(spec: &str, base_dir: &Path) -> Result<AdversarySpec, SimError> {
    let err = |msg: String| config_err("adversary", msg);
    match spec.split_once(':') {
        None if spec == "lowerbound" => Ok(AdversarySpec::LowerBound),
        Some(("fig1", special)) => {
            let special = special
                .parse()
                .map_err(|_| err(format!("bad special action `{special}`")))?;
            Ok(AdversarySpec::Fig1 { special })
        }
        Some(("bernoulli", path)) => {
            let path = base_dir.join(path);
            let file =
                std::fs::File::open(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
            let means = crate::env::parse_means(std::io::BufReader::new(file))
                .map_err(|e| err(e.to_string()))?;
            Ok(AdversarySpec::Bernoulli(means))
        }
        _ => Err(err(format!("unrecognized adversary spec `{spec}`"))),
    }
}

fn parse_observation_spec(spec: &str) -> Result<ObservationModel, SimError> {
    let err = |msg: String| config_err("observation", msg);
    match spec.split_once(':') {
        None if spec == "exact" => Ok(ObservationModel::Exact),
        Some(("noise", delta)) => {
            let delta: f64 = delta
                .parse()
                .map_err(|_| err(format!("bad noise width `{delta}`")))?;
            if !delta.is_finite() || delta < 0.0 {
                return Err(err(format!("noise width {delta} must be nonnegative")));
            }
            Ok(ObservationModel::BoundedNoise { delta })
        }
        _ => Err(err(format!("unrecognized observation spec `{spec}`"))),
    }
}

fn validate_overrides(policy: &PolicySpec, k: usize, b: f64) -> Result<(), SimError> {
    use crate::policies::PolicyKind;
    let err = |msg: String| config_err("policy", msg);
    if let Some(beta) = policy.beta {
        let ok = match policy.kind {
            PolicyKind::Elp | PolicyKind::ElpDirected | PolicyKind::MetaElp => {
                beta > 0.0 && beta < 1.0 / (2.0 * b * k as f64)
            }
            PolicyKind::ExpBan => beta > 0.0 && beta < 1.0 / b,
            PolicyKind::Exp3 => return Err(err("exp3 takes no beta".into())),
        };
        if !ok {
            return Err(err(format!(
                "beta = {beta} out of range for {}",
                policy.kind.name()
            )));
        }
    }
    if let Some(gamma) = policy.gamma {
        let ok = match policy.kind {
            PolicyKind::Elp | PolicyKind::ElpDirected => gamma > 0.0 && gamma <= 0.5,
            PolicyKind::ExpBan | PolicyKind::Exp3 | PolicyKind::MetaElp => {
                gamma > 0.0 && gamma <= 1.0
            }
        };
        if !ok {
            return Err(err(format!(
                "gamma = {gamma} out of range for {}",
                policy.kind.name()
            )));
        }
    }
    Ok(())
}

/// Compensated accumulator; the horizon-long reward sums must not drift.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Trajectory and regret accounting for one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub run_index: usize,
    pub actions: Vec<ActionId>,
    pub rewards: Vec<f64>,
    pub cum_rewards: Vec<f64>,
    /// Best-prefix realized regret after each round.
    pub cum_regret: Vec<f64>,
    pub realized_regret: f64,
    pub pseudo_regret: f64,
    pub metadata: PolicyMetadata,
}

/// `(realized, pseudo)` regret of an action trace against a table; pseudo
/// uses the adversary's means when available.
pub fn regret(
    table: &RewardTable,
    actions: &[ActionId],
    means: Option<&[f64]>,
) -> Result<(f64, Option<f64>), SimError> {
    if actions.len() != table.horizon() {
        return Err(SimError::LengthMismatch {
            expected: table.horizon(),
            got: actions.len(),
        });
    }
    let totals = table.column_totals();
    let best = totals.iter().cloned().fold(f64::MIN, f64::max);
    let mut earned = KahanSum::default();
    for (t, &a) in actions.iter().enumerate() {
        earned.add(table.reward(t, a));
    }
    let realized = best - earned.value();
    let pseudo = means.map(|m| {
        let best_mean = m.iter().cloned().fold(f64::MIN, f64::max);
        let mut chosen = KahanSum::default();
        for &a in actions {
            chosen.add(m[a]);
        }
        best_mean * actions.len() as f64 - chosen.value()
    });
    Ok((realized, pseudo))
}

/// Executes one run: `begin_round`, sample, reward, observe, repeat.
/// Deterministic in `(config, run_index)`.
pub fn run_single(cfg: &ResolvedConfig, run_index: usize) -> Result<RunResult, SimError> {
    let seed = run_seed(cfg.seed, run_index as u64);
    let first_graph = cfg.sequence.graph_at(0);
    let adversary = cfg.adversary.realize(&first_graph, cfg.horizon, seed)?;
    drop(first_graph);

    let b = cfg.observation.bound();
    let mut policy = cfg
        .policy
        .build(
            &cfg.sequence,
            cfg.horizon,
            b,
            stream_rng(seed, StreamId::Policy),
        )
        .map_err(|source| SimError::Policy { round: 0, source })?;
    let mut sampler = stream_rng(seed, StreamId::Sampling);
    let mut noise = stream_rng(seed, StreamId::Noise);

    let mut actions = Vec::with_capacity(cfg.horizon);
    let mut rewards = Vec::with_capacity(cfg.horizon);
    let mut cum_rewards = Vec::with_capacity(cfg.horizon);
    let mut cum_regret = Vec::with_capacity(cfg.horizon);
    let mut earned = KahanSum::default();
    let mut column_totals = vec![KahanSum::default(); cfg.k];

    #[cfg(debug_assertions)]
    let mut ratio_check = RatioCheck::default();

    for t in 0..cfg.horizon {
        let graph = cfg.sequence.graph_at(t);
        let p = policy
            .begin_round(t, &graph)
            .map_err(|source| SimError::Policy { round: t, source })?;
        check_distribution(&p, 1e-12)
            .map_err(|detail| SimError::InvalidDistribution { round: t, detail })?;

        #[cfg(debug_assertions)]
        ratio_check.check(&graph, &p, t);

        let chosen = sample_index(&p, &mut sampler);
        let reward = adversary.table.reward(t, chosen);
        let estimates = cfg
            .observation
            .observe(&graph, chosen, adversary.table.row(t), &mut noise);
        debug_assert!(estimates
            .iter()
            .all(|&(j, _)| graph.revealed_by(chosen).contains(j)));
        policy
            .observe(t, &graph, chosen, reward, &estimates)
            .map_err(|source| SimError::Policy { round: t, source })?;

        earned.add(reward);
        for (i, total) in column_totals.iter_mut().enumerate() {
            total.add(adversary.table.reward(t, i));
        }
        let best_prefix = column_totals
            .iter()
            .map(KahanSum::value)
            .fold(f64::MIN, f64::max);
        actions.push(chosen);
        rewards.push(reward);
        cum_rewards.push(earned.value());
        cum_regret.push(best_prefix - earned.value());
    }

    let (realized, pseudo) = regret(&adversary.table, &actions, Some(&adversary.means))?;
    debug_assert!((realized - cum_regret.last().unwrap()).abs() < 1e-9);

    Ok(RunResult {
        run_index,
        actions,
        rewards,
        cum_rewards,
        cum_regret,
        realized_regret: realized,
        pseudo_regret: pseudo.expect("means always known for built-in adversaries"),
        metadata: policy.metadata(),
    })
}

/// In test builds, asserts the combinatorial ratio bound on every emitted
/// play distribution of small undirected graphs:
/// `Σ_j p_j / Σ_{l∈N_j} p_l ≤ α(G)`.
#[cfg(debug_assertions)]
#[derive(Default)]
struct RatioCheck {
    cache: Option<(FeedbackGraph, usize)>,
}

#[cfg(debug_assertions)]
impl RatioCheck {
    fn check(&mut self, graph: &FeedbackGraph, p: &[f64], t: usize) {
        if graph.directed() || graph.k() > 14 {
            return;
        }
        let alpha = match &self.cache {
            Some((g, alpha)) if g == graph => *alpha,
            _ => {
                let alpha = graph
                    .independence_number_exact()
                    .expect("k <= 14 within exact limit")
                    .0;
                self.cache = Some((graph.clone(), alpha));
                alpha
            }
        };
        let ratio = graph.mass_ratio_sum(p);
        assert!(
            ratio <= alpha as f64 + 1e-9,
            "round {t}: ratio sum {ratio} exceeds independence number {alpha}"
        );
    }
}

/// Per-round means and deviations across runs, plus final summaries.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_cum_reward: Vec<f64>,
    pub std_cum_reward: Vec<f64>,
    pub mean_regret: Vec<f64>,
    pub std_regret: Vec<f64>,
    /// Cumulative reward divided by rounds elapsed.
    pub mean_payoff: Vec<f64>,
    pub std_payoff: Vec<f64>,
    pub final_mean_regret: f64,
    pub final_se_regret: f64,
    pub mean_pseudo_regret: f64,
    pub se_pseudo_regret: f64,
    pub final_mean_payoff: f64,
    pub final_se_payoff: f64,
}

fn mean_and_sample_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn aggregate(results: &[RunResult]) -> Aggregate {
    let runs = results.len();
    assert!(runs >= 1);
    let horizon = results[0].cum_rewards.len();
    let mut mean_cum_reward = Vec::with_capacity(horizon);
    let mut std_cum_reward = Vec::with_capacity(horizon);
    let mut mean_regret = Vec::with_capacity(horizon);
    let mut std_regret = Vec::with_capacity(horizon);
    let mut mean_payoff = Vec::with_capacity(horizon);
    let mut std_payoff = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let (m, s) = mean_and_sample_std(results.iter().map(|r| r.cum_rewards[t]), runs);
        mean_cum_reward.push(m);
        std_cum_reward.push(s);
        let rounds = (t + 1) as f64;
        mean_payoff.push(m / rounds);
        std_payoff.push(s / rounds);
        let (m, s) = mean_and_sample_std(results.iter().map(|r| r.cum_regret[t]), runs);
        mean_regret.push(m);
        std_regret.push(s);
    }
    let sqrt_runs = (runs as f64).sqrt();
    let (final_mean_regret, std) =
        mean_and_sample_std(results.iter().map(|r| r.realized_regret), runs);
    let final_se_regret = std / sqrt_runs;
    let (mean_pseudo_regret, std) =
        mean_and_sample_std(results.iter().map(|r| r.pseudo_regret), runs);
    let se_pseudo_regret = std / sqrt_runs;
    let horizon_f = horizon as f64;
    let (final_mean_payoff, std) = mean_and_sample_std(
        results
            .iter()
            .map(|r| r.cum_rewards[horizon - 1] / horizon_f),
        runs,
    );
    let final_se_payoff = std / sqrt_runs;
    Aggregate {
        runs,
        mean_cum_reward,
        std_cum_reward,
        mean_regret,
        std_regret,
        mean_payoff,
        std_payoff,
        final_mean_regret,
        final_se_regret,
        mean_pseudo_regret,
        se_pseudo_regret,
        final_mean_payoff,
        final_se_payoff,
    }
}

/// Runs all Monte Carlo repetitions on `threads` workers (0 = automatic) and
/// aggregates; per-run outputs and the aggregate are independent of the
/// worker count.
pub fn run_all(
    cfg: &ResolvedConfig,
    threads: usize,
) -> Result<(Vec<RunResult>, Aggregate), SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    let results: Result<Vec<RunResult>, SimError> = pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| run_single(cfg, r))
            .collect()
    });
    let results = results?;
    let agg = aggregate(&results);
    Ok((results, agg))
}

pub fn run_monte_carlo(cfg: &ResolvedConfig, threads: usize) -> Result<Aggregate, SimError> {
    run_all(cfg, threads).map(|(_, agg)| agg)
}

/// Per-run trajectories. Columns: `run,t,action,reward,cum_reward,regret`
/// with `t` starting at 1.
pub fn write_runs_csv<W: Write>(results: &[RunResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "run,t,action,reward,cum_reward,regret")?;
    for r in results {
        for t in 0..r.actions.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.run_index,
                t + 1,
                r.actions[t],
                r.rewards[t],
                r.cum_rewards[t],
                r.cum_regret[t]
            )?;
        }
    }
    Ok(())
}

/// Across-run curves. Columns: `t,mean_payoff,std_payoff,mean_regret,std_regret`.
pub fn write_aggregate_csv<W: Write>(agg: &Aggregate, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,mean_payoff,std_payoff,mean_regret,std_regret")?;
    for t in 0..agg.mean_payoff.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            t + 1,
            agg.mean_payoff[t],
            agg.std_payoff[t],
            agg.mean_regret[t],
            agg.std_regret[t]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn base() -> PathBuf {
        PathBuf::from(".")
    }

    fn config(graph: &str, policy: &str, adversary: &str, t: usize, runs: usize) -> RunConfig {
        RunConfig {
            t,
            k: None,
            graph: graph.into(),
            policy: policy.into(),
            adversary: adversary.into(),
            observation: "exact".into(),
            seed: 20_240_001,
            runs,
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config("star:5", "elp", "fig1:0", 100, 2);
        assert!(resolve(&c, &base()).is_ok());

        c.t = 0;
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config { field: "t", .. })
        ));
        c.t = 100;

        c.k = Some(6);
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config { field: "k", .. })
        ));
        c.k = Some(5);
        assert!(resolve(&c, &base()).is_ok());

        c.policy = "sarsa".into();
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config {
                field: "policy",
                ..
            })
        ));
        c.policy = "elp beta=0.4".into(); // beta >= 1/(2bk)
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config {
                field: "policy",
                ..
            })
        ));
        c.policy = "elp".into();

        c.adversary = "mystery".into();
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config {
                field: "adversary",
                ..
            })
        ));
        c.adversary = "fig1:0".into();

        c.observation = "noise:-1".into();
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config {
                field: "observation",
                ..
            })
        ));

        // hard instance needs a long enough horizon, caught at resolve time
        let c = config("empty:10", "exp3", "lowerbound", 3, 1);
        assert!(matches!(
            resolve(&c, &base()),
            Err(SimError::Config {
                field: "adversary",
                ..
            })
        ));
    }

    #[test]
    fn constant_rewards_have_zero_regret() {
        // all-ones means make every action optimal
        let dir = std::env::temp_dir().join("gb_means_test");
        std::fs::create_dir_all(&dir).unwrap();
        let means_path = dir.join("ones.txt");
        std::fs::write(&means_path, "1 1 1 1\n").unwrap();
        let c = RunConfig {
            t: 200,
            k: None,
            graph: "empty:4".into(),
            policy: "exp3".into(),
            adversary: format!("bernoulli:{}", means_path.display()),
            observation: "exact".into(),
            seed: 3,
            runs: 1,
        };
        let resolved = resolve(&c, &base()).unwrap();
        let result = run_single(&resolved, 0).unwrap();
        assert_eq!(result.realized_regret, 0.0);
        assert_eq!(result.pseudo_regret, 0.0);
    }

    #[test]
    fn regret_arithmetic() {
        let table = crate::env::gen_bernoulli_table(&[1.0, 0.0], 5, 1).unwrap();
        // always play the best column
        let (realized, _) = regret(&table, &[0; 5], None).unwrap();
        assert_eq!(realized, 0.0);
        // always play the worst
        let (realized, pseudo) = regret(&table, &[1; 5], Some(&[1.0, 0.0])).unwrap();
        assert_eq!(realized, 5.0);
        assert_eq!(pseudo, Some(5.0));
        assert!(regret(&table, &[0; 4], None).is_err());
    }

    #[test]
    fn single_round_regret() {
        // deterministic single-row table via means 0/1 is too coarse; check
        // the regret op directly on a crafted trace instead
        let c = config("empty:2", "exp3", "fig1:1", 1, 1);
        let resolved = resolve(&c, &base()).unwrap();
        let result = run_single(&resolved, 0).unwrap();
        assert_eq!(result.actions.len(), 1);
        assert!(result.realized_regret >= 0.0);
    }

    #[test]
    fn conservation_of_reward() {
        let c = config("cycle:6", "elp", "fig1:2", 3000, 1);
        let resolved = resolve(&c, &base()).unwrap();
        let result = run_single(&resolved, 0).unwrap();
        let naive: f64 = result.rewards.iter().sum();
        assert!((naive - result.cum_rewards.last().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn aggregate_of_one_run_is_that_run() {
        let c = config("star:4", "expban", "fig1:0", 150, 1);
        let resolved = resolve(&c, &base()).unwrap();
        let (results, agg) = run_all(&resolved, 1).unwrap();
        assert_eq!(agg.runs, 1);
        assert_eq!(agg.mean_cum_reward, results[0].cum_rewards);
        assert_eq!(agg.mean_regret, results[0].cum_regret);
        assert!(agg.std_regret.iter().all(|&s| s == 0.0));
        assert_eq!(agg.final_mean_regret, results[0].realized_regret);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let c = config("erdos-renyi:8:0.4", "elp", "fig1:3", 250, 6);
        let resolved = resolve(&c, &base()).unwrap();
        let mut outputs = Vec::new();
        for threads in [1, 2, 4] {
            let (results, agg) = run_all(&resolved, threads).unwrap();
            let mut runs_csv = Vec::new();
            write_runs_csv(&results, &mut runs_csv).unwrap();
            let mut agg_csv = Vec::new();
            write_aggregate_csv(&agg, &mut agg_csv).unwrap();
            outputs.push((runs_csv, agg_csv));
        }
        assert_eq!(outputs[0], outputs[1]);
        assert_eq!(outputs[1], outputs[2]);
    }

    #[test]
    fn doubling_runs_shrinks_standard_error() {
        let make = |runs: usize| {
            let c = config("star:5", "exp3", "fig1:0", 400, runs);
            let resolved = resolve(&c, &base()).unwrap();
            run_monte_carlo(&resolved, 0).unwrap()
        };
        let se_64 = make(64).final_se_regret;
        let se_128 = make(128).final_se_regret;
        let ratio = se_64 / se_128;
        assert!(
            (1.2..=1.7).contains(&ratio),
            "se ratio {ratio} (se64 {se_64}, se128 {se_128})"
        );
    }

    #[test]
    fn per_round_graphs_run() {
        let c = config("per-round-erdos-renyi:6:0.5", "elp", "fig1:0", 120, 2);
        let resolved = resolve(&c, &base()).unwrap();
        let (results, _) = run_all(&resolved, 1).unwrap();
        assert_eq!(results[0].metadata.tuning_source, Some("greedy"));
    }

    #[test]
    fn meta_elp_and_noise_run() {
        let mut c = config("cycle:5", "meta-elp", "fig1:0", 200, 2);
        c.observation = "noise:0.25".into();
        let resolved = resolve(&c, &base()).unwrap();
        let (results, _) = run_all(&resolved, 2).unwrap();
        assert_eq!(results[0].metadata.copies, Some(3));
    }
}
