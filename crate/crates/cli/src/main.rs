//! Command-line harness: graph analysis, exploration LP solving, single
//! experiments, the random-graph payoff comparison, and the hard-instance
//! regret floor demo.
//!
//! Exit codes: 0 on success, 2 on configuration problems (bad flags, spec
//! strings, unreadable files), 1 on runtime failures.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graph_bandits::env::{LOWER_BOUND_C1, LOWER_BOUND_FLOOR};
use graph_bandits::graph::EXACT_ALPHA_LIMIT;
use graph_bandits::rng::mix_seed;
use graph_bandits::sim::{self, RunConfig};
use graph_bandits::{FeedbackGraph, SimError};

const GRAPH_FILE_HELP: &str = "\
Graph file format: first non-comment line `k directed` (directed is 0 or 1),\n\
then one `i j` edge per line meaning choosing i reveals j; `#` starts a\n\
comment. Self-loops are implicit.";

const CONFIG_HELP: &str = "\
Config file: JSON with fields t, runs, seed, graph, policy, adversary,\n\
observation (optional, default \"exact\") and k (optional, validated).\n\
Graph specs: file:<path>, complete:<k>, empty:<k>, star:<k>, cycle:<k>,\n\
path:<k>, disjoint-cliques:<m>:<k>, erdos-renyi:<k>:<p>[:<seed>][:directed],\n\
per-round-erdos-renyi:<k>:<p>[:<seed>].\n\
Policies: elp, elp-directed, expban, exp3, meta-elp, each with optional\n\
beta=<x> gamma=<x> tokens. Adversaries: bernoulli:<means-file>,\n\
fig1:<special>, lowerbound. Observation: exact or noise:<delta>.\n\
GRAPH_BANDITS_THREADS caps worker count (0 = auto).";

#[derive(Parser)]
#[command(
    name = "graph-bandits",
    version,
    about = "Bandit experiments with graph-structured side observations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a graph's size, edge count, independence number, and greedy
    /// clique-partition size.
    #[command(after_help = GRAPH_FILE_HELP)]
    GraphStats {
        /// Graph file to analyze.
        file: PathBuf,
    },
    /// Solve the max-min exploration program for a graph and print the
    /// optimum, the distribution, and the certificate gap.
    #[command(after_help = GRAPH_FILE_HELP)]
    LpSolve {
        /// Graph file to solve.
        file: PathBuf,
    },
    /// Run one experiment from a JSON config and write per-run and aggregate
    /// CSVs.
    #[command(after_help = CONFIG_HELP)]
    Simulate(SimulateArgs),
    /// Compare exp3, expban, and elp on random graphs across edge densities,
    /// writing one aggregate payoff curve per policy and density.
    ReproduceFig1(Fig1Args),
    /// Run a policy against the randomized hard instance and compare its
    /// measured pseudo-regret to the theoretical floor.
    #[command(after_help = GRAPH_FILE_HELP)]
    LowerBoundDemo(LowerBoundArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file; relative paths inside it resolve against its
    /// directory.
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's Monte Carlo run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Override the config's horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the config's policy spec string.
    #[arg(long)]
    policy: Option<String>,
    /// Directory for runs.csv and aggregate.csv (created if missing).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write run 0's reward table as rewards.csv for audit.
    #[arg(long)]
    dump_rewards: bool,
}

#[derive(Args)]
struct Fig1Args {
    /// Number of actions (default 100, or 300 with --full).
    #[arg(long)]
    k: Option<usize>,
    /// Rounds per run (default 10000, or 30000 with --full).
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated edge probabilities.
    #[arg(long, default_value = "0.05,0.25,0.5,0.75")]
    p_list: String,
    /// Independent runs per (density, policy) cell.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Full-scale defaults: k=300, horizon=30000.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LowerBoundArgs {
    /// Graph file defining the observation structure (undirected).
    graph_file: PathBuf,
    /// Rounds per run; defaults to 374 * alpha^3, the smallest horizon the
    /// floor is stated for. Shorter horizons warn and proceed.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value = "elp")]
    policy: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match read_threads() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::GraphStats { file } => cmd_graph_stats(&file),
        Command::LpSolve { file } => cmd_lp_solve(&file),
        Command::Simulate(args) => cmd_simulate(args, threads),
        Command::ReproduceFig1(args) => cmd_reproduce_fig1(args, threads),
        Command::LowerBoundDemo(args) => cmd_lower_bound_demo(args, threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // a closed stdout (e.g. piping into head) is not a failure
        Err(CliError::Runtime(msg)) if msg.contains("Broken pipe") => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    /// Bad inputs: flags, files, spec strings. Exit 2.
    Config(String),
    /// Failures after validation. Exit 1.
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::Config { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn read_threads() -> Result<usize, String> {
    match std::env::var("GRAPH_BANDITS_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("GRAPH_BANDITS_THREADS = `{v}` is not a worker count")),
        Err(_) => Ok(0),
    }
}

fn load_graph(path: &Path) -> Result<FeedbackGraph, CliError> {
    let file = File::open(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    FeedbackGraph::parse(BufReader::new(file)).map_err(config_err)
}

fn cmd_graph_stats(path: &Path) -> Result<(), CliError> {
    let g = load_graph(path)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut emit = move |line: String| writeln!(out, "{line}").map_err(runtime_err);
    emit(format!("k: {}", g.k()))?;
    emit(format!("directed: {}", g.directed()))?;
    emit(format!("edges: {}", g.edge_count()))?;
    if g.k() <= EXACT_ALPHA_LIMIT {
        let (alpha, witness) = g.independence_number_exact().map_err(runtime_err)?;
        emit(format!("alpha: {alpha} (exact)"))?;
        emit(format!(
            "alpha_witness: {}",
            witness
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        ))?;
    } else {
        let greedy = g.greedy_independent_set();
        emit(format!(
            "alpha: {} (greedy lower bound; k > {EXACT_ALPHA_LIMIT})",
            greedy.len()
        ))?;
    }
    emit(format!(
        "clique_partition: {} (greedy)",
        g.clique_partition_greedy().c()
    ))?;
    Ok(())
}

fn cmd_lp_solve(path: &Path) -> Result<(), CliError> {
    let g = load_graph(path)?;
    let sol = graph_bandits::lp::solve_max_min_exploration(&g).map_err(runtime_err)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "value: {}", sol.dist.value()).map_err(runtime_err)?;
    writeln!(out, "gap: {}", sol.gap).map_err(runtime_err)?;
    writeln!(
        out,
        "s: {}",
        sol.dist
            .s()
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    )
    .map_err(runtime_err)?;
    Ok(())
}

fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    write(&mut out).map_err(runtime_err)?;
    out.flush().map_err(runtime_err)
}

fn cmd_simulate(args: SimulateArgs, threads: usize) -> Result<(), CliError> {
    let file = File::open(&args.config)
        .map_err(|e| config_err(format!("{}: {e}", args.config.display())))?;
    let mut config: RunConfig = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| config_err(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(horizon) = args.horizon {
        config.t = horizon;
    }
    if let Some(policy) = args.policy {
        config.policy = policy;
    }
    let base_dir = args.config.parent().unwrap_or(Path::new("."));
    let resolved = sim::resolve(&config, base_dir)?;

    std::fs::create_dir_all(&args.out_dir).map_err(runtime_err)?;
    let (results, agg) = sim::run_all(&resolved, threads)?;

    let runs_path = args.out_dir.join("runs.csv");
    write_file(&runs_path, |out| sim::write_runs_csv(&results, out))?;
    let agg_path = args.out_dir.join("aggregate.csv");
    write_file(&agg_path, |out| sim::write_aggregate_csv(&agg, out))?;
    if args.dump_rewards {
        let adversary = resolved
            .adversary
            .realize(
                &resolved.sequence.graph_at(0),
                resolved.horizon,
                graph_bandits::rng::run_seed(resolved.seed, 0),
            )
            .map_err(runtime_err)?;
        write_file(&args.out_dir.join("rewards.csv"), |out| {
            adversary.table.write_csv(out)
        })?;
    }

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "policy: {}", results[0].metadata.summary()).map_err(runtime_err)?;
    writeln!(
        out,
        "final mean regret: {:.4} +- {:.4} (se over {} runs)",
        agg.final_mean_regret, agg.final_se_regret, agg.runs
    )
    .map_err(runtime_err)?;
    writeln!(
        out,
        "final mean pseudo-regret: {:.4} +- {:.4}",
        agg.mean_pseudo_regret, agg.se_pseudo_regret
    )
    .map_err(runtime_err)?;
    writeln!(
        out,
        "final mean payoff: {:.6} +- {:.6}",
        agg.final_mean_payoff, agg.final_se_payoff
    )
    .map_err(runtime_err)?;
    writeln!(
        out,
        "wrote {} and {}",
        runs_path.display(),
        agg_path.display()
    )
    .map_err(runtime_err)?;
    Ok(())
}

fn cmd_reproduce_fig1(args: Fig1Args, threads: usize) -> Result<(), CliError> {
    let k = args.k.unwrap_or(if args.full { 300 } else { 100 });
    let horizon = args
        .horizon
        .unwrap_or(if args.full { 30_000 } else { 10_000 });
    let p_tokens: Vec<String> = args
        .p_list
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if p_tokens.is_empty() {
        return Err(config_err("p-list is empty"));
    }
    for token in &p_tokens {
        let p: f64 = token
            .parse()
            .map_err(|_| config_err(format!("bad probability `{token}` in p-list")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(config_err(format!("probability {p} outside [0, 1]")));
        }
    }
    std::fs::create_dir_all(&args.out_dir).map_err(runtime_err)?;

    let policies = ["exp3", "expban", "elp"];
    let mut summary_rows = Vec::new();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(
        out,
        "{:>6} {:>8} {:>14} {:>12} {:>14}",
        "p", "policy", "mean_payoff", "se", "mean_regret"
    )
    .map_err(runtime_err)?;
    for (idx, token) in p_tokens.iter().enumerate() {
        let graph_seed = mix_seed(args.seed, idx as u64);
        for policy in policies {
            let config = RunConfig {
                t: horizon,
                k: Some(k),
                graph: format!("erdos-renyi:{k}:{token}:{graph_seed}"),
                policy: policy.into(),
                adversary: "fig1:0".into(),
                observation: "exact".into(),
                seed: args.seed,
                runs: args.runs,
            };
            let resolved = sim::resolve(&config, Path::new("."))?;
            let agg = sim::run_monte_carlo(&resolved, threads)?;
            let path = args.out_dir.join(format!("fig1_p{token}_{policy}.csv"));
            write_file(&path, |out| sim::write_aggregate_csv(&agg, out))?;
            writeln!(
                out,
                "{:>6} {:>8} {:>14.6} {:>12.6} {:>14.4}",
                token, policy, agg.final_mean_payoff, agg.final_se_payoff, agg.final_mean_regret
            )
            .map_err(runtime_err)?;
            summary_rows.push(format!(
                "{token},{policy},{},{},{}",
                agg.final_mean_payoff, agg.final_se_payoff, agg.final_mean_regret
            ));
        }
    }
    write_file(&args.out_dir.join("fig1_summary.csv"), |out| {
        writeln!(
            out,
            "p,policy,final_mean_payoff,se_payoff,final_mean_regret"
        )?;
        for row in &summary_rows {
            writeln!(out, "{row}")?;
        }
        Ok(())
    })?;
    Ok(())
}

fn cmd_lower_bound_demo(args: LowerBoundArgs, threads: usize) -> Result<(), CliError> {
    let g = load_graph(&args.graph_file)?;
    let alpha_hat = if g.k() <= EXACT_ALPHA_LIMIT {
        g.independence_number_exact().map_err(runtime_err)?.0
    } else {
        g.greedy_independent_set().len()
    };
    let recommended = 374 * alpha_hat.pow(3);
    let horizon = args.horizon.unwrap_or(recommended);
    if horizon < recommended {
        eprintln!(
            "warning: horizon {horizon} below the stated floor threshold {recommended} \
             (374 * alpha^3); the floor may not apply"
        );
    }
    let min_horizon = (4.0 * LOWER_BOUND_C1 * alpha_hat as f64).ceil() as usize;
    if horizon < min_horizon {
        return Err(config_err(format!(
            "horizon {horizon} too short for a valid reward gap; need at least {min_horizon}"
        )));
    }

    let config = RunConfig {
        t: horizon,
        k: Some(g.k()),
        graph: format!("file:{}", args.graph_file.display()),
        policy: args.policy.clone(),
        adversary: "lowerbound".into(),
        observation: "exact".into(),
        seed: args.seed,
        runs: args.runs,
    };
    let resolved = sim::resolve(&config, Path::new("."))?;
    let agg = sim::run_monte_carlo(&resolved, threads)?;

    let floor = LOWER_BOUND_FLOOR * (alpha_hat as f64 * horizon as f64).sqrt();
    let measured = agg.mean_pseudo_regret;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "alpha_hat: {alpha_hat}").map_err(runtime_err)?;
    writeln!(out, "horizon: {horizon} (recommended >= {recommended})").map_err(runtime_err)?;
    writeln!(
        out,
        "measured mean pseudo-regret: {:.4} +- {:.4} (se over {} runs)",
        measured, agg.se_pseudo_regret, agg.runs
    )
    .map_err(runtime_err)?;
    writeln!(out, "floor 0.06*sqrt(alpha*T): {floor:.4}").map_err(runtime_err)?;
    writeln!(out, "ratio measured/floor: {:.4}", measured / floor).map_err(runtime_err)?;
    Ok(())
}
