//! Feedback graphs over action sets and their combinatorial quantities.
//!
//! A feedback graph on `k` actions records, for every action `j`, the
//! in-neighborhood `N_j`: the set of actions whose choice yields a reward
//! estimate for `j`. Every action observes itself, so `j ∈ N_j` always.
//! In the undirected case observation is mutual: `i ∈ N_j ⇔ j ∈ N_i`.
//!
//! Two quantities of the observation structure drive learner tuning: the
//! independence number `α` (largest set of pairwise unlinked actions) and
//! the clique-partition number, approached here by greedy coloring of the
//! complement.

use std::borrow::Cow;
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bitset::BitSet;
use crate::rng::mix_seed;

/// Index of an action in `[0, k)`.
pub type ActionId = usize;

/// Exact independence-number solver refuses graphs larger than this by default.
pub const EXACT_ALPHA_LIMIT: usize = 30;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one action")]
    ZeroActions,
    #[error("edge endpoint {index} out of range for k = {k}")]
    EndpointOutOfRange { index: usize, k: usize },
    #[error("exact independence number refused: k = {k} exceeds limit {limit}")]
    ExactLimitExceeded { k: usize, limit: usize },
    #[error("unknown fixture name `{0}`")]
    UnknownFixture(String),
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("fixture `disjoint_cliques({m})` needs 1 <= m <= k (k = {k})")]
    BadCliqueCount { m: usize, k: usize },
    #[error("graph file, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-round observation structure over `k` actions.
///
/// `in_neighborhoods[j]` holds `N_j = {i : choosing i yields an estimate of j}`.
/// `out_neighborhoods[i] = {j : i ∈ N_j}` is the set of actions revealed by
/// choosing `i`; the two coincide exactly when the graph is undirected.
#[derive(Clone, PartialEq, Eq)]
pub struct FeedbackGraph {
    k: usize,
    directed: bool,
    in_nbrs: Vec<BitSet>,
    out_nbrs: Vec<BitSet>,
}

impl std::fmt::Debug for FeedbackGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeedbackGraph")
            .field("k", &self.k)
            .field("directed", &self.directed)
            .field("in_neighborhoods", &self.in_nbrs)
            .finish()
    }
}

impl FeedbackGraph {
    /// Builds a graph from directed edges `(i, j)` meaning "choosing `i`
    /// reveals `j`". Self-loops are implicit and always added; with
    /// `directed = false` every edge is symmetrized.
    pub fn from_edge_list(
        k: usize,
        edges: &[(usize, usize)],
        directed: bool,
    ) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroActions);
        }
        let mut in_nbrs: Vec<BitSet> = (0..k).map(|_| BitSet::new(k)).collect();
        for (j, nbrs) in in_nbrs.iter_mut().enumerate() {
            nbrs.insert(j);
        }
        for &(i, j) in edges {
            for endpoint in [i, j] {
                if endpoint >= k {
                    return Err(GraphError::EndpointOutOfRange { index: endpoint, k });
                }
            }
            in_nbrs[j].insert(i);
            if !directed {
                in_nbrs[i].insert(j);
            }
        }
        Ok(Self::from_in_neighborhoods(k, directed, in_nbrs))
    }

    fn from_in_neighborhoods(k: usize, directed: bool, in_nbrs: Vec<BitSet>) -> Self {
        let mut out_nbrs: Vec<BitSet> = (0..k).map(|_| BitSet::new(k)).collect();
        for (j, nbrs) in in_nbrs.iter().enumerate() {
            for i in nbrs.iter() {
                out_nbrs[i].insert(j);
            }
        }
        let g = FeedbackGraph {
            k,
            directed,
            in_nbrs,
            out_nbrs,
        };
        debug_assert!(g.check_invariants());
        g
    }

    fn check_invariants(&self) -> bool {
        for j in 0..self.k {
            if !self.in_nbrs[j].contains(j) {
                return false;
            }
            if !self.directed && self.in_nbrs[j] != self.out_nbrs[j] {
                return false;
            }
        }
        true
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// `N_j`: the actions whose choice reveals `j`.
    pub fn in_neighborhood(&self, j: ActionId) -> &BitSet {
        &self.in_nbrs[j]
    }

    /// `{j : i ∈ N_j}`: the actions revealed by choosing `i`.
    pub fn revealed_by(&self, i: ActionId) -> &BitSet {
        &self.out_nbrs[i]
    }

    /// Number of non-loop edges: unordered linked pairs if undirected,
    /// ordered pairs otherwise.
    pub fn edge_count(&self) -> usize {
        let with_loops: usize = self.in_nbrs.iter().map(BitSet::len).sum();
        let directed_edges = with_loops - self.k;
        if self.directed {
            directed_edges
        } else {
            directed_edges / 2
        }
    }

    /// True when some edge links `i` and `j` in either direction.
    pub fn linked(&self, i: ActionId, j: ActionId) -> bool {
        i != j && (self.in_nbrs[j].contains(i) || self.in_nbrs[i].contains(j))
    }

    /// Symmetrized link adjacency (either direction, self excluded).
    /// A set is independent iff it is pairwise non-adjacent here.
    pub fn link_adjacency(&self) -> Vec<BitSet> {
        let mut adj: Vec<BitSet> = (0..self.k).map(|_| BitSet::new(self.k)).collect();
        for j in 0..self.k {
            for i in self.in_nbrs[j].iter() {
                if i != j {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        adj
    }

    /// Mutual-observation adjacency (both directions, self excluded).
    /// Clique-partition blocks must be cliques in this relation.
    pub fn mutual_adjacency(&self) -> Vec<BitSet> {
        let mut adj: Vec<BitSet> = (0..self.k).map(|_| BitSet::new(self.k)).collect();
        for j in 0..self.k {
            for i in self.in_nbrs[j].iter() {
                if i != j && self.in_nbrs[i].contains(j) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        adj
    }

    /// `Σ_{l ∈ N_j} weights[l]`.
    pub fn neighborhood_mass(&self, j: ActionId, weights: &[f64]) -> f64 {
        self.in_nbrs[j].weighted_sum(weights)
    }

    /// `Σ_j w_j / Σ_{l ∈ N_j} w_l` for strictly positive weights.
    ///
    /// On undirected graphs this sum never exceeds the independence number,
    /// whatever the weights; the simulator asserts that on small graphs.
    pub fn mass_ratio_sum(&self, weights: &[f64]) -> f64 {
        (0..self.k)
            .map(|j| weights[j] / self.neighborhood_mass(j, weights))
            .sum()
    }

    /// Exact maximum independent set via branch and bound, using the default
    /// size limit. Returns the independence number and one witness set.
    pub fn independence_number_exact(&self) -> Result<(usize, Vec<ActionId>), GraphError> {
        self.independence_number_exact_with_limit(EXACT_ALPHA_LIMIT)
    }

    /// As [`independence_number_exact`](Self::independence_number_exact) with
    /// an explicit size limit. Pairs count as linked if an edge exists in
    /// either direction.
    pub fn independence_number_exact_with_limit(
        &self,
        limit: usize,
    ) -> Result<(usize, Vec<ActionId>), GraphError> {
        if self.k > limit {
            return Err(GraphError::ExactLimitExceeded { k: self.k, limit });
        }
        let adj = self.link_adjacency();
        let mut search = MisSearch {
            adj: &adj,
            best: 0,
            witness: Vec::new(),
            current: Vec::new(),
        };
        search.run(BitSet::full(self.k));
        let mut witness = search.witness;
        witness.sort_unstable();
        Ok((search.best, witness))
    }

    /// Maximal independent set built by repeatedly taking the minimum-degree
    /// remaining node (lowest index on ties) and deleting its closed
    /// neighborhood. A lower-bound surrogate for the independence number.
    pub fn greedy_independent_set(&self) -> Vec<ActionId> {
        let adj = self.link_adjacency();
        let mut remaining = BitSet::full(self.k);
        let mut chosen = Vec::new();
        while let Some(seed) = remaining.first() {
            let mut pick = seed;
            let mut pick_deg = usize::MAX;
            for v in remaining.iter() {
                let deg = adj[v].intersection_len(&remaining);
                if deg < pick_deg {
                    pick = v;
                    pick_deg = deg;
                }
            }
            chosen.push(pick);
            remaining.remove(pick);
            remaining.subtract(&adj[pick]);
        }
        chosen.sort_unstable();
        chosen
    }

    /// Partition of the actions into mutually-observing cliques, by greedy
    /// coloring of the complement of the mutual-observation relation.
    /// Vertices are colored in descending complement-degree order with index
    /// tie-break, so the result is deterministic.
    pub fn clique_partition_greedy(&self) -> CliquePartition {
        let mutual = self.mutual_adjacency();
        let mut order: Vec<usize> = (0..self.k).collect();
        // complement-degree = (k - 1) - mutual degree; descending in it is
        // ascending in mutual degree.
        order.sort_by_key(|&v| (mutual[v].len(), v));
        let mut block_of = vec![usize::MAX; self.k];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            let slot = blocks
                .iter()
                .position(|blk| blk.iter().all(|&u| mutual[v].contains(u)));
            match slot {
                Some(c) => {
                    blocks[c].push(v);
                    block_of[v] = c;
                }
                None => {
                    block_of[v] = blocks.len();
                    blocks.push(vec![v]);
                }
            }
        }
        for blk in &mut blocks {
            blk.sort_unstable();
        }
        let partition = CliquePartition { blocks, block_of };
        debug_assert!(partition.is_valid(self));
        partition
    }

    /// Random graph linking each pair independently with probability `p`:
    /// unordered pairs when undirected, ordered pairs when directed.
    /// Deterministic in `seed`.
    pub fn erdos_renyi(k: usize, p: f64, seed: u64, directed: bool) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroActions);
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidProbability(p));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        if directed {
            for i in 0..k {
                for j in 0..k {
                    if i != j && rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
        } else {
            for i in 0..k {
                for j in (i + 1)..k {
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
        }
        Self::from_edge_list(k, &edges, directed)
    }

    /// Named undirected test graph.
    pub fn fixture(name: &str, k: usize) -> Result<Self, GraphError> {
        Self::from_fixture(Fixture::parse(name)?, k)
    }

    pub fn from_fixture(fixture: Fixture, k: usize) -> Result<Self, GraphError> {
        if k == 0 {
            return Err(GraphError::ZeroActions);
        }
        let edges: Vec<(usize, usize)> = match fixture {
            Fixture::Empty => Vec::new(),
            Fixture::Complete => (0..k)
                .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
                .collect(),
            Fixture::Star => (1..k).map(|leaf| (0, leaf)).collect(),
            Fixture::Path => (1..k).map(|i| (i - 1, i)).collect(),
            Fixture::Cycle => {
                let mut e: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
                if k > 2 {
                    e.push((k - 1, 0));
                }
                e
            }
            Fixture::DisjointCliques(m) => {
                if m == 0 || m > k {
                    return Err(GraphError::BadCliqueCount { m, k });
                }
                let base = k / m;
                let extra = k % m;
                let mut e = Vec::new();
                let mut start = 0;
                for b in 0..m {
                    let size = base + usize::from(b < extra);
                    for i in start..start + size {
                        for j in (i + 1)..start + size {
                            e.push((i, j));
                        }
                    }
                    start += size;
                }
                e
            }
        };
        Self::from_edge_list(k, &edges, false)
    }

    /// Parses the plain-text graph format: first non-comment line is
    /// `k directed{0|1}`, then one `i j` edge per line; `#` starts a comment.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut header: Option<(usize, bool)> = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    line: line_no,
                    msg: format!("expected two fields, got {}", fields.len()),
                });
            }
            if header.is_none() {
                let k: usize = fields[0].parse().map_err(|_| GraphError::Parse {
                    line: line_no,
                    msg: format!("bad action count `{}`", fields[0]),
                })?;
                let directed = match fields[1] {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(GraphError::Parse {
                            line: line_no,
                            msg: format!("directed flag must be 0 or 1, got `{other}`"),
                        })
                    }
                };
                header = Some((k, directed));
            } else {
                let parse = |s: &str| -> Result<usize, GraphError> {
                    s.parse().map_err(|_| GraphError::Parse {
                        line: line_no,
                        msg: format!("bad endpoint `{s}`"),
                    })
                };
                edges.push((parse(fields[0])?, parse(fields[1])?));
            }
        }
        let (k, directed) = header.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `k directed` header line".into(),
        })?;
        Self::from_edge_list(k, &edges, directed)
    }

    /// Writes the graph in the same plain-text format accepted by [`parse`](Self::parse).
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.k, u8::from(self.directed))?;
        for j in 0..self.k {
            for i in self.in_nbrs[j].iter() {
                if i == j {
                    continue;
                }
                // edge "i j" means choosing i reveals j
                if self.directed || i < j {
                    writeln!(out, "{i} {j}")?;
                }
            }
        }
        Ok(())
    }
}

/// Branch-and-bound maximum independent set over the symmetrized link
/// adjacency, pruned by a greedy clique cover of the candidate set.
struct MisSearch<'a> {
    adj: &'a [BitSet],
    best: usize,
    witness: Vec<usize>,
    current: Vec<usize>,
}

impl MisSearch<'_> {
    fn run(&mut self, candidates: BitSet) {
        if self.current.len() > self.best {
            self.best = self.current.len();
            self.witness = self.current.clone();
        }
        if candidates.is_empty() {
            return;
        }
        if self.current.len() + self.cover_bound(&candidates) <= self.best {
            return;
        }
        // branch on the candidate with most candidate-neighbors: including it
        // shrinks the subproblem fastest
        let mut pivot = candidates.first().unwrap();
        let mut pivot_deg = 0;
        for v in candidates.iter() {
            let deg = self.adj[v].intersection_len(&candidates);
            if deg > pivot_deg {
                pivot = v;
                pivot_deg = deg;
            }
        }
        let mut included = candidates.clone();
        included.remove(pivot);
        included.subtract(&self.adj[pivot]);
        self.current.push(pivot);
        self.run(included);
        self.current.pop();

        let mut excluded = candidates;
        excluded.remove(pivot);
        self.run(excluded);
    }

    /// Number of cliques in a greedy cover of `candidates`; an independent
    /// set takes at most one vertex per clique.
    fn cover_bound(&self, candidates: &BitSet) -> usize {
        let mut remaining = candidates.clone();
        let mut cliques = 0;
        while let Some(v) = remaining.first() {
            remaining.remove(v);
            let mut extendable = remaining.clone();
            extendable.intersect_with(&self.adj[v]);
            while let Some(u) = extendable.first() {
                remaining.remove(u);
                extendable.remove(u);
                extendable.intersect_with(&self.adj[u]);
            }
            cliques += 1;
        }
        cliques
    }
}

/// Disjoint cliques covering all `k` actions; within a block every ordered
/// pair observes the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliquePartition {
    blocks: Vec<Vec<ActionId>>,
    block_of: Vec<usize>,
}

impl CliquePartition {
    pub fn c(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<ActionId>] {
        &self.blocks
    }

    pub fn block_of(&self, action: ActionId) -> usize {
        self.block_of[action]
    }

    /// Checks the partition contract against a graph: blocks disjoint,
    /// covering, and mutually observing within each block.
    pub fn is_valid(&self, g: &FeedbackGraph) -> bool {
        if self.block_of.len() != g.k() {
            return false;
        }
        let mut seen = vec![false; g.k()];
        for (c, blk) in self.blocks.iter().enumerate() {
            for &v in blk {
                if v >= g.k() || seen[v] || self.block_of[v] != c {
                    return false;
                }
                seen[v] = true;
                for &u in blk {
                    if u != v && !g.in_neighborhood(v).contains(u) {
                        return false;
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Named fixture graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    Complete,
    Empty,
    Star,
    Cycle,
    Path,
    DisjointCliques(usize),
}

impl Fixture {
    pub fn parse(name: &str) -> Result<Self, GraphError> {
        let name = name.trim();
        match name {
            "complete" => Ok(Fixture::Complete),
            "empty" => Ok(Fixture::Empty),
            "star" => Ok(Fixture::Star),
            "cycle" => Ok(Fixture::Cycle),
            "path" => Ok(Fixture::Path),
            _ => {
                if let Some(inner) = name
                    .strip_prefix("disjoint_cliques(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    let m = inner
                        .trim()
                        .parse()
                        .map_err(|_| GraphError::UnknownFixture(name.into()))?;
                    return Ok(Fixture::DisjointCliques(m));
                }
                Err(GraphError::UnknownFixture(name.into()))
            }
        }
    }
}

/// A fixed or per-round sequence of feedback graphs sharing one action count.
#[derive(Clone, Debug)]
pub enum GraphSequence {
    Fixed(FeedbackGraph),
    /// Freshly drawn random graph every round; round `t` is deterministic in
    /// `(seed, t)`.
    PerRoundErdosRenyi {
        k: usize,
        p: f64,
        seed: u64,
        directed: bool,
    },
}

impl GraphSequence {
    pub fn k(&self) -> usize {
        match self {
            GraphSequence::Fixed(g) => g.k(),
            GraphSequence::PerRoundErdosRenyi { k, .. } => *k,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, GraphSequence::Fixed(_))
    }

    /// Graph in force at round `t` (0-based).
    pub fn graph_at(&self, t: usize) -> Cow<'_, FeedbackGraph> {
        match self {
            GraphSequence::Fixed(g) => Cow::Borrowed(g),
            GraphSequence::PerRoundErdosRenyi {
                k,
                p,
                seed,
                directed,
            } => Cow::Owned(
                FeedbackGraph::erdos_renyi(*k, *p, mix_seed(*seed, t as u64), *directed)
                    .expect("validated at construction"),
            ),
        }
    }
}
