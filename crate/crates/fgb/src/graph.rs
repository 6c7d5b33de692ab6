//! Undirected feedback graphs with mandatory self-loops, generators for the
//! standard hard-instance constructions, and the structural operations
//! (domination, independence, neighborhood collapse) the complexity
//! computations rely on.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph on `k` arms. Every vertex carries a self-loop, so
/// `neighbors(i)` is the closed neighborhood `N_i` and always contains `i`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackGraph {
    k: usize,
    adj: Vec<Vec<usize>>,
}

/// A structural violation found by [`validate_adjacency`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingSelfLoop(usize),
    AsymmetricPair(usize, usize),
    OutOfRange { vertex: usize, neighbor: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingSelfLoop(v) => write!(f, "missing self-loop {v}"),
            Violation::AsymmetricPair(u, v) => write!(f, "asymmetric pair ({u},{v})"),
            Violation::OutOfRange { vertex, neighbor } => {
                write!(f, "neighbor {neighbor} of vertex {vertex} out of range")
            }
        }
    }
}

/// Checks symmetry, reflexivity and index ranges of a raw neighbor-list
/// representation. An empty result means the lists describe a valid graph.
pub fn validate_adjacency(k: usize, adj: &[Vec<usize>]) -> Vec<Violation> {
    let mut violations = Vec::new();
    if adj.len() != k {
        // Treat every missing list as a missing self-loop.
        for v in adj.len()..k {
            violations.push(Violation::MissingSelfLoop(v));
        }
    }
    for (i, neigh) in adj.iter().enumerate().take(k) {
        if !neigh.contains(&i) {
            violations.push(Violation::MissingSelfLoop(i));
        }
        for &j in neigh {
            if j >= k {
                violations.push(Violation::OutOfRange {
                    vertex: i,
                    neighbor: j,
                });
            } else if i != j && !adj[j].contains(&i) {
                violations.push(Violation::AsymmetricPair(i, j));
            }
        }
    }
    violations
}

impl FeedbackGraph {
    /// Builds a graph from undirected edges; self-loops are added implicitly.
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if k == 0 {
            return Err(Error::parameter("vertex_count", "must be positive"));
        }
        let mut adj: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(Error::parameter(
                    "edges",
                    format!("edge ({u},{v}) out of range for {k} vertices"),
                ));
            }
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(FeedbackGraph { k, adj })
    }

    /// Builds a graph from raw neighbor lists, rejecting invalid input.
    pub fn from_neighbor_lists(k: usize, adj: Vec<Vec<usize>>) -> Result<Self> {
        let violations = validate_adjacency(k, &adj);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidGraph(msgs.join("; ")));
        }
        let mut adj = adj;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(FeedbackGraph { k, adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.k
    }

    /// Closed neighborhood of `i`, sorted, containing `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    /// Re-checks the structural invariants; empty for any constructed graph.
    pub fn validate(&self) -> Vec<Violation> {
        validate_adjacency(self.k, &self.adj)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            k: self.k,
            adj: self.adj.clone(),
        };
        serde_json::to_string(&file).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        FeedbackGraph::from_neighbor_lists(file.k, file.adj)
    }
}

/// On-disk form: `{"k": 5, "adj": [[0,1],...]}` with self-indices included.
#[derive(Debug, Serialize, Deserialize)]
struct GraphFile {
    k: usize,
    adj: Vec<Vec<usize>>,
}

/// Parameterized graph constructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Self-loops only.
    Bandit { k: usize },
    /// Every pair adjacent.
    Complete { k: usize },
    /// Vertex 0 is the revealing root; vertices `1..k` are leaves.
    Star { k: usize },
    /// Root 0 adjacent to all; vertex 1 adjacent to all but leaf `k-1`.
    StarLikeEx2 { k: usize },
    /// The `2k+1`-vertex lower-bound construction: hub 0, spoke cycle, and
    /// `ceil(k^(1/8))` extra forward edges between odd vertices.
    ReinforcedWheel { k: usize },
    /// `n` disjoint copies of the 8-vertex cube graph.
    CubeCopies { n: usize },
    /// G(k, p) with a fixed seed; self-loops always present.
    ErdosRenyi { k: usize, p: f64, seed: u64 },
}

impl GraphSpec {
    /// Parses compact CLI notation like `star:5`, `er:12,0.3,7`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k, r),
            None => return Err(Error::parameter("graph", format!("cannot parse `{text}`"))),
        };
        let parts: Vec<&str> = rest.split(',').collect();
        let usize_at = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::parameter("graph", format!("bad integer in `{text}`")))
        };
        match kind {
            "bandit" => Ok(GraphSpec::Bandit { k: usize_at(0)? }),
            "complete" => Ok(GraphSpec::Complete { k: usize_at(0)? }),
            "star" => Ok(GraphSpec::Star { k: usize_at(0)? }),
            "star_like_ex2" => Ok(GraphSpec::StarLikeEx2 { k: usize_at(0)? }),
            "reinforced_wheel" => Ok(GraphSpec::ReinforcedWheel { k: usize_at(0)? }),
            "cube_copies" => Ok(GraphSpec::CubeCopies { n: usize_at(0)? }),
            "er" | "erdos_renyi" => {
                let p: f64 = parts
                    .get(1)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::parameter("graph", "bad edge probability"))?;
                let seed: u64 = parts
                    .get(2)
                    .and_then(|s| s.trim().parse().ok())
                    .unwrap_or(0);
                Ok(GraphSpec::ErdosRenyi {
                    k: usize_at(0)?,
                    p,
                    seed,
                })
            }
            other => Err(Error::parameter("graph", format!("unknown kind `{other}`"))),
        }
    }
}

/// Builds the graph described by `spec`.
pub fn generate(spec: &GraphSpec) -> Result<FeedbackGraph> {
    match *spec {
        GraphSpec::Bandit { k } => FeedbackGraph::from_edges(k, &[]),
        GraphSpec::Complete { k } => {
            let mut edges = Vec::new();
            for i in 0..k {
                for j in (i + 1)..k {
                    edges.push((i, j));
                }
            }
            FeedbackGraph::from_edges(k, &edges)
        }
        GraphSpec::Star { k } => {
            if k < 2 {
                return Err(Error::parameter("k", "star requires k >= 2"));
            }
            let edges: Vec<(usize, usize)> = (1..k).map(|leaf| (0, leaf)).collect();
            FeedbackGraph::from_edges(k, &edges)
        }
        GraphSpec::StarLikeEx2 { k } => {
            if k < 4 {
                return Err(Error::parameter("k", "star_like_ex2 requires k >= 4"));
            }
            let mut edges: Vec<(usize, usize)> = (1..k).map(|v| (0, v)).collect();
            // Vertex 1 reveals everything except the last leaf.
            for v in 2..(k - 1) {
                edges.push((1, v));
            }
            FeedbackGraph::from_edges(k, &edges)
        }
        GraphSpec::ReinforcedWheel { k } => reinforced_wheel(k),
        GraphSpec::CubeCopies { n } => cube_copies(n),
        GraphSpec::ErdosRenyi { k, p, seed } => {
            if k == 0 {
                return Err(Error::parameter("k", "must be positive"));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::parameter("p", "edge probability must be in [0,1]"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..k {
                for j in (i + 1)..k {
                    if rng.gen::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            FeedbackGraph::from_edges(k, &edges)
        }
    }
}

/// The `2K+1`-vertex wheel: hub 0 adjacent to all even vertices, each even
/// vertex `2i` adjacent to the odd vertices on either side of it (cyclically
/// over the odd positions), and each odd vertex adjacent to the next
/// `ceil(K^(1/8))` odd vertices in cyclic order.
fn reinforced_wheel(k: usize) -> Result<FeedbackGraph> {
    if k < 2 {
        return Err(Error::parameter("k", "reinforced_wheel requires k >= 2"));
    }
    let total = 2 * k + 1;
    let reach = (k as f64).powf(0.125).ceil() as usize;
    let odd = |j: usize| 2 * (j % k) + 1; // j-th odd vertex, cyclic
    let mut edges = Vec::new();
    for i in 1..=k {
        let even = 2 * i;
        edges.push((0, even));
        // Evens sit between consecutive odd vertices; the last even wraps
        // around to the first odd vertex, skipping even indices.
        edges.push((even, odd(i - 1)));
        edges.push((even, odd(i)));
    }
    for j in 0..k {
        for step in 1..=reach {
            let target = odd(j + step);
            if target != odd(j) {
                edges.push((odd(j), target));
            }
        }
    }
    FeedbackGraph::from_edges(total, &edges)
}

/// Vertices `8c..8c+8` form copy `c` of the cube graph Q3 (3-bit strings,
/// edges between strings at Hamming distance one). The even-parity strings
/// are one side of the bipartition, the odd-parity strings the other.
fn cube_copies(n: usize) -> Result<FeedbackGraph> {
    if n < 1 {
        return Err(Error::parameter("n", "cube_copies requires n >= 1"));
    }
    let mut edges = Vec::new();
    for c in 0..n {
        let base = 8 * c;
        for v in 0..8usize {
            for bit in 0..3 {
                let w = v ^ (1 << bit);
                if v < w {
                    edges.push((base + v, base + w));
                }
            }
        }
    }
    FeedbackGraph::from_edges(8 * n, &edges)
}

/// Local vertex indices of the two sides of a cube copy's bipartition.
/// `CUBE_SIDE_ONE` holds the odd-parity strings.
pub const CUBE_SIDE_ONE: [usize; 4] = [1, 2, 4, 7];
pub const CUBE_SIDE_TWO: [usize; 4] = [0, 3, 5, 6];

/// Greedy set cover over closed neighborhoods: repeatedly picks the vertex
/// covering the most uncovered vertices, breaking ties toward the smallest
/// index. The result always dominates.
pub fn greedy_dominating_set(g: &FeedbackGraph) -> Vec<usize> {
    let k = g.vertex_count();
    let mut covered = vec![false; k];
    let mut remaining = k;
    let mut set = Vec::new();
    while remaining > 0 {
        let mut best = 0usize;
        let mut best_gain = 0usize;
        for v in 0..k {
            let gain = g.neighbors(v).iter().filter(|&&u| !covered[u]).count();
            if gain > best_gain {
                best_gain = gain;
                best = v;
            }
        }
        debug_assert!(best_gain > 0);
        set.push(best);
        for &u in g.neighbors(best) {
            if !covered[u] {
                covered[u] = true;
                remaining -= 1;
            }
        }
    }
    set.sort_unstable();
    set
}

/// Result of a maximum-weight independent-set computation.
#[derive(Debug, Clone)]
pub struct MisResult {
    pub vertices: Vec<usize>,
    pub weight: f64,
    /// True when found by exhaustive branch-and-bound; false when the size
    /// forced the greedy fallback, in which case `weight` is a lower bound.
    pub exact: bool,
}

/// Vertex count above which independence switches to the greedy fallback.
pub const MIS_EXACT_LIMIT: usize = 40;

/// Maximum-weight independent set. Independence ignores self-loops: a set is
/// independent when no two distinct members are adjacent. Exact for
/// `k <= MIS_EXACT_LIMIT` via branch-and-bound, greedy by weight/degree
/// otherwise.
pub fn max_weight_independent_set(g: &FeedbackGraph, weights: &[f64]) -> Result<MisResult> {
    let k = g.vertex_count();
    if weights.len() != k {
        return Err(Error::parameter("weights", "length must match vertex count"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::parameter("weights", "must be finite and nonnegative"));
    }
    if k <= MIS_EXACT_LIMIT {
        Ok(mis_branch_and_bound(g, weights))
    } else {
        Ok(mis_greedy(g, weights))
    }
}

fn mis_branch_and_bound(g: &FeedbackGraph, weights: &[f64]) -> MisResult {
    let k = g.vertex_count();
    // Branch on high-degree vertices first; their removal prunes fastest.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        g.neighbors(b)
            .len()
            .cmp(&g.neighbors(a).len())
            .then(a.cmp(&b))
    });
    // conflict[v] = closed neighborhood of v minus the self bit
    let conflict: Vec<u64> = (0..k)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .filter(|&&u| u != v)
                .fold(0u64, |m, &u| m | (1u64 << u))
        })
        .collect();

    struct Search<'a> {
        order: &'a [usize],
        conflict: &'a [u64],
        weights: &'a [f64],
        best: f64,
        best_set: u64,
    }
    impl Search<'_> {
        fn run(&mut self, pos: usize, available: u64, picked: u64, weight: f64, slack: f64) {
            if weight > self.best {
                self.best = weight;
                self.best_set = picked;
            }
            if pos == self.order.len() || weight + slack <= self.best {
                return;
            }
            let v = self.order[pos];
            let bit = 1u64 << v;
            let rest_slack = slack - self.weights[v];
            if available & bit != 0 {
                self.run(
                    pos + 1,
                    available & !bit & !self.conflict[v],
                    picked | bit,
                    weight + self.weights[v],
                    rest_slack,
                );
                self.run(pos + 1, available & !bit, picked, weight, rest_slack);
            } else {
                self.run(pos + 1, available, picked, weight, rest_slack);
            }
        }
    }

    let slack: f64 = order.iter().map(|&v| weights[v]).sum();
    let mut search = Search {
        order: &order,
        conflict: &conflict,
        weights,
        best: -1.0,
        best_set: 0,
    };
    let full = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    search.run(0, full, 0, 0.0, slack);

    let vertices: Vec<usize> = (0..k).filter(|&v| search.best_set & (1 << v) != 0).collect();
    MisResult {
        weight: vertices.iter().map(|&v| weights[v]).sum(),
        vertices,
        exact: true,
    }
}

fn mis_greedy(g: &FeedbackGraph, weights: &[f64]) -> MisResult {
    let k = g.vertex_count();
    let mut order: Vec<usize> = (0..k).collect();
    // Highest weight per blocked vertex first.
    order.sort_by(|&a, &b| {
        let score = |v: usize| weights[v] / g.neighbors(v).len() as f64;
        score(b)
            .partial_cmp(&score(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut blocked = vec![false; k];
    let mut vertices = Vec::new();
    for &v in &order {
        if !blocked[v] {
            vertices.push(v);
            for &u in g.neighbors(v) {
                blocked[u] = true;
            }
        }
    }
    vertices.sort_unstable();
    MisResult {
        weight: vertices.iter().map(|&v| weights[v]).sum(),
        vertices,
        exact: false,
    }
}

/// Quotient of a graph by the "identical closed neighborhood" relation.
#[derive(Debug, Clone)]
pub struct CollapseResult {
    pub quotient: FeedbackGraph,
    /// Class index of each input vertex.
    pub class_of: Vec<usize>,
    /// Members of each class, sorted; class order follows smallest member.
    pub representatives: Vec<Vec<usize>>,
}

/// Merges vertices with identical closed neighborhoods. Two classes are
/// adjacent in the quotient iff any (equivalently, every) cross pair of
/// members is adjacent in the input.
pub fn collapse(g: &FeedbackGraph) -> CollapseResult {
    let k = g.vertex_count();
    let mut by_neighborhood: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for v in 0..k {
        by_neighborhood.entry(g.neighbors(v)).or_default().push(v);
    }
    let mut representatives: Vec<Vec<usize>> = by_neighborhood.into_values().collect();
    representatives.sort_by_key(|members| members[0]);
    let mut class_of = vec![0usize; k];
    for (idx, members) in representatives.iter().enumerate() {
        for &v in members {
            class_of[v] = idx;
        }
    }
    let q = representatives.len();
    let mut edges = Vec::new();
    for a in 0..q {
        for b in (a + 1)..q {
            if g.is_adjacent(representatives[a][0], representatives[b][0]) {
                edges.push((a, b));
            }
        }
    }
    let quotient = FeedbackGraph::from_edges(q, &edges).expect("quotient is well formed");
    CollapseResult {
        quotient,
        class_of,
        representatives,
    }
}

/// True iff the collapse quotient contains no simple path with three edges
/// (self-loops never contribute path edges).
pub fn check_dstar_condition(g: &FeedbackGraph) -> bool {
    let q = collapse(g).quotient;
    let k = q.vertex_count();
    // A 3-edge simple path exists iff some edge (b,c) extends on both sides
    // with distinct endpoints.
    for b in 0..k {
        for &c in q.neighbors(b) {
            if c == b {
                continue;
            }
            for &a in q.neighbors(b) {
                if a == b || a == c {
                    continue;
                }
                for &d in q.neighbors(c) {
                    if d != a && d != b && d != c {
                        return false;
                    }
                }
            }
        }
    }
    true
}
