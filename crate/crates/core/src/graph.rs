//! Undirected simple graphs, random ensembles and γ-local separators.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Attempts the pairing model gets before giving up on a regular graph.
pub const REGULAR_RETRY_BUDGET: u32 = 1000;

/// Undirected simple graph on nodes `0..p` with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "EdgeListRepr", try_from = "EdgeListRepr")
)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct EdgeListRepr {
    p: usize,
    edges: Vec<(usize, usize)>,
}

#[cfg(feature = "serde")]
impl From<Graph> for EdgeListRepr {
    fn from(g: Graph) -> Self {
        Self { p: g.node_count(), edges: g.edges().collect() }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<EdgeListRepr> for Graph {
    type Error = Error;

    fn try_from(r: EdgeListRepr) -> Result<Self> {
        Graph::from_edges(r.p, r.edges)
    }
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Self { adj: vec![Vec::new(); p], edge_count: 0 }
    }

    /// Builds a graph from unordered pairs. Duplicates (in either
    /// orientation) are merged; self-loops and out-of-range labels are errors.
    pub fn from_edges(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); p];
        for (u, v) in edges {
            if u >= p || v >= p {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) out of range for p = {p}")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Self { adj, edge_count: edge_count / 2 })
    }

    /// Path `0 – 1 – … – (p−1)`.
    pub fn path(p: usize) -> Self {
        Self::from_edges(p, (1..p).map(|i| (i - 1, i))).expect("valid path")
    }

    /// Cycle `C_p`; needs `p ≥ 3`.
    pub fn cycle(p: usize) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidParameter(format!("a cycle needs at least 3 nodes, got {p}")));
        }
        Self::from_edges(p, (0..p).map(|i| (i, (i + 1) % p)))
    }

    pub fn complete(p: usize) -> Self {
        Self::from_edges(p, (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j)))).expect("valid complete graph")
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|k| (0, k))).expect("valid star")
    }

    /// `dim`-dimensional torus with `side` nodes per axis (wrap-around grid).
    /// Node labels are mixed-radix coordinates, axis 0 least significant.
    pub fn torus(side: usize, dim: u32) -> Result<Self> {
        if side < 2 || dim == 0 {
            return Err(Error::InvalidParameter(format!("torus needs side ≥ 2 and dim ≥ 1, got {side}, {dim}")));
        }
        let p = side
            .checked_pow(dim)
            .ok_or_else(|| Error::InvalidParameter("torus too large".into()))?;
        let mut edges = Vec::with_capacity(p * dim as usize);
        for v in 0..p {
            let mut stride = 1;
            for _ in 0..dim {
                let coord = (v / stride) % side;
                let next = v - coord * stride + ((coord + 1) % side) * stride;
                edges.push((v, next));
                stride *= side;
            }
        }
        Self::from_edges(p, edges)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.adj.len() && self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let p = self.node_count();
        let mut seen = vec![false; p];
        if perm.len() != p || perm.iter().any(|&x| x >= p || core::mem::replace(&mut seen[x], true)) {
            return Err(Error::InvalidArgument("relabeling is not a permutation of the nodes".into()));
        }
        Self::from_edges(p, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Union of two edge sets on the same node set.
    pub fn union(&self, other: &Self) -> Result<Self> {
        check_same_order(self, other)?;
        Self::from_edges(self.node_count(), self.edges().chain(other.edges()))
    }

    /// Hop distances from `i`, truncated at `radius`; `usize::MAX` beyond it.
    pub fn distances_within(&self, i: usize, radius: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == radius {
                continue;
            }
            for &w in &self.adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn check_same_order(g: &Graph, h: &Graph) -> Result<()> {
    if g.node_count() != h.node_count() {
        return Err(Error::InvalidArgument(format!(
            "graphs have different node counts ({} vs {})",
            g.node_count(),
            h.node_count()
        )));
    }
    Ok(())
}

/// Random graph family.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum Ensemble {
    /// Each pair independently with probability `c / p`.
    ErdosRenyi { c: f64 },
    /// Uniform-ish `delta`-regular graphs from the pairing model.
    RandomRegular { delta: usize },
    /// `d`-dimensional torus united with an Erdős–Rényi draw of mean degree `c`.
    SmallWorld { d: u32, c: f64 },
    /// A fixed graph read from an edge-list file by the caller.
    Explicit { path: String },
}

/// Ensemble plus size and seed; [`EnsembleConfig::generate`] is a pure
/// function of these fields.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleConfig {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub ensemble: Ensemble,
    pub p: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl EnsembleConfig {
    /// Draws a graph. [`Ensemble::Explicit`] cannot be generated here; file
    /// loading belongs to the caller.
    pub fn generate(&self) -> Result<Graph> {
        match &self.ensemble {
            Ensemble::ErdosRenyi { c } => generate_er(self.p, *c, self.seed),
            Ensemble::RandomRegular { delta } => generate_regular(self.p, *delta, self.seed),
            Ensemble::SmallWorld { d, c } => generate_smallworld(self.p, *d, *c, self.seed),
            Ensemble::Explicit { path } => Err(Error::InvalidArgument(format!(
                "explicit graph '{path}' must be loaded from its edge-list file"
            ))),
        }
    }
}

fn check_mean_degree(p: usize, c: f64) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    if !(0.0..=p as f64).contains(&c) {
        return Err(Error::InvalidParameter(format!("mean degree c = {c} outside [0, {p}]")));
    }
    Ok(())
}

fn er_edges(p: usize, c: f64, rng: &mut rng::StreamRng) -> Vec<(usize, usize)> {
    let q = c / p as f64;
    let mut edges = Vec::new();
    if q == 0.0 {
        return edges;
    }
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(q) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Erdős–Rényi `G(p, c/p)`.
pub fn generate_er(p: usize, c: f64, seed: u64) -> Result<Graph> {
    check_mean_degree(p, c)?;
    let mut rng = rng::stream(seed, rng::GRAPH_STREAM);
    Graph::from_edges(p, er_edges(p, c, &mut rng))
}

/// `delta`-regular graph from the pairing (configuration) model, rejecting
/// pairings with loops or multi-edges.
pub fn generate_regular(p: usize, delta: usize, seed: u64) -> Result<Graph> {
    if delta >= p.max(1) || (delta * p) % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "no simple {delta}-regular graph on {p} nodes (need delta < p and delta·p even)"
        )));
    }
    let mut rng = rng::stream(seed, rng::GRAPH_STREAM);
    let mut points: Vec<usize> = (0..p).flat_map(|v| core::iter::repeat_n(v, delta)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        points.shuffle(&mut rng);
        let mut adj = vec![Vec::with_capacity(delta); p];
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adj[u].contains(&v) {
                continue 'attempt;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        return Graph::from_edges(p, points.chunks_exact(2).map(|e| (e[0], e[1])));
    }
    Err(Error::GenerationFailed { attempts: REGULAR_RETRY_BUDGET })
}

/// Integer `m ≥ 2` with `m^d = p`, if any.
fn perfect_root(p: usize, d: u32) -> Option<usize> {
    if d == 0 {
        return None;
    }
    let guess = libm::round(libm::pow(p as f64, 1.0 / d as f64)) as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&m| m >= 2 && m.checked_pow(d) == Some(p))
}

/// Union of a `d`-dimensional torus on `p = m^d` nodes and `G(p, c/p)`.
pub fn generate_smallworld(p: usize, d: u32, c: f64, seed: u64) -> Result<Graph> {
    let side = perfect_root(p, d)
        .ok_or_else(|| Error::InvalidParameter(format!("p = {p} is not a perfect {d}-th power of m ≥ 2")))?;
    check_mean_degree(p, c)?;
    let grid = Graph::torus(side, d)?;
    let mut rng = rng::stream(seed, rng::GRAPH_STREAM);
    Graph::from_edges(p, grid.edges().chain(er_edges(p, c, &mut rng)))
}

/// Length of the shortest cycle, `None` for forests.
pub fn girth(g: &Graph) -> Option<usize> {
    let p = g.node_count();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; p];
    let mut parent = vec![usize::MAX; p];
    for root in 0..p {
        dist.fill(usize::MAX);
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            // Cycles through `root` found later can only be longer.
            if 2 * dist[u] >= best {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

/// `B_γ(i)`: nodes within `gamma` hops of `i`, including `i`, sorted.
pub fn ball(g: &Graph, i: usize, gamma: usize) -> Vec<usize> {
    g.distances_within(i, gamma)
        .iter()
        .enumerate()
        .filter_map(|(v, &d)| (d != usize::MAX).then_some(v))
        .collect()
}

/// `H_{γ,i}`: all `p` nodes, keeping only edges with both ends in `B_γ(i)`.
pub fn gamma_subgraph(g: &Graph, i: usize, gamma: usize) -> Graph {
    let dist = g.distances_within(i, gamma);
    let inside = |v: usize| dist[v] != usize::MAX;
    Graph::from_edges(g.node_count(), g.edges().filter(|&(u, v)| inside(u) && inside(v))).expect("subgraph of a valid graph")
}

/// True when the subgraph induced on `B_γ(i)` has no cycle.
pub fn is_locally_treelike(g: &Graph, i: usize, gamma: usize) -> bool {
    let h = gamma_subgraph(g, i, gamma);
    // The ball induces a connected subgraph, so it is a tree iff |E| = |V| − 1.
    h.edge_count() + 1 == ball(g, i, gamma).len()
}

/// `|E △ E'|`.
pub fn edit_distance(g: &Graph, h: &Graph) -> Result<usize> {
    check_same_order(g, h)?;
    let mut d = 0;
    for u in 0..g.node_count() {
        let (a, b) = (g.neighbors(u), h.neighbors(u));
        let (mut x, mut y) = (a.partition_point(|&v| v <= u), b.partition_point(|&v| v <= u));
        while x < a.len() || y < b.len() {
            match (a.get(x), b.get(y)) {
                (Some(p), Some(q)) if p == q => {
                    x += 1;
                    y += 1;
                }
                (Some(p), Some(q)) if p < q => {
                    d += 1;
                    x += 1;
                }
                (Some(_), None) => {
                    d += 1;
                    x += 1;
                }
                _ => {
                    d += 1;
                    y += 1;
                }
            }
        }
    }
    Ok(d)
}

/// Unit-capacity vertex-split flow network for i–j vertex cuts.
struct SplitNetwork {
    to: Vec<usize>,
    cap: Vec<u32>,
    out: Vec<Vec<usize>>,
}

const UNBOUNDED: u32 = u32::MAX / 4;

impl SplitNetwork {
    fn with_nodes(n: usize) -> Self {
        Self { to: Vec::new(), cap: Vec::new(), out: vec![Vec::new(); n] }
    }

    fn arc(&mut self, u: usize, v: usize, c: u32) {
        self.out[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.out[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    /// Edmonds–Karp, stopping early once `limit` units are routed.
    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let n = self.out.len();
        let mut flow = 0;
        let mut via = vec![usize::MAX; n];
        while flow < limit {
            via.fill(usize::MAX);
            let mut queue = VecDeque::from([s]);
            let mut reached = false;
            'bfs: while let Some(u) = queue.pop_front() {
                for &e in &self.out[u] {
                    let w = self.to[e];
                    if self.cap[e] > 0 && w != s && via[w] == usize::MAX {
                        via[w] = e;
                        if w == t {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push_back(w);
                    }
                }
            }
            if !reached {
                break;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                v = self.to[e ^ 1];
            }
            flow += 1;
        }
        flow
    }
}

/// The part of `H_{γ,i}` reachable from `i`, prepared for repeated cuts.
struct LocalView<'g> {
    g: &'g Graph,
    anchor: usize,
    /// Local index of each node in the component, `usize::MAX` outside.
    local: Vec<usize>,
    members: Vec<usize>,
}

impl<'g> LocalView<'g> {
    fn new(g: &'g Graph, i: usize, gamma: usize) -> Self {
        let dist = g.distances_within(i, gamma);
        let mut local = vec![usize::MAX; g.node_count()];
        let mut members = Vec::new();
        if gamma > 0 {
            // The ball around i is connected through its own BFS tree, so the
            // component of i in H_{γ,i} is the whole ball.
            for (v, &d) in dist.iter().enumerate() {
                if d != usize::MAX {
                    local[v] = members.len();
                    members.push(v);
                }
            }
        }
        Self { g, anchor: i, local, members }
    }

    fn reaches(&self, j: usize) -> bool {
        self.local[j] != usize::MAX
    }

    /// Minimum i–j vertex cut size with `removed` deleted.
    fn cut_size(&self, j: usize, removed: &[usize], limit: usize) -> usize {
        let m = self.members.len();
        let mut net = SplitNetwork::with_nodes(2 * m);
        for (l, &v) in self.members.iter().enumerate() {
            let c = if v == self.anchor || v == j {
                UNBOUNDED
            } else if removed.contains(&v) {
                0
            } else {
                1
            };
            net.arc(2 * l, 2 * l + 1, c);
            for &w in self.g.neighbors(v) {
                let lw = self.local[w];
                if lw != usize::MAX {
                    net.arc(2 * l + 1, 2 * lw, UNBOUNDED);
                }
            }
        }
        net.max_flow(2 * self.local[self.anchor] + 1, 2 * self.local[j], limit)
    }

    /// Lexicographically smallest minimum vertex separator of anchor and `j`.
    fn separator(&self, j: usize) -> Vec<usize> {
        if !self.reaches(j) {
            return Vec::new();
        }
        let k = self.cut_size(j, &[], usize::MAX);
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for &v in &self.members {
            if chosen.len() == k {
                break;
            }
            if v == self.anchor || v == j {
                continue;
            }
            chosen.push(v);
            let need = k - chosen.len();
            if self.cut_size(j, &chosen, need + 1) != need {
                chosen.pop();
            }
        }
        debug_assert_eq!(chosen.len(), k);
        chosen
    }
}

/// Minimum-cardinality set separating `i` from `j` in `H_{γ,i}`; ties go to
/// the lexicographically smallest sorted set. Empty when `j` is already
/// unreachable from `i` in `H_{γ,i}`, and for `gamma = 0`.
pub fn local_separator(g: &Graph, i: usize, j: usize, gamma: usize) -> Result<Vec<usize>> {
    let p = g.node_count();
    if i >= p || j >= p {
        return Err(Error::InvalidArgument(format!("node out of range for p = {p}")));
    }
    if i == j || g.has_edge(i, j) {
        return Err(Error::InvalidArgument(format!("({i}, {j}) is not a non-edge; no separator exists")));
    }
    Ok(LocalView::new(g, i, gamma).separator(j))
}

/// Local separators of every non-edge at path threshold `gamma`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparationProfile {
    pub gamma: usize,
    /// Largest separator size over all non-edges.
    pub eta: usize,
    /// `(i, j)` with `i < j`, anchored at `i`.
    pub per_pair: BTreeMap<(usize, usize), Vec<usize>>,
}

impl SeparationProfile {
    pub fn separator(&self, i: usize, j: usize) -> Option<&[usize]> {
        self.per_pair.get(&(i.min(j), i.max(j))).map(Vec::as_slice)
    }
}

fn separators_from(g: &Graph, i: usize, gamma: usize) -> Vec<((usize, usize), Vec<usize>)> {
    let view = LocalView::new(g, i, gamma);
    (i + 1..g.node_count())
        .filter(|&j| !g.has_edge(i, j))
        .map(|j| ((i, j), view.separator(j)))
        .collect()
}

/// Computes [`local_separator`] for every non-edge `(i, j)`, `i < j`.
pub fn separation_profile(g: &Graph, gamma: usize) -> SeparationProfile {
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        (0..g.node_count()).into_par_iter().map(|i| separators_from(g, i, gamma)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = (0..g.node_count()).map(|i| separators_from(g, i, gamma)).collect();

    let per_pair: BTreeMap<_, _> = rows.into_iter().flatten().collect();
    let eta = per_pair.values().map(Vec::len).max().unwrap_or(0);
    SeparationProfile { gamma, eta, per_pair }
}

/// Largest `γ ≤ max_gamma` whose separation profile has `eta ≤ eta_budget`.
///
/// Separator sizes are not monotone in γ in general, so every γ is scanned.
pub fn largest_feasible_gamma(g: &Graph, eta_budget: usize, max_gamma: usize) -> Option<usize> {
    (0..=max_gamma).rev().find(|&gamma| separation_profile(g, gamma).eta <= eta_budget)
}
