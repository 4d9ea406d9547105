//! Undirected labeled graphs and shortest-path machinery.
//!
//! Two graph families matter here: *source graphs*, whose vertices are
//! source blocks and whose edges mark block pairs an edit can move between,
//! and *storage graphs*, whose vertices are stored strings and whose edges
//! connect strings at edit distance one. Malleable codes are embeddings of
//! the former into the latter, so this module supplies the shared carrier
//! type plus the constructions and invariants both sides need.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::edit::{format_word, StorageString, MAX_RENDER_ALPHABET};
use crate::error::{Error, Result};
use crate::prob::JointSource;
use crate::scalar::Scalar;

const UNREACHABLE: u32 = u32::MAX;

/// Hypercube dimension cap (2^24 vertices); larger cubes are refused with a
/// resource error rather than silently truncated.
pub const MAX_HYPERCUBE_DIM: u32 = 24;

/// Vertex cap for enumerated string graphs.
pub const MAX_STRING_GRAPH_VERTICES: u64 = 100_000;

/// An undirected graph with named vertices, optional per-vertex attributes,
/// optional rational edge weights, and separate self-loop flags. Neighbor
/// lists iterate in sorted order, so every traversal is deterministic.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    names: Vec<String>,
    attrs: Vec<Option<String>>,
    adj: Vec<BTreeSet<usize>>,
    weights: BTreeMap<(usize, usize), Scalar>,
    self_loops: Vec<bool>,
}

/// One exported edge row; self-loops appear with `u == v`.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeRecord {
    pub u: String,
    pub v: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<Scalar>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        LabeledGraph {
            names: Vec::new(),
            attrs: Vec::new(),
            adj: Vec::new(),
            weights: BTreeMap::new(),
            self_loops: Vec::new(),
        }
    }

    pub fn add_vertex(&mut self, name: impl Into<String>) -> usize {
        self.add_vertex_with_attr(name, None)
    }

    pub fn add_vertex_with_attr(&mut self, name: impl Into<String>, attr: Option<String>) -> usize {
        self.names.push(name.into());
        self.attrs.push(attr);
        self.adj.push(BTreeSet::new());
        self.self_loops.push(false);
        self.names.len() - 1
    }

    /// Adds an undirected edge; `u == v` sets the self-loop flag instead.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.add_weighted_edge(u, v, None);
    }

    pub fn add_weighted_edge(&mut self, u: usize, v: usize, weight: Option<Scalar>) {
        assert!(u < self.len() && v < self.len(), "edge endpoint out of range");
        if u == v {
            self.self_loops[u] = true;
        } else {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
        if let Some(w) = weight {
            self.weights.insert((u.min(v), u.max(v)), w);
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn attr(&self, v: usize) -> Option<&str> {
        self.attrs[v].as_deref()
    }

    pub fn set_attr(&mut self, v: usize, attr: Option<String>) {
        self.attrs[v] = attr;
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u == v {
            self.self_loops[u]
        } else {
            self.adj[u].contains(&v)
        }
    }

    pub fn has_self_loop(&self, v: usize) -> bool {
        self.self_loops[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    /// Degree excluding the self-loop flag.
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// Proper edges as canonical `(u, v)` pairs with `u < v`, sorted.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs.range(u + 1..) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn self_loop_count(&self) -> usize {
        self.self_loops.iter().filter(|&&s| s).count()
    }

    /// Weight attached to an edge or self-loop, if any was recorded.
    pub fn edge_weight(&self, u: usize, v: usize) -> Option<&Scalar> {
        self.weights.get(&(u.min(v), u.max(v)))
    }

    /// All edges (self-loops last) as name-keyed rows for serialization.
    pub fn to_edge_list(&self) -> Vec<EdgeRecord> {
        let mut rows: Vec<EdgeRecord> = self
            .edge_pairs()
            .into_iter()
            .map(|(u, v)| EdgeRecord {
                u: self.names[u].clone(),
                v: self.names[v].clone(),
                weight: self.edge_weight(u, v).cloned(),
            })
            .collect();
        for v in 0..self.len() {
            if self.self_loops[v] {
                rows.push(EdgeRecord {
                    u: self.names[v].clone(),
                    v: self.names[v].clone(),
                    weight: self.edge_weight(v, v).cloned(),
                });
            }
        }
        rows
    }

    /// Plain-text export: a vertex table header (`v index name [attr]`)
    /// followed by one `e u v [weight]` line per edge, self-loops last.
    pub fn render_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# {} vertices, {} edges\n", self.len(), self.edge_count()));
        for v in 0..self.len() {
            out.push_str(&format!("v {v} {}", self.names[v]));
            if let Some(a) = self.attr(v) {
                out.push_str(&format!(" {a}"));
            }
            out.push('\n');
        }
        for rec in self.to_edge_list() {
            out.push_str(&format!("e {} {}", rec.u, rec.v));
            if let Some(w) = &rec.weight {
                out.push_str(&format!(" {w}"));
            }
            out.push('\n');
        }
        out
    }

    /// The induced subgraph on `keep` (indices need not be sorted); vertex
    /// order in the result follows `keep`.
    pub fn induced_subgraph(&self, keep: &[usize]) -> LabeledGraph {
        let mut relabel = BTreeMap::new();
        let mut out = LabeledGraph::new();
        for &v in keep {
            let idx = out.add_vertex_with_attr(self.names[v].clone(), self.attrs[v].clone());
            relabel.insert(v, idx);
            if self.self_loops[v] {
                out.self_loops[idx] = true;
                if let Some(w) = self.edge_weight(v, v) {
                    out.weights.insert((idx, idx), w.clone());
                }
            }
        }
        for (&v, &idx) in &relabel {
            for u in self.neighbors(v) {
                if let Some(&jdx) = relabel.get(&u) {
                    if idx < jdx {
                        out.add_weighted_edge(idx, jdx, self.edge_weight(v, u).cloned());
                    }
                }
            }
        }
        out
    }
}

impl Default for LabeledGraph {
    fn default() -> Self {
        LabeledGraph::new()
    }
}

// ---------------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------------

/// Hop distances from `src` to every vertex (`None` where unreachable).
/// Self-loops never shorten paths and are ignored.
pub fn bfs_distances(g: &LabeledGraph, src: usize) -> Vec<Option<u64>> {
    bfs_raw(g, src)
        .into_iter()
        .map(|d| (d != UNREACHABLE).then_some(d as u64))
        .collect()
}

fn bfs_raw(g: &LabeledGraph, src: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v];
        for u in g.neighbors(v) {
            if dist[u] == UNREACHABLE {
                dist[u] = dv + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Connected components as sorted vertex lists, ordered by smallest member.
pub fn components(g: &LabeledGraph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.len()];
    let mut comps = Vec::new();
    for start in 0..g.len() {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for u in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

pub fn is_connected(g: &LabeledGraph) -> bool {
    if g.is_empty() {
        return true;
    }
    bfs_raw(g, 0).iter().all(|&d| d != UNREACHABLE)
}

/// Longest shortest path, streamed one BFS at a time so large graphs never
/// materialize a distance matrix. `None` when empty or disconnected.
pub fn diameter(g: &LabeledGraph) -> Option<u64> {
    if g.is_empty() {
        return None;
    }
    let mut best = 0u64;
    for v in 0..g.len() {
        let dist = bfs_raw(g, v);
        let mut ecc = 0u32;
        for &d in &dist {
            if d == UNREACHABLE {
                return None;
            }
            ecc = ecc.max(d);
        }
        best = best.max(ecc as u64);
    }
    Some(best)
}

/// Dense all-pairs hop distances, for graphs small enough to keep the
/// whole matrix (guests of embedding searches, diagnostics).
#[derive(Debug, Clone)]
pub struct PathMetric {
    n: usize,
    dist: Vec<u32>,
}

impl PathMetric {
    pub fn new(g: &LabeledGraph) -> Self {
        let n = g.len();
        let mut dist = Vec::with_capacity(n * n);
        for v in 0..n {
            dist.extend_from_slice(&bfs_raw(g, v));
        }
        PathMetric { n, dist }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, u: usize, v: usize) -> Option<u64> {
        let d = self.dist[u * self.n + v];
        (d != UNREACHABLE).then_some(d as u64)
    }

    pub fn is_connected(&self) -> bool {
        self.dist.iter().all(|&d| d != UNREACHABLE)
    }

    pub fn diameter(&self) -> Option<u64> {
        if self.n == 0 {
            return None;
        }
        let mut best = 0u32;
        for &d in &self.dist {
            if d == UNREACHABLE {
                return None;
            }
            best = best.max(d);
        }
        Some(best as u64)
    }
}

// ---------------------------------------------------------------------------
// Wiener index and closeness vitality
// ---------------------------------------------------------------------------

/// Sum of shortest-path distances over ordered vertex pairs; infinite on
/// disconnected graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wiener {
    Finite(u64),
    Infinite,
}

impl std::fmt::Display for Wiener {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Wiener::Finite(v) => write!(f, "{v}"),
            Wiener::Infinite => write!(f, "inf"),
        }
    }
}

/// Wiener index: Σ d(v, w) over *ordered* vertex pairs.
pub fn wiener_index(g: &LabeledGraph) -> Wiener {
    let mut total = 0u64;
    for v in 0..g.len() {
        for d in bfs_raw(g, v) {
            if d == UNREACHABLE {
                return Wiener::Infinite;
            }
            total += d as u64;
        }
    }
    Wiener::Finite(total)
}

/// Change in total pairwise distance when a graph element is deleted;
/// negative infinity marks bridges, whose removal disconnects the graph
/// and so carries unbounded penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vitality {
    Finite(i64),
    NegInfinite,
}

impl std::fmt::Display for Vitality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vitality::Finite(v) => write!(f, "{v}"),
            Vitality::NegInfinite => write!(f, "-inf"),
        }
    }
}

/// Closeness vitality of the edge {u, v}: wiener(G) − wiener(G − e).
/// Negative infinity when removing the edge disconnects the graph; errors
/// when the edge is absent or when G is already disconnected (the
/// difference is then undefined).
pub fn closeness_vitality(g: &LabeledGraph, u: usize, v: usize) -> Result<Vitality> {
    if !g.has_edge(u, v) {
        return Err(Error::InvalidInput(format!(
            "edge {{{u}, {v}}} is not in the graph"
        )));
    }
    let whole = match wiener_index(g) {
        Wiener::Finite(w) => w,
        Wiener::Infinite => {
            return Err(Error::InvalidInput(
                "closeness vitality is undefined on a disconnected graph".into(),
            ))
        }
    };
    if u == v {
        // Self-loops never lie on shortest paths.
        return Ok(Vitality::Finite(0));
    }
    let mut reduced = g.clone();
    reduced.adj[u].remove(&v);
    reduced.adj[v].remove(&u);
    reduced.weights.remove(&(u.min(v), u.max(v)));
    match wiener_index(&reduced) {
        Wiener::Finite(w) => Ok(Vitality::Finite(whole as i64 - w as i64)),
        Wiener::Infinite => Ok(Vitality::NegInfinite),
    }
}

// ---------------------------------------------------------------------------
// Products and standard constructions
// ---------------------------------------------------------------------------

/// Cartesian graph product: (u, v) ~ (u', v') iff one coordinate is equal
/// and the other is adjacent. Vertex names concatenate the factor names;
/// attributes concatenate when both factors carry one. A product vertex
/// keeps a self-loop only when both coordinates have one (both letters must
/// be able to stay put). Edge weights do not carry over.
pub fn cartesian_product(g: &LabeledGraph, h: &LabeledGraph) -> Result<LabeledGraph> {
    let total = (g.len() as u64).checked_mul(h.len() as u64);
    match total {
        Some(t) if t <= MAX_STRING_GRAPH_VERTICES => {}
        _ => {
            return Err(Error::ResourceCap(format!(
                "product on {} x {} vertices exceeds the {MAX_STRING_GRAPH_VERTICES}-vertex cap",
                g.len(),
                h.len()
            )))
        }
    }
    let mut out = LabeledGraph::new();
    for gu in 0..g.len() {
        for hv in 0..h.len() {
            let name = format!("{}{}", g.name(gu), h.name(hv));
            let attr = match (g.attr(gu), h.attr(hv)) {
                (Some(a), Some(b)) => Some(format!("{a}{b}")),
                _ => None,
            };
            let idx = out.add_vertex_with_attr(name, attr);
            debug_assert_eq!(idx, gu * h.len() + hv);
            if g.has_self_loop(gu) && h.has_self_loop(hv) {
                out.self_loops[idx] = true;
            }
        }
    }
    for gu in 0..g.len() {
        for hv in 0..h.len() {
            let idx = gu * h.len() + hv;
            for gw in g.neighbors(gu) {
                if gw > gu {
                    out.add_edge(idx, gw * h.len() + hv);
                }
            }
            for hw in h.neighbors(hv) {
                if hw > hv {
                    out.add_edge(idx, gu * h.len() + hw);
                }
            }
        }
    }
    Ok(out)
}

/// The m-dimensional binary hypercube: vertices are all m-bit strings
/// (names render the index in binary, most significant bit first), edges
/// join strings differing in exactly one bit.
pub fn hypercube(m: u32) -> Result<LabeledGraph> {
    if m > MAX_HYPERCUBE_DIM {
        return Err(Error::ResourceCap(format!(
            "hypercube dimension {m} exceeds the cap of {MAX_HYPERCUBE_DIM}"
        )));
    }
    let n = 1usize << m;
    let mut g = LabeledGraph::new();
    for i in 0..n {
        let name: String = (0..m)
            .map(|b| if i >> (m - 1 - b) & 1 == 1 { '1' } else { '0' })
            .collect();
        g.add_vertex(if m == 0 { "-".into() } else { name });
    }
    for i in 0..n {
        for b in 0..m {
            let j = i ^ (1 << b);
            if j > i {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

fn word_name(word: &[u8], v_size: usize) -> String {
    if v_size <= MAX_RENDER_ALPHABET {
        format_word(word, v_size).expect("digits checked by construction")
    } else if word.is_empty() {
        "-".into()
    } else {
        word.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// All storage strings over an alphabet of `v_size` digits with length at
/// most `max_len` (including the empty string when `include_empty`), with
/// edges between strings at Levenshtein distance one. Vertices are ordered
/// by length, then lexicographically.
pub fn levenshtein_graph(v_size: usize, max_len: usize, include_empty: bool) -> Result<LabeledGraph> {
    if v_size < 2 || v_size > u8::MAX as usize + 1 {
        return Err(Error::InvalidInput(format!(
            "storage alphabet size {v_size} out of range 2..=256"
        )));
    }
    let min_len = usize::from(!include_empty);
    let mut count = 0u64;
    for len in min_len..=max_len {
        let layer = (v_size as u64).checked_pow(len as u32);
        count = match layer.and_then(|l| count.checked_add(l)) {
            Some(c) if c <= MAX_STRING_GRAPH_VERTICES => c,
            _ => {
                return Err(Error::ResourceCap(format!(
                    "string graph over {v_size} digits up to length {max_len} exceeds \
                     the {MAX_STRING_GRAPH_VERTICES}-vertex cap"
                )))
            }
        };
    }

    let mut g = LabeledGraph::new();
    let mut index = BTreeMap::new();
    let mut layer: Vec<StorageString> = vec![Vec::new()];
    for len in 0..=max_len {
        if len >= min_len {
            for word in &layer {
                let idx = g.add_vertex(word_name(word, v_size));
                index.insert(word.clone(), idx);
            }
        }
        if len < max_len {
            let mut next = Vec::with_capacity(layer.len() * v_size);
            for word in &layer {
                for d in 0..v_size as u8 {
                    let mut w = word.clone();
                    w.push(d);
                    next.push(w);
                }
            }
            next.sort_unstable();
            layer = next;
        }
    }

    // Each word links to every single-edit variant that is also a vertex:
    // substitutions stay in the same layer, deletions reach the layer below
    // (insertions are the reverse direction of a deletion, so adding
    // deletion edges from every vertex covers them).
    for (word, &idx) in &index {
        for pos in 0..word.len() {
            for d in 0..v_size as u8 {
                if d != word[pos] {
                    let mut w = word.clone();
                    w[pos] = d;
                    if let Some(&jdx) = index.get(&w) {
                        if jdx > idx {
                            g.add_edge(idx, jdx);
                        }
                    }
                }
            }
            let mut w = word.clone();
            w.remove(pos);
            if let Some(&jdx) = index.get(&w) {
                g.add_edge(idx, jdx);
            }
        }
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// Source adjacency graph
// ---------------------------------------------------------------------------

/// Vertex cap for the source adjacency graph (its edge scan is quadratic
/// in the number of blocks).
pub const MAX_BLOCK_GRAPH_VERTICES: u64 = 4096;

/// The weighted source graph on all |W|^n blocks: an edge joins distinct
/// blocks x ≠ y exactly when an edit moves between them with positive
/// probability under the memoryless extension (every letter pair carries
/// mass in one direction or the other), weighted by the combined mass
/// p(x,y) + p(y,x); self-loops mark blocks that can stay put, weighted by
/// the stay mass. Vertex i corresponds to the i-th block in lexicographic
/// order, matching [`JointSource::blocks`].
pub fn adjacency_graph(src: &JointSource, block_n: usize) -> Result<LabeledGraph> {
    match src.block_count(block_n) {
        Some(c) if c <= MAX_BLOCK_GRAPH_VERTICES => {}
        _ => {
            return Err(Error::ResourceCap(format!(
                "adjacency graph needs {}^{block_n} vertices, above the cap of \
                 {MAX_BLOCK_GRAPH_VERTICES}",
                src.w_size()
            )))
        }
    }
    let blocks: Vec<_> = src.blocks(block_n).collect();
    let mut g = LabeledGraph::new();
    for b in &blocks {
        g.add_vertex(src.block_name(b));
    }
    for (i, x) in blocks.iter().enumerate() {
        let diag = src.block_pair_mass(x, x);
        if !diag.is_zero() {
            g.add_weighted_edge(i, i, Some(diag));
        }
        for (j, y) in blocks.iter().enumerate().skip(i + 1) {
            let combined = &src.block_pair_mass(x, y) + &src.block_pair_mass(y, x);
            if !combined.is_zero() {
                g.add_weighted_edge(i, j, Some(combined));
            }
        }
    }
    Ok(g)
}
