//! Subgraph embedding search: exact and error-tolerant.
//!
//! A code that rewrites cheaply is an embedding of the source graph (the
//! *guest*) into a storage-string graph (the *host*): source blocks land on
//! stored strings, and every likely edit must cross a host edge. When no
//! exact embedding exists, some guest edges have to be stretched; the
//! error-tolerant search prices each stretched edge by the probability mass
//! crossing it times the extra host distance it now spans, and minimizes
//! that total by exhaustive branch-and-bound — exact, deterministic, and
//! feasible at the small scales where these graphs live.

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, PathMetric};
use crate::scalar::Scalar;

/// Search controls shared by both embedding procedures.
#[derive(Debug, Clone, Default)]
pub struct EmbedOptions {
    /// Require the image of every attributed guest vertex to carry the same
    /// attribute; host vertices without an attribute match on their name.
    pub respect_attributes: bool,
    /// Cap on explored search-tree nodes. When exhausted, the best solution
    /// found so far is returned with `proven_optimal` cleared.
    pub node_budget: Option<u64>,
}

/// Outcome of an embedding search.
#[derive(Debug, Clone)]
pub struct EmbeddingResult {
    /// Whether any witness was found (for exact search, an embedding; for
    /// tolerant search, any finite-cost assignment).
    pub embeddable: bool,
    /// Guest-indexed host images, when a witness exists.
    pub vertex_map: Option<Vec<usize>>,
    /// Guest edges whose images are not host edges (empty for exact).
    pub deleted_edges: Vec<(usize, usize)>,
    /// Mass-weighted total stretch: Σ w(e)·(d_host(φu,φv) − 1) over guest
    /// edges. Zero exactly when the embedding is exact.
    pub cost: Scalar,
    /// True when the search ran to completion, so the answer is the true
    /// optimum (or a proof of non-embeddability); false only on budget
    /// exhaustion.
    pub proven_optimal: bool,
    pub nodes_explored: u64,
}

impl EmbeddingResult {
    fn not_found(proven: bool, nodes: u64) -> Self {
        EmbeddingResult {
            embeddable: false,
            vertex_map: None,
            deleted_edges: Vec::new(),
            cost: Scalar::zero(),
            proven_optimal: proven,
            nodes_explored: nodes,
        }
    }
}

fn attr_matches(guest: &LabeledGraph, v: usize, host: &LabeledGraph, c: usize) -> bool {
    match guest.attr(v) {
        None => true,
        Some(a) => match host.attr(c) {
            Some(b) => a == b,
            None => host.name(c) == a,
        },
    }
}

/// Independent validity check for a search result: the map must be
/// injective, attribute-consistent when requested, and every guest edge
/// outside `deleted_edges` must land on a host edge.
pub fn verify_embedding(
    guest: &LabeledGraph,
    host: &LabeledGraph,
    result: &EmbeddingResult,
    respect_attributes: bool,
) -> bool {
    let Some(map) = &result.vertex_map else {
        return false;
    };
    if map.len() != guest.len() {
        return false;
    }
    let mut used = vec![false; host.len()];
    for (v, &c) in map.iter().enumerate() {
        if c >= host.len() || used[c] {
            return false;
        }
        used[c] = true;
        if respect_attributes && !attr_matches(guest, v, host, c) {
            return false;
        }
    }
    let deleted: std::collections::BTreeSet<(usize, usize)> =
        result.deleted_edges.iter().copied().collect();
    guest
        .edge_pairs()
        .into_iter()
        .filter(|e| !deleted.contains(e))
        .all(|(u, v)| host.has_edge(map[u], map[v]))
}

// ---------------------------------------------------------------------------
// Exact embedding
// ---------------------------------------------------------------------------

struct ExactSearch<'a> {
    guest: &'a LabeledGraph,
    host: &'a LabeledGraph,
    respect_attributes: bool,
    /// Guest neighbors with smaller index, per vertex (already mapped when
    /// the vertex is reached).
    earlier: Vec<Vec<usize>>,
    /// Guest neighbors with larger index, per vertex (still unmapped).
    later_count: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    budget: u64,
    truncated: bool,
}

impl ExactSearch<'_> {
    /// Depth-first over guest vertices in index order, host candidates in
    /// increasing index, so the first witness is the lexicographically
    /// least vertex map.
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.guest.len() {
            return true;
        }
        for c in 0..self.host.len() {
            if self.used[c]
                || self.host.degree(c) < self.guest.degree(depth)
                || (self.respect_attributes && !attr_matches(self.guest, depth, self.host, c))
            {
                continue;
            }
            if !self.earlier[depth]
                .iter()
                .all(|&u| self.host.has_edge(self.map[u], c))
            {
                continue;
            }
            // Every still-unmapped guest neighbor will need its own unused
            // host neighbor of c.
            let free = self.host.neighbors(c).filter(|&u| !self.used[u]).count();
            if free < self.later_count[depth] {
                continue;
            }
            if self.nodes >= self.budget {
                self.truncated = true;
                return false;
            }
            self.nodes += 1;
            self.used[c] = true;
            self.map[depth] = c;
            if self.run(depth + 1) {
                return true;
            }
            self.used[c] = false;
            if self.truncated {
                return false;
            }
        }
        false
    }
}

/// Searches for an injective map φ carrying every guest edge to a host
/// edge (guest self-loops are vacuous: a block that stays put leaves its
/// stored string untouched). Non-embeddability is a verdict, not an error.
/// The returned witness is the lexicographically least vertex map.
pub fn exact_embed(
    guest: &LabeledGraph,
    host: &LabeledGraph,
    opts: &EmbedOptions,
) -> EmbeddingResult {
    if guest.len() > host.len() {
        return EmbeddingResult::not_found(true, 0);
    }
    let earlier: Vec<Vec<usize>> = (0..guest.len())
        .map(|v| guest.neighbors(v).filter(|&u| u < v).collect())
        .collect();
    let later_count: Vec<usize> = (0..guest.len())
        .map(|v| guest.neighbors(v).filter(|&u| u > v).count())
        .collect();
    let mut search = ExactSearch {
        guest,
        host,
        respect_attributes: opts.respect_attributes,
        earlier,
        later_count,
        map: vec![0; guest.len()],
        used: vec![false; host.len()],
        nodes: 0,
        budget: opts.node_budget.unwrap_or(u64::MAX),
        truncated: false,
    };
    if search.run(0) {
        EmbeddingResult {
            embeddable: true,
            vertex_map: Some(search.map),
            deleted_edges: Vec::new(),
            cost: Scalar::zero(),
            proven_optimal: true,
            nodes_explored: search.nodes,
        }
    } else {
        EmbeddingResult::not_found(!search.truncated, search.nodes)
    }
}

// ---------------------------------------------------------------------------
// Error-tolerant embedding
// ---------------------------------------------------------------------------

type Solution = (Scalar, Vec<(usize, usize)>, Vec<usize>);

struct TolerantSearch<'a> {
    guest: &'a LabeledGraph,
    host: &'a LabeledGraph,
    host_pm: &'a PathMetric,
    respect_attributes: bool,
    /// Per guest vertex: earlier-indexed adjacent vertices with the edge's
    /// combined mass.
    earlier: Vec<Vec<(usize, Scalar)>>,
    map: Vec<usize>,
    used: Vec<bool>,
    best: Option<Solution>,
    nodes: u64,
    budget: u64,
    truncated: bool,
}

impl TolerantSearch<'_> {
    /// Stretch cost incurred by placing guest vertex `depth` on host
    /// vertex `c`, given all earlier placements; `None` marks a forbidden
    /// placement (positive mass across disconnected host parts).
    fn placement_cost(&self, depth: usize, c: usize) -> Option<Scalar> {
        let mut delta = Scalar::zero();
        for (u, w) in &self.earlier[depth] {
            match self.host_pm.distance(self.map[*u], c) {
                Some(1) => {}
                Some(d) => {
                    if !w.is_zero() {
                        delta = &delta + &(w * &Scalar::from_int(d as i64 - 1));
                    }
                }
                None => {
                    if !w.is_zero() {
                        return None;
                    }
                }
            }
        }
        Some(delta)
    }

    fn record_leaf(&mut self, cost: Scalar) -> bool {
        let mut deleted = Vec::new();
        for (u, v) in self.guest.edge_pairs() {
            if self.host_pm.distance(self.map[u], self.map[v]) != Some(1) {
                deleted.push((u, v));
            }
        }
        let exact_witness = cost.is_zero() && deleted.is_empty();
        let candidate = (cost, deleted, self.map.clone());
        let better = match &self.best {
            None => true,
            Some((bc, bd, bm)) => {
                candidate.0 < *bc
                    || (candidate.0 == *bc && (&candidate.1, &candidate.2) < (&(*bd), &(*bm)))
            }
        };
        if better {
            self.best = Some(candidate);
        }
        // A zero-cost, zero-deletion leaf cannot be beaten: the empty
        // deleted set wins every tie-break, and depth-first order visits
        // vertex maps lexicographically.
        exact_witness
    }

    /// Returns true when the search should stop entirely.
    fn run(&mut self, depth: usize, accumulated: Scalar) -> bool {
        if depth == self.guest.len() {
            return self.record_leaf(accumulated);
        }
        for c in 0..self.host.len() {
            if self.used[c]
                || (self.respect_attributes && !attr_matches(self.guest, depth, self.host, c))
            {
                continue;
            }
            let Some(delta) = self.placement_cost(depth, c) else {
                continue;
            };
            let next = &accumulated + &delta;
            // Remaining placements only add nonnegative cost, so the
            // accumulated total is an admissible bound. Ties must continue:
            // an equal-cost leaf may win the deterministic tie-break.
            if let Some((bc, _, _)) = &self.best {
                if next > *bc {
                    continue;
                }
            }
            if self.nodes >= self.budget {
                self.truncated = true;
                return true;
            }
            self.nodes += 1;
            self.used[c] = true;
            self.map[depth] = c;
            let stop = self.run(depth + 1, next);
            self.used[c] = false;
            if stop {
                return true;
            }
        }
        false
    }
}

/// Minimum-cost error-tolerant embedding. `pair_mass[u][v]` is the joint
/// probability that an edit moves guest vertex u to v; every positive
/// off-diagonal mass pair must be a guest edge (the adjacency graph
/// guarantees this by construction). The cost of a placement is
/// Σ over guest edges of combined mass × (host distance − 1), i.e. the
/// expected extra edit distance paid on top of the one edit the pair would
/// cost in an exact embedding; edges whose images are non-adjacent are
/// reported as deleted. Ties resolve to the lexicographically least
/// (deleted-edge set, vertex map).
pub fn tolerant_embed(
    guest: &LabeledGraph,
    host: &LabeledGraph,
    pair_mass: &[Vec<Scalar>],
    opts: &EmbedOptions,
) -> Result<EmbeddingResult> {
    let n = guest.len();
    if pair_mass.len() != n || pair_mass.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput(format!(
            "pair mass matrix must be {n}x{n} to match the guest"
        )));
    }
    for u in 0..n {
        for v in 0..n {
            if pair_mass[u][v].is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative pair mass at ({u},{v})"
                )));
            }
            if u != v && !pair_mass[u][v].is_zero() && !guest.has_edge(u, v) {
                return Err(Error::InvalidInput(format!(
                    "pair ({u},{v}) carries mass but is not a guest edge; \
                     build the guest from the same source as the mass matrix"
                )));
            }
        }
    }
    if n > host.len() {
        return Err(Error::Infeasible(format!(
            "guest has {n} vertices but host only {}",
            host.len()
        )));
    }

    // Fast path: an exact embedding is always the optimum (cost zero, empty
    // deletion set beats every tie-break).
    let exact = exact_embed(guest, host, opts);
    if exact.embeddable {
        return Ok(exact);
    }
    if !exact.proven_optimal {
        // Budget exhausted before the exact phase finished.
        return Ok(EmbeddingResult::not_found(false, exact.nodes_explored));
    }

    let host_pm = PathMetric::new(host);
    let earlier: Vec<Vec<(usize, Scalar)>> = (0..n)
        .map(|v| {
            guest
                .neighbors(v)
                .filter(|&u| u < v)
                .map(|u| (u, &pair_mass[u][v] + &pair_mass[v][u]))
                .collect()
        })
        .collect();
    let mut search = TolerantSearch {
        guest,
        host,
        host_pm: &host_pm,
        respect_attributes: opts.respect_attributes,
        earlier,
        map: vec![0; n],
        used: vec![false; host.len()],
        best: None,
        nodes: 0,
        budget: opts
            .node_budget
            .map(|b| b.saturating_sub(exact.nodes_explored))
            .unwrap_or(u64::MAX),
        truncated: false,
    };
    search.run(0, Scalar::zero());
    let nodes = exact.nodes_explored + search.nodes;
    let proven = !search.truncated;
    match search.best {
        Some((cost, deleted, map)) => Ok(EmbeddingResult {
            embeddable: true,
            vertex_map: Some(map),
            deleted_edges: deleted,
            cost,
            proven_optimal: proven,
            nodes_explored: nodes,
        }),
        None if proven => Err(Error::Infeasible(
            "no placement of the guest keeps every positive-mass pair at finite host distance"
                .into(),
        )),
        None => Ok(EmbeddingResult::not_found(false, nodes)),
    }
}

/// The cost of the optimal tolerant embedding — the expected extra edit
/// distance forced on this host. Asymmetric in its arguments.
pub fn subgraph_distance(
    guest: &LabeledGraph,
    host: &LabeledGraph,
    pair_mass: &[Vec<Scalar>],
) -> Result<Scalar> {
    Ok(tolerant_embed(guest, host, pair_mass, &EmbedOptions::default())?.cost)
}
