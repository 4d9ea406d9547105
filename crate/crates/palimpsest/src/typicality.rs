//! Strong typicality over blocks: typical sets, the joint-typicality graph,
//! and block-coding diagnostics.
//!
//! A length-n block is δ-typical when its empirical letter frequencies sit
//! within total absolute deviation δ of the source law; a pair of blocks is
//! jointly typical when the empirical pair frequencies do. Connecting
//! jointly typical blocks yields a graph whose size and degrees are pinned
//! near `2^(n·H(X))` and `2^(n·H(Y|X))`, and whose diameter controls how
//! much malleability a typical-set code can guarantee. Everything here is
//! enumerated exactly at desk scale; probabilities come from an exact
//! type census rather than sampling.

use std::collections::BTreeMap;

use num::bigint::BigUint;
use num::rational::BigRational;
use num::{BigInt, One};
use serde::Serialize;

use crate::codes::{CodeTable, PalimpsestCode};
use crate::edit::{EditMetric, StorageString};
use crate::error::{Error, Result};
use crate::graph::{components, diameter, LabeledGraph, PathMetric};
use crate::prob::{Block, JointSource};
use crate::scalar::Scalar;

/// Largest block universe (`|W|^n`) the enumeration routines will walk.
pub const MAX_TYPICAL_ENUMERATION: u64 = 1 << 20;
/// Largest number of jointly typical pairs allowed to become graph edges.
pub const MAX_TYPICALITY_EDGES: u64 = 5_000_000;
/// Largest type census (compositions of n over the support) for exact mass.
pub const MAX_TYPE_CENSUS: u128 = 5_000_000;
/// Absolute slop when comparing empirical deviations against δ, absorbing
/// float rounding in `count/n` sums.
const DEVIATION_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// How the typicality tolerance is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    /// Schedule δ(n) = c·n^(−1/2+ω): shrinking, but slower than n^(−1/2),
    /// so block typicality probabilities still converge to one.
    Auto,
    Fixed(f64),
}

/// Block length plus tolerance schedule for all typical-set operations.
#[derive(Debug, Clone, Copy)]
pub struct TypicalityConfig {
    pub block_n: usize,
    pub delta: DeltaChoice,
    /// Schedule exponent offset (auto mode); must be positive.
    pub omega: f64,
    /// Schedule constant (auto mode); must be positive.
    pub c: f64,
}

impl TypicalityConfig {
    /// Auto tolerance with the default schedule constants c = 1, ω = 0.1.
    pub fn auto(block_n: usize) -> Self {
        TypicalityConfig { block_n, delta: DeltaChoice::Auto, omega: 0.1, c: 1.0 }
    }

    /// Fixed tolerance (δ = 0 is allowed: exact-type typicality).
    pub fn fixed(block_n: usize, delta: f64) -> Self {
        TypicalityConfig { block_n, delta: DeltaChoice::Fixed(delta), omega: 0.1, c: 1.0 }
    }

    /// The tolerance in force for this block length.
    pub fn delta(&self) -> f64 {
        match self.delta {
            DeltaChoice::Fixed(d) => d,
            DeltaChoice::Auto => self.c * (self.block_n as f64).powf(-0.5 + self.omega),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.block_n == 0 {
            return Err(Error::InvalidInput("block length must be at least 1".into()));
        }
        let d = self.delta();
        if !(d >= 0.0) || self.omega <= 0.0 || self.c <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "typicality tolerance must be nonnegative (got delta={d}, omega={}, c={})",
                self.omega, self.c
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Membership tests
// ---------------------------------------------------------------------------

fn letter_counts(block: &[u16], w: usize) -> Vec<u32> {
    let mut counts = vec![0u32; w];
    for &s in block {
        counts[s as usize] += 1;
    }
    counts
}

/// Total absolute deviation of empirical frequencies from `probs`.
fn deviation(counts: &[u32], probs: &[f64], n: usize) -> f64 {
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
        .sum()
}

/// Membership of a single block in the marginal typical set for `probs`.
fn marginally_typical(counts: &[u32], probs: &[f64], n: usize, delta: f64) -> bool {
    deviation(counts, probs, n) <= delta + DEVIATION_EPS
}

/// Whether the pair (x, y) is strongly jointly typical at tolerance δ.
pub fn jointly_typical(src: &JointSource, x: &[u16], y: &[u16], delta: f64) -> bool {
    let w = src.w_size();
    let n = x.len();
    if y.len() != n || n == 0 {
        return false;
    }
    let joint: Vec<f64> = (0..w)
        .flat_map(|a| (0..w).map(move |b| (a, b)))
        .map(|(a, b)| src.mass(a, b).to_f64())
        .collect();
    let mut counts = vec![0u32; w * w];
    for i in 0..n {
        counts[x[i] as usize * w + y[i] as usize] += 1;
    }
    deviation(&counts, &joint, n) <= delta + DEVIATION_EPS
}

// ---------------------------------------------------------------------------
// Set enumeration
// ---------------------------------------------------------------------------

/// All the typical sets of one configuration, enumerated together: the
/// marginal sets T_X and T_Y, and the *source-connected* sets S_X ⊆ T_X
/// (blocks with at least one jointly typical partner in T_Y) and S_Y ⊆ T_Y
/// (blocks with a jointly typical predecessor in T_X). Blocks are in
/// lexicographic order throughout.
#[derive(Debug, Clone)]
pub struct TypicalSets {
    pub block_n: usize,
    pub delta: f64,
    pub typical_x: Vec<Block>,
    pub typical_y: Vec<Block>,
    pub source_x: Vec<Block>,
    pub source_y: Vec<Block>,
    /// Number of jointly typical ordered pairs (x, y) ∈ T_X × T_Y; every
    /// jointly typical pair over the whole universe appears here because
    /// joint typicality forces both marginals typical.
    pub jointly_typical_pairs: u64,
}

struct Sweep {
    blocks: Vec<Block>,
    tx: Vec<usize>,
    ty: Vec<usize>,
    /// Jointly typical partner count per T_X entry (rows, self included).
    row: Vec<u64>,
    /// Jointly typical predecessor count per T_Y entry (columns).
    col: Vec<u64>,
    pairs: u64,
}

/// One full pass over T_X × T_Y recording row/column partner counts.
fn sweep(src: &JointSource, cfg: &TypicalityConfig) -> Result<Sweep> {
    cfg.validate()?;
    let n = cfg.block_n;
    let delta = cfg.delta();
    let w = src.w_size();
    match src.block_count(n) {
        Some(count) if count <= MAX_TYPICAL_ENUMERATION => {}
        _ => {
            return Err(Error::EnumerationCap(format!(
                "{w}^{n} blocks exceed the typical-set enumeration cap of {MAX_TYPICAL_ENUMERATION}"
            )))
        }
    }
    let px: Vec<f64> = src.marginal_x().to_f64_vec();
    let py: Vec<f64> = src.marginal_y().to_f64_vec();
    let joint: Vec<f64> = (0..w)
        .flat_map(|a| (0..w).map(move |b| (a, b)))
        .map(|(a, b)| src.mass(a, b).to_f64())
        .collect();

    let blocks: Vec<Block> = src.blocks(n).collect();
    let counts: Vec<Vec<u32>> = blocks.iter().map(|b| letter_counts(b, w)).collect();
    let tx: Vec<usize> = (0..blocks.len())
        .filter(|&i| marginally_typical(&counts[i], &px, n, delta))
        .collect();
    let ty: Vec<usize> = (0..blocks.len())
        .filter(|&i| marginally_typical(&counts[i], &py, n, delta))
        .collect();

    let mut row = vec![0u64; tx.len()];
    let mut col = vec![0u64; ty.len()];
    let mut pairs = 0u64;
    let mut pair_counts = vec![0u32; w * w];
    let threshold = delta + DEVIATION_EPS;
    for (xi, &bx) in tx.iter().enumerate() {
        let x = &blocks[bx];
        for (yi, &by) in ty.iter().enumerate() {
            let y = &blocks[by];
            pair_counts.iter_mut().for_each(|c| *c = 0);
            for i in 0..n {
                pair_counts[x[i] as usize * w + y[i] as usize] += 1;
            }
            if deviation(&pair_counts, &joint, n) <= threshold {
                row[xi] += 1;
                col[yi] += 1;
                pairs += 1;
            }
        }
    }
    Ok(Sweep { blocks, tx, ty, row, col, pairs })
}

/// Enumerates T_X, T_Y, S_X, S_Y exactly.
pub fn typical_sets(src: &JointSource, cfg: &TypicalityConfig) -> Result<TypicalSets> {
    let s = sweep(src, cfg)?;
    let pick = |idx: &[usize], keep: Option<&[u64]>| -> Vec<Block> {
        idx.iter()
            .enumerate()
            .filter(|(k, _)| keep.map_or(true, |c| c[*k] > 0))
            .map(|(_, &b)| s.blocks[b].clone())
            .collect()
    };
    Ok(TypicalSets {
        block_n: cfg.block_n,
        delta: cfg.delta(),
        typical_x: pick(&s.tx, None),
        typical_y: pick(&s.ty, None),
        source_x: pick(&s.tx, Some(&s.row)),
        source_y: pick(&s.ty, Some(&s.col)),
        jointly_typical_pairs: s.pairs,
    })
}

/// The marginal typical set of the pre-edit law, in lexicographic order.
pub fn typical_set_x(src: &JointSource, cfg: &TypicalityConfig) -> Result<Vec<Block>> {
    cfg.validate()?;
    enumerate_marginal(src, cfg, &src.marginal_x().to_f64_vec())
}

/// The marginal typical set of the post-edit law.
pub fn typical_set_y(src: &JointSource, cfg: &TypicalityConfig) -> Result<Vec<Block>> {
    cfg.validate()?;
    enumerate_marginal(src, cfg, &src.marginal_y().to_f64_vec())
}

fn enumerate_marginal(
    src: &JointSource,
    cfg: &TypicalityConfig,
    probs: &[f64],
) -> Result<Vec<Block>> {
    let n = cfg.block_n;
    match src.block_count(n) {
        Some(count) if count <= MAX_TYPICAL_ENUMERATION => {}
        _ => {
            return Err(Error::EnumerationCap(format!(
                "{}^{n} blocks exceed the typical-set enumeration cap of {MAX_TYPICAL_ENUMERATION}",
                src.w_size()
            )))
        }
    }
    let delta = cfg.delta();
    Ok(src
        .blocks(n)
        .filter(|b| marginally_typical(&letter_counts(b, src.w_size()), probs, n, delta))
        .collect())
}

/// The conditional typical set given x: all y in T_Y jointly typical
/// with x. Empty when x has no typical partner (x outside S_X).
pub fn conditional_typical(
    src: &JointSource,
    cfg: &TypicalityConfig,
    x: &[u16],
) -> Result<Vec<Block>> {
    if x.len() != cfg.block_n {
        return Err(Error::InvalidInput(format!(
            "block has length {} but the configuration says {}",
            x.len(),
            cfg.block_n
        )));
    }
    let delta = cfg.delta();
    Ok(typical_set_y(src, cfg)?
        .into_iter()
        .filter(|y| jointly_typical(src, x, y, delta))
        .collect())
}

// ---------------------------------------------------------------------------
// Typicality graph and report
// ---------------------------------------------------------------------------

/// Summary statistics of one typicality graph, including the realized
/// slack parameters that place the measured counts inside their
/// entropy-exponent windows (base-2 throughout):
///
/// * `eta` — marginal set sizes vs `2^(n·H(X))`, `2^(n·H(Y))`;
/// * `lambda` — jointly typical pair count vs `2^(n·H(X,Y))`;
/// * `psi` — graph vertex count vs `2^(n·H(X))`;
/// * `nu` — row degrees vs `2^(n·H(Y|X))`.
///
/// Each slack is the smallest s ≥ 0 with
/// `(1−δ)·2^(n(h−s)) ≤ count ≤ 2^(n(h+s))` (the degree window omits the
/// 1−δ factor); they are reported as measured, never asserted against
/// fixed constants. Degrees are row partner counts |T_(Y|X)(v)| over
/// v ∈ S_X and include the block itself when (v, v) is jointly typical;
/// the graph stores that self-pairing as a separate self-loop flag so path
/// metrics ignore it.
#[derive(Debug, Clone, Serialize)]
pub struct TypicalityReport {
    pub block_n: usize,
    pub delta: f64,
    pub typical_x_size: u64,
    pub typical_y_size: u64,
    pub jointly_typical_pairs: u64,
    pub source_x_size: u64,
    pub source_y_size: u64,
    pub vertex_count: u64,
    pub edge_count: u64,
    pub self_loop_count: u64,
    pub degree_min: Option<u64>,
    pub degree_max: Option<u64>,
    pub degree_mean: Option<f64>,
    pub largest_component_size: u64,
    pub vertices_outside_largest: u64,
    pub diameter_largest_component: Option<u64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub psi: Option<f64>,
    pub nu: Option<f64>,
}

/// Smallest s ≥ 0 placing `count` in the window
/// `lower_factor·2^(n(h−s)) ≤ count ≤ 2^(n(h+s))`.
fn realized_slack(count: u64, h: f64, n: usize, lower_factor: f64) -> Option<f64> {
    if count == 0 {
        return None;
    }
    let log_count = (count as f64).log2();
    let n = n as f64;
    let upper = log_count / n - h;
    let lower = if lower_factor > 0.0 {
        h - (log_count - lower_factor.log2()) / n
    } else {
        0.0
    };
    Some(upper.max(lower).max(0.0))
}

/// Builds the joint-typicality graph on S_X ∪ S_Y: vertices are blocks (in
/// lexicographic order, named by their rendered block string), and an edge
/// joins two distinct blocks that are jointly typical in either order. A
/// block jointly typical with itself gets a self-loop flag. The report
/// carries set sizes, degree statistics, the diameter of the largest
/// connected component, and the realized slack parameters.
pub fn typicality_graph(
    src: &JointSource,
    cfg: &TypicalityConfig,
) -> Result<(LabeledGraph, TypicalityReport)> {
    let s = sweep(src, cfg)?;
    if s.pairs > MAX_TYPICALITY_EDGES {
        return Err(Error::EnumerationCap(format!(
            "{} jointly typical pairs exceed the graph edge cap of {MAX_TYPICALITY_EDGES}",
            s.pairs
        )));
    }
    let n = cfg.block_n;
    let delta = cfg.delta();
    let w = src.w_size();

    // Vertex set: union of the connected sets, in block (universe) order.
    let mut in_graph = vec![false; s.blocks.len()];
    for (k, &b) in s.tx.iter().enumerate() {
        if s.row[k] > 0 {
            in_graph[b] = true;
        }
    }
    for (k, &b) in s.ty.iter().enumerate() {
        if s.col[k] > 0 {
            in_graph[b] = true;
        }
    }
    let mut graph = LabeledGraph::new();
    let mut vertex_of = vec![usize::MAX; s.blocks.len()];
    for (b, flag) in in_graph.iter().enumerate() {
        if *flag {
            vertex_of[b] = graph.add_vertex(src.block_name(&s.blocks[b]));
        }
    }

    // Second pass to materialize edges (membership already decided).
    let joint: Vec<f64> = (0..w)
        .flat_map(|a| (0..w).map(move |b| (a, b)))
        .map(|(a, b)| src.mass(a, b).to_f64())
        .collect();
    let mut pair_counts = vec![0u32; w * w];
    let threshold = delta + DEVIATION_EPS;
    for &bx in &s.tx {
        let x = &s.blocks[bx];
        for &by in &s.ty {
            let y = &s.blocks[by];
            pair_counts.iter_mut().for_each(|c| *c = 0);
            for i in 0..n {
                pair_counts[x[i] as usize * w + y[i] as usize] += 1;
            }
            if deviation(&pair_counts, &joint, n) <= threshold {
                graph.add_edge(vertex_of[bx], vertex_of[by]);
            }
        }
    }

    // Degree statistics over S_X rows (partner counts include self-pairs).
    let degrees: Vec<u64> = s.row.iter().copied().filter(|&d| d > 0).collect();
    let (degree_min, degree_max, degree_mean) = if degrees.is_empty() {
        (None, None, None)
    } else {
        (
            degrees.iter().copied().min(),
            degrees.iter().copied().max(),
            Some(degrees.iter().sum::<u64>() as f64 / degrees.len() as f64),
        )
    };

    // Largest connected component and its diameter.
    let comps = components(&graph);
    let (largest_size, diam) = match comps.iter().max_by_key(|c| c.len()) {
        None => (0u64, None),
        Some(c) => (c.len() as u64, diameter(&graph.induced_subgraph(c))),
    };

    let hx = src.entropy_x(2.0);
    let hy = src.entropy_y(2.0);
    let hxy = src.joint_entropy(2.0);
    let hcond = src.conditional_entropy(2.0);
    let lower = (1.0 - delta).max(0.0);
    let eta = match (
        realized_slack(s.tx.len() as u64, hx, n, lower),
        realized_slack(s.ty.len() as u64, hy, n, lower),
    ) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    let nu = match (degree_min, degree_max) {
        (Some(lo), Some(hi)) => {
            let up = (hi as f64).log2() / n as f64 - hcond;
            let down = hcond - (lo as f64).log2() / n as f64;
            Some(up.max(down).max(0.0))
        }
        _ => None,
    };

    let source_x_size = s.row.iter().filter(|&&d| d > 0).count() as u64;
    let source_y_size = s.col.iter().filter(|&&d| d > 0).count() as u64;
    let report = TypicalityReport {
        block_n: n,
        delta,
        typical_x_size: s.tx.len() as u64,
        typical_y_size: s.ty.len() as u64,
        jointly_typical_pairs: s.pairs,
        source_x_size,
        source_y_size,
        vertex_count: graph.len() as u64,
        edge_count: graph.edge_count() as u64,
        self_loop_count: graph.self_loop_count() as u64,
        degree_min,
        degree_max,
        degree_mean,
        largest_component_size: largest_size,
        vertices_outside_largest: graph.len() as u64 - largest_size,
        diameter_largest_component: diam,
        eta,
        lambda: realized_slack(s.pairs, hxy, n, lower),
        psi: realized_slack(graph.len() as u64, hx, n, lower),
        nu,
    };
    Ok((graph, report))
}

// ---------------------------------------------------------------------------
// Exact typical-set mass via type census
// ---------------------------------------------------------------------------

fn factorial(n: u32) -> BigUint {
    (1..=u64::from(n)).map(BigUint::from).product::<BigUint>().max(BigUint::one())
}

fn multinomial(n: u32, parts: &[u32]) -> BigUint {
    let mut v = factorial(n);
    for &p in parts {
        v /= factorial(p);
    }
    v
}

/// Number of compositions of n into k nonnegative parts, C(n+k−1, k−1),
/// saturating at u128::MAX.
fn composition_count(n: u128, k: u128) -> u128 {
    if k == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    let mut acc: u128 = 1;
    for i in 0..k - 1 {
        acc = acc.saturating_mul(n + k - 1 - i);
        acc /= i + 1;
        if acc == u128::MAX {
            return acc;
        }
    }
    acc
}

/// Calls `visit` with every vector of nonnegative counts over `k` cells
/// summing to n.
fn for_each_composition(n: u32, k: usize, visit: &mut impl FnMut(&[u32])) {
    fn rec(remaining: u32, cell: usize, counts: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
        if cell + 1 == counts.len() {
            counts[cell] = remaining;
            visit(counts);
            return;
        }
        for c in 0..=remaining {
            counts[cell] = c;
            rec(remaining - c, cell + 1, counts, visit);
        }
    }
    if k == 0 {
        return;
    }
    let mut counts = vec![0u32; k];
    rec(n, 0, &mut counts, visit);
}

/// Exact probability mass of a typicality event defined on letter counts,
/// computed by a census over types restricted to the support of `probs`.
fn census_mass(probs: &[Scalar], n: usize, typical: impl Fn(&[u32]) -> bool) -> Result<Scalar> {
    let support: Vec<usize> = (0..probs.len()).filter(|&i| !probs[i].is_zero()).collect();
    let count = composition_count(n as u128, support.len() as u128);
    if count > MAX_TYPE_CENSUS {
        return Err(Error::EnumerationCap(format!(
            "type census of {count} compositions exceeds the cap of {MAX_TYPE_CENSUS}"
        )));
    }
    let mut full = vec![0u32; probs.len()];
    let mut total = Scalar::zero();
    for_each_composition(n as u32, support.len(), &mut |counts| {
        full.iter_mut().for_each(|c| *c = 0);
        for (k, &cell) in support.iter().enumerate() {
            full[cell] = counts[k];
        }
        if !typical(&full) {
            return;
        }
        let mut term = Scalar::Exact(BigRational::from_integer(BigInt::from(multinomial(
            n as u32, counts,
        ))));
        for (k, &cell) in support.iter().enumerate() {
            if counts[k] > 0 {
                term = &term * &probs[cell].pow(counts[k]);
            }
        }
        total += &term;
    });
    Ok(total)
}

/// Exact Pr[X block is δ-typical], by marginal type census.
pub fn typical_mass_x(src: &JointSource, cfg: &TypicalityConfig) -> Result<Scalar> {
    cfg.validate()?;
    let probs: Vec<Scalar> = src.marginal_x().iter().cloned().collect();
    let f64s: Vec<f64> = probs.iter().map(|p| p.to_f64()).collect();
    let (n, delta) = (cfg.block_n, cfg.delta());
    census_mass(&probs, n, |counts| marginally_typical(counts, &f64s, n, delta))
}

/// Exact Pr[Y block is δ-typical], by marginal type census.
pub fn typical_mass_y(src: &JointSource, cfg: &TypicalityConfig) -> Result<Scalar> {
    cfg.validate()?;
    let probs: Vec<Scalar> = src.marginal_y().iter().cloned().collect();
    let f64s: Vec<f64> = probs.iter().map(|p| p.to_f64()).collect();
    let (n, delta) = (cfg.block_n, cfg.delta());
    census_mass(&probs, n, |counts| marginally_typical(counts, &f64s, n, delta))
}

/// Exact Pr[(X, Y) block pair is jointly δ-typical], by joint type census.
pub fn jointly_typical_mass(src: &JointSource, cfg: &TypicalityConfig) -> Result<Scalar> {
    cfg.validate()?;
    let w = src.w_size();
    let probs: Vec<Scalar> = (0..w)
        .flat_map(|a| (0..w).map(move |b| (a, b)))
        .map(|(a, b)| src.mass(a, b).clone())
        .collect();
    let f64s: Vec<f64> = probs.iter().map(|p| p.to_f64()).collect();
    let (n, delta) = (cfg.block_n, cfg.delta());
    census_mass(&probs, n, |counts| marginally_typical(counts, &f64s, n, delta))
}

/// Exact total pre-edit mass of an explicit block set (product measure).
pub fn set_mass_x(src: &JointSource, blocks: &[Block]) -> Scalar {
    let terms: Vec<Scalar> = blocks.iter().map(|b| src.block_mass_x(b)).collect();
    crate::scalar::pairwise_sum(&terms)
}

/// Exact total post-edit mass of an explicit block set (product measure).
pub fn set_mass_y(src: &JointSource, blocks: &[Block]) -> Scalar {
    let terms: Vec<Scalar> = blocks.iter().map(|b| src.block_mass_y(b)).collect();
    crate::scalar::pairwise_sum(&terms)
}

// ---------------------------------------------------------------------------
// Exponential-cost check
// ---------------------------------------------------------------------------

/// Outcome of the exponential-cost necessary conditions for embedding the
/// typicality graph into a hypercube of nK binary dimensions.
#[derive(Debug, Clone, Serialize)]
pub struct RateSufficiencyVerdict {
    pub n_k: u64,
    /// max(n·H(X), 2^(n·H(Y|X))) in bits — the analytic requirement on nK.
    pub analytic_requirement: f64,
    pub analytic_ok: bool,
    /// Concrete counting checks on the materialized graph, absent when the
    /// graph exceeds the enumeration cap.
    pub vertex_count: Option<u64>,
    /// |V| ≤ 2^(nK): enough hypercube corners for every typical block.
    pub vertex_count_ok: Option<bool>,
    /// Maximum typicality-graph degree (self-loops excluded).
    pub max_degree: Option<u64>,
    /// max degree ≤ nK: the hypercube's degree must cover the guest's.
    pub max_degree_ok: Option<bool>,
    /// Conjunction of every check that could be evaluated.
    pub ok: bool,
}

/// Necessary conditions for a one-edit-per-edit block code of rate K: the
/// analytic requirement nK ≥ max(n·H(X), 2^(n·H(Y|X))) — keeping pace with
/// conditional-typical fan-out forces exponential code length unless
/// H(Y|X) is tiny — plus, when the graph fits under the enumeration cap,
/// the concrete counting checks against the materialized graph.
pub fn rate_sufficiency_check(src: &JointSource, cfg: &TypicalityConfig, n_k: u64) -> RateSufficiencyVerdict {
    let n = cfg.block_n as f64;
    let requirement = (n * src.entropy_x(2.0)).max((n * src.conditional_entropy(2.0)).exp2());
    let analytic_ok = n_k as f64 + 1e-9 >= requirement;
    let (vertex_count, vertex_count_ok, max_degree, max_degree_ok) =
        match typicality_graph(src, cfg) {
            Ok((graph, _)) => {
                let vc = graph.len() as u64;
                let vc_ok = n_k >= 64 || vc <= 1u64 << n_k;
                let md = graph.max_degree() as u64;
                (Some(vc), Some(vc_ok), Some(md), Some(md <= n_k))
            }
            Err(_) => (None, None, None, None),
        };
    let ok = analytic_ok && vertex_count_ok.unwrap_or(true) && max_degree_ok.unwrap_or(true);
    RateSufficiencyVerdict {
        n_k,
        analytic_requirement: requirement,
        analytic_ok,
        vertex_count,
        vertex_count_ok,
        max_degree,
        max_degree_ok,
        ok,
    }
}

// ---------------------------------------------------------------------------
// Malleability bound and Lipschitz diagnostics
// ---------------------------------------------------------------------------

/// Malleability guarantee of a typical-set code whose encoder stretches
/// guest edges by at most `lip`: M ≤ (lip/n)·(1 + δ·diameter), where the
/// diameter is that of the typicality graph the code covers.
pub fn lipschitz_malleability_bound(lip: f64, n: usize, delta: f64, diameter: f64) -> f64 {
    lip / n as f64 * (1.0 + delta * diameter)
}

/// Companion asymptotic form of the bound under the auto-δ schedule:
/// lip/n + k·lip·contraction/n^(1/2−ω).
pub fn lipschitz_malleability_asymptote(lip: f64, contraction: f64, k: f64, n: usize, omega: f64) -> f64 {
    lip / n as f64 + k * lip * contraction / (n as f64).powf(0.5 - omega)
}

/// Degree-based lower bound on the dilation of any embedding: the smallest
/// k with (host_max_deg − 1)^k ≥ guest_max_deg − 1, i.e.
/// ⌈log(d_G−1)/log(d_H−1)⌉. A host of degree d_H reaches at most
/// (d_H−1)^k new vertices in k steps, so spreading a high-degree guest
/// vertex's neighborhood needs at least this stretch. Degenerate degrees
/// (either side ≤ 2) fall back to the trivial bound 1.
pub fn dilation_lower_bound(guest_max_deg: u64, host_max_deg: u64) -> u64 {
    if guest_max_deg <= 2 || host_max_deg <= 2 {
        return 1;
    }
    let base = u128::from(host_max_deg - 1);
    let target = u128::from(guest_max_deg - 1);
    let mut k = 1u64;
    let mut acc = base;
    while acc < target {
        acc = acc.saturating_mul(base);
        k += 1;
    }
    k
}

/// Lipschitz-style diagnostics of one block encoder viewed as a map from
/// the source adjacency metric into an edit metric on codewords.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingDiagnostics {
    /// sup over pairs of host distance / guest distance.
    pub dilation: f64,
    /// sup over pairs of guest distance / host distance (infinite when two
    /// distinct blocks share a codeword).
    pub contraction: f64,
    /// dilation × contraction.
    pub distortion: f64,
    /// Codeword-space size / domain size, when all codewords share one
    /// length (the host space is then that power of the storage alphabet).
    pub expansion: Option<f64>,
}

/// Measures dilation, contraction, distortion, and expansion of a block
/// code by exact enumeration over all domain pairs. Guest vertex i is the
/// i-th block of the code's table in lexicographic order, and must match
/// the metric's vertex order; pairs at infinite guest distance
/// (disconnected) are skipped. Trivial domains (< 2 blocks) measure as
/// isometries.
pub fn embedding_diagnostics(
    code: &PalimpsestCode,
    guest_metric: &PathMetric,
    host_metric: EditMetric,
) -> Result<EmbeddingDiagnostics> {
    let table: &BTreeMap<Block, StorageString> = match &code.table {
        CodeTable::Block(map) => map,
        CodeTable::Layered { .. } => {
            return Err(Error::InvalidInput(
                "diagnostics needs a block-table code; layered rewrite codes \
                 have no single codeword per block"
                    .into(),
            ))
        }
    };
    if guest_metric.len() != table.len() {
        return Err(Error::InvalidInput(format!(
            "guest metric has {} vertices but the code table has {} blocks",
            guest_metric.len(),
            table.len()
        )));
    }
    let words: Vec<&StorageString> = table.values().collect();
    let mut dilation = 1.0f64;
    let mut contraction = 1.0f64;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let Some(dg) = guest_metric.distance(i, j) else {
                continue;
            };
            let dh = host_metric.distance(words[i], words[j])?;
            dilation = dilation.max(dh as f64 / dg as f64);
            contraction = if dh == 0 {
                f64::INFINITY
            } else {
                contraction.max(dg as f64 / dh as f64)
            };
        }
    }
    let expansion = words
        .first()
        .map(|w| w.len())
        .filter(|&len| words.iter().all(|w| w.len() == len))
        .map(|len| (code.storage_v as f64).powi(len as i32) / words.len() as f64);
    Ok(EmbeddingDiagnostics {
        dilation,
        contraction,
        distortion: dilation * contraction,
        expansion,
    })
}
