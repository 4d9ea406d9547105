//! Concrete rewrite-aware code constructions.
//!
//! Four families of storage codes, each trading compression against the
//! cost of updating a stored string when the source block gets edited:
//!
//! * **identity** — store the block verbatim: no compression, one edit in
//!   storage per source edit;
//! * **Huffman** — optimal compression that ignores rewriting entirely;
//! * **incremental** — a Huffman prefix for the original block plus a
//!   conditional Huffman suffix for the innovation, recycling the stored
//!   prefix verbatim;
//! * **position modulation** — weight-1 indicator strings, touching at
//!   most two storage positions per edit at exponential length;
//!
//! plus **embedding codes**, which label source blocks with host-graph
//! vertices found by the subgraph-embedding search so that likely edits
//! cross few storage edits.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::edit::{format_word, parse_word, StorageString};
use crate::embed::{tolerant_embed, EmbedOptions, EmbeddingResult};
use crate::error::{Error, Result};
use crate::graph::{adjacency_graph, LabeledGraph};
use crate::prob::{Block, Distribution, JointSource};
use crate::scalar::Scalar;
use crate::typicality::{typical_sets, TypicalityConfig};

/// Largest code domain (number of blocks with codewords) for table codes.
pub const MAX_CODE_DOMAIN: u64 = 1 << 16;
/// Largest indicator-word length for position-modulation codes (the table
/// holds that many words of that length).
pub const MAX_PPM_WIDTH: u64 = 4096;
/// Largest total innovation-table size for incremental codes.
pub const MAX_INCREMENT_ENTRIES: u64 = 2_000_000;
/// Largest source-block count for embedding codes (the search cost and the
/// pair-mass matrix both scale quadratically).
pub const MAX_EMBED_BLOCKS: usize = 512;
/// Default cap on enumerated Huffman-family members.
pub const DEFAULT_FAMILY_CAP: usize = 4096;
/// Guard on tie-resolution paths explored while enumerating a family.
const MAX_FAMILY_PATHS: u64 = 2_000_000;

// ---------------------------------------------------------------------------
// Code containers
// ---------------------------------------------------------------------------

/// Which construction produced a code (informational).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    Identity,
    Huffman,
    Incremental,
    Ppm,
    PpmTypical,
    Embedding,
}

/// Codeword storage: either one word per block, or a layered rewrite code
/// whose second word is a shared base prefix plus a per-context increment.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeTable {
    Block(BTreeMap<Block, StorageString>),
    Layered {
        /// Prefix-free code for the original block; recycled verbatim as
        /// the stored prefix after an edit.
        base: BTreeMap<Block, StorageString>,
        /// Per-original-block prefix-free codes for the edited block.
        increments: BTreeMap<Block, BTreeMap<Block, StorageString>>,
    },
}

/// A block code over a storage alphabet of `storage_v` symbols.
///
/// Serializes to a JSON codebook (blocks and codewords as digit arrays)
/// that reloads bit-for-bit: evaluation after a round trip is identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeFile", into = "CodeFile")]
pub struct PalimpsestCode {
    pub kind: CodeKind,
    pub block_n: usize,
    pub storage_v: usize,
    pub table: CodeTable,
    /// Codeword used for blocks outside the table (typical-set codes);
    /// decoding it recovers the owning block, not the encoded one.
    pub fallback: Option<StorageString>,
}

impl PalimpsestCode {
    /// The codeword storing block `x` (fallback when x has no entry).
    pub fn encode(&self, x: &[u16]) -> Result<&StorageString> {
        let map = match &self.table {
            CodeTable::Block(map) => map,
            CodeTable::Layered { base, .. } => base,
        };
        map.get(x).or(self.fallback.as_ref()).ok_or_else(|| {
            Error::InvalidInput(format!("block {x:?} has no codeword and no fallback"))
        })
    }

    /// The word stored after block `x` was edited into block `y`. Block
    /// tables store y's own codeword; layered tables recycle x's base
    /// prefix and append the innovation word for y in x's context.
    pub fn encode_pair(&self, x: &[u16], y: &[u16]) -> Result<StorageString> {
        match &self.table {
            CodeTable::Block(_) => self.encode(y).cloned(),
            CodeTable::Layered { base, increments } => {
                let prefix = base
                    .get(x)
                    .ok_or_else(|| Error::InvalidInput(format!("block {x:?} has no base word")))?;
                let inc = increments.get(x).and_then(|m| m.get(y)).ok_or_else(|| {
                    Error::InvalidInput(format!("no increment for edit {x:?} -> {y:?}"))
                })?;
                let mut word = prefix.clone();
                word.extend_from_slice(inc);
                Ok(word)
            }
        }
    }

    /// Inverts a stored word: the block it represents, or `None` when no
    /// block encodes to it. Layered words decode by peeling the unique
    /// prefix-free base prefix, then matching the increment; the decoded
    /// block is the post-edit one.
    pub fn decode(&self, word: &[u8]) -> Option<Block> {
        match &self.table {
            CodeTable::Block(map) => map
                .iter()
                .find(|(_, w)| w.as_slice() == word)
                .map(|(b, _)| b.clone()),
            CodeTable::Layered { base, increments } => {
                let (x, prefix) = base.iter().find(|(_, w)| word.starts_with(w))?;
                let rest = &word[prefix.len()..];
                increments
                    .get(x)?
                    .iter()
                    .find(|(_, inc)| inc.as_slice() == rest)
                    .map(|(y, _)| y.clone())
            }
        }
    }

    /// Whether every decodable stream cut is unambiguous: no codeword is a
    /// prefix of another (each layered context checked separately).
    pub fn is_prefix_free(&self) -> bool {
        match &self.table {
            CodeTable::Block(map) => words_prefix_free(map.values()),
            CodeTable::Layered { base, increments } => {
                words_prefix_free(base.values())
                    && increments.values().all(|m| words_prefix_free(m.values()))
            }
        }
    }

    /// Blocks with their own codeword (excluding fallback coverage), in
    /// lexicographic order.
    pub fn domain(&self) -> Vec<&Block> {
        match &self.table {
            CodeTable::Block(map) => map.keys().collect(),
            CodeTable::Layered { base, .. } => base.keys().collect(),
        }
    }
}

fn words_prefix_free<'a>(words: impl Iterator<Item = &'a StorageString>) -> bool {
    let words: Vec<&StorageString> = words.collect();
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if a.starts_with(b) || b.starts_with(a) {
                return false;
            }
        }
    }
    true
}

/// The two encoders of one scheme: `code_x` stores the original block,
/// `code_y` rewrites the stored word after an edit (given both blocks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodePair {
    pub code_x: PalimpsestCode,
    pub code_y: PalimpsestCode,
}

impl CodePair {
    /// Scheme that rewrites by re-encoding with the same block table.
    fn shared(code: PalimpsestCode) -> Self {
        CodePair { code_y: code.clone(), code_x: code }
    }
}

// -- JSON mirror (BTreeMap keys are blocks, not strings, so the maps
//    flatten to entry lists on disk) --------------------------------------

#[derive(Serialize, Deserialize)]
struct CodeFile {
    kind: CodeKind,
    block_n: usize,
    storage_v: usize,
    table: TableFile,
    fallback: Option<StorageString>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case")]
enum TableFile {
    Block {
        entries: Vec<(Block, StorageString)>,
    },
    Layered {
        base: Vec<(Block, StorageString)>,
        increments: Vec<(Block, Vec<(Block, StorageString)>)>,
    },
}

impl From<PalimpsestCode> for CodeFile {
    fn from(code: PalimpsestCode) -> Self {
        let table = match code.table {
            CodeTable::Block(map) => TableFile::Block { entries: map.into_iter().collect() },
            CodeTable::Layered { base, increments } => TableFile::Layered {
                base: base.into_iter().collect(),
                increments: increments
                    .into_iter()
                    .map(|(x, m)| (x, m.into_iter().collect()))
                    .collect(),
            },
        };
        CodeFile {
            kind: code.kind,
            block_n: code.block_n,
            storage_v: code.storage_v,
            table,
            fallback: code.fallback,
        }
    }
}

impl TryFrom<CodeFile> for PalimpsestCode {
    type Error = Error;

    fn try_from(file: CodeFile) -> Result<Self> {
        if file.storage_v < 2 {
            return Err(Error::InvalidInput(
                "storage alphabet needs at least two symbols".into(),
            ));
        }
        let digits_ok = |w: &StorageString| w.iter().all(|&d| (d as usize) < file.storage_v);
        let load = |entries: Vec<(Block, StorageString)>| -> Result<BTreeMap<Block, StorageString>> {
            let mut map = BTreeMap::new();
            for (b, w) in entries {
                if b.len() != file.block_n {
                    return Err(Error::InvalidInput(format!(
                        "block {b:?} does not have the declared length {}",
                        file.block_n
                    )));
                }
                if !digits_ok(&w) {
                    return Err(Error::InvalidInput(format!(
                        "codeword {w:?} uses digits outside the storage alphabet"
                    )));
                }
                if map.insert(b, w).is_some() {
                    return Err(Error::InvalidInput("duplicate block in codebook".into()));
                }
            }
            Ok(map)
        };
        let table = match file.table {
            TableFile::Block { entries } => CodeTable::Block(load(entries)?),
            TableFile::Layered { base, increments } => CodeTable::Layered {
                base: load(base)?,
                increments: increments
                    .into_iter()
                    .map(|(x, m)| Ok((x, load(m)?)))
                    .collect::<Result<_>>()?,
            },
        };
        if let Some(w) = &file.fallback {
            if !digits_ok(w) {
                return Err(Error::InvalidInput(
                    "fallback codeword uses digits outside the storage alphabet".into(),
                ));
            }
        }
        Ok(PalimpsestCode {
            kind: file.kind,
            block_n: file.block_n,
            storage_v: file.storage_v,
            table,
            fallback: file.fallback,
        })
    }
}

// ---------------------------------------------------------------------------
// Huffman construction
// ---------------------------------------------------------------------------

enum HuffTree {
    Leaf(usize),
    Internal(Vec<HuffNode>),
}

struct HuffNode {
    weight: Scalar,
    /// Smallest leaf index below this node: the deterministic tie-break.
    min_idx: usize,
    tree: HuffTree,
}

fn node_key_less(a: &HuffNode, b: &HuffNode) -> bool {
    match a.weight.partial_cmp(&b.weight) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Greater) => false,
        _ => a.min_idx < b.min_idx,
    }
}

/// Canonical minimum-redundancy codewords for nonnegative weights, by the
/// two-queue method: leaves sorted by (weight, index), merged nodes in a
/// FIFO, ties resolved toward the smallest participating leaf index.
/// Weights need not be normalized. A single symbol gets the empty word.
fn huffman_words(weights: &[Scalar], arity: usize) -> Result<Vec<StorageString>> {
    if !(2..=256).contains(&arity) {
        return Err(Error::InvalidInput(format!(
            "code arity must be between 2 and 256, got {arity}"
        )));
    }
    if weights.is_empty() {
        return Err(Error::InvalidInput("cannot build a code for zero symbols".into()));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(Error::InvalidDistribution("negative codeword weight".into()));
    }
    let real = weights.len();
    if real == 1 {
        return Ok(vec![StorageString::new()]);
    }
    // Pad with zero-weight dummies until full arity-way merges close the
    // tree exactly: (leaves − 1) divisible by (arity − 1).
    let mut leaves = real;
    while (leaves - 1) % (arity - 1) != 0 {
        leaves += 1;
    }
    let mut sorted: Vec<HuffNode> = (0..leaves)
        .map(|i| HuffNode {
            weight: if i < real { weights[i].clone() } else { Scalar::zero() },
            min_idx: i,
            tree: HuffTree::Leaf(i),
        })
        .collect();
    sorted.sort_by(|a, b| {
        a.weight
            .partial_cmp(&b.weight)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.min_idx.cmp(&b.min_idx))
    });
    let mut queue_leaves: VecDeque<HuffNode> = sorted.into();
    let mut queue_merged: VecDeque<HuffNode> = VecDeque::new();
    let pop_min = |ql: &mut VecDeque<HuffNode>, qm: &mut VecDeque<HuffNode>| match (
        ql.front(),
        qm.front(),
    ) {
        (Some(a), Some(b)) => {
            if node_key_less(a, b) {
                ql.pop_front().unwrap()
            } else {
                qm.pop_front().unwrap()
            }
        }
        (Some(_), None) => ql.pop_front().unwrap(),
        (None, _) => qm.pop_front().unwrap(),
    };
    while queue_leaves.len() + queue_merged.len() > 1 {
        let children: Vec<HuffNode> = (0..arity)
            .map(|_| pop_min(&mut queue_leaves, &mut queue_merged))
            .collect();
        let weight = children
            .iter()
            .fold(Scalar::zero(), |acc, c| &acc + &c.weight);
        let min_idx = children.iter().map(|c| c.min_idx).min().unwrap();
        queue_merged.push_back(HuffNode {
            weight,
            min_idx,
            tree: HuffTree::Internal(children),
        });
    }
    let root = pop_min(&mut queue_leaves, &mut queue_merged);
    let mut words = vec![StorageString::new(); real];
    let mut stack = vec![(root, StorageString::new())];
    while let Some((node, word)) = stack.pop() {
        match node.tree {
            HuffTree::Leaf(sym) => {
                if sym < real {
                    words[sym] = word;
                }
            }
            HuffTree::Internal(children) => {
                for (digit, child) in children.into_iter().enumerate() {
                    let mut w = word.clone();
                    w.push(digit as u8);
                    stack.push((child, w));
                }
            }
        }
    }
    Ok(words)
}

/// Optimal prefix code for one distribution over single letters.
pub fn huffman(dist: &Distribution, arity: usize) -> Result<PalimpsestCode> {
    let weights: Vec<Scalar> = dist.iter().cloned().collect();
    let words = huffman_words(&weights, arity)?;
    let table = words
        .into_iter()
        .enumerate()
        .map(|(i, w)| (vec![i as u16], w))
        .collect();
    Ok(PalimpsestCode {
        kind: CodeKind::Huffman,
        block_n: 1,
        storage_v: arity,
        table: CodeTable::Block(table),
        fallback: None,
    })
}

/// All optimal prefix codes for one distribution: every resolution of
/// merge ties crossed with every child-order relabeling, deduplicated and
/// sorted; `truncated` marks an enumeration stopped at `cap` members.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanFamily {
    /// Each member maps symbol index to its codeword.
    pub codes: Vec<Vec<StorageString>>,
    pub truncated: bool,
}

struct FamilyNode {
    weight: Scalar,
    /// (symbol, codeword-so-far); digits get prepended on each merge.
    words: Vec<(usize, StorageString)>,
}

struct FamilySearch {
    arity: usize,
    real: usize,
    cap: usize,
    paths: u64,
    truncated: bool,
    out: BTreeSet<Vec<StorageString>>,
}

impl FamilySearch {
    /// Returns true when enumeration should stop (cap or path guard).
    fn explore(&mut self, nodes: Vec<FamilyNode>) -> bool {
        self.paths += 1;
        if self.paths > MAX_FAMILY_PATHS {
            self.truncated = true;
            return true;
        }
        if nodes.len() == 1 {
            let mut book = vec![StorageString::new(); self.real];
            for (sym, word) in &nodes[0].words {
                if *sym < self.real {
                    book[*sym] = word.clone();
                }
            }
            if !self.out.contains(&book) {
                if self.out.len() >= self.cap {
                    self.truncated = true;
                    return true;
                }
                self.out.insert(book);
            }
            return false;
        }
        // The merge must consume a multiset of r minimal weights: nodes
        // strictly below the r-th weight are mandatory, the remainder is
        // any choice among nodes tied at that weight.
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| {
            nodes[a]
                .weight
                .partial_cmp(&nodes[b].weight)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let threshold = &nodes[order[self.arity - 1]].weight;
        let mandatory: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| nodes[i].weight < *threshold)
            .collect();
        let tied: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| nodes[i].weight == *threshold)
            .collect();
        let need = self.arity - mandatory.len();
        for extra in tied.iter().copied().combinations(need) {
            let chosen: Vec<usize> = mandatory.iter().copied().chain(extra).collect();
            // Every assignment of child digits to the chosen nodes is a
            // distinct labeling of the code tree.
            for perm in chosen.iter().copied().permutations(chosen.len()) {
                let mut merged = FamilyNode { weight: Scalar::zero(), words: Vec::new() };
                for (digit, &idx) in perm.iter().enumerate() {
                    merged.weight = &merged.weight + &nodes[idx].weight;
                    for (sym, word) in &nodes[idx].words {
                        let mut w = StorageString::with_capacity(word.len() + 1);
                        w.push(digit as u8);
                        w.extend_from_slice(word);
                        merged.words.push((*sym, w));
                    }
                }
                let rest: Vec<FamilyNode> = nodes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !chosen.contains(i))
                    .map(|(_, n)| FamilyNode { weight: n.weight.clone(), words: n.words.clone() })
                    .chain(std::iter::once(merged))
                    .collect();
                if self.explore(rest) {
                    return true;
                }
            }
        }
        false
    }
}

/// Enumerates the family of optimal prefix codes for `dist` (see
/// [`HuffmanFamily`]). Members come out sorted, so "first member" is a
/// deterministic tie-break for downstream searches.
pub fn huffman_family(dist: &Distribution, arity: usize, cap: usize) -> Result<HuffmanFamily> {
    if cap == 0 {
        return Err(Error::InvalidInput("family cap must be at least 1".into()));
    }
    if !(2..=256).contains(&arity) {
        return Err(Error::InvalidInput(format!(
            "code arity must be between 2 and 256, got {arity}"
        )));
    }
    let real = dist.len();
    if real == 1 {
        return Ok(HuffmanFamily { codes: vec![vec![StorageString::new()]], truncated: false });
    }
    let mut leaves = real;
    while (leaves - 1) % (arity - 1) != 0 {
        leaves += 1;
    }
    let nodes: Vec<FamilyNode> = (0..leaves)
        .map(|i| FamilyNode {
            weight: if i < real { dist.get(i).clone() } else { Scalar::zero() },
            words: vec![(i, StorageString::new())],
        })
        .collect();
    let mut search = FamilySearch {
        arity,
        real,
        cap,
        paths: 0,
        truncated: false,
        out: BTreeSet::new(),
    };
    search.explore(nodes);
    Ok(HuffmanFamily {
        codes: search.out.into_iter().collect(),
        truncated: search.truncated,
    })
}

// ---------------------------------------------------------------------------
// Scheme constructors
// ---------------------------------------------------------------------------

fn checked_block_count(src: &JointSource, block_n: usize, cap: u64) -> Result<u64> {
    match src.block_count(block_n) {
        Some(count) if count <= cap => Ok(count),
        _ => Err(Error::EnumerationCap(format!(
            "{}^{block_n} blocks exceed the code-domain cap of {cap}",
            src.w_size()
        ))),
    }
}

/// Verbatim storage: each source letter is its own storage symbol, so a
/// block is stored as itself. Requires the storage alphabet to coincide
/// with the source alphabet.
pub fn identity_code(src: &JointSource) -> Result<CodePair> {
    let w = src.w_size();
    if w != src.v_size() {
        return Err(Error::UnsupportedScheme(format!(
            "identity storage needs |W| = |V|, got {w} source symbols over {} storage symbols",
            src.v_size()
        )));
    }
    let table: BTreeMap<Block, StorageString> =
        (0..w).map(|i| (vec![i as u16], vec![i as u8])).collect();
    Ok(CodePair::shared(PalimpsestCode {
        kind: CodeKind::Identity,
        block_n: 1,
        storage_v: w,
        table: CodeTable::Block(table),
        fallback: None,
    }))
}

/// Compression-only scheme: one Huffman code for the pre-edit block law,
/// reused unchanged to rewrite the post-edit block.
pub fn huffman_scheme(src: &JointSource, block_n: usize) -> Result<CodePair> {
    checked_block_count(src, block_n, MAX_CODE_DOMAIN)?;
    let blocks: Vec<Block> = src.blocks(block_n).collect();
    let weights: Vec<Scalar> = blocks.iter().map(|b| src.block_mass_x(b)).collect();
    let words = huffman_words(&weights, src.v_size())?;
    let table: BTreeMap<Block, StorageString> = blocks.into_iter().zip(words).collect();
    Ok(CodePair::shared(PalimpsestCode {
        kind: CodeKind::Huffman,
        block_n,
        storage_v: src.v_size(),
        table: CodeTable::Block(table),
        fallback: None,
    }))
}

/// Incremental rewriting: the original block is stored as its Huffman
/// codeword; an edit keeps that prefix verbatim and appends a conditional
/// Huffman codeword for the edited block, built per original-block context
/// over the edits that context can actually produce. When a context has a
/// single possible outcome the increment is empty.
pub fn incremental_code(src: &JointSource, block_n: usize) -> Result<CodePair> {
    checked_block_count(src, block_n, MAX_CODE_DOMAIN)?;
    let v = src.v_size();
    let blocks: Vec<Block> = src.blocks(block_n).collect();
    let weights: Vec<Scalar> = blocks.iter().map(|b| src.block_mass_x(b)).collect();
    let base_words = huffman_words(&weights, v)?;
    let base: BTreeMap<Block, StorageString> =
        blocks.iter().cloned().zip(base_words).collect();

    let mut increments: BTreeMap<Block, BTreeMap<Block, StorageString>> = BTreeMap::new();
    let mut total_entries = 0u64;
    for x in &blocks {
        let support = src.block_successors(x);
        if support.is_empty() {
            // A block that never occurs needs no innovation table.
            continue;
        }
        total_entries += support.len() as u64;
        if total_entries > MAX_INCREMENT_ENTRIES {
            return Err(Error::EnumerationCap(format!(
                "innovation tables exceed {MAX_INCREMENT_ENTRIES} entries"
            )));
        }
        let cond_weights: Vec<Scalar> =
            support.iter().map(|y| src.block_pair_mass(x, y)).collect();
        let words = huffman_words(&cond_weights, v)?;
        increments.insert(x.clone(), support.into_iter().zip(words).collect());
    }

    let code_x = PalimpsestCode {
        kind: CodeKind::Incremental,
        block_n,
        storage_v: v,
        table: CodeTable::Block(base.clone()),
        fallback: None,
    };
    let code_y = PalimpsestCode {
        kind: CodeKind::Incremental,
        block_n,
        storage_v: v,
        table: CodeTable::Layered { base, increments },
        fallback: None,
    };
    Ok(CodePair { code_x, code_y })
}

fn indicator(position: usize, width: usize) -> StorageString {
    let mut w = vec![0u8; width];
    w[position] = 1;
    w
}

/// Position modulation: block i is stored as the binary indicator string
/// with a single 1 in position i. Any edit rewrites at most two storage
/// positions, at the price of codewords as long as the whole block space.
/// With a typicality configuration the codebook covers only the connected
/// typical blocks (either direction), and everything else encodes to the
/// first codeword — decodable misses are the atypicality mass.
pub fn ppm_code(
    src: &JointSource,
    block_n: usize,
    typical: Option<&TypicalityConfig>,
) -> Result<CodePair> {
    let (domain, kind) = match typical {
        None => {
            checked_block_count(src, block_n, MAX_PPM_WIDTH)?;
            (src.blocks(block_n).collect::<Vec<Block>>(), CodeKind::Ppm)
        }
        Some(cfg) => {
            if cfg.block_n != block_n {
                return Err(Error::InvalidInput(format!(
                    "typicality configuration is for block length {} but the code wants {}",
                    cfg.block_n, block_n
                )));
            }
            let sets = typical_sets(src, cfg)?;
            let union: BTreeSet<Block> =
                sets.source_x.into_iter().chain(sets.source_y).collect();
            if union.is_empty() {
                return Err(Error::Infeasible(
                    "no block is jointly typical at this tolerance; nothing to encode".into(),
                ));
            }
            if union.len() as u64 > MAX_PPM_WIDTH {
                return Err(Error::EnumerationCap(format!(
                    "{} typical blocks exceed the indicator-width cap of {MAX_PPM_WIDTH}",
                    union.len()
                )));
            }
            (union.into_iter().collect(), CodeKind::PpmTypical)
        }
    };
    let width = domain.len();
    let table: BTreeMap<Block, StorageString> = domain
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, indicator(i, width)))
        .collect();
    let fallback = match kind {
        CodeKind::PpmTypical => Some(indicator(0, width)),
        _ => None,
    };
    Ok(CodePair::shared(PalimpsestCode {
        kind,
        block_n,
        storage_v: 2,
        table: CodeTable::Block(table),
        fallback,
    }))
}

/// The reflected binary Gray sequence: 2^m distinct m-bit words with
/// successive entries at Hamming distance 1 (a Hamiltonian path of the
/// m-cube).
pub fn gray_code(m: u32) -> Result<Vec<StorageString>> {
    if m == 0 || m > 24 {
        return Err(Error::InvalidInput(format!(
            "Gray code width must be between 1 and 24, got {m}"
        )));
    }
    Ok((0u32..1 << m)
        .map(|i| {
            let g = i ^ (i >> 1);
            (0..m).rev().map(|bit| ((g >> bit) & 1) as u8).collect()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Embedding codes
// ---------------------------------------------------------------------------

/// How an embedding code chooses codewords.
#[derive(Debug, Clone)]
pub enum Labeling {
    /// Codewords are the host vertices' own labels; the embedding search
    /// freely chooses which host vertex stores each block.
    FixedHostLabels,
    /// Candidate prefix codebooks; each member pins every block to the
    /// host vertex carrying its codeword, and the cheapest member wins.
    Family(HuffmanFamily),
}

/// The storage alphabet a host graph's vertex labels are written in.
fn host_alphabet(host: &LabeledGraph) -> usize {
    let mut v = 2usize;
    for i in 0..host.len() {
        if let Ok(word) = parse_word(host.name(i), 36) {
            for d in word {
                v = v.max(d as usize + 1);
            }
        }
    }
    v
}

/// Builds a code by embedding the source adjacency graph at `block_n`
/// into `host`: blocks land on host vertices, and the stored word for a
/// block is its vertex label. The embedding minimizes the mass-weighted
/// extra edit distance (the returned result's `cost`); with a codebook
/// family, each member is tried with its labels pinned and the member of
/// minimum cost wins (ties to the first member, skipping members whose
/// words do not all appear as host labels).
pub fn embedding_code(
    src: &JointSource,
    block_n: usize,
    host: &LabeledGraph,
    labeling: &Labeling,
) -> Result<(CodePair, EmbeddingResult)> {
    let guest = adjacency_graph(src, block_n)?;
    let blocks: Vec<Block> = src.blocks(block_n).collect();
    if blocks.len() > MAX_EMBED_BLOCKS {
        return Err(Error::EnumerationCap(format!(
            "{} blocks exceed the embedding-code cap of {MAX_EMBED_BLOCKS}",
            blocks.len()
        )));
    }
    let mass: Vec<Vec<Scalar>> = blocks
        .iter()
        .map(|x| blocks.iter().map(|y| src.block_pair_mass(x, y)).collect())
        .collect();
    let storage_v = host_alphabet(host);

    let (words, result) = match labeling {
        Labeling::FixedHostLabels => {
            let res = tolerant_embed(&guest, host, &mass, &EmbedOptions::default())?;
            let map = res.vertex_map.as_ref().expect("feasible embedding has a map");
            let words: Vec<StorageString> = map
                .iter()
                .map(|&c| parse_word(host.name(c), storage_v))
                .collect::<Result<_>>()?;
            (words, res)
        }
        Labeling::Family(family) => {
            let mut best: Option<(Vec<StorageString>, EmbeddingResult)> = None;
            for member in &family.codes {
                if member.len() != src.w_size() {
                    return Err(Error::InvalidInput(format!(
                        "family member has {} codewords but the source has {} symbols",
                        member.len(),
                        src.w_size()
                    )));
                }
                // Block word = concatenation of per-letter words; skip the
                // member unless every block word is a host label.
                let words: Vec<StorageString> = blocks
                    .iter()
                    .map(|b| {
                        b.iter()
                            .flat_map(|&s| member[s as usize].iter().copied())
                            .collect()
                    })
                    .collect();
                let names: Result<Vec<String>> =
                    words.iter().map(|w| format_word(w, storage_v)).collect();
                let Ok(names) = names else { continue };
                if names.iter().any(|n| host.index_of(n).is_none()) {
                    continue;
                }
                let mut pinned = guest.clone();
                for (i, name) in names.into_iter().enumerate() {
                    pinned.set_attr(i, Some(name));
                }
                let opts = EmbedOptions { respect_attributes: true, node_budget: None };
                let res = match tolerant_embed(&pinned, host, &mass, &opts) {
                    Ok(res) => res,
                    Err(Error::Infeasible(_)) => continue,
                    Err(e) => return Err(e),
                };
                if best.as_ref().map_or(true, |(_, b)| res.cost < b.cost) {
                    best = Some((words, res));
                }
            }
            best.ok_or_else(|| {
                Error::Infeasible(
                    "no family member's codewords all appear as host vertex labels".into(),
                )
            })?
        }
    };

    let table: BTreeMap<Block, StorageString> = blocks.into_iter().zip(words).collect();
    let code = PalimpsestCode {
        kind: CodeKind::Embedding,
        block_n,
        storage_v,
        table: CodeTable::Block(table),
        fallback: None,
    };
    Ok((CodePair::shared(code), result))
}
