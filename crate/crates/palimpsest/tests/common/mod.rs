//! Shared fixtures for the integration suites: small editing sources with
//! hand-checked structure, and deterministic random-instance generators.

#![allow(dead_code)]

use palimpsest::graph::LabeledGraph;
use palimpsest::prob::JointSource;
use palimpsest::scalar::Scalar;
use rand::Rng;

fn frac(num: i64, den: i64) -> Scalar {
    Scalar::from_ratio(num, den)
}

/// Eight equiprobable symbols on a ring: each symbol stays put with
/// probability 1/2 or drifts to one of its two ring neighbours with
/// probability 1/4 each. Stationary; the source graph is an 8-cycle.
pub fn typewriter8() -> JointSource {
    let w = 8usize;
    let mut joint = vec![vec![Scalar::zero(); w]; w];
    for x in 0..w {
        joint[x][x] = frac(1, 16);
        joint[x][(x + 1) % w] = frac(1, 32);
        joint[x][(x + w - 1) % w] = frac(1, 32);
    }
    let alphabet = (0..w).map(|i| format!("s{i}")).collect();
    JointSource::new(alphabet, joint, 2).unwrap()
}

/// Eight equiprobable symbols whose editing graph is a ring braided with
/// chords: two vertices (0 and 7) have degree four, everything else degree
/// two, and two edges carry only 1/80 of the mass. Stationary with uniform
/// marginals; symmetric joint.
pub fn mesh8() -> JointSource {
    let w = 8usize;
    // Joint masses in units of 1/160.
    let cells: [(usize, usize, i64); 18] = [
        (0, 0, 8),
        (1, 1, 12),
        (2, 2, 12),
        (3, 3, 12),
        (4, 4, 12),
        (5, 5, 12),
        (6, 6, 12),
        (7, 7, 8),
        (0, 1, 4),
        (0, 2, 1),
        (0, 3, 4),
        (0, 7, 3),
        (1, 6, 4),
        (2, 5, 7),
        (3, 4, 4),
        (4, 7, 4),
        (5, 7, 1),
        (6, 7, 4),
    ];
    let mut joint = vec![vec![Scalar::zero(); w]; w];
    for &(x, y, units) in &cells {
        joint[x][y] = frac(units, 160);
        if x != y {
            joint[y][x] = frac(units, 160);
        }
    }
    let alphabet = (0..w).map(|i| format!("s{i}")).collect();
    JointSource::new(alphabet, joint, 2).unwrap()
}

/// Four symbols with dyadic marginal (1/2, 1/4, 1/8, 1/8) and editing that
/// only drifts between numerically adjacent symbols; the source graph is
/// the path 0–1–2–3. Stationary.
pub fn skewed4() -> JointSource {
    // Joint masses in units of 1/32.
    let rows: [[i64; 4]; 4] = [[12, 4, 0, 0], [4, 3, 1, 0], [0, 1, 2, 1], [0, 0, 1, 3]];
    let joint = rows
        .iter()
        .map(|row| row.iter().map(|&u| frac(u, 32)).collect())
        .collect();
    let alphabet = (0..4).map(|i| format!("s{i}")).collect();
    JointSource::new(alphabet, joint, 2).unwrap()
}

/// Balanced binary source whose edit flips each letter with probability
/// `num/den` (exact rational).
pub fn binary_flip(num: i64, den: i64) -> JointSource {
    let stay = frac(den - num, 2 * den);
    let flip = frac(num, 2 * den);
    JointSource::new(
        vec!["0".into(), "1".into()],
        vec![vec![stay.clone(), flip.clone()], vec![flip, stay]],
        2,
    )
    .unwrap()
}

/// Random exact-rational joint law over `w` symbols: integer weights in
/// 1..=9 per cell (guaranteeing full support), normalized by their sum.
pub fn random_rational_source<R: Rng>(rng: &mut R, w: usize, v_size: usize) -> JointSource {
    let weights: Vec<Vec<i64>> =
        (0..w).map(|_| (0..w).map(|_| rng.gen_range(1..=9)).collect()).collect();
    let total: i64 = weights.iter().flatten().sum();
    let joint = weights
        .iter()
        .map(|row| row.iter().map(|&u| frac(u, total)).collect())
        .collect();
    let alphabet = (0..w).map(|i| format!("s{i}")).collect();
    JointSource::new(alphabet, joint, v_size).unwrap()
}

/// Random connected loop-free graph on `n` vertices: a random spanning
/// tree plus each remaining pair independently with probability `extra`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: f64) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for i in 0..n {
        g.add_vertex(format!("v{i}"));
    }
    for i in 1..n {
        g.add_edge(rng.gen_range(0..i), i);
    }
    for u in 0..n {
        for v in u + 1..n {
            if !g.has_edge(u, v) && rng.gen_bool(extra) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// A guest guaranteed embeddable in `host`: pick a random injection and
/// keep a random subset of the induced edges.
pub fn random_embeddable_guest<R: Rng>(
    rng: &mut R,
    host: &LabeledGraph,
    guest_n: usize,
) -> LabeledGraph {
    assert!(guest_n <= host.len());
    let mut slots: Vec<usize> = (0..host.len()).collect();
    for i in 0..guest_n {
        let j = rng.gen_range(i..slots.len());
        slots.swap(i, j);
    }
    let image = &slots[..guest_n];
    let mut g = LabeledGraph::new();
    for i in 0..guest_n {
        g.add_vertex(format!("g{i}"));
    }
    for u in 0..guest_n {
        for v in u + 1..guest_n {
            if host.has_edge(image[u], image[v]) && rng.gen_bool(0.7) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Plain cycle on `n` named vertices (no self-loops).
pub fn cycle(n: usize) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for i in 0..n {
        g.add_vertex(format!("c{i}"));
    }
    for i in 0..n {
        g.add_edge(i, (i + 1) % n);
    }
    g
}
