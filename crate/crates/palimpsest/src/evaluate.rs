//! Rate–malleability evaluation: (K, L, M, Δ) for a code pair.
//!
//! K and L are the expected stored-word lengths per source letter before
//! and after one edit; M is the expected edit distance per source letter
//! between the two stored words; Δ is the worse of the two decoding error
//! rates. Expectations run over the memoryless block extension of the
//! joint source — exactly (rational end-to-end when the source is
//! rational) by enumerating positive-probability block pairs, or by seeded
//! Monte Carlo when enumeration is out of reach.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codes::{CodeTable, PalimpsestCode};
use crate::edit::EditMetric;
use crate::error::{Error, Result};
use crate::prob::JointSource;
use crate::scalar::{pairwise_sum, Scalar};

/// Largest |W|^(2n) admitted for exact pair enumeration.
pub const MAX_EXACT_PAIRS: u128 = 100_000_000;

/// One evaluated operating point. `exact` is true when every figure is an
/// end-to-end rational; Monte Carlo runs clear it and attach the sampling
/// metadata (algorithm, seed, sample count, 95% half-widths).
#[derive(Debug, Clone, Serialize)]
pub struct RateMalleabilityTriple {
    /// Expected stored-word length per source letter, original block.
    #[serde(rename = "K")]
    pub k: Scalar,
    /// Expected stored-word length per source letter, edited block.
    #[serde(rename = "L")]
    pub l: Scalar,
    /// Expected edit distance per source letter between the two words.
    #[serde(rename = "M")]
    pub m: Scalar,
    /// max of the two decoder round-trip failure probabilities.
    pub delta: Scalar,
    pub exact: bool,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// 95% half-width of M (Monte Carlo only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_halfwidth: Option<f64>,
}

/// Deterministic accumulator: exact terms add associatively; approximate
/// terms are pairwise-summed in fixed-size chunks so results never depend
/// on evaluation order or chunk scheduling.
struct Accumulator {
    buffer: Vec<Scalar>,
    totals: Vec<Scalar>,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator { buffer: Vec::with_capacity(1024), totals: Vec::new() }
    }

    fn push(&mut self, term: Scalar) {
        self.buffer.push(term);
        if self.buffer.len() == 1024 {
            self.totals.push(pairwise_sum(&self.buffer));
            self.buffer.clear();
        }
    }

    fn finish(mut self) -> Scalar {
        if !self.buffer.is_empty() {
            self.totals.push(pairwise_sum(&self.buffer));
        }
        pairwise_sum(&self.totals)
    }
}

fn block_n_of(code_x: &PalimpsestCode, code_y: &PalimpsestCode) -> Result<usize> {
    if code_x.block_n != code_y.block_n {
        return Err(Error::InvalidInput(format!(
            "store and rewrite codes disagree on block length ({} vs {})",
            code_x.block_n, code_y.block_n
        )));
    }
    Ok(code_x.block_n)
}

/// The store code must map blocks directly to words; layered tables only
/// make sense on the rewrite side.
fn require_block_table(code_x: &PalimpsestCode) -> Result<()> {
    match code_x.table {
        CodeTable::Block(_) => Ok(()),
        CodeTable::Layered { .. } => Err(Error::InvalidInput(
            "the store code must be a block table; layered codes are rewrite-only".into(),
        )),
    }
}

/// Whether storing `x` and then decoding recovers `x`: false exactly when
/// x falls back to a shared codeword (typical-set codes outside the
/// covered set). Codes are validated injective, so in-table blocks always
/// round-trip.
fn store_round_trip_fails(code: &PalimpsestCode, x: &[u16]) -> bool {
    match &code.table {
        CodeTable::Block(map) => !map.contains_key(x),
        CodeTable::Layered { .. } => unreachable!("store code is validated as a block table"),
    }
}

/// Whether rewriting x→y and decoding fails to recover y. For block
/// tables this is a fallback hit, as above. Prefix-free layered tables
/// always recover y (the base prefix is peeled uniquely, then the
/// increment matches exactly); non-prefix-free ones are rejected upstream.
fn rewrite_round_trip_fails(code: &PalimpsestCode, y: &[u16]) -> bool {
    match &code.table {
        CodeTable::Block(map) => !map.contains_key(y),
        CodeTable::Layered { .. } => false,
    }
}

fn validate_codes(code_x: &PalimpsestCode, code_y: &PalimpsestCode) -> Result<()> {
    require_block_table(code_x)?;
    for (code, side) in [(code_x, "store"), (code_y, "rewrite")] {
        let injective = match &code.table {
            CodeTable::Block(map) => {
                let words: std::collections::BTreeSet<&[u8]> =
                    map.values().map(|w| w.as_slice()).collect();
                words.len() == map.len()
            }
            CodeTable::Layered { .. } => code.is_prefix_free(),
        };
        if !injective {
            return Err(Error::InvalidInput(format!(
                "{side} code is not uniquely decodable (duplicate or nested codewords)"
            )));
        }
    }
    Ok(())
}

/// Exact (K, L, M, Δ) by enumerating every positive-probability block
/// pair of the memoryless extension. Errors past the pair cap, directing
/// the caller to [`evaluate_mc`].
pub fn evaluate_exact(
    src: &JointSource,
    code_x: &PalimpsestCode,
    code_y: &PalimpsestCode,
    metric: EditMetric,
) -> Result<RateMalleabilityTriple> {
    let n = block_n_of(code_x, code_y)?;
    validate_codes(code_x, code_y)?;
    match src.block_count(n) {
        Some(count) if (count as u128).pow(2) <= MAX_EXACT_PAIRS => {}
        _ => {
            return Err(Error::EnumerationCap(format!(
                "block pair space exceeds {MAX_EXACT_PAIRS}; use Monte Carlo evaluation"
            )))
        }
    }

    let mut k_sum = Accumulator::new();
    let mut l_sum = Accumulator::new();
    let mut m_sum = Accumulator::new();
    let mut dx_sum = Accumulator::new();
    let mut dy_sum = Accumulator::new();
    for x in src.blocks(n) {
        let px = src.block_mass_x(&x);
        if px.is_zero() {
            continue;
        }
        let a = code_x.encode(&x)?;
        k_sum.push(&px * &Scalar::from_int(a.len() as i64));
        if store_round_trip_fails(code_x, &x) {
            dx_sum.push(px);
        }
        for y in src.block_successors(&x) {
            let pxy = src.block_pair_mass(&x, &y);
            if pxy.is_zero() {
                continue;
            }
            let b = code_y.encode_pair(&x, &y)?;
            let d = metric.distance(a, &b)?;
            l_sum.push(&pxy * &Scalar::from_int(b.len() as i64));
            if d > 0 {
                m_sum.push(&pxy * &Scalar::from_int(d as i64));
            }
            if rewrite_round_trip_fails(code_y, &y) {
                dy_sum.push(pxy);
            }
        }
    }
    let per_letter = Scalar::from_int(n as i64);
    let k = &k_sum.finish() / &per_letter;
    let l = &l_sum.finish() / &per_letter;
    let m = &m_sum.finish() / &per_letter;
    let dx = dx_sum.finish();
    let dy = dy_sum.finish();
    let delta = if dy > dx { dy } else { dx };
    let exact = k.is_exact() && l.is_exact() && m.is_exact() && delta.is_exact();
    Ok(RateMalleabilityTriple {
        k,
        l,
        m,
        delta,
        exact,
        algorithm: "exact".into(),
        seed: None,
        samples: None,
        halfwidth: None,
        k_halfwidth: None,
        l_halfwidth: None,
    })
}

/// Running mean and 95% normal-approximation half-width.
struct MeanStat {
    sum: f64,
    sum_sq: f64,
}

impl MeanStat {
    fn new() -> Self {
        MeanStat { sum: 0.0, sum_sq: 0.0 }
    }

    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean(&self, count: u64) -> f64 {
        self.sum / count as f64
    }

    fn halfwidth(&self, count: u64) -> f64 {
        if count < 2 {
            return f64::INFINITY;
        }
        let n = count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        1.96 * (var / n).sqrt()
    }
}

/// Monte Carlo (K, L, M, Δ): `samples` i.i.d. block pairs drawn from the
/// memoryless extension with a ChaCha8 stream seeded by `seed`. The same
/// inputs and seed always reproduce the same output; seed, algorithm, and
/// half-widths ride along in the result.
pub fn evaluate_mc(
    src: &JointSource,
    code_x: &PalimpsestCode,
    code_y: &PalimpsestCode,
    metric: EditMetric,
    samples: u64,
    seed: u64,
) -> Result<RateMalleabilityTriple> {
    let n = block_n_of(code_x, code_y)?;
    validate_codes(code_x, code_y)?;
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let w = src.w_size();
    // Cumulative letter-pair law for inverse-transform sampling.
    let mut cells: Vec<(u16, u16)> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    for a in 0..w {
        for b in 0..w {
            let p = src.mass(a, b).to_f64();
            if p > 0.0 {
                acc += p;
                cells.push((a as u16, b as u16));
                cum.push(acc);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k_stat = MeanStat::new();
    let mut l_stat = MeanStat::new();
    let mut m_stat = MeanStat::new();
    let mut dx_fail = 0u64;
    let mut dy_fail = 0u64;
    let mut x = vec![0u16; n];
    let mut y = vec![0u16; n];
    for _ in 0..samples {
        for i in 0..n {
            let u: f64 = rng.gen::<f64>() * acc;
            let idx = cum.partition_point(|&c| c < u).min(cells.len() - 1);
            x[i] = cells[idx].0;
            y[i] = cells[idx].1;
        }
        let a = code_x.encode(&x)?;
        let b = code_y.encode_pair(&x, &y)?;
        k_stat.push(a.len() as f64);
        l_stat.push(b.len() as f64);
        m_stat.push(metric.distance(a, &b)? as f64);
        if store_round_trip_fails(code_x, &x) {
            dx_fail += 1;
        }
        if rewrite_round_trip_fails(code_y, &y) {
            dy_fail += 1;
        }
    }
    let per_letter = n as f64;
    let delta = dx_fail.max(dy_fail) as f64 / samples as f64;
    Ok(RateMalleabilityTriple {
        k: Scalar::from_f64(k_stat.mean(samples) / per_letter),
        l: Scalar::from_f64(l_stat.mean(samples) / per_letter),
        m: Scalar::from_f64(m_stat.mean(samples) / per_letter),
        delta: Scalar::from_f64(delta),
        exact: false,
        algorithm: "chacha8".into(),
        seed: Some(seed),
        samples: Some(samples),
        halfwidth: Some(m_stat.halfwidth(samples) / per_letter),
        k_halfwidth: Some(k_stat.halfwidth(samples) / per_letter),
        l_halfwidth: Some(l_stat.halfwidth(samples) / per_letter),
    })
}

/// The floor under M for any code at block length n: editing must move
/// the stored word whenever the block changed, so
/// M ≥ (1/n)·Pr[X₁ⁿ ≠ Y₁ⁿ] = (1/n)·(1 − Pr[X=Y]ⁿ), computed in closed
/// form from the diagonal mass of the letter law.
pub fn malleability_lower_bound(src: &JointSource, block_n: usize) -> Result<Scalar> {
    if block_n == 0 {
        return Err(Error::InvalidInput("block length must be at least 1".into()));
    }
    Ok(&src.block_change_probability(block_n as u32) / &Scalar::from_int(block_n as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{huffman_scheme, identity_code, incremental_code, ppm_code};

    fn diagonal_source() -> JointSource {
        JointSource::new(
            vec!["a".into(), "b".into()],
            vec![
                vec![Scalar::from_ratio(2, 3), Scalar::zero()],
                vec![Scalar::zero(), Scalar::from_ratio(1, 3)],
            ],
            2,
        )
        .unwrap()
    }

    fn noisy_source() -> JointSource {
        JointSource::new(
            vec!["a".into(), "b".into()],
            vec![
                vec![Scalar::from_ratio(3, 8), Scalar::from_ratio(1, 8)],
                vec![Scalar::from_ratio(1, 8), Scalar::from_ratio(3, 8)],
            ],
            2,
        )
        .unwrap()
    }

    #[test]
    fn identity_on_unedited_source_is_free() {
        let src = diagonal_source();
        let pair = identity_code(&src).unwrap();
        let t = evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming).unwrap();
        assert_eq!(t.k, Scalar::one());
        assert_eq!(t.l, Scalar::one());
        assert!(t.m.is_zero());
        assert!(t.delta.is_zero());
        assert!(t.exact);
    }

    #[test]
    fn identity_malleability_is_the_off_diagonal_mass() {
        let src = noisy_source();
        let pair = identity_code(&src).unwrap();
        let t = evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming).unwrap();
        assert_eq!(t.m, Scalar::from_ratio(1, 4));
        assert_eq!(t.m, malleability_lower_bound(&src, 1).unwrap());
    }

    #[test]
    fn indicator_code_formulas_hold_exactly() {
        let src = noisy_source();
        for n in [1usize, 2] {
            let pair = ppm_code(&src, n, None).unwrap();
            let t = evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming).unwrap();
            let width = Scalar::from_int(1i64 << n);
            let per = Scalar::from_int(n as i64);
            assert_eq!(t.k, &width / &per);
            assert_eq!(t.l, &width / &per);
            let change = src.block_change_probability(n as u32);
            assert_eq!(t.m, &(&Scalar::from_int(2) * &change) / &per);
            assert!(t.delta.is_zero());
        }
    }

    #[test]
    fn rewrite_code_reuses_prefix_so_distance_is_increment_length() {
        // Y = X surely: increments are empty, so rewriting is free.
        let src = diagonal_source();
        let pair = incremental_code(&src, 2).unwrap();
        let t =
            evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::ExtendedHamming).unwrap();
        assert_eq!(t.k, t.l);
        assert!(t.m.is_zero());
        assert!(t.delta.is_zero());
    }

    #[test]
    fn compression_rate_matches_block_huffman() {
        let src = noisy_source();
        let pair = huffman_scheme(&src, 1).unwrap();
        let t =
            evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::ExtendedHamming).unwrap();
        // Two equiprobable letters: one bit each.
        assert_eq!(t.k, Scalar::one());
        assert_eq!(t.l, Scalar::one());
    }

    #[test]
    fn bound_shrinks_with_block_length() {
        let src = noisy_source();
        // diag = 3/4: bounds 1/4, then (1 - 9/16)/2 = 7/32.
        assert_eq!(malleability_lower_bound(&src, 1).unwrap(), Scalar::from_ratio(1, 4));
        assert_eq!(malleability_lower_bound(&src, 2).unwrap(), Scalar::from_ratio(7, 32));
    }

    #[test]
    fn monte_carlo_is_reproducible_and_converges() {
        let src = noisy_source();
        let pair = identity_code(&src).unwrap();
        let a = evaluate_mc(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming, 20_000, 7)
            .unwrap();
        let b = evaluate_mc(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming, 20_000, 7)
            .unwrap();
        assert_eq!(a.m, b.m);
        assert_eq!(a.k, b.k);
        assert_eq!(a.algorithm, "chacha8");
        assert_eq!(a.seed, Some(7));
        assert!(!a.exact);
        // Exact M = 1/4; the estimate should sit within 3 half-widths.
        let exact = 0.25;
        let got = a.m.to_f64();
        assert!((got - exact).abs() <= 3.0 * a.halfwidth.unwrap());
    }

    #[test]
    fn degenerate_source_has_exactly_zero_sampled_malleability() {
        let src = diagonal_source();
        let pair = identity_code(&src).unwrap();
        let t = evaluate_mc(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming, 1_000, 3)
            .unwrap();
        assert_eq!(t.m.to_f64(), 0.0);
    }

    #[test]
    fn pair_cap_directs_to_monte_carlo() {
        let src = noisy_source();
        let pair = identity_code(&src).unwrap();
        // Forge a block length past the cap by evaluating a huge block
        // count: 2^(2·40) pairs overflow the cap.
        let mut big_x = pair.code_x.clone();
        let mut big_y = pair.code_y.clone();
        big_x.block_n = 40;
        big_y.block_n = 40;
        let err = evaluate_exact(&src, &big_x, &big_y, EditMetric::Hamming).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap(_)));
    }

    #[test]
    fn triples_serialize_with_uppercase_rate_keys() {
        let src = noisy_source();
        let pair = identity_code(&src).unwrap();
        let t = evaluate_exact(&src, &pair.code_x, &pair.code_y, EditMetric::Hamming).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["K"], serde_json::json!("1"));
        assert_eq!(json["M"], serde_json::json!("1/4"));
        assert_eq!(json["exact"], serde_json::json!(true));
        assert!(json.get("seed").is_none());
    }
}
