//! Distributions and pair sources. A `JointSource` is a joint distribution
//! p(x, y) over an original symbol X and its edited version Y, drawn i.i.d.
//! per position; blocks of length n carry the product measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Scalar, FLOAT_TOL};

/// A source block: symbol indices into the source alphabet, length n.
pub type Block = Vec<u16>;

#[derive(Debug, Clone)]
pub struct Distribution {
    probs: Vec<Scalar>,
}

impl Distribution {
    /// Validates non-negativity and unit total mass (exactly in rational
    /// mode, within `FLOAT_TOL` otherwise).
    pub fn new(probs: Vec<Scalar>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        for (i, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p} at index {i}"
                )));
            }
        }
        let total = pairwise_sum(&probs);
        if !total.approx_eq(&Scalar::one(), FLOAT_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Distribution { probs })
    }

    pub fn from_f64(probs: &[f64]) -> Result<Self> {
        Distribution::new(probs.iter().map(|&p| Scalar::from_f64(p)).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Distribution {
            probs: (0..n).map(|_| Scalar::from_ratio(1, n as i64)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> &Scalar {
        &self.probs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scalar> {
        self.probs.iter()
    }

    pub fn is_exact(&self) -> bool {
        self.probs.iter().all(Scalar::is_exact)
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.probs.iter().map(Scalar::to_f64).collect()
    }

    /// Shannon entropy in the given logarithm base, with 0·log 0 = 0.
    pub fn entropy(&self, base: f64) -> f64 {
        entropy_f64(&self.to_f64_vec(), base)
    }
}

fn entropy_f64(p: &[f64], base: f64) -> f64 {
    let ln_base = base.ln();
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * (x.ln() / ln_base);
        }
    }
    h
}

/// Shannon entropy of `d` in the given base (free-function form).
pub fn entropy(d: &Distribution, base: f64) -> f64 {
    d.entropy(base)
}

/// D(p ‖ q) in the given base. Returns +inf when q gives zero mass to a
/// point p charges (an infinite divergence, not a numeric overflow).
pub fn relative_entropy(p: &Distribution, q: &Distribution, base: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "distributions have different sizes: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let ln_base = base.ln();
    let mut d = 0.0;
    for (pi, qi) in p.iter().zip(q.iter()) {
        let pf = pi.to_f64();
        let qf = qi.to_f64();
        if pf > 0.0 {
            if qf <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += pf * ((pf / qf).ln() / ln_base);
        }
    }
    Ok(d.max(0.0))
}

/// The geometric-mixture path between p and q: z_t(x) ∝ p(x)^(1−t) q(x)^t.
/// Endpoints return exact copies; interior points are float-mode.
pub fn tilted_distribution(p: &Distribution, q: &Distribution, t: f64) -> Result<Distribution> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(
            "tilted distribution needs equal supports".into(),
        ));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(q.clone());
    }
    let weights: Vec<f64> = p
        .iter()
        .zip(q.iter())
        .map(|(pi, qi)| pi.to_f64().powf(1.0 - t) * qi.to_f64().powf(t))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDistribution(
            "tilted distribution has empty support (disjoint inputs)".into(),
        ));
    }
    Distribution::new(weights.iter().map(|&w| Scalar::from_f64(w / total)).collect())
}

/// Normalizer of the unnormalized geometric mixture: μ(t) = Σ p^(1−t) q^t.
pub fn tilt_normalizer(p: &Distribution, q: &Distribution, t: f64) -> f64 {
    p.iter()
        .zip(q.iter())
        .map(|(pi, qi)| pi.to_f64().powf(1.0 - t) * qi.to_f64().powf(t))
        .sum()
}

/// The mixture parameter at which both divergence losses are equal:
/// t* = D(q‖p) / (D(q‖p) + D(p‖q)). Errors when p = q or when either
/// divergence is infinite.
pub fn balanced_t(p: &Distribution, q: &Distribution) -> Result<f64> {
    let dpq = relative_entropy(p, q, 2.0)?;
    let dqp = relative_entropy(q, p, 2.0)?;
    if dpq == 0.0 && dqp == 0.0 {
        return Err(Error::InvalidInput(
            "balanced mixture parameter is undefined for identical distributions".into(),
        ));
    }
    if !dpq.is_finite() || !dqp.is_finite() {
        return Err(Error::InfiniteDivergence(
            "balanced mixture parameter needs finite divergences both ways".into(),
        ));
    }
    Ok(dqp / (dqp + dpq))
}

/// One point of the achievable rate-overhead frontier: at mixture parameter
/// t, compressing with a code matched to z_t costs D(p_X‖z_t) extra on the
/// original and D(p_Y‖z_t) extra on the edit.
#[derive(Debug, Clone, Serialize)]
pub struct RateLossPoint {
    pub t: f64,
    pub k_loss: f64,
    pub l_loss: f64,
}

/// Sweep the geometric-mixture path with `grid` evenly spaced points
/// (t = 0 .. 1 inclusive), reporting losses in the given log base.
/// A stationary source collapses to the single zero-loss point.
pub fn rate_frontier(src: &JointSource, grid: usize, base: f64) -> Result<Vec<RateLossPoint>> {
    if grid < 2 {
        return Err(Error::InvalidInput("frontier grid needs at least 2 points".into()));
    }
    let px = src.marginal_x();
    let py = src.marginal_y();
    if src.is_stationary() {
        return Ok(vec![RateLossPoint { t: 0.0, k_loss: 0.0, l_loss: 0.0 }]);
    }
    let dxy = relative_entropy(&px, &py, base)?;
    let dyx = relative_entropy(&py, &px, base)?;
    if !dxy.is_finite() || !dyx.is_finite() {
        return Err(Error::InfiniteDivergence(
            "rate frontier needs marginals with identical support".into(),
        ));
    }
    let mut points = Vec::with_capacity(grid);
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let z = tilted_distribution(&px, &py, t)?;
        points.push(RateLossPoint {
            t,
            k_loss: relative_entropy(&px, &z, base)?,
            l_loss: relative_entropy(&py, &z, base)?,
        });
    }
    Ok(points)
}

/// Joint distribution of (original, edit) over a shared source alphabet W,
/// together with the storage alphabet size |V| the codes write in.
#[derive(Debug, Clone)]
pub struct JointSource {
    alphabet: Vec<String>,
    joint: Vec<Vec<Scalar>>,
    v_size: usize,
}

impl JointSource {
    pub fn new(alphabet: Vec<String>, joint: Vec<Vec<Scalar>>, v_size: usize) -> Result<Self> {
        let w = alphabet.len();
        if w == 0 {
            return Err(Error::InvalidInput("empty source alphabet".into()));
        }
        if w > u16::MAX as usize {
            return Err(Error::ResourceCap(format!("alphabet size {w} exceeds 65535")));
        }
        {
            let mut sorted = alphabet.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != w {
                return Err(Error::InvalidInput("duplicate alphabet symbols".into()));
            }
        }
        if v_size < 2 {
            return Err(Error::InvalidInput(format!(
                "storage alphabet size {v_size} must be at least 2"
            )));
        }
        if joint.len() != w || joint.iter().any(|row| row.len() != w) {
            return Err(Error::InvalidInput(format!(
                "joint matrix must be {w}x{w} to match the alphabet"
            )));
        }
        let mut cells = Vec::with_capacity(w * w);
        for (x, row) in joint.iter().enumerate() {
            for (y, p) in row.iter().enumerate() {
                if p.is_negative() {
                    return Err(Error::InvalidDistribution(format!(
                        "negative joint mass {p} at ({x},{y})"
                    )));
                }
                cells.push(p.clone());
            }
        }
        let total = pairwise_sum(&cells);
        if !total.approx_eq(&Scalar::one(), FLOAT_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "joint mass sums to {total}, not 1"
            )));
        }
        Ok(JointSource { alphabet, joint, v_size })
    }

    /// Build from a marginal p(x) and a row-stochastic channel p(y|x).
    pub fn from_channel(
        alphabet: Vec<String>,
        px: &Distribution,
        channel_rows: &[Vec<Scalar>],
        v_size: usize,
    ) -> Result<Self> {
        let w = alphabet.len();
        if px.len() != w || channel_rows.len() != w {
            return Err(Error::InvalidInput("channel shape mismatch".into()));
        }
        let joint = channel_rows
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|c| px.get(x) * c).collect())
            .collect();
        JointSource::new(alphabet, joint, v_size)
    }

    pub fn w_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.alphabet[i]
    }

    pub fn symbol_index(&self, s: &str) -> Option<u16> {
        self.alphabet.iter().position(|a| a == s).map(|i| i as u16)
    }

    pub fn mass(&self, x: usize, y: usize) -> &Scalar {
        &self.joint[x][y]
    }

    pub fn is_exact(&self) -> bool {
        self.joint.iter().flatten().all(Scalar::is_exact)
    }

    pub fn marginal_x(&self) -> Distribution {
        let probs = self.joint.iter().map(|row| pairwise_sum(row)).collect();
        Distribution { probs }
    }

    pub fn marginal_y(&self) -> Distribution {
        let w = self.w_size();
        let probs = (0..w)
            .map(|y| {
                let col: Vec<Scalar> = (0..w).map(|x| self.joint[x][y].clone()).collect();
                pairwise_sum(&col)
            })
            .collect();
        Distribution { probs }
    }

    /// Editing is stationary when the edited symbol has the same law as the
    /// original (p_X = p_Y); exact equality in rational mode.
    pub fn is_stationary(&self) -> bool {
        let px = self.marginal_x();
        let py = self.marginal_y();
        let same = px
            .iter()
            .zip(py.iter())
            .all(|(a, b)| a.approx_eq(b, FLOAT_TOL));
        same
    }

    /// Total mass on the diagonal, Pr[X = Y].
    pub fn diagonal_mass(&self) -> Scalar {
        let diag: Vec<Scalar> = (0..self.w_size()).map(|i| self.joint[i][i].clone()).collect();
        pairwise_sum(&diag)
    }

    /// Pr[X₁..Xₙ ≠ Y₁..Yₙ] = 1 − Pr[X = Y]^n under the product measure.
    pub fn block_change_probability(&self, n: u32) -> Scalar {
        &Scalar::one() - &self.diagonal_mass().pow(n)
    }

    pub fn joint_as_distribution(&self) -> Distribution {
        Distribution {
            probs: self.joint.iter().flatten().cloned().collect(),
        }
    }

    pub fn entropy_x(&self, base: f64) -> f64 {
        self.marginal_x().entropy(base)
    }

    pub fn entropy_y(&self, base: f64) -> f64 {
        self.marginal_y().entropy(base)
    }

    pub fn joint_entropy(&self, base: f64) -> f64 {
        self.joint_as_distribution().entropy(base)
    }

    /// H(Y|X) = H(X,Y) − H(X).
    pub fn conditional_entropy(&self, base: f64) -> f64 {
        (self.joint_entropy(base) - self.entropy_x(base)).max(0.0)
    }

    /// All length-n blocks in lexicographic order (symbol index 0 first).
    pub fn blocks(&self, n: usize) -> BlockIter {
        BlockIter::new(self.w_size() as u16, n)
    }

    pub fn block_count(&self, n: usize) -> Option<u64> {
        (self.w_size() as u64).checked_pow(n as u32)
    }

    /// Product-measure mass of a block pair.
    pub fn block_pair_mass(&self, x: &[u16], y: &[u16]) -> Scalar {
        debug_assert_eq!(x.len(), y.len());
        let mut m = Scalar::one();
        for (&xi, &yi) in x.iter().zip(y.iter()) {
            m = &m * &self.joint[xi as usize][yi as usize];
            if m.is_zero() {
                break;
            }
        }
        m
    }

    pub fn block_mass_x(&self, x: &[u16]) -> Scalar {
        let px = self.marginal_x();
        let mut m = Scalar::one();
        for &xi in x {
            m = &m * px.get(xi as usize);
        }
        m
    }

    pub fn block_mass_y(&self, y: &[u16]) -> Scalar {
        let py = self.marginal_y();
        let mut m = Scalar::one();
        for &yi in y {
            m = &m * py.get(yi as usize);
        }
        m
    }

    /// Per-letter supports: for each x, the y's with p(x,y) > 0.
    pub fn letter_successors(&self) -> Vec<Vec<u16>> {
        self.joint
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(y, _)| y as u16)
                    .collect()
            })
            .collect()
    }

    /// All post-edit blocks reachable from `x` with positive probability
    /// (the per-letter successor lists expanded positionally), in
    /// lexicographic order. Empty when some letter of `x` has no successor
    /// (zero pre-edit mass at that letter).
    pub fn block_successors(&self, x: &[u16]) -> Vec<Block> {
        let succ = self.letter_successors();
        let mut out: Vec<Block> = vec![Vec::with_capacity(x.len())];
        for &letter in x {
            let nexts = &succ[letter as usize];
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    nexts.iter().map(move |&s| {
                        let mut b = prefix.clone();
                        b.push(s);
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// Render a block using the alphabet; symbols are joined directly when
    /// all are single characters, with '|' separators otherwise.
    pub fn block_name(&self, block: &[u16]) -> String {
        let single = self.alphabet.iter().all(|s| s.chars().count() == 1);
        let parts: Vec<&str> = block.iter().map(|&i| self.alphabet[i as usize].as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join("|")
        }
    }
}

/// Lexicographic odometer over W^n.
pub struct BlockIter {
    w: u16,
    n: usize,
    current: Option<Block>,
}

impl BlockIter {
    fn new(w: u16, n: usize) -> Self {
        BlockIter { w, n, current: Some(vec![0; n]) }
    }
}

impl Iterator for BlockIter {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = self.n;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] + 1 < self.w {
                cur[i] += 1;
                for slot in cur.iter_mut().skip(i + 1) {
                    *slot = 0;
                }
                break;
            }
        }
        Some(out)
    }
}
