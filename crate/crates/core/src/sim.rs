//! Monte Carlo run of the block-Markov scheme with conferencing and strictly
//! causal partial cribbing.
//!
//! Codebooks are layered: `u` carries the conferenced message and the crib
//! parts of the previous block, `z1`/`z2` are superimposed on `u` and carry the
//! crib parts of the current block, and `x1`/`x2` are superimposed on `(u, z)`
//! and carry the private parts. Each encoder recovers the other's crib part
//! from the observed crib sequence at the end of every block, and the
//! receiver decodes backwards from the last block.
//!
//! Message indices are 0-based; the crib parts sent in the last block are
//! pinned to 0.

use crate::info::{InfoError, JointPmf};
use crate::regions::LinkCapacities;
use crate::search::{assemble, stream_rng, Channel, FactorizedDist, Pattern, SearchError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of stored codebook symbols.
pub const SYMBOL_CAP: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("codebooks would hold {0} symbols, above the cap of {SYMBOL_CAP}")]
    SizeOverflow(u128),
    #[error("message index {index} out of range for layer `{layer}` of size {size}")]
    IndexOutOfRange { layer: &'static str, index: usize, size: usize },
    #[error("the crib parts of the last block must be 0")]
    UnpinnedFinalBlock,
    #[error("distribution must have the independent-inputs cribbing pattern, got {0:?}")]
    WrongPattern(Pattern),
    #[error("alphabet of `{0}` exceeds 65536 letters")]
    AlphabetTooLarge(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Why a typicality decoder failed.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeError {
    #[error("no candidate is jointly typical")]
    NoCandidate,
    #[error("more than one candidate is jointly typical")]
    AmbiguousCandidate,
}

/// Layer rates in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    /// Conferenced (common) message.
    pub r0: f64,
    pub r1_crib: f64,
    pub r1_private: f64,
    pub r2_crib: f64,
    pub r2_private: f64,
}

impl Rates {
    pub fn scaled(self, k: f64) -> Rates {
        Rates {
            r0: self.r0 * k,
            r1_crib: self.r1_crib * k,
            r1_private: self.r1_private * k,
            r2_crib: self.r2_crib * k,
            r2_private: self.r2_private * k,
        }
    }

    pub fn sum(&self) -> f64 {
        self.r0 + self.r1_crib + self.r1_private + self.r2_crib + self.r2_private
    }
}

/// Splits a target pair into layers. The links carry as much as they can,
/// then each crib layer takes up to `crib_cap`, and the rest is private.
/// `r0` mixes both users' conferenced parts, so `r1 = min(R1, C12) + ...`.
pub fn split_rates(r1: f64, r2: f64, links: LinkCapacities, crib_cap: (f64, f64)) -> Rates {
    let c1 = r1.min(links.c12).max(0.0);
    let c2 = r2.min(links.c21).max(0.0);
    let z1 = (r1 - c1).min(crib_cap.0).max(0.0);
    let z2 = (r2 - c2).min(crib_cap.1).max(0.0);
    Rates {
        r0: c1 + c2,
        r1_crib: z1,
        r1_private: (r1 - c1 - z1).max(0.0),
        r2_crib: z2,
        r2_private: (r2 - c2 - z2).max(0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub b_blocks: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub rates: Rates,
    pub seed: u64,
}

/// Number of codewords for rate `r` at blocklength `n`: the smallest integer
/// at least `2^(n r)`.
pub fn layer_count(n: usize, r: f64) -> u128 {
    let x = (n as f64 * r).exp2();
    let c = (x * (1.0 - 1e-12)).ceil().max(1.0);
    if c >= u128::MAX as f64 {
        u128::MAX
    } else {
        c as u128
    }
}

/// Codebook sizes of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSizes {
    pub m0: usize,
    pub z1: usize,
    pub x1: usize,
    pub z2: usize,
    pub x2: usize,
}

impl LayerSizes {
    /// Size of the `u` book: one codeword per (m0, previous m1', previous m2').
    pub fn u(&self) -> usize {
        self.m0 * self.z1 * self.z2
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.b_blocks == 0 {
            return bad("b_blocks must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        let r = self.rates;
        if [r.r0, r.r1_crib, r.r1_private, r.r2_crib, r.r2_private].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("rates must be finite and non-negative");
        }
        Ok(())
    }

    /// Layer sizes and the total number of stored symbols.
    pub fn sizes(&self) -> Result<LayerSizes> {
        self.validate()?;
        let r = self.rates;
        let c = [r.r0, r.r1_crib, r.r1_private, r.r2_crib, r.r2_private].map(|v| layer_count(self.n, v));
        let u = c[0].saturating_mul(c[1]).saturating_mul(c[3]);
        let per_u =
            c[1].saturating_mul(c[2].saturating_add(1)).saturating_add(c[3].saturating_mul(c[4].saturating_add(1)));
        let total = u.saturating_mul(per_u.saturating_add(1)).saturating_mul(self.n as u128);
        if total > SYMBOL_CAP {
            return Err(SimError::SizeOverflow(total));
        }
        Ok(LayerSizes { m0: c[0] as usize, z1: c[1] as usize, x1: c[2] as usize, z2: c[3] as usize, x2: c[4] as usize })
    }

    /// Rates actually realized by the integer codebook sizes.
    pub fn realized_rates(&self) -> Result<Rates> {
        let s = self.sizes()?;
        let r = |m: usize| (m as f64).log2() / self.n as f64;
        Ok(Rates { r0: r(s.m0), r1_crib: r(s.z1), r1_private: r(s.x1), r2_crib: r(s.z2), r2_private: r(s.x2) })
    }
}

/// Letter index of a stored codeword symbol.
pub type Sym = u16;

/// Categorical sampler over a cumulative table.
#[derive(Debug, Clone)]
struct Cat {
    cdf: Vec<f64>,
}

impl Cat {
    fn new(p: &[f64]) -> Cat {
        let mut s = 0.0;
        let cdf = p
            .iter()
            .map(|&v| {
                s += v;
                s
            })
            .collect();
        Cat { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let r = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        let k = self.cdf.partition_point(|&c| c <= r);
        // never land on a zero-mass letter at the top end
        let mut k = k.min(self.cdf.len() - 1);
        while k > 0 && self.cdf[k] == self.cdf[k - 1] {
            k -= 1;
        }
        k
    }
}

/// Scheme ingredients read off a distribution of the independent-inputs pattern.
#[derive(Debug, Clone)]
pub struct Scheme {
    joint: JointPmf,
    sizes: [usize; 6],
    p_u: Cat,
    /// `P(z1 | u)` rows.
    p_z1: Vec<Cat>,
    /// `P(x1 | u, z1)` rows, indexed `u * |Z1| + z1`.
    p_x1: Vec<Cat>,
    p_z2: Vec<Cat>,
    p_x2: Vec<Cat>,
}

fn factor<'a>(fd: &'a FactorizedDist, child: &str) -> Result<&'a [f64]> {
    fd.factors
        .iter()
        .find(|f| f.children.len() == 1 && f.children[0] == child)
        .map(|f| f.table.as_slice())
        .ok_or_else(|| SimError::InvalidConfig(format!("distribution lacks a factor for {child}")))
}

fn crib_rows(p_x_u: &[f64], nu: usize, nx: usize, map: &crate::info::DeterministicMap) -> (Vec<Cat>, Vec<Cat>) {
    let nz = map.codomain_size();
    let mut pz = Vec::with_capacity(nu);
    let mut px = Vec::with_capacity(nu * nz);
    for u in 0..nu {
        let row = &p_x_u[u * nx..(u + 1) * nx];
        let mut z = vec![0.0; nz];
        for (x, &p) in row.iter().enumerate() {
            z[map.apply(x)] += p;
        }
        for (zz, &mass) in z.iter().enumerate() {
            let cond: Vec<f64> = row
                .iter()
                .enumerate()
                .map(|(x, &p)| if map.apply(x) == zz && mass > 0.0 { p / mass } else { 0.0 })
                .collect();
            px.push(Cat::new(&cond));
        }
        pz.push(Cat::new(&z));
    }
    (pz, px)
}

impl Scheme {
    pub fn new(fd: &FactorizedDist) -> Result<Scheme> {
        if fd.pattern != Pattern::Thm1A {
            return Err(SimError::WrongPattern(fd.pattern));
        }
        let joint = assemble(fd)?;
        let names = ["U", "X1", "Z1", "X2", "Z2", "Y"];
        let mut sizes = [0; 6];
        for (k, name) in names.iter().enumerate() {
            if joint.axes()[k].name != *name {
                return Err(SimError::InvalidConfig(format!("expected axis {name} at position {k}")));
            }
            sizes[k] = joint.axes()[k].size;
            if sizes[k] > Sym::MAX as usize + 1 {
                return Err(SimError::AlphabetTooLarge(name.to_string()));
            }
        }
        let map = |c: &str| {
            fd.det
                .iter()
                .find(|d| d.child == c)
                .map(|d| d.map.clone())
                .ok_or_else(|| SimError::InvalidConfig(format!("distribution lacks the map for {c}")))
        };
        let (nu, nx1, nx2) = (sizes[0], sizes[1], sizes[3]);
        let (p_z1, p_x1) = crib_rows(factor(fd, "X1")?, nu, nx1, &map("Z1")?);
        let (p_z2, p_x2) = crib_rows(factor(fd, "X2")?, nu, nx2, &map("Z2")?);
        Ok(Scheme { p_u: Cat::new(factor(fd, "U")?), joint, sizes, p_z1, p_x1, p_z2, p_x2 })
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    /// `count` crib codewords superimposed on `u`, back to back. Side 2 draws
    /// encoder 1's crib Z1 (observed by encoder 2), side 1 draws Z2.
    pub fn draw_crib_layer<R: Rng>(&self, side: u8, u: &[Sym], count: usize, rng: &mut R) -> Vec<Sym> {
        let rows = if side == 1 { &self.p_z2 } else { &self.p_z1 };
        let mut out = Vec::with_capacity(count * u.len());
        for _ in 0..count {
            out.extend(u.iter().map(|&ut| rows[ut as usize].sample(rng) as Sym));
        }
        out
    }
}

/// Codewords of every layer, stored flat with blocklength `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookSet {
    pub n: usize,
    pub sizes: LayerSizes,
    u: Vec<Sym>,
    z1: Vec<Sym>,
    x1: Vec<Sym>,
    z2: Vec<Sym>,
    x2: Vec<Sym>,
}

impl CodebookSet {
    fn slice(v: &[Sym], n: usize, i: usize) -> &[Sym] {
        &v[i * n..(i + 1) * n]
    }

    pub fn u(&self, j: usize) -> &[Sym] {
        Self::slice(&self.u, self.n, j)
    }

    pub fn z1(&self, j: usize, k: usize) -> &[Sym] {
        Self::slice(&self.z1, self.n, j * self.sizes.z1 + k)
    }

    pub fn x1(&self, j: usize, k: usize, l: usize) -> &[Sym] {
        Self::slice(&self.x1, self.n, (j * self.sizes.z1 + k) * self.sizes.x1 + l)
    }

    pub fn z2(&self, j: usize, k: usize) -> &[Sym] {
        Self::slice(&self.z2, self.n, j * self.sizes.z2 + k)
    }

    pub fn x2(&self, j: usize, k: usize, l: usize) -> &[Sym] {
        Self::slice(&self.x2, self.n, (j * self.sizes.z2 + k) * self.sizes.x2 + l)
    }

    /// Index of the `u` codeword for (m0, previous m1', previous m2').
    pub fn u_index(&self, m0: usize, m1_prev: usize, m2_prev: usize) -> usize {
        (m0 * self.sizes.z1 + m1_prev) * self.sizes.z2 + m2_prev
    }

    /// Inverse of [`CodebookSet::u_index`].
    pub fn split_u_index(&self, j: usize) -> (usize, usize, usize) {
        (j / (self.sizes.z1 * self.sizes.z2), (j / self.sizes.z2) % self.sizes.z1, j % self.sizes.z2)
    }
}

/// Draws every codebook layer from `scheme`, reproducibly for a given generator.
pub fn build_codebooks_with<R: Rng>(scheme: &Scheme, cfg: &SimConfig, rng: &mut R) -> Result<CodebookSet> {
    let s = cfg.sizes()?;
    let n = cfg.n;
    let mu = s.u();
    let mut u = Vec::with_capacity(mu * n);
    for _ in 0..mu * n {
        u.push(scheme.p_u.sample(rng) as Sym);
    }
    let layer = |rng: &mut R, u: &[Sym], nz: usize, nx: usize, pz: &[Cat], px: &[Cat], zsize: usize| {
        let mut zb = Vec::with_capacity(mu * nz * n);
        let mut xb = Vec::with_capacity(mu * nz * nx * n);
        for j in 0..mu {
            let uc = &u[j * n..(j + 1) * n];
            for _ in 0..nz {
                let start = zb.len();
                for &ut in uc {
                    zb.push(pz[ut as usize].sample(rng) as Sym);
                }
                for _ in 0..nx {
                    for t in 0..n {
                        let row = uc[t] as usize * zsize + zb[start + t] as usize;
                        xb.push(px[row].sample(rng) as Sym);
                    }
                }
            }
        }
        (zb, xb)
    };
    let (z1, x1) = layer(rng, &u, s.z1, s.x1, &scheme.p_z1, &scheme.p_x1, scheme.sizes[2]);
    let (z2, x2) = layer(rng, &u, s.z2, s.x2, &scheme.p_z2, &scheme.p_x2, scheme.sizes[4]);
    Ok(CodebookSet { n, sizes: s, u, z1, x1, z2, x2 })
}

/// Codebooks from stream 0 of `cfg.seed`, which is also what trial 0 of
/// [`estimate_error`] uses.
pub fn build_codebooks(dist: &FactorizedDist, cfg: &SimConfig) -> Result<CodebookSet> {
    let scheme = Scheme::new(dist)?;
    build_codebooks_with(&scheme, cfg, &mut stream_rng(cfg.seed, 0))
}

/// Message indices sent in one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BlockMessages {
    pub m0: usize,
    pub m1_crib: usize,
    pub m1_private: usize,
    pub m2_crib: usize,
    pub m2_private: usize,
}

/// Per-block codeword indices implied by a message schedule.
fn schedule(books: &CodebookSet, msgs: &[BlockMessages]) -> Result<Vec<(usize, BlockMessages)>> {
    let s = books.sizes;
    let last = msgs.last().ok_or_else(|| SimError::InvalidConfig("no blocks".into()))?;
    if last.m1_crib != 0 || last.m2_crib != 0 {
        return Err(SimError::UnpinnedFinalBlock);
    }
    let mut out = Vec::with_capacity(msgs.len());
    let (mut p1, mut p2) = (0, 0);
    for m in msgs {
        for (layer, index, size) in [
            ("m0", m.m0, s.m0),
            ("m1_crib", m.m1_crib, s.z1),
            ("m1_private", m.m1_private, s.x1),
            ("m2_crib", m.m2_crib, s.z2),
            ("m2_private", m.m2_private, s.x2),
        ] {
            if index >= size {
                return Err(SimError::IndexOutOfRange { layer, index, size });
            }
        }
        out.push((books.u_index(m.m0, p1, p2), *m));
        p1 = m.m1_crib;
        p2 = m.m2_crib;
    }
    Ok(out)
}

/// Channel inputs of both encoders over the whole superblock, block by block.
pub fn encode_superblock(books: &CodebookSet, msgs: &[BlockMessages]) -> Result<(Vec<Sym>, Vec<Sym>)> {
    let mut a = Vec::with_capacity(books.n * msgs.len());
    let mut b = Vec::with_capacity(books.n * msgs.len());
    for (j, m) in schedule(books, msgs)? {
        a.extend_from_slice(books.x1(j, m.m1_crib, m.m1_private));
        b.extend_from_slice(books.x2(j, m.m2_crib, m.m2_private));
    }
    Ok((a, b))
}

/// Strong typicality test against a fixed law: every letter frequency is
/// within `eps` of its probability and no zero-probability letter occurs.
#[derive(Debug, Clone)]
pub struct Typicality {
    probs: Vec<f64>,
    heavy: Vec<usize>,
    eps: f64,
    counts: Vec<u32>,
    touched: Vec<usize>,
}

impl Typicality {
    pub fn new(probs: Vec<f64>, eps: f64) -> Typicality {
        let heavy = (0..probs.len()).filter(|&i| probs[i] > eps).collect();
        let counts = vec![0; probs.len()];
        Typicality { probs, heavy, eps, counts, touched: Vec::new() }
    }

    /// Tests the sequence of letter indices `cells`.
    pub fn check(&mut self, cells: impl Iterator<Item = usize>) -> bool {
        let mut n = 0usize;
        let mut ok = true;
        for c in cells {
            if self.probs[c] <= 0.0 {
                ok = false;
                break;
            }
            if self.counts[c] == 0 {
                self.touched.push(c);
            }
            self.counts[c] += 1;
            n += 1;
        }
        if ok && n > 0 {
            let nf = n as f64;
            ok = self.touched.iter().all(|&c| (self.counts[c] as f64 / nf - self.probs[c]).abs() <= self.eps)
                && self.heavy.iter().all(|&c| self.counts[c] > 0);
        }
        for &c in &self.touched {
            self.counts[c] = 0;
        }
        self.touched.clear();
        ok
    }
}

/// Which party failed to decode, and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Failure {
    /// Encoder 1 failed to recover encoder 2's crib part in `block` (1-based).
    Encoder1 {
        block: usize,
        kind: FailureKind,
    },
    Encoder2 {
        block: usize,
        kind: FailureKind,
    },
    Receiver {
        block: usize,
        kind: FailureKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    NoCandidate,
    AmbiguousCandidate,
    /// A unique typical candidate was found but it was not the one sent.
    WrongCandidate,
}

impl From<DecodeError> for FailureKind {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::NoCandidate => FailureKind::NoCandidate,
            DecodeError::AmbiguousCandidate => FailureKind::AmbiguousCandidate,
        }
    }
}

/// Typicality tests used by the decoders of one scheme.
pub struct Decoders {
    uz1: Typicality,
    uz2: Typicality,
    full: Typicality,
    sizes: [usize; 6],
}

impl Decoders {
    pub fn new(scheme: &Scheme, eps: f64) -> Result<Decoders> {
        let j = &scheme.joint;
        let uz1 = j.marginal(&["U", "Z1"])?.into_table();
        let uz2 = j.marginal(&["U", "Z2"])?.into_table();
        Ok(Decoders {
            uz1: Typicality::new(uz1, eps),
            uz2: Typicality::new(uz2, eps),
            full: Typicality::new(j.table().to_vec(), eps),
            sizes: scheme.sizes,
        })
    }
}

/// Crib decoding at the end of a block. `side` 1 means encoder 1 recovers
/// encoder 2's crib index from its view of Z2; side 2 is the mirror case.
/// Returns the unique index whose crib codeword over `u_index` equals the
/// observed sequence and is jointly typical with the `u` codeword. A layer
/// with one codeword decodes to index 0 without a test.
pub fn encoder_decode_step(
    books: &CodebookSet,
    dec: &mut Decoders,
    u_index: usize,
    observed: &[Sym],
    side: u8,
) -> std::result::Result<usize, DecodeError> {
    let n = books.n;
    let (layer, count) = match side {
        1 => (&books.z2, books.sizes.z2),
        _ => (&books.z1, books.sizes.z1),
    };
    let candidates = &layer[u_index * count * n..(u_index + 1) * count * n];
    decode_crib(dec, side, books.u(u_index), candidates, observed)
}

/// Crib decoding against an explicit list of candidate crib codewords,
/// stored back to back.
pub fn decode_crib(
    dec: &mut Decoders,
    side: u8,
    u: &[Sym],
    candidates: &[Sym],
    observed: &[Sym],
) -> std::result::Result<usize, DecodeError> {
    let n = u.len();
    let count = candidates.len() / n.max(1);
    // a single codeword leaves nothing to decide
    if count == 1 {
        return Ok(0);
    }
    let (nz, typ) = match side {
        1 => (dec.sizes[4], &mut dec.uz2),
        _ => (dec.sizes[2], &mut dec.uz1),
    };
    if !typ.check(u.iter().zip(observed).map(|(&a, &b)| a as usize * nz + b as usize)) {
        return Err(DecodeError::NoCandidate);
    }
    let mut found = None;
    for (k, z) in candidates.chunks(n).enumerate() {
        if z == observed {
            if found.is_some() {
                return Err(DecodeError::AmbiguousCandidate);
            }
            found = Some(k);
        }
    }
    found.ok_or(DecodeError::NoCandidate)
}

/// Receiver decision for one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoded {
    pub m0: usize,
    pub m1_crib_prev: usize,
    pub m2_crib_prev: usize,
    pub m1_private: usize,
    pub m2_private: usize,
}

/// Searches block `y` for the unique (u, x1, x2) codeword tuple that is
/// jointly typical with it, given the crib indices of this block. When the
/// books hold a single tuple it is returned without a test.
pub fn receiver_decode_block(
    books: &CodebookSet,
    dec: &mut Decoders,
    y: &[Sym],
    crib: (usize, usize),
) -> std::result::Result<Decoded, DecodeError> {
    let [_, sx1, sz1, sx2, sz2, sy] = dec.sizes;
    let n = books.n;
    let s = books.sizes;
    if s.u() == 1 && s.x1 == 1 && s.x2 == 1 {
        let (m0, p1, p2) = books.split_u_index(0);
        return Ok(Decoded { m0, m1_crib_prev: p1, m2_crib_prev: p2, m1_private: 0, m2_private: 0 });
    }
    let mut found: Option<Decoded> = None;
    let mut base = vec![0usize; n];
    for j in 0..s.u() {
        let (u, z1, z2) = (books.u(j), books.z1(j, crib.0), books.z2(j, crib.1));
        for t in 0..n {
            // cell index with X1 and X2 left at 0
            base[t] =
                ((((u[t] as usize * sx1) * sz1 + z1[t] as usize) * sx2) * sz2 + z2[t] as usize) * sy + y[t] as usize;
        }
        let stride_x1 = sz1 * sx2 * sz2 * sy;
        let stride_x2 = sz2 * sy;
        for l1 in 0..s.x1 {
            let x1 = books.x1(j, crib.0, l1);
            for l2 in 0..s.x2 {
                let x2 = books.x2(j, crib.1, l2);
                let cells = (0..n).map(|t| base[t] + x1[t] as usize * stride_x1 + x2[t] as usize * stride_x2);
                if dec.full.check(cells) {
                    if found.is_some() {
                        return Err(DecodeError::AmbiguousCandidate);
                    }
                    let (m0, p1, p2) = books.split_u_index(j);
                    found = Some(Decoded { m0, m1_crib_prev: p1, m2_crib_prev: p2, m1_private: l1, m2_private: l2 });
                }
            }
        }
    }
    found.ok_or(DecodeError::NoCandidate)
}

/// Backward decoding of a superblock. Returns the decisions for blocks
/// 1..=B, or the first failing block (1-based) with its error.
pub fn backward_decode(
    books: &CodebookSet,
    dec: &mut Decoders,
    y: &[Sym],
    b_blocks: usize,
) -> std::result::Result<Vec<Decoded>, (usize, DecodeError)> {
    let n = books.n;
    let mut out = vec![Decoded { m0: 0, m1_crib_prev: 0, m2_crib_prev: 0, m1_private: 0, m2_private: 0 }; b_blocks];
    let mut crib = (0, 0);
    for b in (0..b_blocks).rev() {
        let d = receiver_decode_block(books, dec, &y[b * n..(b + 1) * n], crib).map_err(|e| (b + 1, e))?;
        crib = (d.m1_crib_prev, d.m2_crib_prev);
        out[b] = d;
    }
    Ok(out)
}

fn wilson(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let den = 1.0 + z * z / nf;
    let c = (p + z * z / (2.0 * nf)) / den;
    let h = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / den;
    let lo = if k == 0 { 0.0 } else { (c - h).max(0.0) };
    let hi = if k == n { 1.0 } else { (c + h).min(1.0) };
    (lo, hi)
}

/// Wilson score interval at 95% for `k` failures in `n` trials.
pub fn wilson_95(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        (0.0, 1.0)
    } else {
        wilson(k, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub block_errors: usize,
    pub trials: usize,
    pub rate: f64,
    pub wilson_95: (f64, f64),
    pub requested_rates: Rates,
    pub realized_rates: Rates,
    /// First failure of each trial, `None` for a clean trial.
    pub failures: Vec<Option<Failure>>,
}

/// Runs one superblock with fresh codebooks. Returns the first failure.
pub fn run_trial(
    scheme: &Scheme,
    channel: &Channel,
    dec: &mut Decoders,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Failure>> {
    let books = build_codebooks_with(scheme, cfg, rng)?;
    let s = books.sizes;
    let b_blocks = cfg.b_blocks;
    let msgs: Vec<BlockMessages> = (0..b_blocks)
        .map(|b| {
            let last = b + 1 == b_blocks;
            BlockMessages {
                m0: rng.random_range(0..s.m0),
                m1_crib: if last { 0 } else { rng.random_range(0..s.z1) },
                m1_private: rng.random_range(0..s.x1),
                m2_crib: if last { 0 } else { rng.random_range(0..s.z2) },
                m2_private: rng.random_range(0..s.x2),
            }
        })
        .collect();
    let sched = schedule(&books, &msgs)?;
    // crib decoding at the end of each block, with the observed crib sequences
    for (b, &(j, m)) in sched.iter().enumerate() {
        if b + 1 == b_blocks {
            break;
        }
        let z2 = books.z2(j, m.m2_crib);
        match encoder_decode_step(&books, dec, j, z2, 1) {
            Ok(k) if k == m.m2_crib => {}
            Ok(_) => return Ok(Some(Failure::Encoder1 { block: b + 1, kind: FailureKind::WrongCandidate })),
            Err(e) => return Ok(Some(Failure::Encoder1 { block: b + 1, kind: e.into() })),
        }
        let z1 = books.z1(j, m.m1_crib);
        match encoder_decode_step(&books, dec, j, z1, 2) {
            Ok(k) if k == m.m1_crib => {}
            Ok(_) => return Ok(Some(Failure::Encoder2 { block: b + 1, kind: FailureKind::WrongCandidate })),
            Err(e) => return Ok(Some(Failure::Encoder2 { block: b + 1, kind: e.into() })),
        }
    }
    let (x1, x2) = encode_superblock(&books, &msgs)?;
    let rows: Vec<Cat> = channel.table.chunks(channel.output_size).map(Cat::new).collect();
    let nx2 = channel.input_sizes[1];
    let y: Vec<Sym> =
        x1.iter().zip(&x2).map(|(&a, &b)| rows[a as usize * nx2 + b as usize].sample(rng) as Sym).collect();
    match backward_decode(&books, dec, &y, b_blocks) {
        Err((block, e)) => Ok(Some(Failure::Receiver { block, kind: e.into() })),
        Ok(d) => {
            for b in (0..b_blocks).rev() {
                let m = msgs[b];
                let (p1, p2) = if b == 0 { (0, 0) } else { (msgs[b - 1].m1_crib, msgs[b - 1].m2_crib) };
                let want = Decoded {
                    m0: m.m0,
                    m1_crib_prev: p1,
                    m2_crib_prev: p2,
                    m1_private: m.m1_private,
                    m2_private: m.m2_private,
                };
                if d[b] != want {
                    return Ok(Some(Failure::Receiver { block: b + 1, kind: FailureKind::WrongCandidate }));
                }
            }
            Ok(None)
        }
    }
}

/// Average block error over `cfg.trials` independent superblocks. Trial `t`
/// draws its codebooks, messages and channel noise from stream `t` of
/// `cfg.seed`.
pub fn estimate_error(dist: &FactorizedDist, channel: &Channel, cfg: &SimConfig) -> Result<ErrorEstimate> {
    cfg.validate()?;
    channel.validate()?;
    let scheme = Scheme::new(dist)?;
    if channel.input_sizes != [scheme.sizes[1], scheme.sizes[3]] || channel.output_size != scheme.sizes[5] {
        return Err(SimError::InvalidConfig("channel shape does not match the distribution".into()));
    }
    let realized = cfg.realized_rates()?;
    let mut dec = Decoders::new(&scheme, cfg.epsilon)?;
    let mut failures = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let mut rng = stream_rng(cfg.seed, t as u64);
        failures.push(run_trial(&scheme, channel, &mut dec, cfg, &mut rng)?);
    }
    let block_errors = failures.iter().filter(|f| f.is_some()).count();
    Ok(ErrorEstimate {
        block_errors,
        trials: cfg.trials,
        rate: block_errors as f64 / cfg.trials as f64,
        wilson_95: wilson_95(block_errors, cfg.trials),
        requested_rates: cfg.rates,
        realized_rates: realized,
        failures,
    })
}

/// Fraction of `trials` i.i.d. draws of length `n` from `probs` that pass
/// the strong typicality test.
pub fn typical_fraction(probs: &[f64], eps: f64, n: usize, trials: usize, seed: u64) -> f64 {
    let cat = Cat::new(probs);
    let mut typ = Typicality::new(probs.to_vec(), eps);
    let mut rng = stream_rng(seed, 0);
    let mut buf = vec![0usize; n];
    let mut hits = 0;
    for _ in 0..trials {
        for v in buf.iter_mut() {
            *v = cat.sample(&mut rng);
        }
        if typ.check(buf.iter().copied()) {
            hits += 1;
        }
    }
    hits as f64 / trials as f64
}
