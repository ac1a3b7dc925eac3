//! Gaussian MAC with one-sided cooperation and quantized cribbing.
//!
//! Inputs are built as X1 = λU + X1', X2 = (1-λ)U + X2' with U common to both
//! encoders. Encoder 2 observes Z = Q(X1). With probability ρ it replaces its
//! private part by a fresh draw from P(X1' | Z, U), which correlates the two
//! inputs beyond U.
//!
//! Each information term is an expectation of a log-density ratio. Given the
//! realized sample, every conditional density of Y needed here has a closed
//! form (or a one-dimensional quadrature) in terms of truncated normals, so
//! the only Monte Carlo error is the outer average.

use crate::geometry::{Frontier, Plane, RatePoint};
use crate::regions::{bounds_to_polytope, Constraint, RegionBounds, Sense};
use crate::search::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::digamma;
use std::f64::consts::{LN_2, PI, SQRT_2};
use std::io::Write;
use thiserror::Error;

pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("parameter `{0}` must be positive")]
    NonPositiveParameter(&'static str),
    #[error("parameter `{0}` must lie in [0, 1]")]
    OutOfUnitInterval(&'static str),
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    SampleCountTooSmall(usize),
    #[error("quantizer needs at least one bit")]
    BadBits,
    #[error("quantizer thresholds must be strictly increasing")]
    BadThresholds,
    #[error("empty grid for `{0}`")]
    EmptyGrid(&'static str),
    #[error("second moment of X2 would be {0}, above the power limit {1}")]
    PowerViolation(f64, f64),
}

pub type Result<T> = std::result::Result<T, GaussianError>;

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail.
fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal quantile.
pub fn norm_ppf(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Φ(y) - Φ(x) for x <= y, accurate in both tails.
fn cdf_diff(x: f64, y: f64) -> f64 {
    if x > 0.0 {
        norm_sf(x) - norm_sf(y)
    } else {
        norm_cdf(y) - norm_cdf(x)
    }
}

fn npdf(t: f64, var: f64) -> f64 {
    (-0.5 * t * t / var).exp() / (2.0 * PI * var).sqrt()
}

fn ln_npdf(t: f64, var: f64) -> f64 {
    -0.5 * t * t / var - 0.5 * (2.0 * PI * var).ln()
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    thresholds: Vec<f64>,
}

impl Quantizer {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) || thresholds.iter().any(|t| !t.is_finite()) {
            return Err(GaussianError::BadThresholds);
        }
        Ok(Quantizer { thresholds })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn quantize(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= x)
    }

    /// Cell edges including the infinite ends.
    pub fn edges(&self) -> Vec<f64> {
        let mut e = vec![f64::NEG_INFINITY];
        e.extend(&self.thresholds);
        e.push(f64::INFINITY);
        e
    }
}

/// Uniform thresholds over [-spread*sigma, spread*sigma]; one bit gives [0].
pub fn make_quantizer(bits: u32, spread: f64, sigma: f64) -> Result<Quantizer> {
    if bits == 0 || bits > 16 {
        return Err(GaussianError::BadBits);
    }
    if !(spread > 0.0) {
        return Err(GaussianError::NonPositiveParameter("spread"));
    }
    if !(sigma > 0.0) {
        return Err(GaussianError::NonPositiveParameter("sigma"));
    }
    let k = (1usize << bits) - 1;
    if k == 1 {
        return Quantizer::new(vec![0.0]);
    }
    let lo = -spread * sigma;
    let step = 2.0 * spread * sigma / (k - 1) as f64;
    Quantizer::new((0..k).map(|i| lo + step * i as f64).collect())
}

/// Minimum mean-squared-error quantizer for N(0, sigma^2), by Lloyd iteration.
pub fn lloyd_max(bits: u32, sigma: f64) -> Result<Quantizer> {
    if bits == 0 || bits > 16 {
        return Err(GaussianError::BadBits);
    }
    if !(sigma > 0.0) {
        return Err(GaussianError::NonPositiveParameter("sigma"));
    }
    let levels = 1usize << bits;
    let mut t: Vec<f64> = (1..levels).map(|i| norm_ppf(i as f64 / levels as f64)).collect();
    for _ in 0..500 {
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(&t);
        edges.push(f64::INFINITY);
        // centroid of each cell of the standard normal
        let c: Vec<f64> = edges.windows(2).map(|e| (npdf_std(e[0]) - npdf_std(e[1])) / cdf_diff(e[0], e[1])).collect();
        let next: Vec<f64> = c.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let moved = next.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        t = next;
        if moved < 1e-13 {
            break;
        }
    }
    Quantizer::new(t.into_iter().map(|v| v * sigma).collect())
}

fn npdf_std(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        npdf(x, 1.0)
    }
}

/// How the cribbing quantizer is designed for a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum QuantizerRule {
    Uniform { spread: f64 },
    LloydMax,
}

impl Default for QuantizerRule {
    fn default() -> Self {
        QuantizerRule::Uniform { spread: 4.0 }
    }
}

impl QuantizerRule {
    /// Quantizer for `bits` bits scaled to `sigma`; `None` for a constant crib.
    pub fn build(self, bits: u32, sigma: f64) -> Result<Option<Quantizer>> {
        if bits == 0 {
            return Ok(None);
        }
        Ok(Some(match self {
            QuantizerRule::Uniform { spread } => make_quantizer(bits, spread, sigma)?,
            QuantizerRule::LloydMax => lloyd_max(bits, sigma)?,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianConfig {
    pub p1: f64,
    pub p2: f64,
    pub noise_n: f64,
    pub c12: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    /// Number of quantizer bits; 0 means the crib is constant.
    pub quant_bits: u32,
    #[serde(default)]
    pub quantizer: QuantizerRule,
    pub samples: usize,
    pub seed: u64,
}

impl GaussianConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [(self.p1, "p1"), (self.p2, "p2"), (self.noise_n, "noise_n")] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(GaussianError::NonPositiveParameter(name));
            }
        }
        if !(self.c12 >= 0.0) || !self.c12.is_finite() {
            return Err(GaussianError::NonPositiveParameter("c12"));
        }
        for (v, name) in [(self.beta1, "beta1"), (self.beta2, "beta2"), (self.rho, "rho")] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GaussianError::OutOfUnitInterval(name));
            }
        }
        if self.samples < MIN_SAMPLES {
            return Err(GaussianError::SampleCountTooSmall(self.samples));
        }
        let m2 = self.x2_power();
        if m2 > self.p2 * (1.0 + 1e-12) {
            return Err(GaussianError::PowerViolation(m2, self.p2));
        }
        Ok(())
    }

    /// Variance of the common part U.
    pub fn p0(&self) -> f64 {
        (((1.0 - self.beta1) * self.p1).sqrt() + ((1.0 - self.beta2) * self.p2).sqrt()).powi(2)
    }

    pub fn lambda(&self) -> f64 {
        let p0 = self.p0();
        if p0 > 0.0 {
            ((1.0 - self.beta1) * self.p1 / p0).sqrt()
        } else {
            0.0
        }
    }

    /// Exact second moment of X2 under the construction.
    pub fn x2_power(&self) -> f64 {
        let lb = 1.0 - self.lambda();
        lb * lb * self.p0() + (1.0 - self.rho) * self.beta2 * self.p2 + self.rho * self.beta1 * self.p1
    }
}

/// Mean of i.i.d. per-sample terms with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Default)]
struct Acc {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Acc {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        McEstimate { value: self.mean, std_error: (var / self.n as f64).sqrt(), samples: self.n }
    }
}

/// Closed-form region of the MAC without cooperation or cribbing.
pub fn inner_bound(p1: f64, p2: f64, noise_n: f64) -> Result<RegionBounds> {
    if !(noise_n > 0.0) {
        return Err(GaussianError::NonPositiveParameter("noise_n"));
    }
    if !(p1 >= 0.0) {
        return Err(GaussianError::NonPositiveParameter("p1"));
    }
    if !(p2 >= 0.0) {
        return Err(GaussianError::NonPositiveParameter("p2"));
    }
    let c = |snr: f64| 0.5 * (1.0 + snr).log2();
    Ok(RegionBounds {
        plane: Plane::R1R2,
        feasible: true,
        constraints: vec![
            bound("R1", 1.0, 0.0, c(p1 / noise_n)),
            bound("R2", 0.0, 1.0, c(p2 / noise_n)),
            bound("R1+R2", 1.0, 1.0, c((p1 + p2) / noise_n)),
        ],
    })
}

fn bound(label: &str, r1: f64, r2: f64, rhs: f64) -> Constraint {
    Constraint { label: label.into(), r0: 0.0, r1, r2, rhs, sense: Sense::AtMost }
}

/// Hull over ρ of the full-cooperation outer bound. Provenance is ρ.
pub fn outer_bound(p1: f64, p2: f64, noise_n: f64, rho_grid: &[f64]) -> Result<Frontier<f64>> {
    if !(p1 > 0.0) || !(p2 > 0.0) || !(noise_n > 0.0) {
        return Err(GaussianError::NonPositiveParameter("p1, p2, noise_n"));
    }
    if rho_grid.is_empty() {
        return Err(GaussianError::EmptyGrid("rho"));
    }
    let mut pts = Vec::new();
    for &rho in rho_grid {
        if !(0.0..=1.0).contains(&rho) {
            return Err(GaussianError::OutOfUnitInterval("rho"));
        }
        let b = outer_bound_at(p1, p2, noise_n, rho);
        for v in bounds_to_polytope(&b).expect("finite upper bounds").vertices {
            pts.push((v, rho));
        }
    }
    Ok(Frontier::from_points(Plane::R1R2, pts, |r| r.to_bits()))
}

/// Outer-bound constraints at one correlation ρ.
pub fn outer_bound_at(p1: f64, p2: f64, noise_n: f64, rho: f64) -> RegionBounds {
    let r2 = 0.5 * (1.0 + p2 * (1.0 - rho * rho) / noise_n).log2();
    let sum = 0.5 * (1.0 + (p1 + 2.0 * rho * (p1 * p2).sqrt() + p2) / noise_n).log2();
    RegionBounds {
        plane: Plane::R1R2,
        feasible: true,
        constraints: vec![bound("R2", 0.0, 1.0, r2), bound("R1+R2", 1.0, 1.0, sum)],
    }
}

/// Number of Gauss-Legendre nodes for integrals over one quantizer cell.
const CELL_NODES: usize = 16;
/// Nodes for integrals over the common part U on its CDF scale.
const U_NODES: usize = 48;
const Y_GRID: usize = 1601;

/// Per-point model constants.
struct Model {
    p0: f64,
    lam: f64,
    s1: f64,
    s2: f64,
    n: f64,
    rho: f64,
    edges: Vec<f64>,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
}

impl Model {
    /// Cell of X1' given U = u and crib symbol z.
    fn cell(&self, z: usize, u: f64) -> (f64, f64) {
        (self.edges[z] - self.lam * u, self.edges[z + 1] - self.lam * u)
    }

    fn cell_prob(&self, a: f64, b: f64) -> f64 {
        if self.s1 > 0.0 {
            cdf_diff(a / self.s1, b / self.s1)
        } else if a <= 0.0 && 0.0 < b {
            1.0
        } else {
            0.0
        }
    }

    /// Density at t of TN(0, s1^2; [a, b]) + N(0, v).
    fn s_c(&self, t: f64, a: f64, b: f64, v: f64) -> f64 {
        let s1 = self.s1;
        if s1 == 0.0 {
            return npdf(t, v);
        }
        let tot = s1 * s1 + v;
        let m = s1 * s1 / tot;
        let s = (s1 * s1 * v / tot).sqrt();
        let num = cdf_diff((a - m * t) / s, (b - m * t) / s);
        let den = cdf_diff(a / s1, b / s1);
        (npdf(t, tot) * num / den.max(1e-300)).max(1e-300)
    }

    /// Quantile nodes of TN(0, s1^2; [a, b]) for the cell quadrature.
    fn cell_nodes(&self, a: f64, b: f64) -> Vec<f64> {
        let s1 = self.s1;
        let (fa, fb) = (a / s1, b / s1);
        if fa > 0.0 {
            let (qa, qb) = (norm_sf(fa), norm_sf(fb));
            self.gl_x.iter().map(|&v| -s1 * norm_ppf(qa - v * (qa - qb))).collect()
        } else {
            let (pa, pb) = (norm_cdf(fa), norm_cdf(fb));
            self.gl_x.iter().map(|&v| s1 * norm_ppf(pa + v * (pb - pa))).collect()
        }
    }

    /// Density at t of the sum of two independent TN(0, s1^2; [a, b]) plus N(0, v).
    fn tn_tn(&self, t: f64, a: f64, b: f64, v: f64, nodes: &[f64]) -> f64 {
        if self.s1 == 0.0 {
            return npdf(t, v);
        }
        nodes.iter().zip(&self.gl_w).map(|(&x, &w)| w * self.s_c(t - x, a, b, v)).sum::<f64>().max(1e-300)
    }

    /// Entropy in bits of Z given U = u.
    fn h_z_given_u(&self, u: f64) -> f64 {
        let mut h = 0.0;
        for z in 0..self.edges.len() - 1 {
            let (a, b) = self.cell(z, u);
            let p = self.cell_prob(a, b);
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h
    }

    /// Tabulated marginal density of Y for the ρ-mixture part.
    fn py_table(&self) -> (f64, f64, Vec<f64>) {
        let var_y = self.p0 + 2.0 * self.s1 * self.s1 + self.s2 * self.s2 + self.n;
        let half = 9.0 * var_y.sqrt();
        let h = 2.0 * half / (Y_GRID - 1) as f64;
        let mut tab = vec![0.0; Y_GRID];
        if self.rho == 0.0 {
            return (-half, h, tab);
        }
        let (ux, uw): (Vec<f64>, Vec<f64>) = if self.p0 > 0.0 {
            let (x, w) = gauss_legendre(U_NODES);
            (x.iter().map(|&v| self.p0.sqrt() * norm_ppf(v)).collect(), w)
        } else {
            (vec![0.0], vec![1.0])
        };
        let cells = self.edges.len() - 1;
        for (&u, &wu) in ux.iter().zip(&uw) {
            for z in 0..cells {
                let (a, b) = self.cell(z, u);
                let pz = self.cell_prob(a, b);
                if pz < 1e-14 {
                    continue;
                }
                let nodes = if self.s1 > 0.0 { self.cell_nodes(a, b) } else { Vec::new() };
                for (k, slot) in tab.iter_mut().enumerate() {
                    let y = -half + h * k as f64;
                    *slot += wu * pz * self.tn_tn(y - u, a, b, self.n, &nodes);
                }
            }
        }
        (-half, h, tab)
    }

    /// Marginal density of Y at y.
    fn p_y(&self, y: f64, table: &(f64, f64, Vec<f64>)) -> f64 {
        let own = (1.0 - self.rho) * npdf(y, self.p0 + self.s1 * self.s1 + self.s2 * self.s2 + self.n);
        if self.rho == 0.0 {
            return own;
        }
        let (lo, h, tab) = table;
        let pos = (y - lo) / h;
        let mix = if pos <= 1.0 || pos >= (tab.len() - 2) as f64 {
            // far tail: the mixture part is negligible relative to `own`
            let k = (pos.max(0.0) as usize).min(tab.len() - 1);
            tab[k]
        } else {
            let k = pos.floor() as usize;
            let f = pos - k as f64;
            let (p0, p1, p2, p3) = (tab[k - 1], tab[k], tab[k + 1], tab[k + 2]);
            // Catmull-Rom cubic
            p1 + 0.5 * f * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)))
        };
        (own + self.rho * mix.max(0.0)).max(1e-300)
    }
}

/// Monte Carlo evaluation of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRegion {
    pub bounds: RegionBounds,
    /// Per-constraint estimates, in the order of `bounds.constraints`.
    pub estimates: Vec<McEstimate>,
    pub h_z_given_u: McEstimate,
    pub power_x1: McEstimate,
    pub power_x2: McEstimate,
}

impl McRegion {
    /// Root-sum-square of the constraint standard errors.
    pub fn pooled_std_error(&self) -> f64 {
        self.estimates.iter().map(|e| e.std_error * e.std_error).sum::<f64>().sqrt()
    }
}

/// Estimates the four bounds of the cribbing region (crib only at encoder 2,
/// X2 drawn given (U, Z)) under the construction at `cfg`.
pub fn mc_region_point(cfg: &GaussianConfig) -> Result<McRegion> {
    mc_region_stream(cfg, 0)
}

fn mc_region_stream(cfg: &GaussianConfig, stream: u64) -> Result<McRegion> {
    cfg.validate()?;
    let s1 = (cfg.beta1 * cfg.p1).sqrt();
    let s2 = (cfg.beta2 * cfg.p2).sqrt();
    let q = cfg.quantizer.build(cfg.quant_bits, if s1 > 0.0 { s1 } else { cfg.p1.sqrt() })?;
    let edges = q.as_ref().map_or(vec![f64::NEG_INFINITY, f64::INFINITY], |q| q.edges());
    let (gl_x, gl_w) = gauss_legendre(CELL_NODES);
    let m = Model { p0: cfg.p0(), lam: cfg.lambda(), s1, s2, n: cfg.noise_n, rho: cfg.rho, edges, gl_x, gl_w };
    let lamb = 1.0 - m.lam;
    let table = m.py_table();
    let mut rng = stream_rng(cfg.seed, stream);
    let mut acc: [Acc; 4] = Default::default();
    let (mut hz, mut pw1, mut pw2) = (Acc::default(), Acc::default(), Acc::default());
    let inv_ln2 = 1.0 / LN_2;
    for _ in 0..cfg.samples {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let mix = rng.random::<f64>() < cfg.rho;
        let v: f64 = rng.random();
        let u = m.p0.sqrt() * g[0];
        let x1p = s1 * g[1];
        let x1 = m.lam * u + x1p;
        let z = q.as_ref().map_or(0, |q| q.quantize(x1));
        let (a, b) = m.cell(z, u);
        let x2p = if mix {
            if s1 > 0.0 {
                // inverse-CDF draw from X1' restricted to its cell
                let (fa, fb) = (a / s1, b / s1);
                if fa > 0.0 {
                    let (qa, qb) = (norm_sf(fa), norm_sf(fb));
                    -s1 * norm_ppf(qa - v * (qa - qb))
                } else {
                    let (pa, pb) = (norm_cdf(fa), norm_cdf(fb));
                    s1 * norm_ppf(pa + v * (pb - pa))
                }
            } else {
                0.0
            }
        } else {
            s2 * g[2]
        };
        let x2 = lamb * u + x2p;
        let w = cfg.noise_n.sqrt() * g[3];
        let y = x1 + x2 + w;
        let lw = ln_npdf(w, cfg.noise_n);

        let h = m.h_z_given_u(u);
        // I(X1; Y | X2, Z, U)
        let t1 = (lw - m.s_c(y - x2 - m.lam * u, a, b, cfg.noise_n).ln()) * inv_ln2;
        // I(X2; Y | X1, U)
        let t = y - x1 - lamb * u;
        let p3 = (1.0 - cfg.rho) * npdf(t, s2 * s2 + cfg.noise_n)
            + if cfg.rho > 0.0 { cfg.rho * m.s_c(t, a, b, cfg.noise_n) } else { 0.0 };
        let t3 = (lw - p3.max(1e-300).ln()) * inv_ln2;
        // I(X1, X2; Y | U, Z)
        let t = y - u;
        let mut p4 = (1.0 - cfg.rho) * m.s_c(t, a, b, cfg.noise_n + s2 * s2);
        if cfg.rho > 0.0 {
            let nodes = if s1 > 0.0 { m.cell_nodes(a, b) } else { Vec::new() };
            p4 += cfg.rho * m.tn_tn(t, a, b, cfg.noise_n, &nodes);
        }
        let t4 = (lw - p4.max(1e-300).ln()) * inv_ln2;
        // I(X1, X2; Y)
        let t5 = (lw - m.p_y(y, &table).ln()) * inv_ln2;

        acc[0].push(t1 + h + cfg.c12);
        acc[1].push(t3);
        acc[2].push(t4 + h + cfg.c12);
        acc[3].push(t5);
        hz.push(h);
        pw1.push(x1 * x1);
        pw2.push(x2 * x2);
    }
    let estimates: Vec<McEstimate> = acc.iter().map(Acc::estimate).collect();
    let bounds = RegionBounds {
        plane: Plane::R1R2,
        feasible: true,
        constraints: vec![
            bound("R1", 1.0, 0.0, estimates[0].value),
            bound("R2", 0.0, 1.0, estimates[1].value),
            bound("R1+R2 (cooperation)", 1.0, 1.0, estimates[2].value),
            bound("R1+R2 (total)", 1.0, 1.0, estimates[3].value),
        ],
    };
    Ok(McRegion { bounds, estimates, h_z_given_u: hz.estimate(), power_x1: pw1.estimate(), power_x2: pw2.estimate() })
}

/// One evaluated point of a (β1, β2, ρ) sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub region: McRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub rho: Vec<f64>,
}

impl SweepGrid {
    /// Equally spaced grid of `k` values per parameter on [0, 1].
    pub fn uniform(k: usize) -> Self {
        let g: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1).max(1) as f64).collect();
        SweepGrid { beta1: g.clone(), beta2: g.clone(), rho: g }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFrontier {
    pub frontier: Frontier<usize>,
    pub points: Vec<SweepPoint>,
    /// Sweep keys skipped because the construction would exceed the power of X2.
    pub skipped: Vec<(f64, f64, f64)>,
}

impl GaussianFrontier {
    /// Pooled standard error of the sweep point behind vertex `i`.
    pub fn vertex_std_error(&self, i: usize) -> f64 {
        self.points[self.frontier.provenance[i]].region.pooled_std_error()
    }

    pub fn max_std_error(&self) -> f64 {
        self.points.iter().map(|p| p.region.pooled_std_error()).fold(0.0, f64::max)
    }

    pub fn max_sum_rate(&self) -> f64 {
        self.frontier.max_sum()
    }

    /// Sweep rows: parameters, four bounds, four standard errors.
    pub fn write_sweep_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["beta1", "beta2", "rho", "bound1", "bound2", "bound3", "bound4", "se1", "se2", "se3", "se4"])?;
        for p in &self.points {
            let mut row = vec![p.beta1.to_string(), p.beta2.to_string(), p.rho.to_string()];
            row.extend(p.region.estimates.iter().map(|e| e.value.to_string()));
            row.extend(p.region.estimates.iter().map(|e| e.std_error.to_string()));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Hull of the per-point polytopes over the sweep. Point `i` (in the sorted
/// key order β1, β2, ρ) uses random stream `i` of `base.seed`, so two sweeps
/// over the same grid share their random numbers point by point.
pub fn gaussian_frontier(base: &GaussianConfig, grid: &SweepGrid) -> Result<GaussianFrontier> {
    for (g, name) in [(&grid.beta1, "beta1"), (&grid.beta2, "beta2"), (&grid.rho, "rho")] {
        if g.is_empty() {
            return Err(GaussianError::EmptyGrid(name));
        }
        if g.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(GaussianError::OutOfUnitInterval(name));
        }
    }
    let mut keys: Vec<(f64, f64, f64)> = Vec::new();
    for &b1 in &grid.beta1 {
        for &b2 in &grid.beta2 {
            for &r in &grid.rho {
                keys.push((b1, b2, r));
            }
        }
    }
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    keys.dedup();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (i, &(b1, b2, r)) in keys.iter().enumerate() {
        let cfg = GaussianConfig { beta1: b1, beta2: b2, rho: r, ..base.clone() };
        match mc_region_stream(&cfg, i as u64) {
            Ok(region) => points.push(SweepPoint { index: points.len(), beta1: b1, beta2: b2, rho: r, region }),
            Err(GaussianError::PowerViolation(..)) => skipped.push((b1, b2, r)),
            Err(e) => return Err(e),
        }
    }
    let mut pts = Vec::new();
    for p in &points {
        let poly = bounds_to_polytope(&p.region.bounds).expect("finite upper bounds");
        pts.extend(poly.vertices.into_iter().map(|v| (v, p.index)));
    }
    let frontier = Frontier::from_points(Plane::R1R2, pts, |&i| i);
    Ok(GaussianFrontier { frontier, points, skipped })
}

/// Closed-form capacity of X + W with Gaussian X and W, in bits.
pub fn awgn_capacity(signal_var: f64, noise_var: f64) -> f64 {
    0.5 * (1.0 + signal_var / noise_var).log2()
}

/// Estimates I(X; X + W) for Gaussian X and W as the sample mean of
/// log p(y|x) - log p(y), the same estimator used for the region terms.
pub fn awgn_mi_estimate(signal_var: f64, noise_var: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(signal_var > 0.0) || !(noise_var > 0.0) {
        return Err(GaussianError::NonPositiveParameter("variance"));
    }
    if samples < MIN_SAMPLES {
        return Err(GaussianError::SampleCountTooSmall(samples));
    }
    let mut rng = stream_rng(seed, 0);
    let mut acc = Acc::default();
    for _ in 0..samples {
        let x = signal_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let w = noise_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        acc.push((ln_npdf(w, noise_var) - ln_npdf(x + w, signal_var + noise_var)) / LN_2);
    }
    Ok(acc.estimate())
}

/// Draws `samples` pairs (X, X + W) for the estimator cross-checks.
pub fn awgn_pairs(signal_var: f64, noise_var: f64, samples: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream_rng(seed, 1);
    (0..samples)
        .map(|_| {
            let x = signal_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let w = noise_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
            (x, x + w)
        })
        .unzip()
}

fn equal_mass_bins(v: &[f64], bins: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0; v.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = rank * bins / v.len();
    }
    out
}

/// Plug-in mutual information over equal-mass bins with the Miller-Madow
/// bias correction, in bits. The standard error is that of the per-sample
/// log ratio.
pub fn binned_mi(x: &[f64], y: &[f64], bins: usize) -> McEstimate {
    let n = x.len();
    let bx = equal_mass_bins(x, bins);
    let by = equal_mass_bins(y, bins);
    let mut joint = vec![0usize; bins * bins];
    let mut mx = vec![0usize; bins];
    let mut my = vec![0usize; bins];
    for i in 0..n {
        joint[bx[i] * bins + by[i]] += 1;
        mx[bx[i]] += 1;
        my[by[i]] += 1;
    }
    let nf = n as f64;
    let mut acc = Acc::default();
    for i in 0..n {
        let pxy = joint[bx[i] * bins + by[i]] as f64 / nf;
        let px = mx[bx[i]] as f64 / nf;
        let py = my[by[i]] as f64 / nf;
        acc.push((pxy / (px * py)).log2());
    }
    let nz = |v: &[usize]| v.iter().filter(|&&c| c > 0).count() as f64;
    let correction = (nz(&mx) - 1.0 + nz(&my) - 1.0 - (nz(&joint) - 1.0)) / (2.0 * nf * LN_2);
    let mut e = acc.estimate();
    e.value += correction;
    e
}

/// Kraskov-Stögbauer-Grassberger estimator (first variant, max-norm) for
/// scalar pairs, in bits.
pub fn ksg_mi(x: &[f64], y: &[f64], k: usize) -> McEstimate {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut ysorted = y.to_vec();
    ysorted.sort_by(f64::total_cmp);
    let count_within = |s: &[f64], c: f64, r: f64| {
        let lo = s.partition_point(|&v| v <= c - r);
        let hi = s.partition_point(|&v| v < c + r);
        hi - lo
    };
    let mut acc = Acc::default();
    let base = digamma(k as f64) + digamma(n as f64);
    let mut heap: Vec<f64> = Vec::with_capacity(k + 1);
    for i in 0..n {
        // k-th neighbour distance in max-norm, scanning outward in x order
        heap.clear();
        let (mut lo, mut hi) = (i, i + 1);
        loop {
            let kth = if heap.len() == k { heap[k - 1] } else { f64::INFINITY };
            let dl = if lo > 0 { xs[i] - xs[lo - 1] } else { f64::INFINITY };
            let dr = if hi < n { xs[hi] - xs[i] } else { f64::INFINITY };
            if dl.min(dr) >= kth || (lo == 0 && hi == n) {
                break;
            }
            let j = if dl <= dr {
                lo -= 1;
                lo
            } else {
                hi += 1;
                hi - 1
            };
            let d = (xs[i] - xs[j]).abs().max((ys[i] - ys[j]).abs());
            if d < kth {
                let pos = heap.partition_point(|&v| v <= d);
                heap.insert(pos, d);
                heap.truncate(k);
            }
        }
        let eps = heap[k - 1];
        let nx = count_within(&xs, xs[i], eps) - 1;
        let ny = count_within(&ysorted, ys[i], eps) - 1;
        acc.push((base - digamma(nx as f64 + 1.0) - digamma(ny as f64 + 1.0)) / LN_2);
    }
    acc.estimate()
}

/// Points of the inner-bound polytope, for containment checks.
pub fn inner_polytope(p1: f64, p2: f64, noise_n: f64) -> Result<Frontier<()>> {
    Ok(bounds_to_polytope(&inner_bound(p1, p2, noise_n)?).expect("finite upper bounds"))
}

/// Minimal SVG with one polyline per labelled frontier.
pub fn frontier_svg(curves: &[(&str, &[RatePoint])], timestamp: Option<&str>) -> String {
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let max = curves.iter().flat_map(|(_, v)| v.iter()).map(|p| p.r1.max(p.r2)).fold(0.0f64, f64::max).max(1e-9);
    let (w, h, m) = (480.0, 480.0, 50.0);
    let sx = |v: f64| m + v / max * (w - 2.0 * m);
    let sy = |v: f64| h - m - v / max * (h - 2.0 * m);
    let mut s = String::new();
    s.push_str(&format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n"));
    if let Some(ts) = timestamp {
        s.push_str(&format!("<!-- generated {ts} -->\n"));
    }
    s.push_str(&format!("<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", h - m, w - m, h - m));
    s.push_str(&format!("<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>\n", h - m));
    s.push_str(&format!("<text x=\"{}\" y=\"{}\">R1 (bits)</text>\n", w / 2.0 - 30.0, h - 15.0));
    s.push_str(&format!(
        "<text x=\"12\" y=\"{}\" transform=\"rotate(-90 12 {})\">R2 (bits)</text>\n",
        h / 2.0,
        h / 2.0
    ));
    s.push_str(&format!("<text x=\"{}\" y=\"{}\">{max:.3}</text>\n", w - m - 10.0, h - m + 15.0));
    for (i, (label, pts)) in curves.iter().enumerate() {
        let c = colors[i % colors.len()];
        let coords: Vec<String> = pts.iter().map(|p| format!("{:.4},{:.4}", sx(p.r1), sy(p.r2))).collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"><title>{label}</title></polyline>\n",
            coords.join(" ")
        ));
        s.push_str(&format!("<text x=\"{}\" y=\"{}\" fill=\"{c}\">{label}</text>\n", w - 160.0, m + 16.0 * i as f64));
    }
    s.push_str("</svg>\n");
    s
}
