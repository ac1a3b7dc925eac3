//! Single-distribution evaluation of the rate-region inequalities, the
//! conversion of bound sets to planar polytopes, and the corner points of the
//! MAC / successive-refinement duality.

use crate::geometry::{Frontier, Plane, RatePoint};
use crate::info::{InfoError, JointPmf, Pmf};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("distribution lacks axis `{0}`")]
    MissingAxis(String),
    #[error("region is infeasible for this distribution")]
    Infeasible,
    #[error("region is unbounded in the {0} direction")]
    Unbounded(&'static str),
    #[error("lower-bound regions have no finite polytope")]
    LowerBoundRegion,
    #[error("source marginal differs from the specified source by {0:e}")]
    SourceMismatch(f64),
    #[error("reconstruction X̂2 is not a deterministic function of (U, Z)")]
    NonDeterministicReconstruction,
    #[error("distributions are not related by the duality renaming (max difference {0:e})")]
    AxisMapMismatch(f64),
    #[error("invalid link capacities ({0}, {1})")]
    BadLinks(f64, f64),
    #[error("distortion matrix has wrong shape")]
    DistortionShape,
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// Conference-link capacities in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LinkCapacities {
    pub c12: f64,
    pub c21: f64,
}

impl LinkCapacities {
    pub fn new(c12: f64, c21: f64) -> Result<Self> {
        let l = LinkCapacities { c12, c21 };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c12.is_finite() && self.c21.is_finite() && self.c12 >= 0.0 && self.c21 >= 0.0 {
            Ok(())
        } else {
            Err(RegionError::BadLinks(self.c12, self.c21))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    AtMost,
    AtLeast,
}

/// `r0*R0 + r1*R1 + r2*R2 (<= | >=) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub rhs: f64,
    pub sense: Sense,
}

impl Constraint {
    fn at_most(label: &str, r0: f64, r1: f64, r2: f64, rhs: f64) -> Self {
        Constraint { label: label.into(), r0, r1, r2, rhs, sense: Sense::AtMost }
    }

    fn at_least(label: &str, r0: f64, r1: f64, r2: f64, rhs: f64) -> Self {
        Constraint { label: label.into(), r0, r1, r2, rhs, sense: Sense::AtLeast }
    }

    /// Coefficients projected on the plane's (x, y).
    pub fn plane_coeffs(&self, plane: Plane) -> (f64, f64) {
        match plane {
            Plane::R1R2 => (self.r1, self.r2),
            Plane::R0R1 => (self.r0, self.r1),
        }
    }

    pub fn satisfied(&self, plane: Plane, p: RatePoint, tol: f64) -> bool {
        let (a, b) = self.plane_coeffs(plane);
        let lhs = a * p.r1 + b * p.r2;
        match self.sense {
            Sense::AtMost => lhs <= self.rhs + tol,
            Sense::AtLeast => lhs >= self.rhs - tol,
        }
    }
}

/// The inequality system of one region at one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBounds {
    pub plane: Plane,
    pub constraints: Vec<Constraint>,
    pub feasible: bool,
}

impl RegionBounds {
    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    pub fn max_rhs_diff(&self, other: &RegionBounds) -> f64 {
        self.constraints.iter().zip(&other.constraints).map(|(a, b)| (a.rhs - b.rhs).abs()).fold(0.0, f64::max)
    }

    /// True if all constraints hold at `p` (coordinates in the bound plane).
    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        p.r1 >= -tol && p.r2 >= -tol && self.constraints.iter().all(|c| c.satisfied(self.plane, p, tol))
    }
}

/// Which factorization family of the two-sided cribbing region is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CribCase {
    /// X2 drawn from P(x2|u)
    A,
    /// X2 drawn from P(x2|u,z1)
    B,
}

/// Strictly causal or causal cribbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Causality {
    StrictlyCausal,
    Causal,
}

/// Memoizes entropies of axis subsets of one joint.
struct Terms<'a> {
    p: &'a JointPmf,
    cache: HashMap<u64, f64>,
}

impl<'a> Terms<'a> {
    fn new(p: &'a JointPmf, required: &[&str]) -> Result<Self> {
        for r in required {
            if !p.has_axis(r) {
                return Err(RegionError::MissingAxis(r.to_string()));
            }
        }
        Ok(Terms { p, cache: HashMap::new() })
    }

    fn m(&self, names: &[&str]) -> u64 {
        self.p.mask(names).expect("axes checked on construction")
    }

    fn hm(&mut self, mask: u64) -> f64 {
        let p = self.p;
        *self.cache.entry(mask).or_insert_with(|| p.entropy_mask(mask))
    }

    /// H(a | c)
    fn h(&mut self, a: &[&str], c: &[&str]) -> f64 {
        let (ma, mc) = (self.m(a), self.m(c));
        (self.hm(ma | mc) - self.hm(mc)).max(0.0)
    }

    /// I(a; b | c)
    fn i(&mut self, a: &[&str], b: &[&str], c: &[&str]) -> f64 {
        let (ma, mb, mc) = (self.m(a), self.m(b), self.m(c));
        (self.hm(ma | mc) + self.hm(mb | mc) - self.hm(ma | mb | mc) - self.hm(mc)).max(0.0)
    }
}

const THM1_AXES: [&str; 6] = ["U", "X1", "Z1", "X2", "Z2", "Y"];

/// Two-sided cooperation and cribbing region at one distribution over
/// (U, X1, Z1, X2, Z2, Y). The inequalities are the same for both cases;
/// the case only fixes which factorization family `p` is drawn from.
pub fn eval_theorem1(p: &JointPmf, links: LinkCapacities, _case: CribCase) -> Result<RegionBounds> {
    links.validate()?;
    let mut t = Terms::new(p, &THM1_AXES)?;
    let hz1 = t.h(&["Z1"], &["U"]);
    let hz2 = t.h(&["Z2"], &["U"]);
    let hz12 = t.h(&["Z1", "Z2"], &["U"]);
    let c = vec![
        Constraint::at_most("R1", 0.0, 1.0, 0.0, t.i(&["X1"], &["Y"], &["X2", "Z1", "U"]) + hz1 + links.c12),
        Constraint::at_most("R2", 0.0, 0.0, 1.0, t.i(&["X2"], &["Y"], &["X1", "Z2", "U"]) + hz2 + links.c21),
        Constraint::at_most(
            "R1+R2 (cooperation)",
            0.0,
            1.0,
            1.0,
            t.i(&["X1", "X2"], &["Y"], &["U", "Z1", "Z2"]) + hz12 + links.c12 + links.c21,
        ),
        Constraint::at_most("R1+R2 (total)", 0.0, 1.0, 1.0, t.i(&["X1", "X2"], &["Y"], &[])),
    ];
    Ok(RegionBounds { plane: Plane::R1R2, constraints: c, feasible: true })
}

/// The common-message region in (R̃0, R̃1, R̃2) mapped back through
/// R̃0 = C12 + C21, R̃1 = R1 - C12, R̃2 = R2 - C21.
pub fn theorem1_via_common_message(p: &JointPmf, links: LinkCapacities) -> Result<RegionBounds> {
    links.validate()?;
    let mut t = Terms::new(p, &THM1_AXES)?;
    // constraints on the tilde rates: (c0, c1, c2, rhs)
    let tilde = [
        ("R1", 0.0, 1.0, 0.0, t.h(&["Z1"], &["U"]) + t.i(&["X1"], &["Y"], &["X2", "Z1", "U"])),
        ("R2", 0.0, 0.0, 1.0, t.h(&["Z2"], &["U"]) + t.i(&["X2"], &["Y"], &["X1", "Z2", "U"])),
        (
            "R1+R2 (cooperation)",
            0.0,
            1.0,
            1.0,
            t.i(&["X1", "X2"], &["Y"], &["U", "Z1", "Z2"]) + t.h(&["Z1", "Z2"], &["U"]),
        ),
        ("R1+R2 (total)", 1.0, 1.0, 1.0, t.i(&["X1", "X2"], &["Y"], &[])),
    ];
    // c0*R̃0 + c1*R̃1 + c2*R̃2 <= rhs becomes
    // c1*R1 + c2*R2 <= rhs - c0*(C12+C21) + c1*C12 + c2*C21
    let r0 = links.c12 + links.c21;
    let constraints = tilde
        .iter()
        .map(|&(label, c0, c1, c2, rhs)| {
            Constraint::at_most(label, 0.0, c1, c2, rhs - c0 * r0 + c1 * links.c12 + c2 * links.c21)
        })
        .collect();
    Ok(RegionBounds { plane: Plane::R1R2, constraints, feasible: true })
}

/// Common + private message MAC with combined cooperation and cribbing, at one
/// distribution over (U, X1, Z, X2, Y). Plane (R0, R1).
pub fn eval_theorem2(p: &JointPmf, c12: f64) -> Result<RegionBounds> {
    LinkCapacities::new(c12, 0.0)?;
    let mut t = Terms::new(p, &["U", "X1", "Z", "X2", "Y"])?;
    let c = vec![
        Constraint::at_most("R1", 0.0, 1.0, 0.0, t.i(&["X1"], &["Y"], &["Z", "U"]) + t.h(&["Z"], &["U"]) + c12),
        Constraint::at_most("R0+R1", 1.0, 1.0, 0.0, t.i(&["X1", "U"], &["Y"], &[])),
    ];
    Ok(RegionBounds { plane: Plane::R0R1, constraints: c, feasible: true })
}

/// Source and distortion targets of the successive-refinement problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrSpec {
    pub source: Pmf,
    /// `distortion1[x][x̂1]`
    pub distortion1: Vec<Vec<f64>>,
    /// `distortion2[x][x̂2]`
    pub distortion2: Vec<Vec<f64>>,
    pub d1: f64,
    pub d2: f64,
}

impl SrSpec {
    /// Hamming distortions on a common alphabet.
    pub fn hamming(source: Pmf, d1: f64, d2: f64) -> Self {
        let k = source.alphabet_size();
        let ham: Vec<Vec<f64>> = (0..k).map(|x| (0..k).map(|y| if x == y { 0.0 } else { 1.0 }).collect()).collect();
        SrSpec { source, distortion1: ham.clone(), distortion2: ham, d1, d2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrReport {
    pub bounds: RegionBounds,
    pub expected_d1: f64,
    pub expected_d2: f64,
    pub meets_d1: bool,
    pub meets_d2: bool,
}

fn expected_distortion(p: &JointPmf, xh: &str, d: &[Vec<f64>]) -> Result<f64> {
    let m = p.marginal(&["X", xh])?;
    let (nx, ny) = (m.axes()[0].size, m.axes()[1].size);
    if d.len() != nx || d.iter().any(|r| r.len() != ny || r.iter().any(|&v| !(v >= 0.0))) {
        return Err(RegionError::DistortionShape);
    }
    Ok(m.table().chunks(ny).zip(d).map(|(row, dr)| row.iter().zip(dr).map(|(p, v)| p * v).sum::<f64>()).sum())
}

/// Rate-distortion region for successive refinement with cooperating and
/// cribbing decoders, at one distribution over (X, X̂1, X̂2, Z, U).
/// Both constraints are lower bounds in the (R0, R1) plane.
pub fn eval_theorem3(spec: &SrSpec, p: &JointPmf, c12: f64) -> Result<SrReport> {
    LinkCapacities::new(c12, 0.0)?;
    let mut t = Terms::new(p, &["X", "Xh1", "Xh2", "Z", "U"])?;
    let px = p.marginal(&["X"])?;
    if px.table().len() != spec.source.alphabet_size() {
        return Err(RegionError::SourceMismatch(f64::INFINITY));
    }
    let dev = px.table().iter().zip(spec.source.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(RegionError::SourceMismatch(dev));
    }
    if t.h(&["Xh2"], &["U", "Z"]) > 1e-12 {
        return Err(RegionError::NonDeterministicReconstruction);
    }
    let r0 = (t.i(&["X"], &["Z", "U"], &[]) - t.h(&["Z"], &["U"]) - c12).max(0.0);
    let r01 = t.i(&["Xh1", "U"], &["X"], &[]);
    let bounds = RegionBounds {
        plane: Plane::R0R1,
        constraints: vec![
            Constraint::at_least("R0", 1.0, 0.0, 0.0, r0),
            Constraint::at_least("R0+R1", 1.0, 1.0, 0.0, r01),
        ],
        feasible: true,
    };
    let e1 = expected_distortion(p, "Xh1", &spec.distortion1)?;
    let e2 = expected_distortion(p, "Xh2", &spec.distortion2)?;
    Ok(SrReport {
        bounds,
        expected_d1: e1,
        expected_d2: e2,
        meets_d1: e1 <= spec.d1 + 1e-12,
        meets_d2: e2 <= spec.d2 + 1e-12,
    })
}

/// State known non-causally at the cribbing encoder and at the decoder, at one
/// distribution over (S, U, X1, Z, X2, Y). Infeasible when C21 < I(U;S).
pub fn eval_theorem4(p: &JointPmf, links: LinkCapacities, _case: Causality) -> Result<RegionBounds> {
    links.validate()?;
    let mut t = Terms::new(p, &["S", "U", "X1", "Z", "X2", "Y"])?;
    let ius = t.i(&["U"], &["S"], &[]);
    let hz = t.h(&["Z"], &["U"]);
    let c = vec![
        Constraint::at_most("R1", 0.0, 1.0, 0.0, hz + t.i(&["X1"], &["Y"], &["S", "U", "X2", "Z"]) + links.c12),
        Constraint::at_most("R2", 0.0, 0.0, 1.0, t.i(&["X2"], &["Y"], &["X1", "S", "U"]) + links.c21 - ius),
        Constraint::at_most("R1+R2 (total)", 0.0, 1.0, 1.0, t.i(&["X1", "X2"], &["Y"], &["S"])),
        Constraint::at_most(
            "R1+R2 (cooperation)",
            0.0,
            1.0,
            1.0,
            t.i(&["X1", "X2"], &["Y"], &["U", "Z", "S"]) + hz + links.c12 + links.c21 - ius,
        ),
    ];
    Ok(RegionBounds { plane: Plane::R1R2, constraints: c, feasible: links.c21 >= ius })
}

const THM5_AXES: [&str; 8] = ["W", "V", "A", "S", "X1", "U", "X2", "Y"];

/// Action-dependent state known at the cribbing encoder, at one distribution
/// over (W, V, A, S, X1, U, X2, Y). Binning penalties are subtracted without
/// clamping; negative values are clamped only when forming polytopes.
pub fn eval_theorem5(p: &JointPmf, c12: f64, _case: Causality) -> Result<RegionBounds> {
    LinkCapacities::new(c12, 0.0)?;
    let mut t = Terms::new(p, &THM5_AXES)?;
    let pen = t.i(&["U"], &["S"], &["W", "V", "A"]);
    let r1 = t.h(&["X1"], &["V", "W"]).min(t.i(&["Y"], &["V", "X1", "U"], &["W", "A"]) - pen) + c12;
    let c = vec![
        Constraint::at_most("R1", 0.0, 1.0, 0.0, r1),
        Constraint::at_most("R2", 0.0, 0.0, 1.0, t.i(&["U", "A"], &["Y"], &["X1", "V", "W"]) - pen),
        Constraint::at_most(
            "R1+R2 (cooperation)",
            0.0,
            1.0,
            1.0,
            t.i(&["X1", "V", "U", "A"], &["Y"], &["W"]) - pen + c12,
        ),
        Constraint::at_most("R1+R2 (total)", 0.0, 1.0, 1.0, t.i(&["X1", "V", "U", "A", "W"], &["Y"], &[]) - pen),
    ];
    Ok(RegionBounds { plane: Plane::R1R2, constraints: c, feasible: true })
}

/// The state-dependent MAC with state at a cribbing encoder and no actions,
/// at one distribution over (W, V, S, X1, U, X2, Y).
pub fn eval_state_cribbing_no_action(p: &JointPmf) -> Result<RegionBounds> {
    let mut t = Terms::new(p, &["W", "V", "S", "X1", "U", "X2", "Y"])?;
    let pen = t.i(&["U"], &["S"], &["W", "V"]);
    let c = vec![
        Constraint::at_most("R1", 0.0, 1.0, 0.0, t.h(&["X1"], &["V", "W"])),
        Constraint::at_most("R2", 0.0, 0.0, 1.0, t.i(&["U"], &["Y"], &["X1", "V", "W"]) - pen),
        Constraint::at_most("R1+R2 (cooperation)", 0.0, 1.0, 1.0, t.i(&["X1", "V", "U"], &["Y"], &["W"]) - pen),
        Constraint::at_most("R1+R2 (total)", 0.0, 1.0, 1.0, t.i(&["X1", "V", "U", "W"], &["Y"], &[]) - pen),
    ];
    Ok(RegionBounds { plane: Plane::R1R2, constraints: c, feasible: true })
}

/// Replaces each single-rate bound by the smallest sum bound when that is
/// smaller. For nonnegative rates this leaves the region unchanged.
pub fn tighten(b: &RegionBounds) -> RegionBounds {
    let mut out = b.clone();
    let sum_min = b
        .constraints
        .iter()
        .filter(|c| c.sense == Sense::AtMost && c.r1 == 1.0 && c.r2 == 1.0 && c.r0 == 0.0)
        .map(|c| c.rhs)
        .fold(f64::INFINITY, f64::min);
    for c in out.constraints.iter_mut() {
        let single = c.r0 == 0.0 && (c.r1 == 0.0) != (c.r2 == 0.0);
        if c.sense == Sense::AtMost && single {
            c.rhs = c.rhs.min(sum_min);
        }
    }
    out
}

/// Vertices of `{(x, y) >= 0}` cut by the upper-bound constraints, in the
/// bound plane. Negative right-hand sides are clamped to 0 first.
pub fn bounds_to_polytope(b: &RegionBounds) -> Result<Frontier<()>> {
    if !b.feasible {
        return Err(RegionError::Infeasible);
    }
    let mut lines: Vec<(f64, f64, f64)> = vec![(-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)];
    let (mut bx, mut by) = (false, false);
    for c in &b.constraints {
        if c.sense == Sense::AtLeast {
            return Err(RegionError::LowerBoundRegion);
        }
        let (a, bb) = c.plane_coeffs(b.plane);
        if a == 0.0 && bb == 0.0 {
            continue;
        }
        bx |= a > 0.0;
        by |= bb > 0.0;
        lines.push((a, bb, c.rhs.max(0.0)));
    }
    if !bx {
        return Err(RegionError::Unbounded("x"));
    }
    if !by {
        return Err(RegionError::Unbounded("y"));
    }
    let feasible = |x: f64, y: f64| lines.iter().all(|&(a, bb, r)| a * x + bb * y <= r + 1e-10);
    let mut pts = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            if feasible(x, y) {
                pts.push((RatePoint::new(x.max(0.0), y.max(0.0)), ()));
            }
        }
    }
    Ok(Frontier::from_points(b.plane, pts, |_| 0u8))
}

/// One pair of corner points in the (R0, R1) plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corners {
    pub corner1: RatePoint,
    pub corner2: RatePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub mac: Corners,
    pub sr: Corners,
    pub max_difference: f64,
}

/// Axis renaming that carries a MAC distribution to its source-coding dual.
pub const DUALITY_MAP: [(&str, &str); 3] = [("Y", "X"), ("X1", "Xh1"), ("X2", "Xh2")];

fn corners(p: &JointPmf, out: &str, inp: &str, c12: f64) -> Result<Corners> {
    let mut t = Terms::new(p, &[out, inp, "Z", "U"])?;
    let hz = t.h(&["Z"], &["U"]);
    Ok(Corners {
        corner1: RatePoint::new(t.i(&[out], &["Z", "U"], &[]) - hz - c12, t.i(&[out], &[inp], &["Z", "U"]) + hz + c12),
        corner2: RatePoint::new(t.i(&[out], &[inp, "U"], &[]), 0.0),
    })
}

/// Evaluates the corner points on both sides of the duality and checks that
/// `p_sr` is `p_mac` under [`DUALITY_MAP`].
pub fn check_duality_corners(p_mac: &JointPmf, p_sr: &JointPmf, c12: f64) -> Result<DualityReport> {
    LinkCapacities::new(c12, 0.0)?;
    let renamed = p_mac.rename(&DUALITY_MAP)?;
    let diff = renamed.max_abs_diff(p_sr).map_err(|_| RegionError::AxisMapMismatch(f64::INFINITY))?;
    if diff > 1e-12 {
        return Err(RegionError::AxisMapMismatch(diff));
    }
    let mac = corners(p_mac, "Y", "X1", c12)?;
    let sr = corners(p_sr, "X", "Xh1", c12)?;
    let max_difference = [
        mac.corner1.r1 - sr.corner1.r1,
        mac.corner1.r2 - sr.corner1.r2,
        mac.corner2.r1 - sr.corner2.r1,
        mac.corner2.r2 - sr.corner2.r2,
    ]
    .iter()
    .map(|d| d.abs())
    .fold(0.0, f64::max);
    Ok(DualityReport { mac, sr, max_difference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{Axis, DeterministicMap};

    /// Y = (X1, X2) with uniform independent inputs, other axes given by maps.
    fn clean_parallel(g1: &DeterministicMap, g2: &DeterministicMap) -> JointPmf {
        let base = JointPmf::from_fn(
            vec![Axis::new("U", 1), Axis::new("X1", 2), Axis::new("X2", 2), Axis::new("Y", 4)],
            |i| if i[3] == 2 * i[1] + i[2] { 0.25 } else { 0.0 },
        )
        .unwrap();
        let p = base.pushforward("X1", g1, "Z1").unwrap().pushforward("X2", g2, "Z2").unwrap();
        p.marginal(&THM1_AXES).unwrap()
    }

    #[test]
    fn clean_parallel_bounds() {
        for g in [DeterministicMap::constant(2), DeterministicMap::identity(2)] {
            let p = clean_parallel(&g, &g);
            let b = eval_theorem1(&p, LinkCapacities::default(), CribCase::A).unwrap();
            for (v, e) in b.rhs().iter().zip([1.0, 1.0, 2.0, 2.0]) {
                assert!((v - e).abs() < 1e-12);
            }
            let c = theorem1_via_common_message(&p, LinkCapacities::default()).unwrap();
            assert!(b.max_rhs_diff(&c) < 1e-12);
            let poly = bounds_to_polytope(&b).unwrap();
            assert_eq!(poly.vertices.len(), 4);
        }
    }

    #[test]
    fn useless_channel_gives_origin() {
        let p = JointPmf::from_fn(THM1_AXES.iter().map(|n| Axis::new(*n, 1)).collect(), |_| 1.0).unwrap();
        let b = eval_theorem1(&p, LinkCapacities::new(0.3, 0.2).unwrap(), CribCase::B).unwrap();
        assert_eq!(b.constraints[3].rhs, 0.0);
        let f = bounds_to_polytope(&b).unwrap();
        assert_eq!(f.vertices, vec![RatePoint::new(0.0, 0.0)]);
    }

    #[test]
    fn pentagon_and_square() {
        let mk = |r: [f64; 4]| RegionBounds {
            plane: Plane::R1R2,
            feasible: true,
            constraints: vec![
                Constraint::at_most("a", 0.0, 1.0, 0.0, r[0]),
                Constraint::at_most("b", 0.0, 0.0, 1.0, r[1]),
                Constraint::at_most("c", 0.0, 1.0, 1.0, r[2]),
                Constraint::at_most("d", 0.0, 1.0, 1.0, r[3]),
            ],
        };
        let sq = bounds_to_polytope(&mk([1.0, 1.0, 2.0, 2.0])).unwrap();
        assert_eq!(
            sq.vertices,
            vec![
                RatePoint::new(0.0, 0.0),
                RatePoint::new(1.0, 0.0),
                RatePoint::new(1.0, 1.0),
                RatePoint::new(0.0, 1.0)
            ]
        );
        let pent = bounds_to_polytope(&mk([1.0, 1.0, 1.5, 1.5])).unwrap();
        let expect = [(0.0, 0.0), (1.0, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 1.0)];
        assert_eq!(pent.vertices.len(), 5);
        for (v, e) in pent.vertices.iter().zip(expect) {
            assert!((v.r1 - e.0).abs() < 1e-12 && (v.r2 - e.1).abs() < 1e-12);
        }
        let mut inf = mk([1.0, 1.0, 1.5, 1.5]);
        inf.feasible = false;
        assert_eq!(bounds_to_polytope(&inf), Err(RegionError::Infeasible));
    }

    #[test]
    fn theorem2_examples() {
        // U, Z constant, Y = X1 uniform
        let p = JointPmf::from_fn(
            vec![Axis::new("U", 1), Axis::new("X1", 2), Axis::new("Z", 1), Axis::new("X2", 1), Axis::new("Y", 2)],
            |i| if i[1] == i[4] { 0.5 } else { 0.0 },
        )
        .unwrap();
        let b = eval_theorem2(&p, 0.0).unwrap();
        assert!((b.rhs()[0] - 1.0).abs() < 1e-12 && (b.rhs()[1] - 1.0).abs() < 1e-12);
        // perfect cribbing Z = X1
        let q = JointPmf::from_fn(
            vec![Axis::new("U", 1), Axis::new("X1", 2), Axis::new("Z", 2), Axis::new("X2", 1), Axis::new("Y", 2)],
            |i| if i[1] == i[4] && i[1] == i[2] { 0.5 } else { 0.0 },
        )
        .unwrap();
        let b = eval_theorem2(&q, 0.5).unwrap();
        assert!((b.rhs()[0] - 1.5).abs() < 1e-12 && (b.rhs()[1] - 1.0).abs() < 1e-12);
        let poly = bounds_to_polytope(&b).unwrap();
        assert_eq!(poly.plane, Plane::R0R1);
        assert_eq!(poly.vertices.len(), 3);
    }

    #[test]
    fn theorem3_examples() {
        let spec = SrSpec::hamming(Pmf::uniform(2), 0.0, 0.5);
        let axes =
            || vec![Axis::new("X", 2), Axis::new("Xh1", 2), Axis::new("Xh2", 2), Axis::new("Z", 1), Axis::new("U", 1)];
        let lossless = JointPmf::from_fn(axes(), |i| if i[0] == i[1] && i[2] == 0 { 0.5 } else { 0.0 }).unwrap();
        let r = eval_theorem3(&spec, &lossless, 0.0).unwrap();
        assert!((r.bounds.constraints[1].rhs - 1.0).abs() < 1e-12);
        assert_eq!(r.expected_d1, 0.0);
        assert!(r.meets_d1 && r.meets_d2);
        let indep = JointPmf::from_fn(axes(), |i| if i[2] == 0 { 0.25 } else { 0.0 }).unwrap();
        let r = eval_theorem3(&spec, &indep, 0.0).unwrap();
        assert!(r.bounds.constraints[1].rhs.abs() < 1e-12);
        assert!((r.expected_d1 - 0.5).abs() < 1e-12);
        let biased = SrSpec::hamming(Pmf::new(vec![0.9, 0.1]).unwrap(), 0.0, 0.0);
        assert!(matches!(eval_theorem3(&biased, &indep, 0.0), Err(RegionError::SourceMismatch(_))));
    }

    #[test]
    fn theorem4_feasibility_flag() {
        // S uniform, U = S
        let p = JointPmf::from_fn(
            vec![
                Axis::new("S", 2),
                Axis::new("U", 2),
                Axis::new("X1", 1),
                Axis::new("Z", 1),
                Axis::new("X2", 2),
                Axis::new("Y", 2),
            ],
            |i| if i[0] == i[1] && i[5] == i[4] ^ i[0] { 0.25 } else { 0.0 },
        )
        .unwrap();
        let b = eval_theorem4(&p, LinkCapacities::new(0.0, 0.0).unwrap(), Causality::StrictlyCausal).unwrap();
        assert!(!b.feasible);
        let b = eval_theorem4(&p, LinkCapacities::new(0.0, 1.0).unwrap(), Causality::StrictlyCausal).unwrap();
        assert!(b.feasible);
        assert!((b.constraints[1].rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_axis_reported() {
        let p = JointPmf::new(vec![Axis::new("U", 1)], vec![1.0]).unwrap();
        assert!(matches!(eval_theorem1(&p, LinkCapacities::default(), CribCase::A), Err(RegionError::MissingAxis(_))));
    }
}
