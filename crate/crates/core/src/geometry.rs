//! Planar convex hulls of downward-closed rate regions.
//!
//! The hull merge used by the searches is order-insensitive: candidate points
//! are sorted by coordinates and then by a caller-supplied key before
//! deduplication, so any permutation of the input yields the same frontier.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::Write;

/// Points closer than this in L-infinity are treated as one vertex.
pub const DEDUP_TOL: f64 = 1e-9;
/// Cross products below this (relative to edge length) count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Which pair of rates the two coordinates represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    /// x = R1, y = R2
    R1R2,
    /// x = R0, y = R1
    R0R1,
}

impl Plane {
    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            Plane::R1R2 => ("r1", "r2"),
            Plane::R0R1 => ("r0", "r1"),
        }
    }
}

/// A rate pair in the coordinates of the enclosing plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        RatePoint { r1, r2 }
    }

    fn linf(self, o: RatePoint) -> f64 {
        (self.r1 - o.r1).abs().max((self.r2 - o.r2).abs())
    }
}

fn cross(o: RatePoint, a: RatePoint, b: RatePoint) -> f64 {
    (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1)
}

fn turns_left(o: RatePoint, a: RatePoint, b: RatePoint) -> bool {
    let scale = ((a.r1 - o.r1).hypot(a.r2 - o.r2)).max((b.r1 - o.r1).hypot(b.r2 - o.r2)).max(1.0);
    cross(o, a, b) > COLLINEAR_TOL * scale
}

fn cmp_xy(a: RatePoint, b: RatePoint) -> Ordering {
    a.r1.total_cmp(&b.r1).then(a.r2.total_cmp(&b.r2))
}

/// Counterclockwise hull of a downward-closed region in the positive quadrant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier<P> {
    pub plane: Plane,
    pub vertices: Vec<RatePoint>,
    pub provenance: Vec<P>,
}

impl<P: Clone> Frontier<P> {
    /// Hull of the comprehensive closure of `points`: each point also
    /// contributes its projections on both axes, and the origin is included.
    /// `key` breaks ties so the result does not depend on input order.
    pub fn from_points<K: Ord>(plane: Plane, points: Vec<(RatePoint, P)>, key: impl Fn(&P) -> K) -> Self {
        let mut cand: Vec<(RatePoint, P)> = Vec::with_capacity(points.len() * 3 + 1);
        for (p, prov) in points {
            let p = RatePoint::new(p.r1.max(0.0), p.r2.max(0.0));
            cand.push((RatePoint::new(p.r1, 0.0), prov.clone()));
            cand.push((RatePoint::new(0.0, p.r2), prov.clone()));
            cand.push((p, prov));
        }
        let origin_prov = cand.iter().min_by(|a, b| key(&a.1).cmp(&key(&b.1))).map(|c| c.1.clone());
        match origin_prov {
            None => Frontier { plane, vertices: Vec::new(), provenance: Vec::new() },
            Some(op) => {
                cand.push((RatePoint::new(0.0, 0.0), op));
                let (vertices, provenance) = hull_with(cand, &key);
                Frontier { plane, vertices, provenance }
            }
        }
    }

    pub fn map_provenance<Q>(self, f: impl FnMut(P) -> Q) -> Frontier<Q> {
        Frontier {
            plane: self.plane,
            vertices: self.vertices,
            provenance: self.provenance.into_iter().map(f).collect(),
        }
    }
}

/// Moves every coordinate within `DEDUP_TOL` of the smallest value of its
/// cluster onto that value. Clusters chain through sorted neighbours.
fn snap_axis<P>(pts: &mut [(RatePoint, P)], coord: impl Fn(&mut RatePoint) -> &mut f64) {
    let mut order: Vec<(f64, usize)> = pts.iter_mut().enumerate().map(|(i, p)| (*coord(&mut p.0), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rep = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for (v, i) in order {
        if v - prev > DEDUP_TOL {
            rep = v;
        }
        prev = v;
        *coord(&mut pts[i].0) = rep;
    }
}

/// Monotone-chain hull with near-duplicate merge and collinear removal.
/// Returns vertices counterclockwise starting from the lowest-leftmost point.
pub fn hull_with<P: Clone, K: Ord>(mut pts: Vec<(RatePoint, P)>, key: &impl Fn(&P) -> K) -> (Vec<RatePoint>, Vec<P>) {
    // Coordinates that differ by rounding noise would otherwise form
    // near-vertical or near-horizontal edges whose cross products sit below
    // the collinearity threshold, and the chain could drop a true extreme.
    snap_axis(&mut pts, |p| &mut p.r1);
    snap_axis(&mut pts, |p| &mut p.r2);
    pts.sort_by(|a, b| cmp_xy(a.0, b.0).then_with(|| key(&a.1).cmp(&key(&b.1))));
    // merge near-duplicates, keeping the point with the smallest key
    let mut uniq: Vec<(RatePoint, P)> = Vec::with_capacity(pts.len());
    for (p, prov) in pts {
        let mut merged = false;
        for q in uniq.iter_mut().rev() {
            if p.r1 - q.0.r1 > DEDUP_TOL {
                break;
            }
            if p.linf(q.0) <= DEDUP_TOL {
                if key(&prov) < key(&q.1) {
                    q.1 = prov.clone();
                }
                merged = true;
                break;
            }
        }
        if !merged {
            uniq.push((p, prov));
        }
    }
    if uniq.len() <= 2 {
        return uniq.into_iter().unzip();
    }
    let n = uniq.len();
    let mut h: Vec<usize> = Vec::with_capacity(2 * n);
    for i in 0..n {
        while h.len() >= 2 && !turns_left(uniq[h[h.len() - 2]].0, uniq[h[h.len() - 1]].0, uniq[i].0) {
            h.pop();
        }
        h.push(i);
    }
    let lower = h.len() + 1;
    for i in (0..n - 1).rev() {
        while h.len() >= lower && !turns_left(uniq[h[h.len() - 2]].0, uniq[h[h.len() - 1]].0, uniq[i].0) {
            h.pop();
        }
        h.push(i);
    }
    h.pop();
    if h.len() == 2 && uniq[h[0]].0.linf(uniq[h[1]].0) <= DEDUP_TOL {
        h.pop();
    }
    h.into_iter().map(|i| uniq[i].clone()).unzip()
}

fn seg_dist(p: RatePoint, a: RatePoint, b: RatePoint) -> f64 {
    let (dx, dy) = (b.r1 - a.r1, b.r2 - a.r2);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.r1 - a.r1) * dx + (p.r2 - a.r2) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p.r1 - a.r1 - t * dx).hypot(p.r2 - a.r2 - t * dy)
}

impl<P> Frontier<P> {
    /// Euclidean distance from `p` to the hull (0 inside).
    pub fn distance(&self, p: RatePoint) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => (p.r1 - v[0].r1).hypot(p.r2 - v[0].r2),
            2 => seg_dist(p, v[0], v[1]),
            n => {
                let inside = (0..n).all(|i| cross(v[i], v[(i + 1) % n], p) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n).map(|i| seg_dist(p, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn contains(&self, p: RatePoint, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// True when every vertex of `other` lies in this hull within `tol`.
    pub fn contains_frontier<Q>(&self, other: &Frontier<Q>, tol: f64) -> bool {
        other.vertices.iter().all(|&p| self.contains(p, tol))
    }

    /// Largest distance of a vertex of `other` outside this hull.
    pub fn max_excess<Q>(&self, other: &Frontier<Q>) -> f64 {
        other.vertices.iter().map(|&p| self.distance(p)).fold(0.0, f64::max)
    }

    /// Vertex maximizing `w*x + (1-w)*y` and its index.
    pub fn max_weighted(&self, w: f64) -> Option<(usize, RatePoint)> {
        let mut best: Option<(usize, RatePoint, f64)> = None;
        for (i, &p) in self.vertices.iter().enumerate() {
            let val = w * p.r1 + (1.0 - w) * p.r2;
            if best.is_none_or(|b| val > b.2) {
                best = Some((i, p, val));
            }
        }
        best.map(|(i, p, _)| (i, p))
    }

    pub fn max_sum(&self) -> f64 {
        self.vertices.iter().map(|p| p.r1 + p.r2).fold(0.0, f64::max)
    }

    /// Vertices not dominated componentwise by another vertex.
    pub fn pareto(&self) -> Vec<RatePoint> {
        self.vertices
            .iter()
            .copied()
            .filter(|p| !self.vertices.iter().any(|q| q.r1 >= p.r1 && q.r2 >= p.r2 && (q.r1 > p.r1 || q.r2 > p.r2)))
            .collect()
    }

    /// Vertex rows with a header naming the plane coordinates.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let (a, b) = self.plane.labels();
        wr.write_record([a, b])?;
        for p in &self.vertices {
            wr.write_record([p.r1.to_string(), p.r2.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
