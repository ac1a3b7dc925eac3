//! Independent brute-force frontier for the independent-inputs family.
//!
//! Everything here is written from the entropy definitions on plain arrays:
//! the lattice, the joint law, the bounds, the per-distribution polytope and
//! the hull. Nothing is shared with the library except the channel table.
#![allow(dead_code, clippy::needless_range_loop)]

pub type Pt = (f64, f64);

/// Rows (k/steps, 1 - k/steps) of the binary simplex lattice.
fn binary_rows(steps: usize) -> Vec<[f64; 2]> {
    (0..=steps).map(|k| [k as f64 / steps as f64, 1.0 - k as f64 / steps as f64]).collect()
}

/// A joint law as a list of (outcome, probability) with outcome = (u, x1, x2, y).
struct Law(Vec<([usize; 4], f64)>);

impl Law {
    /// H of the projection `key`, in bits.
    fn h(&self, key: impl Fn(&[usize; 4]) -> usize, buckets: usize) -> f64 {
        let mut m = vec![0.0; buckets];
        for (o, p) in &self.0 {
            m[key(o)] += p;
        }
        m.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }
}

/// Bounds (R1, R2, cooperative sum, total sum) for one distribution.
fn bounds(law: &Law, ny: usize, g1: &[usize], g2: &[usize], c12: f64, c21: f64) -> [f64; 4] {
    let (z1, z2) = (|o: &[usize; 4], g: &[usize]| g[o[1]], |o: &[usize; 4], g: &[usize]| g[o[2]]);
    let k = |parts: &[(usize, usize)]| parts.iter().fold(0usize, |acc, &(v, size)| acc * size + v);
    // u, x1, x2, z1, z2 are all binary here
    let r = 2usize;
    let b = 16 * ny;
    let h_u = law.h(|o| o[0], b);
    let h_uz1 = law.h(|o| k(&[(o[0], r), (z1(o, g1), r)]), b);
    let h_uz2 = law.h(|o| k(&[(o[0], r), (z2(o, g2), r)]), b);
    let h_uz12 = law.h(|o| k(&[(o[0], r), (z1(o, g1), r), (z2(o, g2), r)]), b);
    let h_x1x2u = law.h(|o| k(&[(o[0], r), (o[1], r), (o[2], r)]), b);
    let h_x1x2uy = law.h(|o| k(&[(o[0], r), (o[1], r), (o[2], r), (o[3], ny)]), b);
    let h_x2z1u = law.h(|o| k(&[(o[0], r), (z1(o, g1), r), (o[2], r)]), b);
    let h_x2z1uy = law.h(|o| k(&[(o[0], r), (z1(o, g1), r), (o[2], r), (o[3], ny)]), b);
    let h_x1z2u = law.h(|o| k(&[(o[0], r), (z2(o, g2), r), (o[1], r)]), b);
    let h_x1z2uy = law.h(|o| k(&[(o[0], r), (z2(o, g2), r), (o[1], r), (o[3], ny)]), b);
    let h_uz12y = law.h(|o| k(&[(o[0], r), (z1(o, g1), r), (z2(o, g2), r), (o[3], ny)]), b);
    let h_y = law.h(|o| o[3], b);
    let h_x1x2 = law.h(|o| k(&[(o[1], r), (o[2], r)]), b);
    let h_x1x2y = law.h(|o| k(&[(o[1], r), (o[2], r), (o[3], ny)]), b);

    let h_y_given_all_u = h_x1x2uy - h_x1x2u;
    let i1 = (h_x2z1uy - h_x2z1u) - h_y_given_all_u;
    let i2 = (h_x1z2uy - h_x1z2u) - h_y_given_all_u;
    let i12 = (h_uz12y - h_uz12) - h_y_given_all_u;
    let i_tot = h_y - (h_x1x2y - h_x1x2);
    [
        i1.max(0.0) + (h_uz1 - h_u).max(0.0) + c12,
        i2.max(0.0) + (h_uz2 - h_u).max(0.0) + c21,
        i12.max(0.0) + (h_uz12 - h_u).max(0.0) + c12 + c21,
        i_tot.max(0.0),
    ]
}

/// Corner points of {R1 <= a, R2 <= b, R1 + R2 <= s, R >= 0}.
fn polytope(a: f64, b: f64, s: f64) -> Vec<Pt> {
    let (a, b, s) = (a.max(0.0), b.max(0.0), s.max(0.0));
    let x = a.min(s);
    let y = b.min(s);
    vec![(0.0, 0.0), (x, 0.0), (0.0, y), (x, b.min(s - x)), (a.min(s - y), y)]
}

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by the monotone chain, near-collinear points (cross product
/// up to 1e-9) dropped. Coordinates
/// are first rounded to a 1e-10 lattice so that values equal up to
/// floating-point noise share a column or row exactly.
pub fn hull(mut pts: Vec<Pt>) -> Vec<Pt> {
    for p in pts.iter_mut() {
        *p = ((p.0 * 1e10).round() / 1e10, (p.1 * 1e10).round() / 1e10);
    }
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    pts.dedup_by(|p, q| (p.0 - q.0).abs() <= 1e-9 && (p.1 - q.1).abs() <= 1e-9);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-9 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-9 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Brute-force frontier of the independent-inputs family with |U| = 2 for a
/// binary-input channel `w[x1][x2][y]` and binary crib maps.
pub fn brute_force_frontier(
    w: &[[Vec<f64>; 2]; 2],
    g1: [usize; 2],
    g2: [usize; 2],
    c12: f64,
    c21: f64,
    steps: usize,
) -> Vec<Pt> {
    let ny = w[0][0].len();
    let rows = binary_rows(steps);
    let mut pts: Vec<Pt> = Vec::new();
    let mut law = Law(Vec::with_capacity(2 * 2 * 2 * ny));
    for pu in &rows {
        for a0 in &rows {
            for a1 in &rows {
                let px1 = [a0, a1];
                for b0 in &rows {
                    for b1 in &rows {
                        let px2 = [b0, b1];
                        law.0.clear();
                        for u in 0..2 {
                            for x1 in 0..2 {
                                for x2 in 0..2 {
                                    for y in 0..ny {
                                        let p = pu[u] * px1[u][x1] * px2[u][x2] * w[x1][x2][y];
                                        if p > 0.0 {
                                            law.0.push(([u, x1, x2, y], p));
                                        }
                                    }
                                }
                            }
                        }
                        let [a, b, c, d] = bounds(&law, ny, &g1, &g2, c12, c21);
                        pts.extend(polytope(a, b, c.min(d)));
                    }
                }
                // keep the working set small
                if pts.len() > 100_000 {
                    pts = hull(pts);
                }
            }
        }
    }
    hull(pts)
}

/// Largest distance from a point of `a` to its nearest point of `b`, both ways.
pub fn max_mismatch(a: &[Pt], b: &[Pt]) -> f64 {
    let one = |a: &[Pt], b: &[Pt]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p.0 - q.0).abs().max((p.1 - q.1).abs())).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

/// Channel tables of the three binary fixtures, written out by hand.
pub fn oracle_channels() -> Vec<(&'static str, [[Vec<f64>; 2]; 2])> {
    let det = |f: &dyn Fn(usize, usize) -> usize, ny: usize| -> [[Vec<f64>; 2]; 2] {
        let row = |a, b| (0..ny).map(|y| if f(a, b) == y { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        [[row(0, 0), row(0, 1)], [row(1, 0), row(1, 1)]]
    };
    let bsc = |a: usize, b: usize| if a ^ b == 0 { vec![0.9, 0.1] } else { vec![0.1, 0.9] };
    vec![
        ("clean-parallel", det(&|a, b| 2 * a + b, 4)),
        ("and-multiplier", det(&|a, b| a * b, 2)),
        ("bsc-coupled", [[bsc(0, 0), bsc(0, 1)], [bsc(1, 0), bsc(1, 1)]]),
    ]
}
