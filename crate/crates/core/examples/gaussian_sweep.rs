//! Sweeps the Gaussian construction and compares the resulting region with
//! the plain MAC and the full-cooperation outer bound.
//!
//! Usage: `cargo run --release --example gaussian_sweep [samples] [bits]`

use coopcrib::gaussian::{gaussian_frontier, inner_polytope, outer_bound, GaussianConfig, QuantizerRule, SweepGrid};
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map_or(20_000, |s| s.parse().expect("samples"));
    let bits: u32 = args.next().map_or(1, |s| s.parse().expect("bits"));
    let base = GaussianConfig {
        p1: 1.0,
        p2: 1.0,
        noise_n: 0.5,
        c12: 0.4,
        beta1: 1.0,
        beta2: 1.0,
        rho: 0.0,
        quant_bits: bits,
        quantizer: if bits >= 2 { QuantizerRule::LloydMax } else { QuantizerRule::default() },
        samples,
        seed: 7,
    };
    let grid = SweepGrid::uniform(5);
    let t = Instant::now();
    let g = gaussian_frontier(&base, &grid).expect("sweep");
    let elapsed = t.elapsed();
    let rho: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let outer = outer_bound(1.0, 1.0, 0.5, &rho).unwrap();
    let inner = inner_polytope(1.0, 1.0, 0.5).unwrap();

    println!("{} points evaluated, {} skipped for power, {:.1?}", g.points.len(), g.skipped.len(), elapsed);
    println!(
        "max sum rate: inner {:.4}, achievable {:.4}, outer {:.4}",
        inner.max_sum(),
        g.max_sum_rate(),
        outer.max_sum()
    );
    println!("achievable vertices (R1, R2) <- (beta1, beta2, rho):");
    for (v, &i) in g.frontier.vertices.iter().zip(&g.frontier.provenance) {
        let p = &g.points[i];
        println!("  ({:.4}, {:.4}) <- ({}, {}, {})", v.r1, v.r2, p.beta1, p.beta2, p.rho);
    }
}
