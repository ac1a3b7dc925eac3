//! Runs the block-Markov scheme on the repetition fixture just inside and
//! well outside its region corner, and prints block error rates.
//!
//! Usage: `cargo run --release --example coding_sim [trials]`

use coopcrib::fixtures::repetition_scheme;
use coopcrib::regions::{bounds_to_polytope, eval_theorem1, CribCase};
use coopcrib::search::assemble;
use coopcrib::sim::{estimate_error, split_rates, SimConfig};
use std::time::Instant;

fn main() {
    let trials: usize = std::env::args().nth(1).map_or(500, |s| s.parse().expect("trials"));
    let (fd, channel, links) = repetition_scheme(0.02);
    let joint = assemble(&fd).unwrap();
    let bounds = eval_theorem1(&joint, links, CribCase::A).unwrap();
    let poly = bounds_to_polytope(&bounds).unwrap();
    let corner = poly
        .vertices
        .iter()
        .copied()
        .max_by(|a, b| (a.r1 + a.r2).total_cmp(&(b.r1 + b.r2)).then(a.r1.total_cmp(&b.r1)))
        .unwrap();
    let caps = (joint.cond_entropy(&["Z1"], &["U"]).unwrap(), joint.cond_entropy(&["Z2"], &["U"]).unwrap());
    println!("corner ({:.4}, {:.4}), sum bound {:.4}", corner.r1, corner.r2, poly.max_sum());

    for (label, scale, n) in [("0.9x corner", 0.9, 100), ("0.9x corner", 0.9, 200), ("1.5x corner", 1.5, 200)] {
        let rates = split_rates(scale * corner.r1, scale * corner.r2, links, caps);
        let cfg = SimConfig { n, b_blocks: 6, trials, epsilon: 0.15, rates, seed: 11 };
        let t = Instant::now();
        let e = estimate_error(&fd, &channel, &cfg).unwrap();
        println!(
            "{label} n={n}: error {:.3} [{:.3}, {:.3}] over {} trials, realized sum rate {:.4} ({:.1?})",
            e.rate,
            e.wilson_95.0,
            e.wilson_95.1,
            e.trials,
            e.realized_rates.sum(),
            t.elapsed()
        );
    }
}
