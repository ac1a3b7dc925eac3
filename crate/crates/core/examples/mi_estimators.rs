//! Mutual information of a Gaussian channel from three estimators, against
//! the closed form 0.5 log2(1 + P/N).
//!
//! Usage: `cargo run --release --example mi_estimators [samples]`

use coopcrib::gaussian::{awgn_capacity, awgn_mi_estimate, awgn_pairs, binned_mi, ksg_mi};

fn main() {
    let samples: usize = std::env::args().nth(1).map_or(20_000, |s| s.parse().expect("samples"));
    for (p, n) in [(1.0, 0.5), (1.0, 1.0), (4.0, 1.0)] {
        let truth = awgn_capacity(p, n);
        let semi = awgn_mi_estimate(p, n, samples, 1).unwrap();
        let (x, y) = awgn_pairs(p, n, samples, 2);
        let knn = ksg_mi(&x, &y, 4);
        let binned = binned_mi(&x, &y, 64);
        println!(
            "P = {p}, N = {n}: exact {truth:.4}  density {:.4} +- {:.4}  k-NN {:.4}  binned {:.4}",
            semi.value, semi.std_error, knn.value, binned.value
        );
    }
}
