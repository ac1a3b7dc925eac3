//! Grid search over the independent-inputs family (|U| = 2, step 1/8) for the
//! three binary fixtures, and the gain from cribbing over cooperation alone.
//!
//! Usage: `cargo run --release --example frontier_search [steps]`

use coopcrib::fixtures::{binary_channels, binary_links};
use coopcrib::info::DeterministicMap;
use coopcrib::search::{achievable_frontier, grid_count, FactorizedDist, Pattern, Problem, SearchConfig};
use std::time::Instant;

fn main() {
    let steps: usize = std::env::args().nth(1).map_or(8, |s| s.parse().expect("steps"));
    let cfg = SearchConfig { grid_steps: steps, ..Default::default() }.with_card("U", 2);
    let links = binary_links();
    for (name, channel) in binary_channels() {
        let id = DeterministicMap::identity(2);
        let cribbing = Problem::mac(channel.clone(), id.clone(), Some(id));
        let plain = Problem::mac(channel, DeterministicMap::constant(2), Some(DeterministicMap::constant(2)));
        let size = grid_count(&FactorizedDist::template(Pattern::Thm1A, &cribbing, &cfg).unwrap(), steps).unwrap();
        let t = Instant::now();
        let with = achievable_frontier(Pattern::Thm1A, &cribbing, links, &cfg).unwrap();
        let without = achievable_frontier(Pattern::Thm1A, &plain, links, &cfg).unwrap();
        println!("{name}: {size} grid points per search ({:.1?})", t.elapsed());
        for (v, fd) in with.vertices.iter().zip(&with.provenance) {
            let pu: Vec<String> = fd.factors[0].table.iter().map(|p| format!("{p:.3}")).collect();
            println!("  ({:.4}, {:.4})  P(U) = [{}]", v.r1, v.r2, pu.join(", "));
        }
        println!("  max sum rate {:.4} with cribbing, {:.4} with cooperation only", with.max_sum(), without.max_sum());
    }
}
