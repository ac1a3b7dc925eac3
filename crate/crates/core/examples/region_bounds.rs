//! Prints the inequality system and corner points of the two-sided cribbing
//! region for each binary fixture at uniform inputs, with and without links.

use coopcrib::fixtures::{binary_channels, two_sided};
use coopcrib::regions::{bounds_to_polytope, eval_theorem1, CribCase, LinkCapacities};
use coopcrib::search::{assemble, FactorizedDist, Pattern, SearchConfig};

fn main() {
    let cfg = SearchConfig::default().with_card("U", 1);
    for (name, channel) in binary_channels() {
        // the template starts every free row at the uniform law
        let fd = FactorizedDist::template(Pattern::Thm1A, &two_sided(channel), &cfg).unwrap();
        let p = assemble(&fd).unwrap();
        for links in [LinkCapacities::default(), LinkCapacities::new(0.25, 0.1).unwrap()] {
            let b = eval_theorem1(&p, links, CribCase::A).unwrap();
            println!("{name}, C12 = {}, C21 = {}", links.c12, links.c21);
            for c in &b.constraints {
                println!("  {:<22} <= {:.4}", c.label, c.rhs);
            }
            let corners: Vec<String> = bounds_to_polytope(&b)
                .unwrap()
                .vertices
                .iter()
                .map(|v| format!("({:.3}, {:.3})", v.r1, v.r2))
                .collect();
            println!("  corners {}", corners.join(" "));
        }
    }
}
