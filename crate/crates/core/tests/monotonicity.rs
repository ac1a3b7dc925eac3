use coopcrib::fixtures::binary_channels;
use coopcrib::geometry::Frontier;
use coopcrib::info::DeterministicMap;
use coopcrib::regions::LinkCapacities;
use coopcrib::search::{achievable_frontier, FactorizedDist, Pattern, Problem, SearchConfig};

fn cfg() -> SearchConfig {
    SearchConfig { grid_steps: 4, ..Default::default() }.with_card("U", 2)
}

fn frontier(p: Pattern, problem: &Problem, l: LinkCapacities) -> Frontier<FactorizedDist> {
    achievable_frontier(p, problem, l, &cfg()).unwrap()
}

fn identity() -> DeterministicMap {
    DeterministicMap::identity(2)
}

#[test]
fn larger_links_enlarge_the_frontier() {
    for (name, ch) in binary_channels() {
        let problem = Problem::mac(ch, identity(), Some(identity()));
        let small = frontier(Pattern::Thm1A, &problem, LinkCapacities::new(0.1, 0.0).unwrap());
        for l in [LinkCapacities::new(0.3, 0.0).unwrap(), LinkCapacities::new(0.1, 0.2).unwrap()] {
            let big = frontier(Pattern::Thm1A, &problem, l);
            assert!(big.contains_frontier(&small, 1e-9), "{name}: excess {}", big.max_excess(&small));
        }
    }
}

#[test]
fn finer_cribs_enlarge_the_frontier() {
    for (name, ch) in binary_channels() {
        let l = LinkCapacities::new(0.1, 0.1).unwrap();
        let none = Problem::mac(ch.clone(), DeterministicMap::constant(2), Some(DeterministicMap::constant(2)));
        let one = Problem::mac(ch.clone(), identity(), Some(DeterministicMap::constant(2)));
        let both = Problem::mac(ch, identity(), Some(identity()));
        let f0 = frontier(Pattern::Thm1A, &none, l);
        let f1 = frontier(Pattern::Thm1A, &one, l);
        let f2 = frontier(Pattern::Thm1A, &both, l);
        assert!(f1.contains_frontier(&f0, 1e-9), "{name}: excess {}", f1.max_excess(&f0));
        assert!(f2.contains_frontier(&f1, 1e-9), "{name}: excess {}", f2.max_excess(&f1));
    }
}

#[test]
fn crib_dependent_inputs_enlarge_the_frontier() {
    for (name, ch) in binary_channels() {
        let l = LinkCapacities::new(0.1, 0.1).unwrap();
        let problem = Problem::mac(ch, identity(), Some(identity()));
        let a = frontier(Pattern::Thm1A, &problem, l);
        let b = frontier(Pattern::Thm1B, &problem, l);
        assert!(b.contains_frontier(&a, 1e-9), "{name}: excess {}", b.max_excess(&a));
    }
}
