//! State-dependent channel with encoder 1 cribbing: compares strictly causal
//! and causal cribbing over random members of each family.

use coopcrib::checks::random_channel;
use coopcrib::info::DeterministicMap;
use coopcrib::regions::{bounds_to_polytope, eval_theorem4, Causality, LinkCapacities};
use coopcrib::search::{assemble, randomize, stream_rng, FactorizedDist, Pattern, Problem, SearchConfig};

fn main() {
    let mut rng = stream_rng(9, 0);
    // inputs X1, X2 binary, state S with P(S) = (0.7, 0.3), ternary output
    let channel = random_channel(vec![2, 2, 2], 3, &mut rng);
    let problem = Problem::mac(channel, DeterministicMap::identity(2), None).with_state(vec![vec![0.7, 0.3]]);
    let cfg = SearchConfig::default().with_card("U", 2);
    let links = LinkCapacities::new(0.2, 0.5).unwrap();
    for (pattern, causality) in [(Pattern::Thm4sc, Causality::StrictlyCausal), (Pattern::Thm4c, Causality::Causal)] {
        let mut fd = FactorizedDist::template(pattern, &problem, &cfg).unwrap();
        let mut best = (0.0f64, 0usize);
        for i in 0..200 {
            randomize(&mut fd, &mut stream_rng(10, i)).unwrap();
            let b = eval_theorem4(&assemble(&fd).unwrap(), links, causality).unwrap();
            if b.feasible {
                best = (best.0.max(bounds_to_polytope(&b).unwrap().max_sum()), best.1 + 1);
            }
        }
        println!("{causality:?}: {} of 200 draws feasible, best sum rate {:.4}", best.1, best.0);
    }
}
