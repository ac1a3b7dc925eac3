//! Randomized consistency checks between the region evaluators.
//!
//! Each check draws admissible distributions from seeded streams and returns
//! the largest discrepancy it saw, so callers pick their own tolerance.

use crate::info::{DeterministicMap, JointPmf};
use crate::regions::{
    check_duality_corners, eval_state_cribbing_no_action, eval_theorem1, eval_theorem2, eval_theorem4, eval_theorem5,
    theorem1_via_common_message, tighten, Causality, CribCase, LinkCapacities, RegionBounds, DUALITY_MAP,
};
use crate::search::{assemble, randomize, stream_rng, Channel, FactorizedDist, Pattern, Problem, SearchConfig};
use rand::Rng;
use rand_distr::Exp1;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

fn dirichlet<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Channel with every row drawn from a flat Dirichlet law.
pub fn random_channel<R: Rng>(inputs: Vec<usize>, output: usize, rng: &mut R) -> Channel {
    let rows: usize = inputs.iter().product();
    let table = (0..rows).flat_map(|_| dirichlet(output, rng)).collect();
    Channel::new(inputs, output, table).expect("rows are normalized")
}

/// Uniformly random map from `domain` letters onto `codomain` letters.
pub fn random_map<R: Rng>(domain: usize, codomain: usize, rng: &mut R) -> DeterministicMap {
    DeterministicMap::new((0..domain).map(|_| rng.random_range(0..codomain)).collect(), codomain)
        .expect("indices in range")
}

fn random_member(pattern: Pattern, problem: &Problem, cfg: &SearchConfig, rng: &mut impl Rng) -> Result<JointPmf> {
    let mut fd = FactorizedDist::template(pattern, problem, cfg)?;
    randomize(&mut fd, rng)?;
    Ok(assemble(&fd)?)
}

fn random_links<R: Rng>(rng: &mut R) -> LinkCapacities {
    LinkCapacities { c12: rng.random::<f64>(), c21: rng.random::<f64>() }
}

/// Random two-sided cribbing distribution over (U, X1, Z1, X2, Z2, Y) with
/// alphabets of 2 or 3 letters and random crib maps.
pub fn random_crib_joint<R: Rng>(case: CribCase, rng: &mut R) -> Result<JointPmf> {
    let (x1, x2, y) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=3));
    let ch = random_channel(vec![x1, x2], y, rng);
    let problem = Problem::mac(ch, random_map(x1, 2, rng), Some(random_map(x2, 2, rng)));
    let cfg = SearchConfig::default().with_card("U", rng.random_range(1..=3));
    let pattern = match case {
        CribCase::A => Pattern::Thm1A,
        CribCase::B => Pattern::Thm1B,
    };
    random_member(pattern, &problem, &cfg, rng)
}

/// Largest right-hand-side gap between the direct two-sided evaluator and
/// its common-message form, over `trials` draws of the given case.
pub fn common_message_gap(case: CribCase, trials: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        let p = random_crib_joint(case, &mut rng)?;
        let links = random_links(&mut rng);
        let a = eval_theorem1(&p, links, case)?;
        let b = theorem1_via_common_message(&p, links)?;
        worst = worst.max(a.max_rhs_diff(&b));
    }
    Ok(worst)
}

fn reorder(b: &RegionBounds, order: &[usize]) -> RegionBounds {
    RegionBounds { constraints: order.iter().map(|&i| b.constraints[i].clone()).collect(), ..b.clone() }
}

/// With a single state letter, the state-dependent region must coincide with
/// the one-sided cribbing region. Returns the largest gap over `trials` draws.
pub fn single_state_gap(trials: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        let (x1, x2, y) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=3));
        let ch = random_channel(vec![x1, x2, 1], y, &mut rng);
        let causality = if rng.random::<bool>() { Causality::StrictlyCausal } else { Causality::Causal };
        let pattern = match causality {
            Causality::StrictlyCausal => Pattern::Thm4sc,
            Causality::Causal => Pattern::Thm4c,
        };
        let problem = Problem::mac(ch, random_map(x1, 2, &mut rng), None).with_state(vec![vec![1.0]]);
        let cfg = SearchConfig::default().with_card("U", rng.random_range(1..=3));
        let p = random_member(pattern, &problem, &cfg, &mut rng)?;
        let links = random_links(&mut rng);
        let with_state = eval_theorem4(&p, links, causality)?;

        let q = p
            .marginal(&["U", "X1", "Z", "X2", "Y"])?
            .rename(&[("Z", "Z1")])?
            .pushforward("X2", &DeterministicMap::constant(x2), "Z2")?
            .marginal(&["U", "X1", "Z1", "X2", "Z2", "Y"])?;
        let case = if pattern == Pattern::Thm4sc { CribCase::A } else { CribCase::B };
        let plain = reorder(&eval_theorem1(&q, links, case)?, &[0, 1, 3, 2]);
        worst = worst.max(with_state.max_rhs_diff(&plain));
    }
    Ok(worst)
}

/// With a single action letter and no link, the action-dependent region
/// must coincide with the state-cribbing region without actions, once both
/// are written with single-rate bounds capped by the sum bounds.
pub fn single_action_gap(trials: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        let (x1, x2, s, y) = (2, 2, rng.random_range(2..=3), rng.random_range(2..=3));
        let ch = random_channel(vec![x1, x2, s], y, &mut rng);
        let causality = if rng.random::<bool>() { Causality::StrictlyCausal } else { Causality::Causal };
        let pattern = match causality {
            Causality::StrictlyCausal => Pattern::Thm5sc,
            Causality::Causal => Pattern::Thm5c,
        };
        let problem = Problem::mac(ch, DeterministicMap::identity(x1), None).with_state(vec![dirichlet(s, &mut rng)]);
        let cfg = SearchConfig::default().with_card("U", 2).with_card("V", 2).with_card("W", 2);
        let p = random_member(pattern, &problem, &cfg, &mut rng)?;
        let with_action = tighten(&eval_theorem5(&p, 0.0, causality)?);
        let q = p.marginal(&["W", "V", "S", "X1", "U", "X2", "Y"])?;
        let plain = tighten(&eval_state_cribbing_no_action(&q)?);
        worst = worst.max(with_action.max_rhs_diff(&plain));
    }
    Ok(worst)
}

/// Largest corner gap between a random one-sided cribbing distribution and
/// its source-coding dual obtained by renaming the axes.
pub fn duality_gap(trials: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        let (x1, x2, y) = (rng.random_range(2..=3), rng.random_range(2..=3), rng.random_range(2..=3));
        let ch = random_channel(vec![x1, x2], y, &mut rng);
        let problem = Problem::mac(ch, random_map(x1, 2, &mut rng), None);
        let cfg = SearchConfig::default().with_card("U", rng.random_range(1..=3));
        let p_mac = random_member(Pattern::Thm2, &problem, &cfg, &mut rng)?;
        eval_theorem2(&p_mac, 0.0)?;
        let p_sr = p_mac.rename(&DUALITY_MAP)?;
        let c12 = rng.random::<f64>();
        worst = worst.max(check_duality_corners(&p_mac, &p_sr, c12)?.max_difference);
    }
    Ok(worst)
}
