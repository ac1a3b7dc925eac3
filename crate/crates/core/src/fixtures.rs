//! Small binary models shared by the examples, the command line and the tests.

use crate::info::DeterministicMap;
use crate::regions::LinkCapacities;
use crate::search::{Channel, FactorizedDist, Pattern, Problem, SearchConfig};

/// Y = (X1, X2): both inputs reach the receiver intact.
pub fn clean_parallel() -> Channel {
    Channel::deterministic(vec![2, 2], 4, |x| 2 * x[0] + x[1]).expect("valid channel")
}

/// Y = X1 AND X2.
pub fn and_multiplier() -> Channel {
    Channel::deterministic(vec![2, 2], 2, |x| x[0] * x[1]).expect("valid channel")
}

/// Y = X1 XOR X2 observed through a binary symmetric channel with crossover `p`.
pub fn bsc_coupled(p: f64) -> Channel {
    Channel::from_fn(vec![2, 2], 2, |x, y| if (x[0] ^ x[1]) == y { 1.0 - p } else { p }).expect("valid channel")
}

/// Each input through its own binary symmetric channel with crossover `p`:
/// Y = (X1 ^ W1, X2 ^ W2).
pub fn twin_bsc(p: f64) -> Channel {
    Channel::from_fn(vec![2, 2], 4, |x, y| {
        let f = |a: usize, b: usize| if a == b { 1.0 - p } else { p };
        f(x[0], y / 2) * f(x[1], y % 2)
    })
    .expect("valid channel")
}

/// Named binary channels used by the frontier checks.
pub fn binary_channels() -> Vec<(&'static str, Channel)> {
    vec![("clean-parallel", clean_parallel()), ("and-multiplier", and_multiplier()), ("bsc-coupled", bsc_coupled(0.1))]
}

/// A channel with identity cribbing in both directions.
pub fn two_sided(channel: Channel) -> Problem {
    Problem::mac(channel, DeterministicMap::identity(2), Some(DeterministicMap::identity(2)))
}

/// Frontier search settings used for the binary fixtures: |U| = 2, lattice step 1/8.
pub fn binary_search_config() -> SearchConfig {
    SearchConfig { grid_steps: 8, ..Default::default() }.with_card("U", 2)
}

/// Link capacities used with the binary fixtures.
pub fn binary_links() -> LinkCapacities {
    LinkCapacities { c12: 0.25, c21: 0.1 }
}

fn set_factor(fd: &mut FactorizedDist, child: &str, table: Vec<f64>) {
    let f = fd.factors.iter_mut().find(|f| f.children == [child]).expect("factor present");
    assert_eq!(f.table.len(), table.len(), "factor {child} shape");
    f.table = table;
}

/// Both encoders repeat a shared uniform bit over twin binary symmetric
/// channels with crossover `p`. Cribbing reveals nothing beyond U, so every
/// achievable rate travels over the links; the region corner sits at
/// (C12, C21).
pub fn repetition_scheme(p: f64) -> (FactorizedDist, Channel, LinkCapacities) {
    let ch = twin_bsc(p);
    let problem = two_sided(ch.clone());
    let cfg = SearchConfig::default().with_card("U", 2);
    let mut fd = FactorizedDist::template(Pattern::Thm1A, &problem, &cfg).expect("template");
    set_factor(&mut fd, "U", vec![0.5, 0.5]);
    set_factor(&mut fd, "X1", vec![1.0, 0.0, 0.0, 1.0]);
    set_factor(&mut fd, "X2", vec![1.0, 0.0, 0.0, 1.0]);
    (fd, ch, LinkCapacities { c12: 0.02, c21: 0.02 })
}

/// Constant U, X1 ~ Bernoulli(q) observed exactly by encoder 2, X2 fixed at 0,
/// Y = (X1, X2). Used to probe the crib decoder around H(X1).
pub fn sparse_crib_scheme(q: f64) -> (FactorizedDist, Channel) {
    let ch = clean_parallel();
    let problem = Problem::mac(ch.clone(), DeterministicMap::identity(2), None);
    let cfg = SearchConfig::default().with_card("U", 1);
    let mut fd = FactorizedDist::template(Pattern::Thm1A, &problem, &cfg).expect("template");
    set_factor(&mut fd, "X1", vec![1.0 - q, q]);
    set_factor(&mut fd, "X2", vec![1.0, 0.0]);
    (fd, ch)
}

/// Uniform independent inputs over `clean_parallel` with constant U and no cribbing.
pub fn parallel_scheme() -> (FactorizedDist, Channel) {
    let ch = clean_parallel();
    let problem = Problem::mac(ch.clone(), DeterministicMap::constant(2), None);
    let cfg = SearchConfig::default().with_card("U", 1);
    (FactorizedDist::template(Pattern::Thm1A, &problem, &cfg).expect("template"), ch)
}
