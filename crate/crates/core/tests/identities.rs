use coopcrib::checks::{common_message_gap, duality_gap, single_action_gap, single_state_gap};
use coopcrib::fixtures::{clean_parallel, two_sided};
use coopcrib::info::{Axis, DeterministicMap, JointPmf};
use coopcrib::regions::{
    bounds_to_polytope, check_duality_corners, eval_theorem1, eval_theorem2, eval_theorem4, tighten, Causality,
    CribCase, LinkCapacities, DUALITY_MAP,
};
use coopcrib::search::{assemble, FactorizedDist, Pattern, SearchConfig};

#[test]
fn common_message_form_matches_direct_form() {
    assert!(common_message_gap(CribCase::A, 100, 21).unwrap() < 1e-12);
    assert!(common_message_gap(CribCase::B, 100, 22).unwrap() < 1e-12);
}

#[test]
fn single_state_letter_reduces_to_one_sided_cribbing() {
    assert!(single_state_gap(50, 23).unwrap() < 1e-12);
}

#[test]
fn single_action_letter_reduces_to_state_cribbing() {
    assert!(single_action_gap(50, 24).unwrap() < 1e-12);
}

#[test]
fn duality_corners_agree() {
    assert!(duality_gap(50, 25).unwrap() < 1e-12);
}

#[test]
fn identity_cribs_on_clean_parallel_give_unit_square() {
    let fd = FactorizedDist::template(
        Pattern::Thm1A,
        &two_sided(clean_parallel()),
        &SearchConfig::default().with_card("U", 1),
    )
    .unwrap();
    let p = assemble(&fd).unwrap();
    let b = eval_theorem1(&p, LinkCapacities::default(), CribCase::A).unwrap();
    for (got, want) in b.rhs().iter().zip([1.0, 1.0, 2.0, 2.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    let poly = bounds_to_polytope(&b).unwrap();
    assert_eq!(poly.vertices.len(), 4);
    // links add exactly their capacity to the single-user bounds
    let l = LinkCapacities::new(0.3, 0.2).unwrap();
    let r = eval_theorem1(&p, l, CribCase::A).unwrap().rhs();
    assert!((r[0] - 1.3).abs() < 1e-12 && (r[1] - 1.2).abs() < 1e-12 && (r[2] - 2.5).abs() < 1e-12);
}

/// Uniform input over a useless channel: Y independent of everything.
#[test]
fn useless_channel_keeps_only_links_and_cribs() {
    let p = JointPmf::from_fn(
        vec![
            Axis::new("U", 1),
            Axis::new("X1", 2),
            Axis::new("Z1", 1),
            Axis::new("X2", 2),
            Axis::new("Z2", 1),
            Axis::new("Y", 2),
        ],
        |_| 1.0 / 8.0,
    )
    .unwrap();
    let b = eval_theorem1(&p, LinkCapacities::new(0.5, 0.5).unwrap(), CribCase::A).unwrap();
    let r = b.rhs();
    assert!((r[0] - 0.5).abs() < 1e-12 && (r[2] - 1.0).abs() < 1e-12 && r[3].abs() < 1e-12);
    let poly = bounds_to_polytope(&b).unwrap();
    assert!(poly.vertices.iter().all(|v| v.r1.abs() < 1e-12 && v.r2.abs() < 1e-12));
}

#[test]
fn one_sided_region_on_noiseless_channel() {
    // U constant, X1 uniform, Z = X1, X2 = 0, Y = X1 + 2 X2
    let p = JointPmf::from_fn(
        vec![Axis::new("U", 1), Axis::new("X1", 2), Axis::new("Z", 2), Axis::new("X2", 2), Axis::new("Y", 4)],
        |i| if i[2] == i[1] && i[3] == 0 && i[4] == i[1] { 0.5 } else { 0.0 },
    )
    .unwrap();
    let r = eval_theorem2(&p, 0.25).unwrap().rhs();
    assert!((r[0] - 1.25).abs() < 1e-12, "{r:?}");
    assert!((r[1] - 1.0).abs() < 1e-12);
}

#[test]
fn state_region_infeasible_when_link_too_small() {
    // U = S uniform, so I(U;S) = 1 bit
    let p = JointPmf::from_fn(
        vec![
            Axis::new("S", 2),
            Axis::new("U", 2),
            Axis::new("X1", 2),
            Axis::new("Z", 2),
            Axis::new("X2", 2),
            Axis::new("Y", 2),
        ],
        |i| if i[0] == i[1] && i[2] == i[3] && i[4] == 0 && i[5] == i[2] { 0.25 } else { 0.0 },
    )
    .unwrap();
    assert!(!eval_theorem4(&p, LinkCapacities::new(0.0, 0.5).unwrap(), Causality::Causal).unwrap().feasible);
    assert!(eval_theorem4(&p, LinkCapacities::new(0.0, 1.0).unwrap(), Causality::Causal).unwrap().feasible);
}

#[test]
fn tighten_caps_single_rates() {
    let fd = FactorizedDist::template(
        Pattern::Thm1A,
        &two_sided(clean_parallel()),
        &SearchConfig::default().with_card("U", 1),
    )
    .unwrap();
    let b = eval_theorem1(&assemble(&fd).unwrap(), LinkCapacities::new(5.0, 0.0).unwrap(), CribCase::A).unwrap();
    let t = tighten(&b);
    assert!((t.rhs()[0] - 2.0).abs() < 1e-12);
    assert_eq!(bounds_to_polytope(&t).unwrap(), bounds_to_polytope(&b).unwrap());
}

#[test]
fn duality_rejects_mismatched_pair() {
    let fd = FactorizedDist::template(
        Pattern::Thm2,
        &coopcrib::search::Problem::mac(clean_parallel(), DeterministicMap::identity(2), None),
        &SearchConfig::default(),
    )
    .unwrap();
    let mac = assemble(&fd).unwrap();
    let sr = mac.rename(&DUALITY_MAP).unwrap();
    assert!(check_duality_corners(&mac, &sr, 0.1).unwrap().max_difference < 1e-12);
    let other = mac.rename(&[("Y", "X"), ("X1", "Xh2"), ("X2", "Xh1")]).unwrap();
    assert!(check_duality_corners(&mac, &other, 0.1).is_err());
}
