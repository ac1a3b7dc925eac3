use coopcrib::checks::random_crib_joint;
use coopcrib::geometry::{Frontier, Plane, RatePoint};
use coopcrib::info::{Axis, JointPmf, Pmf};
use coopcrib::regions::{bounds_to_polytope, eval_theorem1, CribCase, LinkCapacities};
use coopcrib::search::stream_rng;
use coopcrib::sim::{layer_count, split_rates, Typicality};
use proptest::prelude::*;

fn weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, k).prop_filter_map("all zero", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-6).then(|| w.into_iter().map(|x| x / s).collect())
    })
}

fn joint() -> impl Strategy<Value = JointPmf> {
    (2usize..=4, 2usize..=4, 2usize..=3).prop_flat_map(|(a, b, c)| {
        weights(a * b * c)
            .prop_map(move |t| JointPmf::new(vec![Axis::new("A", a), Axis::new("B", b), Axis::new("C", c)], t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn entropy_is_bounded_by_alphabet(p in (1usize..=8).prop_flat_map(weights)) {
        let pmf = Pmf::new(p.clone()).unwrap();
        let h = pmf.entropy();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (p.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn shannon_inequalities(j in joint()) {
        let hab = j.entropy(&["A", "B"]).unwrap();
        let ha = j.entropy(&["A"]).unwrap();
        let hb = j.entropy(&["B"]).unwrap();
        prop_assert!(hab <= ha + hb + 1e-12);
        prop_assert!(hab + 1e-12 >= ha.max(hb));
        prop_assert!(j.mutual_info(&["A"], &["B"]).unwrap() >= 0.0);
        prop_assert!(j.cond_mutual_info(&["A"], &["B"], &["C"]).unwrap() >= 0.0);
        // chain rule
        let lhs = j.entropy(&["A", "B", "C"]).unwrap();
        let rhs = ha + j.cond_entropy(&["B"], &["A"]).unwrap() + j.cond_entropy(&["C"], &["A", "B"]).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn hull_contains_its_inputs(pts in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..40)) {
        let pts: Vec<(RatePoint, usize)> = pts.iter().enumerate().map(|(i, &(a, b))| (RatePoint::new(a, b), i)).collect();
        let f = Frontier::from_points(Plane::R1R2, pts.clone(), |&i| i);
        for (p, _) in &pts {
            prop_assert!(f.contains(*p, 1e-9));
        }
        for v in &f.vertices {
            prop_assert!(v.r1 >= 0.0 && v.r2 >= 0.0);
        }
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert_eq!(f.vertices, Frontier::from_points(Plane::R1R2, rev, |&i| i).vertices);
    }

    #[test]
    fn polytope_vertices_meet_every_constraint(seed in 0u64..10_000, b in any::<bool>()) {
        let case = if b { CribCase::A } else { CribCase::B };
        let mut rng = stream_rng(seed, 0);
        let p = random_crib_joint(case, &mut rng).unwrap();
        let links = LinkCapacities { c12: 0.3, c21: 0.1 };
        let bounds = eval_theorem1(&p, links, case).unwrap();
        let rhs = bounds.rhs();
        let poly = bounds_to_polytope(&bounds).unwrap();
        for v in &poly.vertices {
            prop_assert!(v.r1 <= rhs[0] + 1e-9 && v.r2 <= rhs[1] + 1e-9);
            prop_assert!(v.r1 + v.r2 <= rhs[2].min(rhs[3]) + 1e-9);
        }
    }

    #[test]
    fn exact_type_sequences_are_typical(counts in prop::collection::vec(1usize..20, 1..6), eps in 0.001f64..0.2) {
        let n: usize = counts.iter().sum();
        let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mut t = Typicality::new(probs.clone(), eps);
        let seq: Vec<usize> = counts.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c)).collect();
        prop_assert!(t.check(seq.iter().copied()));
        // a letter of probability zero is never typical
        let mut zero = probs;
        zero.push(0.0);
        let mut t = Typicality::new(zero.clone(), eps);
        prop_assert!(!t.check(seq.iter().copied().chain([zero.len() - 1])));
    }

    #[test]
    fn rate_split_preserves_totals(r1 in 0.0f64..2.0, r2 in 0.0f64..2.0, c12 in 0.0f64..1.0, c21 in 0.0f64..1.0, z in 0.0f64..1.0) {
        let r = split_rates(r1, r2, LinkCapacities { c12, c21 }, (z, z));
        prop_assert!((r.sum() - (r1 + r2)).abs() < 1e-12);
        prop_assert!(r.r0 <= c12 + c21 + 1e-12);
        prop_assert!(r.r1_crib <= z && r.r2_crib <= z);
    }

    #[test]
    fn layer_counts_cover_the_rate(n in 1usize..64, r in 0.0f64..0.5) {
        let k = layer_count(n, r) as f64;
        prop_assert!(k.log2() >= n as f64 * r - 1e-9);
        prop_assert!((k - 1.0).log2() < n as f64 * r + 1e-9);
    }
}
