//! End-to-end acceptance run: one PASS/FAIL line per criterion, with timings.
//! Build with optimizations; the Gaussian sweeps dominate the runtime.

mod common;

use common::{brute_force_frontier, max_mismatch, oracle_channels, Pt};
use coopcrib::checks::{common_message_gap, duality_gap, single_action_gap, single_state_gap};
use coopcrib::fixtures::{binary_channels, binary_links, binary_search_config, repetition_scheme, two_sided};
use coopcrib::gaussian::{
    awgn_capacity, awgn_mi_estimate, gaussian_frontier, inner_polytope, mc_region_point, outer_bound, GaussianConfig,
    GaussianFrontier, QuantizerRule, SweepGrid,
};
use coopcrib::geometry::Frontier;
use coopcrib::info::DeterministicMap;
use coopcrib::regions::{bounds_to_polytope, eval_theorem1, CribCase, LinkCapacities};
use coopcrib::search::{achievable_frontier, assemble, Pattern, Problem};
use coopcrib::sim::{estimate_error, split_rates, ErrorEstimate, SimConfig};
use std::time::Instant;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Frontier CSVs of the three binary fixtures and the worst oracle mismatch.
fn oracle_run() -> Result<(Vec<String>, f64, usize), String> {
    let links = binary_links();
    let cfg = binary_search_config();
    let mut csvs = Vec::new();
    let mut worst = 0.0f64;
    let mut count_mismatch = 0;
    for ((name, channel), (oname, w)) in binary_channels().into_iter().zip(oracle_channels()) {
        if name != oname {
            return Err(format!("fixture order {name} vs {oname}"));
        }
        let f = achievable_frontier(Pattern::Thm1A, &two_sided(channel), links, &cfg).map_err(err)?;
        let got: Vec<Pt> = f.vertices.iter().map(|v| (v.r1, v.r2)).collect();
        let want = brute_force_frontier(&w, [0, 1], [0, 1], links.c12, links.c21, 8);
        if got.len() != want.len() {
            count_mismatch += 1;
        }
        worst = worst.max(max_mismatch(&got, &want));
        csvs.push(f.to_csv_string());
    }
    Ok((csvs, worst, count_mismatch))
}

fn criterion1(run: &(Vec<String>, f64, usize)) -> Outcome {
    let &(_, worst, counts) = run;
    verdict(worst < 1e-9 && counts == 0, format!("max vertex mismatch {worst:.2e}, vertex-count mismatches {counts}"))
}

fn criterion2() -> Outcome {
    let a = common_message_gap(CribCase::A, 100, 21).map_err(err)?;
    let b = common_message_gap(CribCase::B, 100, 22).map_err(err)?;
    verdict(a.max(b) < 1e-12, format!("max |drhs| {:.2e} (case A), {:.2e} (case B)", a, b))
}

fn criterion3() -> Outcome {
    let s = single_state_gap(50, 23).map_err(err)?;
    let a = single_action_gap(50, 24).map_err(err)?;
    verdict(s.max(a) < 1e-12, format!("single state {s:.2e}, single action {a:.2e}"))
}

fn criterion4() -> Outcome {
    let d = duality_gap(50, 25).map_err(err)?;
    verdict(d < 1e-12, format!("max corner gap {d:.2e}"))
}

fn criterion5() -> Outcome {
    let cfg = binary_search_config();
    let f = |p: Pattern, problem: &Problem, l: LinkCapacities| achievable_frontier(p, problem, l, &cfg).map_err(err);
    let id = DeterministicMap::identity(2);
    let cst = DeterministicMap::constant(2);
    let mut worst = 0.0f64;
    for (_, ch) in binary_channels() {
        let both = Problem::mac(ch.clone(), id.clone(), Some(id.clone()));
        let one = Problem::mac(ch.clone(), id.clone(), Some(cst.clone()));
        let none = Problem::mac(ch, cst.clone(), Some(cst.clone()));
        let l = LinkCapacities { c12: 0.1, c21: 0.1 };
        let small = f(Pattern::Thm1A, &both, LinkCapacities { c12: 0.1, c21: 0.0 })?;
        let big = f(Pattern::Thm1A, &both, LinkCapacities { c12: 0.3, c21: 0.2 })?;
        let (f0, f1, f2) = (f(Pattern::Thm1A, &none, l)?, f(Pattern::Thm1A, &one, l)?, f(Pattern::Thm1A, &both, l)?);
        let b = f(Pattern::Thm1B, &both, l)?;
        for (outer, inner) in [(&big, &small), (&f1, &f0), (&f2, &f1), (&b, &f2)] {
            worst = worst.max(outer.max_excess(inner));
        }
    }
    verdict(worst <= 1e-9, format!("largest vertex excess {worst:.2e} over 12 containments"))
}

fn gaussian_base(c12: f64, bits: u32, quantizer: QuantizerRule) -> GaussianConfig {
    GaussianConfig {
        p1: 1.0,
        p2: 1.0,
        noise_n: 0.5,
        c12,
        beta1: 1.0,
        beta2: 1.0,
        rho: 0.0,
        quant_bits: bits,
        quantizer,
        samples: 100_000,
        seed: 17,
    }
}

struct GaussianRun {
    combined: GaussianFrontier,
    coop_only: GaussianFrontier,
    crib_only: GaussianFrontier,
    two_bit: GaussianFrontier,
}

impl GaussianRun {
    fn csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for g in [&self.combined, &self.coop_only, &self.crib_only, &self.two_bit] {
            g.write_sweep_csv(&mut out).expect("in-memory write");
        }
        out
    }
}

fn gaussian_run() -> Result<GaussianRun, String> {
    let grid = SweepGrid::uniform(5);
    let sweep = |cfg: GaussianConfig| gaussian_frontier(&cfg, &grid).map_err(err);
    Ok(GaussianRun {
        combined: sweep(gaussian_base(0.4, 1, QuantizerRule::default()))?,
        coop_only: sweep(gaussian_base(0.4, 0, QuantizerRule::default()))?,
        crib_only: sweep(gaussian_base(0.0, 1, QuantizerRule::default()))?,
        two_bit: sweep(gaussian_base(0.4, 2, QuantizerRule::LloydMax))?,
    })
}

/// Vertices of `g` farther than three of their own standard errors from `other`.
fn vertices_outside<P>(g: &GaussianFrontier, other: &Frontier<P>) -> Vec<usize> {
    (0..g.frontier.vertices.len())
        .filter(|&i| !other.contains(g.frontier.vertices[i], 3.0 * g.vertex_std_error(i)))
        .collect()
}

fn criterion6(run: &GaussianRun) -> Outcome {
    let rho: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let inner = inner_polytope(1.0, 1.0, 0.5).map_err(err)?;
    let outer = outer_bound(1.0, 1.0, 0.5, &rho).map_err(err)?;
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, g) in [("combined", &run.combined), ("2-bit", &run.two_bit)] {
        let tol = 3.0 * g.max_std_error();
        let lower = inner.vertices.iter().all(|v| g.frontier.contains(*v, tol));
        let upper = vertices_outside(g, &outer).is_empty();
        ok &= lower && upper;
        lines.push(format!("{name}: inner inside {lower}, inside outer {upper}"));
    }
    let out_coop = vertices_outside(&run.combined, &run.coop_only.frontier);
    let out_crib = vertices_outside(&run.combined, &run.crib_only.frontier);
    let both: Vec<usize> = out_coop.iter().copied().filter(|i| out_crib.contains(i)).collect();
    ok &= !both.is_empty();
    lines.push(format!(
        "combined vertices beyond cooperation-only {}, beyond cribbing-only {}, beyond both {}",
        out_coop.len(),
        out_crib.len(),
        both.len()
    ));
    let gap = outer.max_sum() - run.two_bit.max_sum_rate();
    ok &= gap <= 0.05;
    lines.push(format!(
        "2-bit max sum {:.4} vs outer {:.4} (gap {gap:.4}); 1-bit max sum {:.4}; skipped {} of 125 points",
        run.two_bit.max_sum_rate(),
        outer.max_sum(),
        run.combined.max_sum_rate(),
        run.combined.skipped.len()
    ));
    verdict(ok, lines.join("; "))
}

fn criterion7() -> Outcome {
    let truth = awgn_capacity(1.0, 0.5);
    let e = awgn_mi_estimate(1.0, 0.5, 100_000, 5).map_err(err)?;
    let mi_ok = (e.value - truth).abs() <= 3.0 * e.std_error;
    let cfg = gaussian_base(0.4, 1, QuantizerRule::default());
    let h = mc_region_point(&cfg).map_err(err)?.h_z_given_u;
    let h_ok = (h.value - 1.0).abs() <= (3.0 * h.std_error).max(1e-12);
    verdict(
        mi_ok && h_ok,
        format!(
            "I(X;Y) {:.5} +- {:.5} vs {truth:.5}; H(Z|U) {:.6} +- {:.2e}",
            e.value, e.std_error, h.value, h.std_error
        ),
    )
}

struct SimRun {
    inside_100: ErrorEstimate,
    inside_200: ErrorEstimate,
    outside_200: ErrorEstimate,
    sum_bound: f64,
}

fn sim_run() -> Result<SimRun, String> {
    let (fd, channel, links) = repetition_scheme(0.02);
    let joint = assemble(&fd).map_err(err)?;
    let poly = bounds_to_polytope(&eval_theorem1(&joint, links, CribCase::A).map_err(err)?).map_err(err)?;
    let corner = poly
        .vertices
        .iter()
        .copied()
        .max_by(|a, b| (a.r1 + a.r2).total_cmp(&(b.r1 + b.r2)).then(a.r1.total_cmp(&b.r1)))
        .ok_or("empty region")?;
    let caps = (joint.cond_entropy(&["Z1"], &["U"]).map_err(err)?, joint.cond_entropy(&["Z2"], &["U"]).map_err(err)?);
    let run = |scale: f64, n: usize| {
        let rates = split_rates(scale * corner.r1, scale * corner.r2, links, caps);
        estimate_error(&fd, &channel, &SimConfig { n, b_blocks: 6, trials: 500, epsilon: 0.15, rates, seed: 11 })
            .map_err(err)
    };
    Ok(SimRun {
        inside_100: run(0.9, 100)?,
        inside_200: run(0.9, 200)?,
        outside_200: run(1.5, 200)?,
        sum_bound: poly.max_sum(),
    })
}

impl SimRun {
    fn json(&self) -> String {
        serde_json::to_string(&[&self.inside_100, &self.inside_200, &self.outside_200]).expect("serializable")
    }
}

fn criterion8(run: &SimRun) -> Outcome {
    let a = run.inside_200.rate <= 0.10;
    let b = run.outside_200.rate >= 0.2;
    let c = run.inside_200.rate <= run.inside_100.wilson_95.1;
    verdict(
        a && b && c,
        format!(
            "sum bound {:.4}; 0.9x n=200 error {:.3}; 1.5x n=200 error {:.3}; 0.9x n=100 error {:.3} (upper {:.3})",
            run.sum_bound, run.inside_200.rate, run.outside_200.rate, run.inside_100.rate, run.inside_100.wilson_95.1
        ),
    )
}

fn criterion9(first: &(Vec<String>, Vec<u8>, String)) -> Outcome {
    let (csv1, _, _) = oracle_run()?;
    let g = gaussian_run()?.csv();
    let s = sim_run()?.json();
    let same = [csv1 == first.0, g == first.1, s == first.2];
    verdict(
        same.iter().all(|&x| x),
        format!("frontier CSV {}, sweep CSV {}, simulation JSON {}", same[0], same[1], same[2]),
    )
}

fn report(k: usize, start: Instant, o: Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    match o {
        Ok(d) => {
            println!("criterion {k}: PASS ({secs:.1}s) {d}");
            true
        }
        Err(d) => {
            println!("criterion {k}: FAIL ({secs:.1}s) {d}");
            false
        }
    }
}

fn main() {
    let mut passed = 0;
    let mut t = Instant::now();
    let first_oracle = oracle_run();
    passed += report(1, t, first_oracle.as_ref().map_err(|e| e.clone()).and_then(criterion1)) as usize;

    for (k, f) in [(2, criterion2 as fn() -> Outcome), (3, criterion3), (4, criterion4), (5, criterion5)] {
        t = Instant::now();
        passed += report(k, t, f()) as usize;
    }

    t = Instant::now();
    let g = gaussian_run();
    passed += report(6, t, g.as_ref().map_err(|e| e.clone()).and_then(criterion6)) as usize;

    t = Instant::now();
    passed += report(7, t, criterion7()) as usize;

    t = Instant::now();
    let s = sim_run();
    passed += report(8, t, s.as_ref().map_err(|e| e.clone()).and_then(criterion8)) as usize;

    t = Instant::now();
    let c9 = match (first_oracle, g, s) {
        (Ok((csv, _, _)), Ok(g), Ok(s)) => criterion9(&(csv, g.csv(), s.json())),
        _ => Err("an earlier run failed".into()),
    };
    passed += report(9, t, c9) as usize;

    println!("{passed}/9 criteria passed");
    if passed != 9 {
        std::process::exit(1);
    }
}
