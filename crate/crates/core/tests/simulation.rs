use coopcrib::fixtures::{and_multiplier, parallel_scheme, repetition_scheme, sparse_crib_scheme, twin_bsc, two_sided};
use coopcrib::info::DeterministicMap;
use coopcrib::regions::{bounds_to_polytope, eval_theorem1, CribCase};
use coopcrib::search::{assemble, randomize, stream_rng, FactorizedDist, Pattern, Problem, SearchConfig};
use coopcrib::sim::{
    build_codebooks, decode_crib, encode_superblock, encoder_decode_step, estimate_error, split_rates,
    typical_fraction, BlockMessages, DecodeError, Decoders, Rates, Scheme, SimConfig, SimError,
};
use std::fmt::Write;

fn cfg(n: usize, b: usize, trials: usize, eps: f64, rates: Rates, seed: u64) -> SimConfig {
    SimConfig { n, b_blocks: b, trials, epsilon: eps, rates, seed }
}

/// Binary entropy in bits.
fn h2(q: f64) -> f64 {
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

#[test]
fn own_codeword_decodes_at_the_encoder() {
    let (fd, _) = sparse_crib_scheme(0.3);
    let c = cfg(64, 2, 1, 0.2, Rates { r1_crib: 0.05, ..Rates::default() }, 3);
    let books = build_codebooks(&fd, &c).unwrap();
    let mut dec = Decoders::new(&Scheme::new(&fd).unwrap(), 0.2).unwrap();
    for k in 0..books.sizes.z1 {
        assert_eq!(encoder_decode_step(&books, &mut dec, 0, books.z1(0, k), 2), Ok(k));
    }
    let zero = build_codebooks(&fd, &cfg(64, 2, 1, 0.2, Rates::default(), 3)).unwrap();
    assert_eq!(encoder_decode_step(&zero, &mut dec, 0, zero.z1(0, 0), 2), Ok(0));
}

#[test]
fn crib_rate_above_entropy_is_ambiguous() {
    // H(X1) = 0.05 bits; the crib layer asks for 0.07
    let (mut lo, mut hi) = (1e-6, 0.5);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if h2(mid) < 0.05 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let q = lo;
    let (fd, _) = sparse_crib_scheme(q);
    let scheme = Scheme::new(&fd).unwrap();
    let mut dec = Decoders::new(&scheme, 0.05).unwrap();
    let (n, trials) = (200usize, 500usize);
    let count = (0.07 * n as f64).exp2().ceil() as usize;
    let u = vec![0u16; n];
    let mut ambiguous = 0;
    for t in 0..trials {
        let mut rng = stream_rng(41, t as u64);
        let layer = scheme.draw_crib_layer(2, &u, count, &mut rng);
        let k = (t * 7919) % count;
        let observed = layer[k * n..(k + 1) * n].to_vec();
        if decode_crib(&mut dec, 2, &u, &layer, &observed) == Err(DecodeError::AmbiguousCandidate) {
            ambiguous += 1;
        }
    }
    let rate = ambiguous as f64 / trials as f64;
    assert!(rate >= 0.2, "ambiguity rate {rate}");
}

#[test]
fn noiseless_parallel_channel_decodes_interior_rates() {
    let (fd, ch) = parallel_scheme();
    let rates = Rates { r1_private: 0.03, r2_private: 0.03, ..Rates::default() };
    let e = estimate_error(&fd, &ch, &cfg(200, 2, 200, 0.1, rates, 8)).unwrap();
    assert!(e.rate < 0.05, "{e:?}");
}

#[test]
fn sum_rate_above_output_entropy_fails() {
    // |Y| = 2, so no scheme carries more than one bit per use. Codebooks of
    // rate above 1 are only storable at very short blocklengths.
    let ch = and_multiplier();
    let problem = Problem::mac(ch.clone(), DeterministicMap::constant(2), None);
    let fd = FactorizedDist::template(Pattern::Thm1A, &problem, &SearchConfig::default().with_card("U", 1)).unwrap();
    let rates = Rates { r1_private: 0.6, r2_private: 0.6, ..Rates::default() };
    let e = estimate_error(&fd, &ch, &cfg(10, 1, 500, 0.2, rates, 4)).unwrap();
    assert!(e.rate >= 0.2, "{e:?}");
}

#[test]
fn iid_sequences_are_typical() {
    let problem = two_sided(twin_bsc(0.25));
    let fd = FactorizedDist::template(Pattern::Thm1A, &problem, &SearchConfig::default()).unwrap();
    let joint = assemble(&fd).unwrap();
    let miss = 1.0 - typical_fraction(joint.table(), 0.05, 200, 2000, 12);
    assert!(miss < 0.05, "miss rate {miss}");
}

#[test]
fn oversized_books_are_refused() {
    let (fd, ch) = parallel_scheme();
    let rates = Rates { r1_private: 0.5, r2_private: 0.5, ..Rates::default() };
    assert!(matches!(estimate_error(&fd, &ch, &cfg(200, 2, 1, 0.1, rates, 1)), Err(SimError::SizeOverflow(_))));
}

#[test]
fn repetition_fixture_threshold_with_few_trials() {
    let (fd, ch, links) = repetition_scheme(0.02);
    let joint = assemble(&fd).unwrap();
    let poly = bounds_to_polytope(&eval_theorem1(&joint, links, CribCase::A).unwrap()).unwrap();
    let corner = poly.vertices.iter().copied().max_by(|a, b| (a.r1 + a.r2).total_cmp(&(b.r1 + b.r2))).unwrap();
    assert!((corner.r1 - 0.02).abs() < 1e-12 && (corner.r2 - 0.02).abs() < 1e-12);
    let inside = split_rates(0.9 * corner.r1, 0.9 * corner.r2, links, (0.0, 0.0));
    let outside = split_rates(1.5 * corner.r1, 1.5 * corner.r2, links, (0.0, 0.0));
    let a = estimate_error(&fd, &ch, &cfg(200, 6, 60, 0.15, inside, 2)).unwrap();
    let b = estimate_error(&fd, &ch, &cfg(200, 6, 60, 0.15, outside, 2)).unwrap();
    assert!(a.rate <= 0.1, "{a:?}");
    assert!(b.rate >= 0.2, "{b:?}");
    assert_eq!(a, estimate_error(&fd, &ch, &cfg(200, 6, 60, 0.15, inside, 2)).unwrap());
}

fn golden_dist() -> FactorizedDist {
    let problem = two_sided(twin_bsc(0.1));
    let mut fd = FactorizedDist::template(Pattern::Thm1A, &problem, &SearchConfig::default()).unwrap();
    randomize(&mut fd, &mut stream_rng(1, 0)).unwrap();
    fd
}

#[test]
fn superblock_matches_golden_file() {
    let fd = golden_dist();
    let rates = Rates { r0: 0.125, r1_crib: 0.0625, r1_private: 0.0625, r2_crib: 0.0625, r2_private: 0.125 };
    let c = cfg(16, 3, 1, 0.1, rates, 2024);
    let books = build_codebooks(&fd, &c).unwrap();
    let msgs = [
        BlockMessages { m0: 1, m1_crib: 1, m1_private: 0, m2_crib: 0, m2_private: 3 },
        BlockMessages { m0: 3, m1_crib: 0, m1_private: 1, m2_crib: 1, m2_private: 2 },
        BlockMessages { m0: 2, m1_crib: 0, m1_private: 1, m2_crib: 0, m2_private: 0 },
    ];
    let (x1, x2) = encode_superblock(&books, &msgs).unwrap();
    let mut text = String::new();
    for (label, seq) in [("x1", &x1), ("x2", &x2)] {
        for block in seq.chunks(16) {
            let s: String = block.iter().map(|v| char::from(b'0' + *v as u8)).collect();
            writeln!(text, "{label} {s}").unwrap();
        }
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/superblock_n16.txt");
    if std::env::var_os("COOPCRIB_BLESS").is_some() {
        std::fs::write(path, &text).unwrap();
    }
    let want = std::fs::read_to_string(path).expect("golden file present; set COOPCRIB_BLESS=1 to create it");
    assert_eq!(text, want);
    // block 2 chains on the crib index sent in block 1
    assert_ne!(books.u_index(3, 1, 0), books.u_index(1, 0, 0));
}
