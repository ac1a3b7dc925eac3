//! Draws one-sided cribbing distributions, renames their axes into the
//! source-coding problem and prints the two corner pairs side by side.
//! The first corner is an intersection of two bounding lines and may sit
//! outside the positive quadrant; only the agreement between sides matters.

use coopcrib::checks::{random_channel, random_map};
use coopcrib::regions::{check_duality_corners, DUALITY_MAP};
use coopcrib::search::{assemble, randomize, stream_rng, FactorizedDist, Pattern, Problem, SearchConfig};

fn main() {
    let cfg = SearchConfig::default().with_card("U", 2);
    for trial in 0..5 {
        let mut rng = stream_rng(3, trial);
        let problem = Problem::mac(random_channel(vec![2, 3], 3, &mut rng), random_map(2, 2, &mut rng), None);
        let mut fd = FactorizedDist::template(Pattern::Thm2, &problem, &cfg).unwrap();
        randomize(&mut fd, &mut rng).unwrap();
        let mac = assemble(&fd).unwrap();
        let sr = mac.rename(&DUALITY_MAP).unwrap();
        let r = check_duality_corners(&mac, &sr, 0.2).unwrap();
        println!(
            "trial {trial}: channel ({:.4}, {:.4}) ({:.4}, {:.4})  source ({:.4}, {:.4}) ({:.4}, {:.4})  gap {:.1e}",
            r.mac.corner1.r1,
            r.mac.corner1.r2,
            r.mac.corner2.r1,
            r.mac.corner2.r2,
            r.sr.corner1.r1,
            r.sr.corner1.r2,
            r.sr.corner2.r1,
            r.sr.corner2.r2,
            r.max_difference
        );
    }
}
