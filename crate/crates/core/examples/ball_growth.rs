//! Admissible ball families: merging, exponential growth and the energy
//! lower bound collected along the way.

use std::f64::consts::PI;

use conegl::balls::{grow, lower_bound_ledger, random_family, Ball, BallFamily};
use conegl::{ConeParams, ConePoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let cone = ConeParams::new(PI / 2.0).unwrap();
    let fam = BallFamily::new(
        cone,
        vec![
            Ball::tip(0.05, 1),
            Ball::new(ConePoint::new(0.5, 0.3, &cone).unwrap(), 0.05, 1),
            Ball::new(ConePoint::new(0.5, 1.3, &cone).unwrap(), 0.05, -1),
        ],
    )
    .unwrap();
    let tr = grow(&fam, 2.5);
    for e in &tr.events {
        println!("t = {:.5}: {} -> {} balls; {}", e.time, e.balls_before, e.balls_after, e.description.join("; "));
    }
    for b in &tr.last().family.balls {
        println!("final ball at {:?}, radius {:.5}, degree {}", b.center, b.radius, b.degree);
    }
    println!("lower bound collected: {:.6}", lower_bound_ledger(&tr, &cone));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fam = random_family(&cone, &mut rng);
    let tr = grow(&fam, 3.0);
    let bad = tr.invariant_violations(50, &mut rng);
    println!("random family of {} balls: {} events, invariant violations {:?}", fam.balls.len(), tr.events.len(), bad);
}
