//! The degree-cost function m(d, α): closed form, brute force and the
//! optimal split between the tip and off-tip vortices.

use std::f64::consts::PI;

use conegl::degree_cost::{additivity_check, default_bound, m_table, m_table_csv};
use conegl::{m_bruteforce, m_closed, ConeParams};

fn main() {
    let cones: Vec<ConeParams> = [1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0, 1.5].iter().map(|a| ConeParams::new(a * PI).unwrap()).collect();
    print!("{}", m_table_csv(&m_table(-3..=3, &cones)));

    let cone = ConeParams::new(1.5 * PI).unwrap();
    for d in [-2, 0, 2] {
        let s = m_bruteforce(d, &cone, default_bound(d, &cone));
        println!("α = 1.5π, d = {d}: tip degree {}, off-tip {}, m = {:.6} (closed {:.6})", s.d0, s.d1, s.cost, m_closed(d, &cone));
    }
    println!("additivity for 3 = 1 + 1 + 1: {}", additivity_check(3, &[1, 1, 1], &cone).unwrap());
}
