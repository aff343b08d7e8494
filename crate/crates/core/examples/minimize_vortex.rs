//! Minimizes the GL energy with canonical boundary data and locates the
//! tip degree and off-tip vortices.
//!
//! `cargo run --release --example minimize_vortex -- [dbar] [alpha/π] [ε]`

use std::f64::consts::PI;

use conegl::experiment::{solve_gl, GridConfig, InitStrategy};
use conegl::minimizer::SolverOptions;
use conegl::vortex::detect_vortices;
use conegl::{m_closed, ConeParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dbar: i64 = args.first().map_or(2, |s| s.parse().expect("dbar"));
    let alpha = args.get(1).map_or(1.0, |s| s.parse::<f64>().expect("alpha/π")) * PI;
    let eps: f64 = args.get(2).map_or(0.05, |s| s.parse().expect("epsilon"));

    let cone = ConeParams::new(alpha).unwrap();
    let grid = GridConfig::default().build(cone).unwrap();
    let solver = SolverOptions { init_noise: 0.05, ..SolverOptions::default() };
    let run = solve_gl(cone, &grid, dbar, eps, &solver, InitStrategy::Best).unwrap();

    println!("d̄ = {dbar}, α = {alpha:.4}, ε = {eps}");
    println!("energy {:?} after {} iterations (start: {:?})", run.energy, run.iterations, run.init);
    println!("π m log(1/ε) = {:.6}", PI * m_closed(dbar, &cone) * (1.0 / eps).ln());
    println!("min |u| within 3√ε of the tip: {:?}", run.field.min_modulus_within(3.0 * eps.sqrt()));
    match detect_vortices(&run.field, eps) {
        Ok(set) => {
            println!("tip degree {}", set.tip_degree);
            for v in &set.vortices {
                println!("vortex of degree {:+} at r = {:.4}, θ = {:.4}", v.degree, v.position.r, v.position.theta);
            }
        }
        Err(e) => println!("detection failed: {e}"),
    }
}
