//! The vortex core constant γ and the tip constants γ₀(d̄, α).

use std::f64::consts::PI;

use conegl::core_energy::{gamma0_on, gamma_radial, CoreGrid};
use conegl::minimizer::SolverOptions;
use conegl::ConeParams;

fn main() {
    for eps in [0.1, 0.01, 0.001] {
        println!("γ(ε = {eps}) = {:.6}", gamma_radial(eps).unwrap());
    }
    let res = CoreGrid::default();
    let opts = SolverOptions::default();
    for (dbar, a) in [(2, 1.0), (0, 1.0), (0, 0.5)] {
        let cone = ConeParams::new(a * PI).unwrap();
        match gamma0_on(dbar, &cone, &[0.2, 0.1, 0.05, 0.025], &opts, &res) {
            Ok(g) => println!(
                "γ₀(d̄ = {dbar}, α = {a}π) ≈ {:.4} via {:?}, sequence {:?}",
                g.value, g.problem, g.sequence
            ),
            Err(e) => println!("γ₀(d̄ = {dbar}, α = {a}π): {e}"),
        }
    }
}
