//! Fits the minimal energy against log(1/ε) and compares the slope with
//! π m(d̄, α).
//!
//! `cargo run --release --example energy_expansion -- [dbar] [alpha/π]`

use std::f64::consts::PI;

use conegl::experiment::{solve_gl, GridConfig, InitStrategy};
use conegl::minimizer::SolverOptions;
use conegl::vortex::fit_expansion;
use conegl::{m_closed, ConeParams};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dbar: i64 = args.first().map_or(0, |s| s.parse().expect("dbar"));
    let alpha = args.get(1).map_or(1.0, |s| s.parse::<f64>().expect("alpha/π")) * PI;
    let cone = ConeParams::new(alpha).unwrap();
    let grid = GridConfig::default().build(cone).unwrap();
    let solver = SolverOptions { init_noise: 0.05, ..SolverOptions::default() };

    let mut runs = Vec::new();
    for eps in [0.1, 0.07, 0.05, 0.035] {
        let r = solve_gl(cone, &grid, dbar, eps, &solver, InitStrategy::Best).unwrap();
        println!("ε = {eps}: E = {:.6}", r.energy.total);
        runs.push((eps, r.energy.total));
    }
    let fit = fit_expansion(&runs).unwrap();
    let want = PI * m_closed(dbar, &cone);
    println!("slope {:.4} vs π m = {:.4} ({:.1}% off), intercept {:.4}", fit.slope, want, 100.0 * (fit.slope / want - 1.0), fit.intercept);
}
