//! Green's functions, the renormalized energy W, its minimizers and the
//! conformal test field built from them.

use std::f64::consts::PI;

use conegl::experiment::GridConfig;
use conegl::renorm::{build_test_field, DiscBoundary, MinimizeWOptions, RenormProblem, TestFieldOptions};
use conegl::vortex::detect_vortices;
use conegl::{m_closed, ConeParams};

fn main() {
    for (dbar, a) in [(2, 1.0), (3, 1.0), (0, 0.5), (0, 1.5), (-1, 1.0)] {
        let cone = ConeParams::new(a * PI).unwrap();
        let problem = RenormProblem::new(cone, DiscBoundary::canonical(dbar)).unwrap();
        let rep = problem.minimize(&MinimizeWOptions::default()).unwrap();
        println!("d̄ = {dbar}, α = {a}π: {:?}, W = {:.6}", problem.case, rep.value);
        for (z, p) in rep.config.offtip().iter().zip(rep.config.cone_positions(&cone).unwrap()) {
            println!("  disc {z:.4} -> cone r = {:.4}, θ = {:.4}", p.r, p.theta);
        }

        let grid = GridConfig::default().build(cone).unwrap();
        let eps = 0.05;
        let tf = build_test_field(&problem, &rep.config, &grid, eps, &TestFieldOptions::default()).unwrap();
        let e = tf.field.gl_energy(eps).total;
        let set = detect_vortices(&tf.field, eps).unwrap();
        println!(
            "  test field at ε = {eps}: E − π m log(1/ε) = {:.4}, blend {:.4}, tip degree {}, {} vortices",
            e - PI * m_closed(dbar, &cone) * (1.0 / eps).ln(),
            tf.blend_energy,
            set.tip_degree,
            set.vortices.len()
        );
    }

    let cone = ConeParams::new(PI).unwrap();
    let problem = RenormProblem::new(cone, DiscBoundary::canonical(2)).unwrap();
    let cfg = problem.config(vec![num_complex::Complex64::new(0.5, 0.0)]).unwrap();
    println!(
        "d̄ = 2, α = π, |z| = 0.5: formula {:.6}, direct at η = 0.05 {:.6}",
        problem.energy(cfg.offtip()).unwrap(),
        problem.direct_energy(&cfg, 0.05).unwrap()
    );
}
