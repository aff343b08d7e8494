//! Cone degrees of explicit fields: the frame correction turns the planar
//! winding `k·2π/α + 1` around the tip into the integer `k + 1`.

use std::f64::consts::PI;

use conegl::{ConeParams, SectorGrid, TangentField};

fn main() {
    for alpha in [PI / 2.0, PI, 1.5 * PI] {
        let cone = ConeParams::new(alpha).unwrap();
        let grid = SectorGrid::new(cone, 24, 96, 0.05).unwrap();
        let row: Vec<String> = (-3..=3)
            .map(|k| {
                let omega = k as f64 * 2.0 * PI / alpha + 1.0;
                let f = TangentField::phase_field(grid.clone(), omega);
                format!("k={k:+} -> {:+}", f.degree(grid.n_r() - 1).unwrap())
            })
            .collect();
        println!("alpha = {:.4}: {}", alpha, row.join(", "));
    }

    // the text format round-trips exactly
    let cone = ConeParams::new(PI).unwrap();
    let f = TangentField::phase_field(SectorGrid::new(cone, 16, 32, 0.1).unwrap(), 3.0);
    let mut buf = Vec::new();
    f.write_text(0.1, &mut buf).unwrap();
    let (g, eps) = TangentField::read_text(buf.as_slice()).unwrap();
    println!("round trip equal: {}, epsilon {eps}", f == g);
}
