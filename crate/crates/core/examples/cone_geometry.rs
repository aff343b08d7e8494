//! Points on the cone, geodesic distances across the seam, and the conformal
//! map between the unit disc and the unrolled sector.

use std::f64::consts::PI;

use conegl::geometry::{conformal_derivative_modulus, disc_to_sector, geodesic_distance, sector_to_disc};
use conegl::{ConeParams, ConePoint};
use num_complex::Complex64;

fn main() {
    for alpha in [PI / 3.0, PI, 1.5 * PI] {
        let cone = ConeParams::new(alpha).unwrap();
        let p = ConePoint::new(0.6, 0.1, &cone).unwrap();
        let q = ConePoint::new(0.6, alpha - 0.1, &cone).unwrap();
        println!("alpha = {:.4}", alpha);
        println!("  p = {p:?}\n  q = {q:?}");
        println!("  geodesic distance across the seam: {:.6}", geodesic_distance(&p, &q, &cone));
        println!("  distance to the tip: {:.6}", geodesic_distance(&p, &ConePoint::TIP, &cone));

        let z = Complex64::from_polar(0.5, 2.0);
        let w = disc_to_sector(z, &cone).unwrap();
        let back = sector_to_disc(w, &cone).unwrap();
        println!("  P({z:.4}) = {w:.4}, P^-1 back = {back:.4}");
        println!("  |P'(z)| = {:.6}", conformal_derivative_modulus(z, &cone).unwrap());
    }
}
