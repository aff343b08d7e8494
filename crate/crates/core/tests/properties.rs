use std::f64::consts::TAU;

use conegl::balls::{grow, random_family};
use conegl::degree_cost::{additivity_check, default_bound};
use conegl::geometry::{disc_to_sector, geodesic_distance, sector_to_disc};
use conegl::renorm::{BoundaryFlux, Case, DiscBoundary, GreensFunction, RenormProblem};
use conegl::{m_bruteforce, m_closed, ConeParams, ConePoint, SectorGrid, TangentField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cone() -> impl Strategy<Value = ConeParams> {
    (0.05f64..0.98).prop_map(|t| ConeParams::new(t * TAU).unwrap())
}

fn disc_point(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..max, 0.0f64..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn modes() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3).prop_map(|(a, b)| Complex64::new(a, b)), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_bruteforce(d in -12i64..=12, c in cone()) {
        let b = m_bruteforce(d, &c, default_bound(d, &c));
        prop_assert!((b.cost - m_closed(d, &c)).abs() < 1e-9, "d={d} α={} brute={} closed={}", c.alpha(), b.cost, m_closed(d, &c));
        prop_assert_eq!(b.d0 + b.d1, d);
    }

    #[test]
    fn degree_cost_is_subadditive(c in cone(), split in prop::collection::vec(-5i64..=5, 1..6)) {
        let dbar = split.iter().sum();
        prop_assert!(additivity_check(dbar, &split, &c).unwrap());
    }

    #[test]
    fn phase_fields_have_the_prescribed_degree(c in cone(), d in -3i64..=3, shift in 0.0f64..TAU) {
        let grid = SectorGrid::new(c, 16, 256, 1e-3).unwrap();
        let omega = 1.0 + TAU * (d - 1) as f64 / c.alpha();
        let f = TangentField::from_fn(grid, |_, th| Complex64::from_polar(1.0, omega * th + shift));
        for i in [0, 8, 15] {
            prop_assert_eq!(f.degree(i).unwrap(), d);
        }
    }

    #[test]
    fn geodesic_distance_is_a_metric(c in cone(), a in (0.0f64..1.0, 0.0f64..1.0), b in (0.0f64..1.0, 0.0f64..1.0), e in (0.0f64..1.0, 0.0f64..1.0)) {
        let p = |(r, t): (f64, f64)| ConePoint::new_unchecked(r, t * c.alpha(), &c);
        let (p, q, s) = (p(a), p(b), p(e));
        let d = |x: &ConePoint, y: &ConePoint| geodesic_distance(x, y, &c);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-12);
        prop_assert!(d(&p, &s) <= d(&p, &q) + d(&q, &s) + 1e-12);
        prop_assert!(d(&p, &p) < 1e-12);
    }

    #[test]
    fn conformal_map_round_trips(c in cone(), z in disc_point(0.99)) {
        let w = disc_to_sector(z, &c).unwrap();
        let back = sector_to_disc(w, &c).unwrap();
        prop_assert!((back - z).norm() < 1e-10, "z={z} back={back}");
    }

    #[test]
    fn green_function_is_symmetric(chi in modes(), z in disc_point(0.9), p in disc_point(0.9)) {
        prop_assume!((z - p).norm() > 1e-3);
        let flux = BoundaryFlux::from_boundary(&DiscBoundary::with_perturbation(3, 0.0, chi)).unwrap();
        let g = GreensFunction::new(flux);
        let (a, b) = (g.eval(z, p).unwrap(), g.eval(p, z).unwrap());
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn green_function_meets_the_flux(chi in modes(), p in disc_point(0.8), theta in 0.0f64..TAU) {
        let flux = BoundaryFlux::from_boundary(&DiscBoundary::with_perturbation(-2, 0.0, chi)).unwrap();
        let g = GreensFunction::new(flux.clone());
        // normal derivative by a one-sided difference from inside
        let h = 1e-6;
        let z = Complex64::from_polar(1.0, theta);
        let dn = (g.eval(z, p).unwrap() - g.eval(z * (1.0 - h), p).unwrap()) / h;
        prop_assert!((dn - flux.value(theta)).abs() < 1e-4, "∂ₙG={dn} φ={}", flux.value(theta));
        // zero φ-weighted boundary mean, by the trapezoid rule
        let n = 512;
        let mean: f64 = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                g.eval(Complex64::from_polar(1.0, t), p).unwrap() * flux.value(t)
            })
            .sum::<f64>()
            * TAU
            / n as f64;
        prop_assert!(mean.abs() < 1e-8, "∮ G φ = {mean}");
    }

    #[test]
    fn canonical_w_is_rotation_invariant(c in cone(), z1 in disc_point(0.9), z2 in disc_point(0.9), rot in 0.0f64..TAU) {
        prop_assume!((z1 - z2).norm() > 1e-2 && z1.norm() > 1e-3 && z2.norm() > 1e-3);
        let w = RenormProblem::with_case(c, DiscBoundary::canonical(3), Case::One).unwrap();
        let e = Complex64::cis(rot);
        let a = w.energy(&[z1, z2]).unwrap();
        let b = w.energy(&[z1 * e, z2 * e]).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn ball_growth_keeps_its_invariants(c in cone(), seed in any::<u64>(), t in 0.1f64..2.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = random_family(&c, &mut rng);
        let traj = grow(&fam, t);
        let v = traj.invariant_violations(8, &mut rng);
        prop_assert!(v.is_empty(), "{v:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn field_text_round_trips(c in cone(), eps in 1e-4f64..1.0, vals in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 16 * 16)) {
        let grid = SectorGrid::new(c, 16, 16, 1e-4).unwrap();
        let f = TangentField::new(grid, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let mut buf = Vec::new();
        f.write_text(eps, &mut buf).unwrap();
        let (g, e) = TangentField::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(e, eps);
        prop_assert_eq!(g.values(), f.values());
        prop_assert_eq!(g.grid().radii(), f.grid().radii());
        prop_assert_eq!(g.grid().alpha(), c.alpha());
    }
}
