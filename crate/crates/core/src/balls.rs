//! Admissible ball families on the cone, their exponential growth with merge
//! events, and the energy lower bound accumulated along the growth.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree_cost::m_closed;
use crate::field::TangentField;
use crate::geometry::{geodesic_distance, ConeParams, ConePoint};
use crate::vortex::VortexSet;

/// Relative slack under which two closed balls count as touching.
const TOUCH_TOL: f64 = 1e-12;
/// Slack used when merging at a computed event time.
const EVENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: ConePoint,
    pub radius: f64,
    pub degree: i64,
}

impl Ball {
    pub fn new(center: ConePoint, radius: f64, degree: i64) -> Self {
        assert!(radius > 0.0 && radius.is_finite(), "ball radius must be positive, got {radius}");
        Self { center, radius, degree }
    }

    pub fn tip(radius: f64, degree: i64) -> Self {
        Self::new(ConePoint::TIP, radius, degree)
    }

    pub fn is_tip(&self) -> bool {
        self.center.is_tip()
    }

    pub fn contains(&self, p: &ConePoint, cone: &ConeParams) -> bool {
        geodesic_distance(&self.center, p, cone) <= self.radius * (1.0 + TOUCH_TOL)
    }

    fn scaled(&self, f: f64) -> Self {
        Self { radius: self.radius * f, ..*self }
    }
}

/// True when the ball meets every ray from the tip. Tip-centered balls
/// always do.
pub fn is_self_intersecting(b: &Ball, cone: &ConeParams) -> bool {
    let rho = b.center.r;
    if rho == 0.0 || b.radius >= rho {
        return true;
    }
    2.0 * (b.radius / rho).asin() >= cone.alpha()
}

fn intersect(a: &Ball, b: &Ball, cone: &ConeParams, tol: f64) -> bool {
    geodesic_distance(&a.center, &b.center, cone) <= (a.radius + b.radius) * (1.0 + tol)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallError {
    #[error("a family needs exactly one tip-centered ball, found {0}")]
    TipCount(usize),
}

/// A family of closed balls whose first ball is centered at the tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub alpha: ConeParams,
    pub balls: Vec<Ball>,
}

impl BallFamily {
    /// The tip ball is moved to the front. Overlaps are allowed; see [`merge`].
    pub fn new(cone: ConeParams, mut balls: Vec<Ball>) -> Result<Self, BallError> {
        let tips = balls.iter().filter(|b| b.is_tip()).count();
        if tips != 1 {
            return Err(BallError::TipCount(tips));
        }
        let at = balls.iter().position(|b| b.is_tip()).expect("one tip ball");
        let tip = balls.remove(at);
        balls.insert(0, tip);
        Ok(Self { alpha: cone, balls })
    }

    pub fn cone(&self) -> &ConeParams {
        &self.alpha
    }

    pub fn tip(&self) -> &Ball {
        &self.balls[0]
    }

    /// `r(𝓑)`, the sum of the radii.
    pub fn total_radius(&self) -> f64 {
        self.balls.iter().map(|b| b.radius).sum()
    }

    pub fn total_degree(&self) -> i64 {
        self.balls.iter().map(|b| b.degree).sum()
    }

    pub fn contains(&self, p: &ConePoint) -> bool {
        self.balls.iter().any(|b| b.contains(p, &self.alpha))
    }

    pub fn is_disjoint(&self) -> bool {
        let n = self.balls.len();
        (0..n).all(|i| (i + 1..n).all(|j| !intersect(&self.balls[i], &self.balls[j], &self.alpha, TOUCH_TOL)))
    }

    pub fn is_admissible(&self) -> bool {
        self.balls.first().is_some_and(Ball::is_tip)
            && self.balls.iter().filter(|b| b.is_tip()).count() == 1
            && self.is_disjoint()
    }

    fn scaled(&self, f: f64) -> Self {
        Self { alpha: self.alpha, balls: self.balls.iter().map(|b| b.scaled(f)).collect() }
    }
}

/// Absorbs an off-tip ball into the tip ball. Using `max(R, ρ) + s` keeps
/// the radius sum from decreasing and stays below `R + 2s`.
fn absorb(tip: &Ball, b: &Ball) -> Ball {
    Ball { center: ConePoint::TIP, radius: tip.radius.max(b.center.r) + b.radius, degree: tip.degree + b.degree }
}

/// The ball replacing an intersecting
/// off-tip pair: radius `s + s'` centered on the joining geodesic.
fn enclose_pair(a: &Ball, b: &Ball, cone: &ConeParams) -> Ball {
    let pa = a.center.to_plane();
    let (pb, _) = b.center.to_plane_near(a.center.theta, cone);
    let d = (pb - pa).norm();
    let radius = a.radius + b.radius;
    let center = if d == 0.0 {
        a.center
    } else {
        // distance from a's center, inside [d − s, s'] so both balls fit
        let t = (0.5 * (d + b.radius - a.radius)).max((d - a.radius).max(0.0)).min(b.radius.min(d));
        let c = pa + (pb - pa) * (t / d);
        let rho = c.norm();
        if rho == 0.0 {
            ConePoint::TIP
        } else {
            let turn = (c * Complex64::from_polar(1.0, -a.center.theta)).arg();
            ConePoint::new_unchecked(rho, a.center.theta + turn, cone)
        }
    };
    Ball { center, radius, degree: a.degree + b.degree }
}

fn merge_with(family: &BallFamily, tol: f64) -> (BallFamily, Vec<String>) {
    let cone = family.alpha;
    let mut balls = family.balls.clone();
    let mut log = Vec::new();
    'outer: loop {
        let n = balls.len();
        for i in 0..n {
            for j in i + 1..n {
                if !intersect(&balls[i], &balls[j], &cone, tol) {
                    continue;
                }
                if i == 0 {
                    log.push(format!("ball {j} absorbed into the tip ball"));
                    balls[0] = absorb(&balls[0], &balls[j]);
                } else {
                    let merged = enclose_pair(&balls[i], &balls[j], &cone);
                    if is_self_intersecting(&merged, &cone) {
                        log.push(format!("balls {i} and {j} merged into a self-intersecting ball, moved to the tip"));
                        balls[0] = absorb(&balls[0], &merged);
                        balls.remove(i);
                        balls.remove(j - 1);
                        continue 'outer;
                    }
                    log.push(format!("balls {i} and {j} merged"));
                    balls[i] = merged;
                }
                balls.remove(j);
                continue 'outer;
            }
        }
        break;
    }
    (BallFamily { alpha: cone, balls }, log)
}

/// Merges intersecting balls until the family is pairwise disjoint. Pairs
/// are processed in ascending index order.
pub fn merge(family: &BallFamily) -> BallFamily {
    merge_with(family, TOUCH_TOL).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub time: f64,
    pub balls_before: usize,
    pub balls_after: usize,
    pub description: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub family: BallFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrajectory {
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<MergeEvent>,
}

impl GrowthTrajectory {
    pub fn initial(&self) -> &BallFamily {
        &self.snapshots[0].family
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has a snapshot")
    }
}

impl GrowthTrajectory {
    /// Violations of the growth invariants: admissibility and conserved
    /// degree at every snapshot, `e^t r₀ ≤ r(t) ≤ (1 + 2π/α) e^t r₀`, and
    /// nesting checked on `samples` random points per step.
    pub fn invariant_violations(&self, samples: usize, rng: &mut impl Rng) -> Vec<String> {
        let mut out = Vec::new();
        let c = self.initial().alpha;
        let r0 = self.initial().total_radius();
        let deg = self.initial().total_degree();
        for s in &self.snapshots {
            if !s.family.is_admissible() {
                out.push(format!("t={:.6}: family not admissible", s.time));
            }
            if s.family.total_degree() != deg {
                out.push(format!("t={:.6}: total degree {} != {deg}", s.time, s.family.total_degree()));
            }
            let r = s.family.total_radius();
            let e = s.time.exp() * r0;
            if !(r >= e * (1.0 - 1e-9) && r <= inflation_bound(&c) * e * (1.0 + 1e-9)) {
                out.push(format!("t={:.6}: total radius {r} outside [{e}, {}]", s.time, inflation_bound(&c) * e));
            }
        }
        for w in self.snapshots.windows(2) {
            for _ in 0..samples {
                let p = sample_inside(&w[0].family, rng);
                if !w[1].family.contains(&p) {
                    out.push(format!("t={:.6}: point {p:?} escaped", w[1].time));
                    break;
                }
            }
        }
        out
    }
}

/// Random admissible family: a tip ball and up to eight off-tip balls with
/// degrees in `[−2, 2]`, merged.
pub fn random_family(c: &ConeParams, rng: &mut impl Rng) -> BallFamily {
    let mut balls = vec![Ball::tip(rng.gen_range(0.01..0.1), rng.gen_range(-1..=1))];
    for _ in 0..rng.gen_range(1..=8) {
        let p = ConePoint::new_unchecked(rng.gen_range(0.15..1.0), rng.gen_range(0.0..c.alpha()), c);
        balls.push(Ball::new(p, rng.gen_range(0.005..0.06), rng.gen_range(-2..=2)));
    }
    merge(&BallFamily::new(*c, balls).expect("one tip ball"))
}

fn sample_inside(f: &BallFamily, rng: &mut impl Rng) -> ConePoint {
    let c = f.alpha;
    loop {
        let b = f.balls[rng.gen_range(0..f.balls.len())];
        let (w, _) = b.center.to_plane_near(b.center.theta, &c);
        let q = w + Complex64::from_polar(b.radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let p = ConePoint::new_unchecked(q.norm(), q.arg(), &c);
        if b.contains(&p, &c) {
            return p;
        }
    }
}

/// Time from now until `a` and `b` touch when both radii grow like `e^t`.
pub fn collision_time(a: &Ball, b: &Ball, cone: &ConeParams) -> f64 {
    let d = geodesic_distance(&a.center, &b.center, cone);
    (d / (a.radius + b.radius)).ln().max(0.0)
}

/// Same as [`collision_time`] by bisection of the gap on `[0, t_max]` to
/// `1e-10`; `None` if the balls are still apart at `t_max`.
pub fn collision_time_bisection(a: &Ball, b: &Ball, cone: &ConeParams, t_max: f64) -> Option<f64> {
    let d = geodesic_distance(&a.center, &b.center, cone);
    let gap = |t: f64| d - t.exp() * (a.radius + b.radius);
    if gap(t_max) > 0.0 {
        return None;
    }
    if gap(0.0) <= 0.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, t_max);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

fn next_collision(family: &BallFamily) -> Option<(f64, usize, usize)> {
    let n = family.balls.len();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let t = collision_time(&family.balls[i], &family.balls[j], &family.alpha);
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, i, j));
            }
        }
    }
    best
}

/// Grows every radius like `e^t` up to `t_final`, merging at each contact.
/// The input is merged first if it overlaps.
pub fn grow(family: &BallFamily, t_final: f64) -> GrowthTrajectory {
    let mut fam = merge(family);
    let mut t = 0.0;
    let mut snapshots = vec![Snapshot { time: 0.0, family: fam.clone() }];
    let mut events = Vec::new();
    loop {
        let next = next_collision(&fam).filter(|(dt, _, _)| t + dt <= t_final);
        let Some((dt, i, j)) = next else {
            if t_final > t {
                fam = fam.scaled((t_final - t).exp());
                snapshots.push(Snapshot { time: t_final, family: fam });
            }
            break;
        };
        t += dt;
        let before = fam.balls.len();
        let grown = fam.scaled(dt.exp());
        let (mut merged, mut log) = merge_with(&grown, EVENT_TOL);
        if merged.balls.len() == before {
            // roundoff left the touching pair just apart
            let mut forced = grown.clone();
            let bj = forced.balls[j];
            let bi = forced.balls[i];
            let r = geodesic_distance(&bi.center, &bj.center, &fam.alpha);
            let f = r / (bi.radius + bj.radius);
            forced.balls[i].radius *= f;
            forced.balls[j].radius *= f;
            (merged, log) = merge_with(&forced, EVENT_TOL);
        }
        events.push(MergeEvent { time: t, balls_before: before, balls_after: merged.balls.len(), description: log });
        fam = merged;
        snapshots.push(Snapshot { time: t, family: fam.clone() });
    }
    GrowthTrajectory { snapshots, events }
}

/// Lower-bound weight of one ball: `|d|` away from the tip, `m(d, α)` at it.
fn ball_cost(b: &Ball, cone: &ConeParams) -> f64 {
    if b.is_tip() {
        m_closed(b.degree, cone)
    } else {
        b.degree.abs() as f64
    }
}

/// `∫ Σ_B π c(B) dt` over the trajectory minus `π log 2 Σ c` over the final
/// balls, with `c(B) = |d_B|` off the tip and `m(d_B, α)` for the tip ball.
pub fn lower_bound_ledger(traj: &GrowthTrajectory, cone: &ConeParams) -> f64 {
    let cost = |f: &BallFamily| f.balls.iter().map(|b| ball_cost(b, cone)).sum::<f64>();
    let mut total = 0.0;
    for w in traj.snapshots.windows(2) {
        total += PI * cost(&w[0].family) * (w[1].time - w[0].time);
    }
    total - PI * LN_2 * cost(&traj.last().family)
}

/// Initial balls covering the set `|u| < threshold` of a field: each such node
/// is assigned to the tip or to the nearest detected vortex, whose ball is
/// widened to cover it with one cell of margin. Overlaps are merged.
pub fn bad_set_family(field: &TangentField, vortices: &VortexSet, threshold: f64) -> BallFamily {
    let g = field.grid();
    let cone = *g.cone();
    let cell = |i: usize| {
        let dr = if i + 1 < g.n_r() { g.radius(i + 1) - g.radius(i) } else { g.radius(i) - g.radius(i - 1) };
        dr.max(g.radius(i) * g.dtheta())
    };
    let mut tip = Ball::tip(g.radius(1), vortices.tip_degree);
    let mut balls: Vec<Ball> =
        vortices.vortices.iter().map(|v| Ball::new(v.position, cell(g.ring_below(v.position.r).unwrap_or(0)), v.degree)).collect();
    for i in 0..g.n_r() {
        for k in 0..g.n_theta() {
            if field.get(i, k).norm() >= threshold {
                continue;
            }
            let p = g.point(i, k);
            let reach = p.r + cell(i);
            let nearest = balls
                .iter()
                .enumerate()
                .map(|(j, b)| (j, geodesic_distance(&b.center, &p, &cone)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match nearest {
                Some((j, d)) if d < p.r => balls[j].radius = balls[j].radius.max(d + cell(i)),
                _ => tip.radius = tip.radius.max(reach),
            }
        }
    }
    balls.insert(0, tip);
    merge(&BallFamily { alpha: cone, balls })
}

/// `(1 + 2π/α)`, the worst inflation of a radius when a ball joins the tip.
pub fn inflation_bound(cone: &ConeParams) -> f64 {
    1.0 + TAU / cone.alpha()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cone(a: f64) -> ConeParams {
        ConeParams::new(a).unwrap()
    }

    fn pt(r: f64, th: f64, c: &ConeParams) -> ConePoint {
        ConePoint::new_unchecked(r, th, c)
    }

    #[test]
    fn self_intersection_examples() {
        let c = cone(PI);
        assert!(!is_self_intersecting(&Ball::new(pt(1.0, 0.5, &c), 0.8, 0), &c));
        let c = cone(PI / 2.0);
        assert!(!is_self_intersecting(&Ball::new(pt(1.0, 0.5, &c), 0.5, 0), &c));
        assert!(is_self_intersecting(&Ball::new(pt(1.0, 0.5, &c), 0.75, 0), &c));
        assert!(is_self_intersecting(&Ball::tip(0.1, 0), &c));
    }

    #[test]
    fn wide_cones_self_intersect_only_through_tip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let c = cone(rng.gen_range(PI..TAU - 1e-6));
            let rho = rng.gen_range(0.01..1.0);
            let b = Ball::new(pt(rho, rng.gen_range(0.0..c.alpha()), &c), rng.gen_range(1e-4..2.0), 0);
            if is_self_intersecting(&b, &c) {
                assert!(b.contains(&ConePoint::TIP, &c));
            }
        }
    }

    #[test]
    fn merge_two_touching_offtip_balls() {
        let c = cone(PI);
        let a = Ball::new(pt(0.8, 1.0, &c), 0.1, 1);
        let d = 0.25_f64;
        let th = 1.0 + 2.0 * (d / 1.6).asin();
        let b = Ball::new(pt(0.8, th, &c), 0.15, -1);
        let fam = BallFamily::new(c, vec![Ball::tip(0.01, 0), a, b]).unwrap();
        let m = merge(&fam);
        assert_eq!(m.balls.len(), 2);
        assert!((m.balls[1].radius - 0.25).abs() < 1e-15);
        assert_eq!(m.balls[1].degree, 0);
        for p in [a.center, b.center] {
            assert!(m.balls[1].contains(&p, &c));
        }
    }

    #[test]
    fn tip_absorption_within_inflation_constant() {
        let c = cone(PI / 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let r0 = rng.gen_range(0.01..0.3);
            let s = rng.gen_range(0.01..0.3);
            let rho: f64 = rng.gen_range(0.0..(r0 + s));
            let b = Ball::new(pt(rho.max(1e-6), rng.gen_range(0.0..c.alpha()), &c), s, 1);
            let fam = BallFamily::new(c, vec![Ball::tip(r0, 1), b]).unwrap();
            let m = merge(&fam);
            assert_eq!(m.balls.len(), 1);
            let r = m.balls[0].radius;
            assert!(r <= r0 + 2.0 * s + 1e-15 && r >= r0 + s - 1e-15);
            assert_eq!(m.balls[0].degree, 2);
        }
    }

    #[test]
    fn self_intersecting_pair_goes_to_tip() {
        let c = cone(PI / 3.0);
        // two balls across the seam whose union wraps around the narrow cone
        let a = Ball::new(pt(0.5, 0.1, &c), 0.2, 1);
        let b = Ball::new(pt(0.5, c.alpha() - 0.1, &c), 0.2, 1);
        let fam = BallFamily::new(c, vec![Ball::tip(0.01, 0), a, b]).unwrap();
        let m = merge(&fam);
        assert_eq!(m.balls.len(), 1);
        assert_eq!(m.total_degree(), 2);
        assert!(m.balls[0].radius <= 0.01 + inflation_bound(&c) * 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let src = if rng.gen_bool(0.5) { a } else { b };
            let (w, _) = src.center.to_plane_near(src.center.theta, &c);
            let q = w + Complex64::from_polar(rng.gen_range(0.0..0.2), rng.gen_range(0.0..TAU));
            let p = pt(q.norm(), q.arg(), &c);
            if src.contains(&p, &c) {
                assert!(m.contains(&p));
            }
        }
    }

    #[test]
    fn single_tip_ball_grows_exponentially() {
        let c = cone(PI);
        let fam = BallFamily::new(c, vec![Ball::tip(0.1, 1)]).unwrap();
        let tr = grow(&fam, 1.0);
        assert!(tr.events.is_empty());
        assert!((tr.last().family.balls[0].radius - 0.1 * 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let c = cone(rng.gen_range(0.2..6.0));
            let a = Ball::new(pt(rng.gen_range(0.1..1.0), rng.gen_range(0.0..c.alpha()), &c), rng.gen_range(1e-3..0.05), 0);
            let b = Ball::new(pt(rng.gen_range(0.1..1.0), rng.gen_range(0.0..c.alpha()), &c), rng.gen_range(1e-3..0.05), 0);
            if intersect(&a, &b, &c, 0.0) {
                continue;
            }
            let t = collision_time(&a, &b, &c);
            let tb = collision_time_bisection(&a, &b, &c, 20.0).unwrap();
            assert!((t - tb).abs() < 2e-10, "{t} {tb}");
        }
    }

    #[test]
    fn figure_one_two_three_radii() {
        let c = cone(PI);
        // Figure 1: two off-tip balls meet at t0
        let (r0, r1) = (0.02, 0.03);
        let b0 = Ball::new(pt(0.7, 0.8, &c), r0, 1);
        let b1 = Ball::new(pt(0.7, 1.2, &c), r1, -1);
        let t0 = collision_time(&b0, &b1, &c);
        let tr = grow(&BallFamily::new(c, vec![Ball::tip(1e-3, 0), b0, b1]).unwrap(), t0 + 1e-9);
        let ev = &tr.events[0];
        assert!((ev.time - t0).abs() < 1e-12);
        let snap = &tr.snapshots[1];
        assert!((snap.family.balls[1].radius - t0.exp() * (r0 + r1)).abs() < 1e-12);

        // Figure 2: the tip ball absorbs a neighbour
        let (r0, r1) = (0.05, 0.02);
        let b1 = Ball::new(pt(0.3, 1.0, &c), r1, 1);
        let tr = grow(&BallFamily::new(c, vec![Ball::tip(r0, 1), b1]).unwrap(), 2.0);
        let e = &tr.events[0];
        let r = tr.snapshots[1].family.balls[0].radius;
        assert!((r - e.time.exp() * (r0 + 2.0 * r1)).abs() < 1e-12);

        // Figure 3: two balls merge and the result touches the tip ball
        let (s, rho, delta): (f64, f64, f64) = (0.02, 0.6, 0.3);
        let et = rho * delta.sin() / s;
        let big = 2.0 * et * s;
        let mid = rho * delta.cos();
        let r0 = (mid - big) / et;
        let b1 = Ball::new(pt(rho, 1.5 - delta, &c), s, 1);
        let b2 = Ball::new(pt(rho, 1.5 + delta, &c), s, 1);
        let tr = grow(&BallFamily::new(c, vec![Ball::tip(r0, 0), b1, b2]).unwrap(), et.ln() + 1e-6);
        assert_eq!(tr.events.len(), 1);
        let t0 = tr.events[0].time;
        let fam = &tr.snapshots[1].family;
        assert_eq!(fam.balls.len(), 1);
        let want = t0.exp() * (r0 + 2.0 * s + 2.0 * s);
        assert!((fam.balls[0].radius - want).abs() < 1e-9 * want, "{} {want}", fam.balls[0].radius);
    }

    #[test]
    fn growth_invariants_on_random_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for a in [PI / 3.0, PI / 2.0, PI, 1.5 * PI] {
            let c = cone(a);
            for _ in 0..25 {
                let fam = random_family(&c, &mut rng);
                assert!(fam.is_admissible());
                let tr = grow(&fam, 3.0);
                let bad = tr.invariant_violations(40, &mut rng);
                assert!(bad.is_empty(), "{bad:?}");
            }
        }
    }

    #[test]
    fn ledger_examples() {
        let c = cone(PI);
        let s = 1.7;
        let tr = grow(&BallFamily::new(c, vec![Ball::tip(0.01, 2)]).unwrap(), s);
        assert!((lower_bound_ledger(&tr, &c) - PI * m_closed(2, &c) * (s - LN_2)).abs() < 1e-12);

        // a degree-0 off-tip ball adds nothing
        let alone = grow(&BallFamily::new(c, vec![Ball::tip(0.01, 0)]).unwrap(), 1.0);
        let tr = grow(&BallFamily::new(c, vec![Ball::tip(0.01, 0), Ball::new(pt(0.5, 1.0, &c), 0.01, 0)]).unwrap(), 1.0);
        assert_eq!(lower_bound_ledger(&tr, &c), lower_bound_ledger(&alone, &c));

        let fam = BallFamily::new(c, vec![Ball::tip(0.01, 1), Ball::new(pt(0.5, 1.0, &c), 0.01, 1)]).unwrap();
        let s = 2.0;
        let tr = grow(&fam, s);
        assert!(tr.events.is_empty());
        let want = PI * (m_closed(1, &c) + 1.0) * (s - LN_2);
        assert!((lower_bound_ledger(&tr, &c) - want).abs() < 1e-12);
    }
}
