//! Discrete tangent fields on a polar grid over the unrolled sector.
//!
//! Values are stored in the fixed Cartesian frame of the plane, so the cone's
//! covariant Dirichlet energy is the componentwise flat one. The node at
//! angle `α` is never stored: stencils crossing the seam read
//! `û(r, 0)·e^{iα}`.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConeParams, ConePoint, GeometryError};

pub const MIN_NODES: usize = 16;

/// Loops with a node modulus below this have no defined degree.
pub const DEGREE_MODULUS_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("need at least {MIN_NODES} nodes per direction, got n_r={n_r}, n_theta={n_theta}")]
    TooFewNodes { n_r: usize, n_theta: usize },
    #[error("invalid radial range [{r_min}, {r_max}]")]
    InvalidRange { r_min: f64, r_max: f64 },
    #[error("invalid grading ratio {0}")]
    InvalidRatio(f64),
    #[error("radii must be strictly increasing and positive")]
    BadRadii,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DegreeError {
    #[error("degree undefined on loop: node modulus {modulus:.3e} below {DEGREE_MODULUS_FLOOR:e}")]
    VanishingModulus { modulus: f64 },
    #[error("degree undefined on loop: phase step {step:.3} reaches π")]
    PhaseJump { step: f64 },
    #[error("winding is not an integer degree (residual {residual:.3})")]
    NonInteger { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialSpacing {
    Uniform,
    /// Geometric spacing with the given ratio from `r_min` until the step
    /// reaches the uniform spacing of the remaining nodes, uniform after.
    Graded { ratio: f64 },
}

/// Polar grid on `[r_min, r_max] × [0, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorGrid {
    cone: ConeParams,
    n_theta: usize,
    radii: Vec<f64>,
    theta_w: Vec<f64>,
    area_w: Vec<f64>,
    radial_w: Vec<f64>,
}

impl SectorGrid {
    /// Uniform grid covering `[r_min, 1]`.
    pub fn new(cone: ConeParams, n_r: usize, n_theta: usize, r_min: f64) -> Result<Self, GridError> {
        Self::with_spacing(cone, n_r, n_theta, r_min, 1.0, RadialSpacing::Uniform)
    }

    pub fn with_spacing(
        cone: ConeParams,
        n_r: usize,
        n_theta: usize,
        r_min: f64,
        r_max: f64,
        spacing: RadialSpacing,
    ) -> Result<Self, GridError> {
        if n_r < MIN_NODES || n_theta < MIN_NODES {
            return Err(GridError::TooFewNodes { n_r, n_theta });
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(GridError::InvalidRange { r_min, r_max });
        }
        let radii = match spacing {
            RadialSpacing::Uniform => {
                let h = (r_max - r_min) / (n_r - 1) as f64;
                (0..n_r)
                    .map(|i| if i == n_r - 1 { r_max } else { r_min + h * i as f64 })
                    .collect()
            }
            RadialSpacing::Graded { ratio } => {
                if !(ratio > 1.0 && ratio.is_finite()) {
                    return Err(GridError::InvalidRatio(ratio));
                }
                graded_radii(n_r, r_min, r_max, ratio)
            }
        };
        Self::from_radii(cone, n_theta, radii)
    }

    /// Grid with explicitly given radii.
    pub fn from_radii(cone: ConeParams, n_theta: usize, radii: Vec<f64>) -> Result<Self, GridError> {
        let n_r = radii.len();
        if n_r < MIN_NODES || n_theta < MIN_NODES {
            return Err(GridError::TooFewNodes { n_r, n_theta });
        }
        if !(radii[0] > 0.0) || radii.windows(2).any(|w| !(w[1] > w[0])) || !radii[n_r - 1].is_finite() {
            return Err(GridError::BadRadii);
        }
        // P1 hat weights, exact in r: ∫hat/r dr and ∫hat·r dr
        let mut theta_w = vec![0.0; n_r];
        let mut area_w = vec![0.0; n_r];
        let mut radial_w = vec![0.0; n_r - 1];
        for j in 0..n_r - 1 {
            let (a, b) = (radii[j], radii[j + 1]);
            let h = b - a;
            let l = (b / a).ln();
            theta_w[j] += (b / h) * l - 1.0;
            theta_w[j + 1] += 1.0 - (a / h) * l;
            area_w[j] += h * (b + 2.0 * a) / 6.0;
            area_w[j + 1] += h * (2.0 * b + a) / 6.0;
            radial_w[j] = (a + b) / (2.0 * h);
        }
        Ok(Self { cone, n_theta, radii, theta_w, area_w, radial_w })
    }

    /// Same angular resolution and cone with radii multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, GridError> {
        Self::from_radii(self.cone, self.n_theta, self.radii.iter().map(|r| r * s).collect())
    }

    #[inline]
    pub fn cone(&self) -> &ConeParams {
        &self.cone
    }
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.cone.alpha()
    }
    #[inline]
    pub fn n_r(&self) -> usize {
        self.radii.len()
    }
    #[inline]
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.radii.len() * self.n_theta
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }
    #[inline]
    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }
    #[inline]
    pub fn r_max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }
    #[inline]
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }
    #[inline]
    pub fn dtheta(&self) -> f64 {
        self.cone.alpha() / self.n_theta as f64
    }
    #[inline]
    pub fn theta(&self, k: usize) -> f64 {
        self.dtheta() * k as f64
    }
    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_theta + k
    }
    /// `∫ hat_i / r dr`, the angular-stiffness weight of ring `i`.
    #[inline]
    pub fn theta_weight(&self, i: usize) -> f64 {
        self.theta_w[i]
    }
    /// `∫ hat_i r dr`, the mass weight of ring `i`.
    #[inline]
    pub fn area_weight(&self, i: usize) -> f64 {
        self.area_w[i]
    }
    /// Radial-stiffness weight of the edge between rings `i` and `i+1`.
    #[inline]
    pub fn radial_weight(&self, i: usize) -> f64 {
        self.radial_w[i]
    }

    /// Largest radial step.
    pub fn max_radial_step(&self) -> f64 {
        self.radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Largest radial index with `r_i ≤ r`, or `None` when `r < r_min`.
    pub fn ring_below(&self, r: f64) -> Option<usize> {
        match self.radii.partition_point(|&x| x <= r) {
            0 => None,
            p => Some(p - 1),
        }
    }

    /// Cone point of node `(i, k)`.
    pub fn point(&self, i: usize, k: usize) -> ConePoint {
        ConePoint { r: self.radii[i], theta: self.theta(k) }
    }
}

fn graded_radii(n_r: usize, r_min: f64, r_max: f64, ratio: f64) -> Vec<f64> {
    let mut radii = vec![r_min];
    let mut step = r_min * (ratio - 1.0);
    loop {
        let j = radii.len() - 1;
        let r = radii[j];
        let remaining = n_r - 1 - j;
        let uniform = (r_max - r) / remaining as f64;
        if step >= uniform || remaining == 1 {
            for m in 1..=remaining {
                radii.push(if m == remaining { r_max } else { r + uniform * m as f64 });
            }
            return radii;
        }
        radii.push(r + step);
        step *= ratio;
    }
}

/// Dirichlet, potential and total Ginzburg–Landau energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub potential: f64,
    pub total: f64,
    pub epsilon: f64,
}

impl EnergyBreakdown {
    pub fn new(dirichlet: f64, potential: f64, epsilon: f64) -> Self {
        Self { dirichlet, potential, total: dirichlet + potential, epsilon }
    }
}

/// A complex value per grid node, row-major with the radial index outer.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    grid: SectorGrid,
    values: Vec<Complex64>,
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {0}")]
    NonFinite(usize),
}

impl TangentField {
    pub fn new(grid: SectorGrid, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(p) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(FieldError::NonFinite(p));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SectorGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Samples `f(r, θ)` at every node.
    pub fn from_fn(grid: SectorGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_r() {
            let r = grid.radius(i);
            for k in 0..grid.n_theta() {
                values.push(f(r, grid.theta(k)));
            }
        }
        Self { grid, values }
    }

    /// `e^{iωθ}`, the field winding with angular frequency `ω` in the plane.
    pub fn phase_field(grid: SectorGrid, omega: f64) -> Self {
        Self::from_fn(grid, |_, th| Complex64::from_polar(1.0, omega * th))
    }

    #[inline]
    pub fn grid(&self) -> &SectorGrid {
        &self.grid
    }
    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    #[inline]
    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, k)]
    }
    #[inline]
    pub fn set(&mut self, i: usize, k: usize, v: Complex64) {
        let idx = self.grid.index(i, k);
        self.values[idx] = v;
    }
    pub fn ring(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_theta();
        &self.values[i * n..(i + 1) * n]
    }

    /// Seam-aware accessor: `k` is wrapped into range and the value rotated by
    /// `e^{iαw}` for the signed wrap count `w`.
    pub fn sample(&self, i: usize, k: i64) -> Complex64 {
        let n = self.grid.n_theta() as i64;
        let w = k.div_euclid(n);
        let v = self.values[self.grid.index(i, k.rem_euclid(n) as usize)];
        if w == 0 {
            v
        } else {
            v * Complex64::from_polar(1.0, self.grid.alpha() * w as f64)
        }
    }

    /// Accumulated principal phase steps around the ring at index `i`,
    /// seam step included.
    pub fn loop_current(&self, i: usize) -> Result<f64, DegreeError> {
        let n = self.grid.n_theta() as i64;
        winding((0..=n).map(|k| self.sample(i, k)))
    }

    /// Cone degree of the ring at index `i` (the ring encloses the tip).
    pub fn degree(&self, i: usize) -> Result<i64, DegreeError> {
        tip_loop_degree(self.loop_current(i)?, self.grid.alpha())
    }

    /// Discrete Ginzburg–Landau energy.
    pub fn gl_energy(&self, epsilon: f64) -> EnergyBreakdown {
        let (d, p) = energy_parts(&self.grid, &self.values, epsilon);
        EnergyBreakdown::new(d, p, epsilon)
    }

    /// `½∮|∂_s û|² ds` along ring `i`, arc length `r dθ` per step.
    pub fn circle_dirichlet(&self, i: usize) -> f64 {
        let n = self.grid.n_theta() as i64;
        let h = self.grid.radius(i) * self.grid.dtheta();
        let mut s = 0.0;
        for k in 0..n {
            s += (self.sample(i, k + 1) - self.sample(i, k)).norm_sqr();
        }
        0.5 * s / h
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Minimum modulus over rings with `r_i < r`.
    pub fn min_modulus_within(&self, r: f64) -> Option<f64> {
        let mut m: Option<f64> = None;
        for i in 0..self.grid.n_r() {
            if self.grid.radius(i) >= r {
                break;
            }
            for v in self.ring(i) {
                let a = v.norm();
                m = Some(m.map_or(a, |x: f64| x.min(a)));
            }
        }
        m
    }

    /// Writes the text format (see [`TangentField::read_text`]).
    pub fn write_text<W: Write>(&self, epsilon: f64, mut w: W) -> std::io::Result<()> {
        writeln!(w, "conegl-field 1")?;
        writeln!(w, "alpha {:.16e}", self.grid.alpha())?;
        writeln!(w, "n_r {}", self.grid.n_r())?;
        writeln!(w, "n_theta {}", self.grid.n_theta())?;
        writeln!(w, "r_min {:.16e}", self.grid.r_min())?;
        writeln!(w, "epsilon {:.16e}", epsilon)?;
        write!(w, "radii")?;
        for r in self.grid.radii() {
            write!(w, " {:.16e}", r)?;
        }
        writeln!(w)?;
        writeln!(w, "data")?;
        for v in &self.values {
            writeln!(w, "{:.16e} {:.16e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the text format:
    ///
    /// ```text
    /// conegl-field 1
    /// alpha <f64>
    /// n_r <usize>
    /// n_theta <usize>
    /// r_min <f64>
    /// epsilon <f64>
    /// radii <r_0> ... <r_{n_r-1}>
    /// data
    /// <re> <im>            (n_r * n_theta lines, i_r outer, k_theta inner)
    /// ```
    pub fn read_text<R: BufRead>(r: R) -> Result<(Self, f64), FieldIoError> {
        let mut lines = r.lines();
        let mut next = |what: &'static str| -> Result<String, FieldIoError> {
            lines.next().ok_or(FieldIoError::Truncated(what))?.map_err(FieldIoError::Io)
        };
        if next("magic")?.trim() != "conegl-field 1" {
            return Err(FieldIoError::BadHeader("magic line".into()));
        }
        let alpha: f64 = keyed(&next("alpha")?, "alpha")?;
        let n_r: usize = keyed(&next("n_r")?, "n_r")?;
        let n_theta: usize = keyed(&next("n_theta")?, "n_theta")?;
        let r_min: f64 = keyed(&next("r_min")?, "r_min")?;
        let epsilon: f64 = keyed(&next("epsilon")?, "epsilon")?;
        let radii_line = next("radii")?;
        let mut toks = radii_line.split_whitespace();
        if toks.next() != Some("radii") {
            return Err(FieldIoError::BadHeader("radii".into()));
        }
        let radii = toks.map(parse_f64).collect::<Result<Vec<_>, _>>()?;
        if radii.len() != n_r || radii.first() != Some(&r_min) {
            return Err(FieldIoError::BadHeader("radii inconsistent with n_r/r_min".into()));
        }
        if next("data")?.trim() != "data" {
            return Err(FieldIoError::BadHeader("data marker".into()));
        }
        let cone = ConeParams::new(alpha)?;
        let grid = SectorGrid::from_radii(cone, n_theta, radii)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let line = next("values")?;
            let mut t = line.split_whitespace();
            let re = parse_f64(t.next().unwrap_or(""))?;
            let im = parse_f64(t.next().unwrap_or(""))?;
            values.push(Complex64::new(re, im));
        }
        Ok((Self::new(grid, values)?, epsilon))
    }
}

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("file truncated while reading {0}")]
    Truncated(&'static str),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("cannot parse number {0:?}")]
    BadNumber(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn parse_f64(t: &str) -> Result<f64, FieldIoError> {
    t.parse().map_err(|_| FieldIoError::BadNumber(t.to_string()))
}

fn keyed<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, FieldIoError> {
    let mut t = line.split_whitespace();
    if t.next() != Some(key) {
        return Err(FieldIoError::BadHeader(format!("expected key {key}")));
    }
    let v = t.next().ok_or_else(|| FieldIoError::BadHeader(format!("missing value for {key}")))?;
    v.parse().map_err(|_| FieldIoError::BadNumber(v.to_string()))
}

/// Sum of principal phase increments along a closed sequence of values whose
/// last element is the first one transported around the loop.
pub fn winding(values: impl IntoIterator<Item = Complex64>) -> Result<f64, DegreeError> {
    let mut it = values.into_iter();
    let Some(mut prev) = it.next() else { return Ok(0.0) };
    let check = |v: Complex64| -> Result<(), DegreeError> {
        let m = v.norm();
        if !(m >= DEGREE_MODULUS_FLOOR) {
            return Err(DegreeError::VanishingModulus { modulus: m });
        }
        Ok(())
    };
    check(prev)?;
    let mut total = 0.0;
    for v in it {
        check(v)?;
        let step = (v * prev.conj()).arg();
        if step.abs() >= std::f64::consts::PI - 1e-12 {
            return Err(DegreeError::PhaseJump { step });
        }
        total += step;
        prev = v;
    }
    Ok(total)
}

/// Rounds `1 + (current − α)/2π` to an integer degree.
pub fn tip_loop_degree(current: f64, alpha: f64) -> Result<i64, DegreeError> {
    round_degree(1.0 + (current - alpha) / TAU)
}

/// Rounds `current/2π` for a loop that does not enclose the tip.
pub fn offtip_loop_degree(current: f64) -> Result<i64, DegreeError> {
    round_degree(current / TAU)
}

fn round_degree(x: f64) -> Result<i64, DegreeError> {
    let d = x.round();
    let residual = (x - d).abs();
    if residual >= 0.1 {
        return Err(DegreeError::NonInteger { residual });
    }
    Ok(d as i64)
}

/// Dirichlet and potential parts of the discrete energy of `values` on `grid`.
pub(crate) fn energy_parts(grid: &SectorGrid, values: &[Complex64], epsilon: f64) -> (f64, f64) {
    energy_parts_masked(grid, values, epsilon, None)
}

/// Energy terms restricted to the links and nodes whose first node is in
/// `mask` (all of them when `None`).
pub(crate) fn energy_parts_masked(
    grid: &SectorGrid,
    values: &[Complex64],
    epsilon: f64,
    mask: Option<&[bool]>,
) -> (f64, f64) {
    let on = |j: usize| mask.is_none_or(|m| m[j]);
    let n = grid.n_theta();
    let dt = grid.dtheta();
    let seam = Complex64::from_polar(1.0, grid.alpha());
    let c = 1.0 / (4.0 * epsilon * epsilon);
    let mut dir = 0.0;
    let mut pot = 0.0;
    for i in 0..grid.n_r() {
        let ring = &values[i * n..(i + 1) * n];
        let mut s = 0.0;
        let mut p = 0.0;
        for k in 0..n {
            if !on(i * n + k) {
                continue;
            }
            let next = if k + 1 == n { ring[0] * seam } else { ring[k + 1] };
            s += (next - ring[k]).norm_sqr();
            let q = 1.0 - ring[k].norm_sqr();
            p += q * q;
        }
        dir += s * grid.theta_weight(i) / dt;
        pot += p * grid.area_weight(i) * dt;
        if i + 1 < grid.n_r() {
            let outer = &values[(i + 1) * n..(i + 2) * n];
            let mut t = 0.0;
            for k in 0..n {
                if on(i * n + k) {
                    t += (outer[k] - ring[k]).norm_sqr();
                }
            }
            dir += t * grid.radial_weight(i) * dt;
        }
    }
    (0.5 * dir, c * pot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(alpha: f64, n: usize, r_min: f64) -> SectorGrid {
        SectorGrid::new(ConeParams::new(alpha).unwrap(), n, n, r_min).unwrap()
    }

    #[test]
    fn grid_validation() {
        let c = ConeParams::new(PI).unwrap();
        assert!(SectorGrid::new(c, 8, 32, 1e-3).is_err());
        assert!(SectorGrid::new(c, 32, 32, 0.0).is_err());
        assert!(SectorGrid::with_spacing(c, 32, 32, 1e-3, 1.0, RadialSpacing::Graded { ratio: 1.0 }).is_err());
        let g = SectorGrid::new(c, 32, 32, 1e-3).unwrap();
        assert_eq!(g.r_max(), 1.0);
        assert_eq!(g.r_min(), 1e-3);
    }

    #[test]
    fn graded_grid_shape() {
        let c = ConeParams::new(PI).unwrap();
        let g = SectorGrid::with_spacing(c, 192, 32, 1e-4, 1.0, RadialSpacing::Graded { ratio: 1.2 }).unwrap();
        assert_eq!(g.n_r(), 192);
        assert_eq!(g.r_max(), 1.0);
        let steps: Vec<f64> = g.radii().windows(2).map(|w| w[1] - w[0]).collect();
        // steps never shrink by more than rounding, and the largest is near the uniform size
        assert!(steps.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)));
        assert!(g.max_radial_step() < 1.3 / 191.0);
    }

    #[test]
    fn weights_integrate_exactly() {
        let c = ConeParams::new(1.0).unwrap();
        for spacing in [RadialSpacing::Uniform, RadialSpacing::Graded { ratio: 1.15 }] {
            let g = SectorGrid::with_spacing(c, 40, 16, 1e-3, 0.7, spacing).unwrap();
            let a: f64 = (0..g.n_r()).map(|i| g.area_weight(i)).sum();
            let t: f64 = (0..g.n_r()).map(|i| g.theta_weight(i)).sum();
            assert!((a - (0.49 - 1e-6) / 2.0).abs() < 1e-14);
            assert!((t - (0.7f64 / 1e-3).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_wraps_with_seam_factor() {
        let g = grid(PI / 2.0, 16, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = TangentField::from_fn(g, |_, _| Complex64::new(rng.gen(), rng.gen()));
        let n = f.grid().n_theta() as i64;
        let a = f.grid().alpha();
        assert_eq!(f.sample(3, 5), f.get(3, 5));
        assert!((f.sample(3, n) - f.get(3, 0) * Complex64::from_polar(1.0, a)).norm() < 1e-15);
        assert!((f.sample(3, -1) - f.get(3, 15) * Complex64::from_polar(1.0, -a)).norm() < 1e-15);
        assert!((f.sample(3, 2 * n + 4) - f.get(3, 4) * Complex64::from_polar(1.0, 2.0 * a)).norm() < 1e-14);
    }

    #[test]
    fn loop_current_and_degree_oracles() {
        for alpha in [PI / 2.0, PI, 1.5 * PI, 0.7] {
            let g = grid(alpha, 64, 1e-3);
            let f = TangentField::phase_field(g.clone(), 1.0);
            assert!((f.loop_current(10).unwrap() - alpha).abs() < 1e-12);
            assert_eq!(f.degree(10).unwrap(), 1);
            let f = TangentField::phase_field(g.clone(), TAU / alpha + 1.0);
            assert!((f.loop_current(10).unwrap() - (TAU + alpha)).abs() < 1e-11);
            assert_eq!(f.degree(10).unwrap(), 2);
            let f = TangentField::phase_field(g, 1.0 - TAU / alpha);
            assert_eq!(f.degree(10).unwrap(), 0);
        }
    }

    #[test]
    fn degree_errors() {
        let g = grid(PI, 16, 1e-3);
        let f = TangentField::zeros(g.clone());
        assert!(matches!(f.degree(0), Err(DegreeError::VanishingModulus { .. })));
        let f = TangentField::phase_field(g, 16.0);
        assert!(matches!(f.loop_current(0), Err(DegreeError::PhaseJump { .. })));
        assert!(matches!(tip_loop_degree(PI + 0.9, PI), Err(DegreeError::NonInteger { .. })));
    }

    #[test]
    fn degree_ignores_radial_modulus() {
        let g = grid(PI, 32, 1e-2);
        let f = TangentField::from_fn(g, |r, th| Complex64::from_polar(0.1 + r * r, 3.0 * th));
        for i in 0..f.grid().n_r() {
            assert_eq!(f.degree(i).unwrap(), 2);
        }
    }

    #[test]
    fn energy_of_frame_lift() {
        for alpha in [PI / 2.0, PI, 1.5 * PI] {
            let g = grid(alpha, 256, 1e-3);
            let e = TangentField::phase_field(g.clone(), 1.0).gl_energy(0.1);
            let exact = 0.5 * alpha * (1e3f64).ln();
            assert!((e.dirichlet - exact).abs() / exact < 1e-2);
            assert!(e.potential.abs() < 1e-20);
            let w = TAU / alpha + 1.0;
            let e = TangentField::phase_field(g, w).gl_energy(0.1);
            let exact = 0.5 * alpha * w * w * (1e3f64).ln();
            assert!((e.dirichlet - exact).abs() / exact < 1e-2);
        }
    }

    #[test]
    fn energy_of_zero_field() {
        let g = grid(PI, 32, 1e-3);
        let e = TangentField::zeros(g).gl_energy(0.2);
        assert_eq!(e.dirichlet, 0.0);
        let exact = PI * (1.0 - 1e-6) / (8.0 * 0.04);
        assert!((e.potential - exact).abs() < 1e-12 * exact);
        assert_eq!(e.total, e.dirichlet + e.potential);
    }

    #[test]
    fn energy_refinement() {
        // smooth modulus profile so both terms are exercised
        let field = |n: usize| {
            let g = grid(PI, n, 0.05);
            TangentField::from_fn(g, |r, th| Complex64::from_polar(r.sqrt(), 3.0 * th)).gl_energy(0.3).total
        };
        let (a, b) = (field(128), field(256));
        assert!((a - b).abs() / b < 5e-3);
    }

    #[test]
    fn circle_lower_bound() {
        for alpha in [PI / 2.0, PI, 1.5 * PI] {
            let g = grid(alpha, 64, 1e-2);
            for d in -2i64..=3 {
                let w = (d - 1) as f64 * TAU / alpha + 1.0;
                let f = TangentField::phase_field(g.clone(), w);
                for i in [5usize, 30, 63] {
                    let r = g.radius(i);
                    let bound = (TAU * (d - 1) as f64 + alpha).powi(2) / (2.0 * r * alpha);
                    assert!(f.circle_dirichlet(i) >= bound * 0.98);
                }
            }
        }
    }

    #[test]
    fn text_round_trip_bit_exact() {
        let c = ConeParams::new(2.1).unwrap();
        let g = SectorGrid::with_spacing(c, 20, 17, 3e-4, 1.0, RadialSpacing::Graded { ratio: 1.3 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = TangentField::from_fn(g, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() * 1e-7));
        let mut buf = Vec::new();
        f.write_text(0.037, &mut buf).unwrap();
        let (back, eps) = TangentField::read_text(&buf[..]).unwrap();
        assert_eq!(eps, 0.037);
        assert_eq!(back, f);
        assert!(TangentField::read_text(&buf[..buf.len() / 2]).is_err());
    }
}
