//! Neumann Green's functions on the unit disc, the renormalized energy `W`
//! of vortex configurations, its minimizers, and the conformal test field
//! `V_ε` built from them.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core_energy::{radial_core, CoreError};
use crate::degree_cost::{m_closed, tip_free_branch};
use crate::descent::{self, DescentOptions, Objective, StepRule};
use crate::field::{energy_parts_masked, SectorGrid, TangentField};
use crate::geometry::{disc_to_sector, ConeParams, ConePoint, GeometryError};
use crate::minimizer::{self, BoundaryData, SolverOptions};

/// Default number of Fourier modes kept for boundary data.
pub const FOURIER_MODES: usize = 128;

#[derive(Debug, Error)]
pub enum RenormError {
    #[error("Green's function evaluated at its pole (|z − p| = {0:.3e})")]
    Singular(f64),
    #[error("vortices {0} and {1} coincide")]
    CoincidentVortices(usize, usize),
    #[error("point {0} is not inside the unit disc")]
    OutsideDisc(Complex64),
    #[error("case {case:?} with d̄ = {dbar} needs {expected} off-tip vortices, got {got}")]
    VortexCount { case: Case, dbar: i64, expected: usize, got: usize },
    #[error("boundary flux is undefined for boundary degree d̄ = 1")]
    NoFlux,
    #[error("every start of the W minimization left the disc")]
    NoInteriorMinimum,
    #[error("excised discs overlap or leave the sector: {0}")]
    OverlappingExcisions(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("tip core solve failed: {0}")]
    TipCore(String),
}

/// Placement of singularities in the disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `|d̄−1|` vortices of degree `sgn(d̄−1)` away from the origin.
    One,
    /// A degree `−1` vortex at the origin plus `|d̄|` more away from it.
    Two,
    /// `d̄ = 1`: no vortices.
    Three,
}

/// Case chosen for `(d̄, α)`: the tip carries no vortex exactly when
/// `m(d̄, α)` uses its tip-free branch (`d̄ ≤ 0` and `α > 2π/3`).
pub fn select_case(dbar: i64, cone: &ConeParams) -> Case {
    if dbar == 1 {
        Case::Three
    } else if tip_free_branch(dbar, cone) {
        Case::Two
    } else {
        Case::One
    }
}

/// Both cases when `α = 2π/3` and `d̄ ≤ 0`, where they cost the same.
pub fn tie_cases(dbar: i64, cone: &ConeParams) -> Vec<Case> {
    if dbar <= 0 && (cone.alpha() - TAU / 3.0).abs() < 1e-12 {
        vec![Case::One, Case::Two]
    } else {
        vec![select_case(dbar, cone)]
    }
}

/// Boundary map on the unit circle, `g̃(e^{iθ}) = e^{i(Dθ + χ(θ))}` with
/// `D = d̄ − 1` and `χ` a real trigonometric polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscBoundary {
    pub dbar: i64,
    /// `χ̂_n` for `n = 1, 2, …`; negative modes are the conjugates.
    pub chi: Vec<Complex64>,
    pub chi_mean: f64,
}

impl DiscBoundary {
    /// Boundary data of [`minimizer::canonical_boundary`] read on the disc.
    pub fn canonical(dbar: i64) -> Self {
        Self { dbar, chi: Vec::new(), chi_mean: 0.0 }
    }

    pub fn with_perturbation(dbar: i64, chi_mean: f64, chi: Vec<Complex64>) -> Self {
        Self { dbar, chi, chi_mean }
    }

    pub fn degree(&self) -> i64 {
        self.dbar - 1
    }

    pub fn chi(&self, theta: f64) -> f64 {
        self.chi_mean + 2.0 * self.chi.iter().enumerate().map(|(j, c)| (c * Complex64::cis((j + 1) as f64 * theta)).re).sum::<f64>()
    }

    /// Phase of `g̃` at angle `θ`.
    pub fn phase(&self, theta: f64) -> f64 {
        self.degree() as f64 * theta + self.chi(theta)
    }

    /// Boundary ring of the sector grid, `ĝ(θ̂) = g̃(e^{i2πθ̂/α}) e^{iθ̂}`.
    pub fn sector_boundary(&self, grid: &SectorGrid) -> BoundaryData {
        if self.chi.is_empty() && self.chi_mean == 0.0 {
            return minimizer::canonical_boundary(self.dbar, grid);
        }
        let k = TAU / grid.alpha();
        let profile = (0..grid.n_theta())
            .map(|j| {
                let t = grid.theta(j);
                Complex64::cis(self.phase(k * t) + t)
            })
            .collect();
        BoundaryData { dbar: self.dbar, profile }
    }
}

/// Neumann data `φ` of the Green's function, `φ = 1 + Σ_{n≠0} φ̂_n e^{inθ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    /// `φ̂_n` for `n = 1, 2, …`.
    pub coefficients: Vec<Complex64>,
    pub mean: f64,
}

impl BoundaryFlux {
    pub fn canonical() -> Self {
        Self { coefficients: Vec::new(), mean: 1.0 }
    }

    /// `φ = sgn(D)(D + χ')/|D|`, the normal derivative of the conjugate of
    /// the phase per unit source.
    pub fn from_boundary(b: &DiscBoundary) -> Result<Self, RenormError> {
        let d = b.degree();
        if d == 0 {
            return Err(RenormError::NoFlux);
        }
        let s = d.signum() as f64 / d.abs() as f64;
        let coefficients =
            b.chi.iter().take(FOURIER_MODES).enumerate().map(|(j, c)| Complex64::i() * (j + 1) as f64 * c * s).collect();
        Ok(Self { coefficients, mean: 1.0 })
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.mean
            + 2.0 * self.coefficients.iter().enumerate().map(|(j, c)| (c * Complex64::cis((j + 1) as f64 * theta)).re).sum::<f64>()
    }

    /// `F(z) = 2 Σ φ̂_n zⁿ / n`, whose real part is the harmonic correction.
    fn series(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coefficients.iter().enumerate().rev() {
            acc = acc * z + c * (2.0 / (j + 1) as f64);
        }
        acc * z
    }

    fn series_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            acc = acc * z + c * 2.0;
        }
        acc
    }
}

/// `G(z, p) = log|z−p| + log|1−z p̄| + h(z) + h(p) − C` with `h = Re F` and
/// `C = 2 Σ |φ̂_n|²/n`, so that `∮ G(·, p) φ ds = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensFunction {
    pub flux: BoundaryFlux,
    constant: f64,
}

impl GreensFunction {
    pub fn new(flux: BoundaryFlux) -> Self {
        let constant = 2.0 * flux.coefficients.iter().enumerate().map(|(j, c)| c.norm_sqr() / (j + 1) as f64).sum::<f64>();
        Self { flux, constant }
    }

    fn h(&self, z: Complex64) -> f64 {
        self.flux.series(z).re
    }

    pub fn eval(&self, z: Complex64, p: Complex64) -> Result<f64, RenormError> {
        let d = (z - p).norm();
        if d < 1e-12 {
            return Err(RenormError::Singular(d));
        }
        Ok(d.ln() + self.regular(z, p))
    }

    /// `R(z, p) = G(z, p) − log|z − p|`, continuous at `z = p`.
    pub fn regular(&self, z: Complex64, p: Complex64) -> f64 {
        (1.0 - z * p.conj()).norm().ln() + self.h(z) + self.h(p) - self.constant
    }

    /// Gradient in `z` as `∂_x + i ∂_y`.
    pub fn grad_z(&self, z: Complex64, p: Complex64) -> Complex64 {
        1.0 / (z - p).conj() - p / (1.0 - z.conj() * p) + self.flux.series_derivative(z).conj()
    }

    /// Gradient of `z ↦ R(z, z)`.
    fn grad_diag(&self, z: Complex64) -> Complex64 {
        -2.0 * z / (1.0 - z.norm_sqr()) + 2.0 * self.flux.series_derivative(z).conj()
    }
}

pub fn neumann_green(flux: &BoundaryFlux, z: Complex64, p: Complex64) -> Result<f64, RenormError> {
    GreensFunction::new(flux.clone()).eval(z, p)
}

pub fn regular_part(flux: &BoundaryFlux, z: Complex64, p: Complex64) -> f64 {
    GreensFunction::new(flux.clone()).regular(z, p)
}

/// Vortex placement in the unit disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexConfig {
    pub dbar: i64,
    pub case: Case,
    /// Includes the origin first in [`Case::Two`].
    pub disc_positions: Vec<Complex64>,
    /// Degrees of the disc map at each position.
    pub degrees: Vec<i64>,
}

impl VortexConfig {
    /// Builds a configuration from the off-tip vortices only.
    pub fn new(dbar: i64, case: Case, offtip: Vec<Complex64>) -> Result<Self, RenormError> {
        let d = dbar - 1;
        let expected = match case {
            Case::One => d.unsigned_abs() as usize,
            Case::Two => dbar.unsigned_abs() as usize,
            Case::Three => 0,
        };
        if offtip.len() != expected || (case == Case::Two && d >= 0) || (case == Case::Three && d != 0) {
            return Err(RenormError::VortexCount { case, dbar, expected, got: offtip.len() });
        }
        for &z in &offtip {
            if !(z.norm() < 1.0 && z.norm() > 0.0) {
                return Err(RenormError::OutsideDisc(z));
            }
        }
        let mut disc_positions = Vec::with_capacity(offtip.len() + 1);
        if case == Case::Two {
            disc_positions.push(Complex64::new(0.0, 0.0));
        }
        disc_positions.extend(offtip);
        for i in 0..disc_positions.len() {
            for j in i + 1..disc_positions.len() {
                if (disc_positions[i] - disc_positions[j]).norm() < 1e-9 {
                    return Err(RenormError::CoincidentVortices(i, j));
                }
            }
        }
        let degrees = vec![d.signum(); disc_positions.len()];
        Ok(Self { dbar, case, disc_positions, degrees })
    }

    pub fn offtip(&self) -> &[Complex64] {
        match self.case {
            Case::Two => &self.disc_positions[1..],
            _ => &self.disc_positions,
        }
    }

    /// Cone degree at the tip: `0` in [`Case::Two`], else `1`.
    pub fn tip_degree(&self) -> i64 {
        if self.case == Case::Two {
            0
        } else {
            1
        }
    }

    pub fn offtip_degree(&self) -> i64 {
        (self.dbar - 1).signum()
    }

    /// Off-tip vortex positions on the cone, `P(z_j)`.
    pub fn cone_positions(&self, cone: &ConeParams) -> Result<Vec<ConePoint>, RenormError> {
        self.offtip()
            .iter()
            .map(|&z| {
                let w = disc_to_sector(z, cone)?;
                Ok(ConePoint::new(w.norm(), w.arg().max(0.0), cone)?)
            })
            .collect()
    }
}

/// `W` for one boundary datum and cone, with everything that does not depend
/// on the vortex positions precomputed.
#[derive(Debug, Clone)]
pub struct RenormProblem {
    pub cone: ConeParams,
    pub boundary: DiscBoundary,
    pub case: Case,
    green: Option<GreensFunction>,
}

impl RenormProblem {
    pub fn new(cone: ConeParams, boundary: DiscBoundary) -> Result<Self, RenormError> {
        Self::with_case(cone, boundary.clone(), select_case(boundary.dbar, &cone))
    }

    pub fn with_case(cone: ConeParams, boundary: DiscBoundary, case: Case) -> Result<Self, RenormError> {
        let green = match case {
            Case::Three => None,
            _ => Some(GreensFunction::new(BoundaryFlux::from_boundary(&boundary)?)),
        };
        Ok(Self { cone, boundary, case, green })
    }

    pub fn dbar(&self) -> i64 {
        self.boundary.dbar
    }

    /// Number of off-tip vortices.
    pub fn k(&self) -> usize {
        match self.case {
            Case::One => (self.dbar() - 1).unsigned_abs() as usize,
            Case::Two => self.dbar().unsigned_abs() as usize,
            Case::Three => 0,
        }
    }

    pub fn config(&self, offtip: Vec<Complex64>) -> Result<VortexConfig, RenormError> {
        VortexConfig::new(self.dbar(), self.case, offtip)
    }

    fn sign(&self) -> f64 {
        (self.dbar() - 1).signum() as f64
    }

    /// `W` at the given off-tip positions.
    pub fn energy(&self, offtip: &[Complex64]) -> Result<f64, RenormError> {
        let Some(g) = &self.green else {
            // ½∫|∇φ|² of the harmonic extension of χ
            return Ok(TAU * self.boundary.chi.iter().enumerate().map(|(j, c)| (j + 1) as f64 * c.norm_sqr()).sum::<f64>());
        };
        let cfg = self.config(offtip.to_vec())?;
        let pts = &cfg.disc_positions;
        let a = self.cone.alpha();
        let k = self.cone.ratio();
        let mut w = 0.0;
        for &z in offtip {
            let lz = z.norm().ln();
            w += -a * self.sign() * lz + PI * (k.ln() + (k - 1.0) * lz);
        }
        for i in 0..pts.len() {
            w -= PI * g.regular(pts[i], pts[i]);
            for j in 0..pts.len() {
                if i != j {
                    w -= PI * g.eval(pts[i], pts[j])?;
                }
            }
        }
        Ok(w)
    }

    /// Gradient of `W` with respect to each off-tip position, as `∂_x + i∂_y`.
    pub fn gradient(&self, offtip: &[Complex64]) -> Result<Vec<Complex64>, RenormError> {
        let Some(g) = &self.green else {
            return Ok(Vec::new());
        };
        let cfg = self.config(offtip.to_vec())?;
        let pts = &cfg.disc_positions;
        let skip = pts.len() - offtip.len();
        let a = self.cone.alpha();
        let k = self.cone.ratio();
        let mut out = Vec::with_capacity(offtip.len());
        for (i, &z) in offtip.iter().enumerate() {
            let mut gr = (-a * self.sign() + PI * (k - 1.0)) / z.conj();
            gr -= PI * g.grad_diag(z);
            for (j, &p) in pts.iter().enumerate() {
                if j != i + skip {
                    // G is symmetric, so both orderings contribute the same
                    gr -= 2.0 * PI * g.grad_z(z, p);
                }
            }
            out.push(gr);
        }
        Ok(out)
    }

    /// Multi-start descent over the off-tip positions.
    pub fn minimize(&self, opts: &MinimizeWOptions) -> Result<MinimizeWReport, RenormError> {
        let k = self.k();
        if k == 0 {
            let config = self.config(Vec::new())?;
            let value = self.energy(&[])?;
            return Ok(MinimizeWReport { config, value, grad_norm: 0.0, start: 0, converged_starts: 1 });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut best: Option<MinimizeWReport> = None;
        let mut converged_starts = 0;
        for start in 0..opts.starts.max(1) {
            let mut x = Vec::with_capacity(2 * k);
            while x.len() < 2 * k {
                let z = Complex64::from_polar(rng.gen_range(0.2..0.85), rng.gen_range(0.0..TAU));
                let far = x.chunks(2).all(|c: &[f64]| (Complex64::new(c[0], c[1]) - z).norm() > 0.1);
                if far {
                    x.extend([z.re, z.im]);
                }
            }
            let mut obj = WObjective { problem: self };
            let dopts = DescentOptions {
                max_iters: opts.max_iters,
                rel_tol: 0.0,
                abs_tol: opts.grad_tol,
                step_rule: StepRule::BarzilaiBorwein,
                initial_step: 1e-2,
                memory: 1,
            };
            let rep = descent::minimize(&mut obj, &mut x, &dopts);
            if !(rep.grad_norm < opts.grad_tol * 100.0 && rep.energy.is_finite()) {
                continue;
            }
            let pos: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            if pos.iter().any(|z| z.norm() > 0.999) {
                continue;
            }
            converged_starts += 1;
            if best.as_ref().is_none_or(|b| rep.energy < b.value - 1e-12) {
                best = Some(MinimizeWReport {
                    config: self.config(pos)?,
                    value: rep.energy,
                    grad_norm: rep.grad_norm,
                    start,
                    converged_starts: 0,
                });
            }
        }
        let mut best = best.ok_or(RenormError::NoInteriorMinimum)?;
        best.converged_starts = converged_starts;
        Ok(best)
    }

    /// `W` with the first off-tip vortex moved over an `n × n` grid of the
    /// disc and the others held at `base`.
    pub fn landscape(&self, base: &VortexConfig, n: usize) -> Vec<LandscapePoint> {
        let mut pos = base.offtip().to_vec();
        let mut out = Vec::new();
        if pos.is_empty() {
            return out;
        }
        for iy in 0..n {
            for ix in 0..n {
                let z = Complex64::new(-1.0 + 2.0 * (ix as f64 + 0.5) / n as f64, -1.0 + 2.0 * (iy as f64 + 0.5) / n as f64);
                if z.norm() >= 0.99 {
                    continue;
                }
                pos[0] = z;
                if let Ok(w) = self.energy(&pos) {
                    out.push(LandscapePoint { x: z.re, y: z.im, w });
                }
            }
        }
        out
    }

    /// Phase of the canonical field on the disc, `sΦ(z)` (or the harmonic
    /// extension of the boundary phase in [`Case::Three`]), matched to `g̃`.
    pub fn disc_phase(&self, cfg: &VortexConfig) -> impl Fn(Complex64) -> f64 + '_ {
        let pts = cfg.disc_positions.clone();
        let s = self.sign();
        let flux_k = pts.len() as f64;
        let raw = move |z: Complex64| -> f64 {
            match &self.green {
                None => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, c) in self.boundary.chi.iter().enumerate().rev() {
                        acc = acc * z + c * 2.0;
                        let _ = j;
                    }
                    self.boundary.chi_mean + (acc * z).re
                }
                Some(g) => {
                    let mut phi = flux_k * g.flux.series(z).im;
                    for &p in &pts {
                        phi += (z - p).arg() + (1.0 - z * p.conj()).arg();
                    }
                    s * phi
                }
            }
        };
        let n = 64;
        let offset: Complex64 = (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64;
                Complex64::cis(self.boundary.phase(t) - raw(Complex64::cis(t)))
            })
            .sum();
        let kappa = offset.arg();
        move |z| raw(z) + kappa
    }

    /// Gradient of the full sector phase pulled back to the disc,
    /// `∇(sΦ + αθ/2π)`, as `∂_x + i∂_y`.
    fn disc_phase_gradient(&self, cfg: &VortexConfig, z: Complex64) -> Complex64 {
        let twist = Complex64::i() * self.cone.ratio() / z.conj();
        match &self.green {
            None => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, c) in self.boundary.chi.iter().enumerate().rev() {
                    acc = acc * z + c * 2.0 * (j + 1) as f64;
                }
                acc.conj() + twist
            }
            Some(g) => {
                let mut grad_psi = Complex64::new(0.0, 0.0);
                for &p in &cfg.disc_positions {
                    grad_psi += g.grad_z(z, p);
                }
                Complex64::i() * grad_psi * self.sign() + twist
            }
        }
    }

    /// Dirichlet energy of the canonical field on the cone outside geodesic
    /// balls of radius `η` around the tip and each vortex, minus
    /// `π m(d̄, α) log(1/η)`, by direct quadrature on the sector.
    pub fn direct_energy(&self, cfg: &VortexConfig, eta: f64) -> Result<f64, RenormError> {
        let centers: Vec<Complex64> =
            cfg.offtip().iter().map(|&z| disc_to_sector(z, &self.cone)).collect::<Result<_, _>>()?;
        let a = self.cone.alpha();
        let inv = 1.0 / self.cone.ratio();
        let (gx, gw) = gauss_legendre(16);

        let mut breaks = vec![eta, 1.0];
        for c in &centers {
            for b in [c.norm() - eta, c.norm() + eta] {
                if b > eta && b < 1.0 {
                    breaks.push(b);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-14);

        let density = |r: f64, th: f64| -> f64 {
            let z = Complex64::from_polar(r.powf(inv), th * inv);
            let grad = self.disc_phase_gradient(cfg, z);
            let dp = self.cone.ratio() * z.norm().powf(self.cone.ratio() - 1.0);
            0.5 * grad.norm_sqr() / (dp * dp)
        };

        let mut total = 0.0;
        for seg in breaks.windows(2) {
            let (la, lb) = (seg[0].ln(), seg[1].ln());
            let panels = 24;
            for p in 0..panels {
                for q in 0..gx.len() {
                    let t = (p as f64 + 0.5 * (gx[q] + 1.0)) / panels as f64;
                    let s = 0.5 * (1.0 - (PI * t).cos());
                    let r = (la + (lb - la) * s).exp();
                    let dr = r * (lb - la) * 0.5 * PI * (PI * t).sin() * 0.5 * gw[q] / panels as f64;
                    let mut excluded: Vec<(f64, f64)> = Vec::new();
                    for c in &centers {
                        let rc = c.norm();
                        if (rc - r).abs() >= eta {
                            continue;
                        }
                        let cosd = ((r * r + rc * rc - eta * eta) / (2.0 * r * rc)).clamp(-1.0, 1.0);
                        let d = cosd.acos();
                        let th = c.arg().max(0.0);
                        excluded.push((th - d, th + d));
                    }
                    let mut ring = 0.0;
                    for (u, v) in allowed_intervals(&excluded, a) {
                        let np = ((v - u) * r / eta).ceil().clamp(4.0, 256.0) as usize;
                        let h = (v - u) / np as f64;
                        for m in 0..np {
                            for l in 0..gx.len() {
                                let th = u + h * (m as f64 + 0.5 * (gx[l] + 1.0));
                                ring += density(r, th) * 0.5 * h * gw[l];
                            }
                        }
                    }
                    total += ring * r * dr;
                }
            }
        }
        Ok(total - PI * m_closed(self.dbar(), &self.cone) * (1.0 / eta).ln())
    }
}

/// Complement in `[0, α)` of a union of angular intervals given modulo `α`.
fn allowed_intervals(excluded: &[(f64, f64)], alpha: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for &(u, v) in excluded {
        if v - u >= alpha {
            return Vec::new();
        }
        let u0 = u.rem_euclid(alpha);
        let v0 = u0 + (v - u);
        if v0 <= alpha {
            cuts.push((u0, v0));
        } else {
            cuts.push((u0, alpha));
            cuts.push((0.0, v0 - alpha));
        }
    }
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut at = 0.0;
    for (u, v) in cuts {
        if u > at {
            out.push((at, u));
        }
        at = f64::max(at, v);
    }
    if at < alpha {
        out.push((at, alpha));
    }
    out
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

struct WObjective<'a> {
    problem: &'a RenormProblem,
}

impl Objective for WObjective<'_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let pos: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let (Ok(w), Ok(g)) = (self.problem.energy(&pos), self.problem.gradient(&pos)) else {
            return f64::INFINITY;
        };
        for (i, gi) in g.iter().enumerate() {
            grad[2 * i] = gi.re;
            grad[2 * i + 1] = gi.im;
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeWOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for MinimizeWOptions {
    fn default() -> Self {
        Self { starts: 16, seed: 0, max_iters: 20_000, grad_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeWReport {
    pub config: VortexConfig,
    pub value: f64,
    pub grad_norm: f64,
    /// Index of the start that produced the minimum.
    pub start: usize,
    pub converged_starts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

pub fn landscape_csv(points: &[LandscapePoint]) -> String {
    let mut s = String::from("x,y,w\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.x, p.y, p.w);
    }
    s
}

pub fn renormalized_energy(config: &VortexConfig, cone: &ConeParams, boundary: &DiscBoundary) -> Result<f64, RenormError> {
    RenormProblem::with_case(*cone, boundary.clone(), config.case)?.energy(config.offtip())
}

pub fn minimize_w(
    cone: &ConeParams,
    boundary: &DiscBoundary,
    opts: &MinimizeWOptions,
) -> Result<MinimizeWReport, RenormError> {
    RenormProblem::new(*cone, boundary.clone())?.minimize(opts)
}

/// How the excised discs of the test field are sized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Excision {
    /// `√ε + 2ε^{3/4}` around vortices and `√ε` at the tip; overlaps are errors.
    Asymptotic,
    /// The asymptotic radii, shrunk to this fraction of the free room around
    /// each center when they do not fit.
    Fitted { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TestFieldOptions {
    pub excision: Excision,
    /// Width of the phase blending annuli, in grid cells.
    pub blend_cells: usize,
    pub core_nodes: usize,
    pub tip_solver: SolverOptions,
}

impl Default for TestFieldOptions {
    fn default() -> Self {
        Self {
            excision: Excision::Fitted { fraction: 0.6 },
            blend_cells: 4,
            core_nodes: 401,
            tip_solver: SolverOptions { grad_tol: 1e-5, max_iters: 200, init_noise: 0.0, ..SolverOptions::default() },
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestField {
    pub field: TangentField,
    pub config: VortexConfig,
    pub tip_radius: f64,
    pub hole_radii: Vec<f64>,
    /// Energy of the links starting in the blending annuli.
    pub blend_energy: f64,
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// Builds `V_ε` on `grid`: the canonical field of `config` outside excised
/// discs, radial cores inside the off-tip discs, the tip core minimizer inside
/// the tip disc, and linear phase blends in annuli of `blend_cells` cells.
pub fn build_test_field(
    problem: &RenormProblem,
    config: &VortexConfig,
    grid: &SectorGrid,
    epsilon: f64,
    opts: &TestFieldOptions,
) -> Result<TestField, RenormError> {
    let cone = problem.cone;
    let a = cone.alpha();
    let inv = 1.0 / cone.ratio();
    let centers: Vec<Complex64> = config.offtip().iter().map(|&z| disc_to_sector(z, &cone)).collect::<Result<_, _>>()?;
    let cell = |r: f64| {
        let i = grid.ring_below(r).unwrap_or(0).min(grid.n_r() - 2);
        (grid.radius(i + 1) - grid.radius(i)).max(r * grid.dtheta())
    };
    let blend: Vec<f64> = centers.iter().map(|c| opts.blend_cells as f64 * cell(c.norm())).collect();
    let sq = epsilon.sqrt();
    let mut holes: Vec<f64> = vec![sq + 2.0 * epsilon.powf(0.75); centers.len()];
    let mut tip = sq;
    let tip_blend = |t: f64| opts.blend_cells as f64 * cell(t);

    if let Excision::Fitted { fraction } = opts.excision {
        for j in 0..centers.len() {
            let rc = centers[j].norm();
            let mut room = (1.0 - rc).min(rc);
            for (i, c) in centers.iter().enumerate() {
                if i != j {
                    room = room.min(0.5 * near_distance(centers[j], *c, a));
                }
            }
            holes[j] = holes[j].min(fraction * room - blend[j]);
        }
        for (j, c) in centers.iter().enumerate() {
            tip = tip.min(fraction * (c.norm() - holes[j] - blend[j]) - tip_blend(tip));
        }
        tip = tip.min(fraction);
    }
    let check = || -> Result<(), String> {
        let tb = tip_blend(tip);
        if !(tip > 2.0 * grid.r_min()) || tip + tb >= 1.0 - cell(1.0) {
            return Err(format!("tip disc of radius {tip:.4} does not fit"));
        }
        for j in 0..centers.len() {
            let rc = centers[j].norm();
            let outer = holes[j] + blend[j];
            if !(holes[j] > 2.0 * cell(rc)) {
                return Err(format!("vortex {j} disc of radius {:.4} is below two grid cells", holes[j]));
            }
            if rc + outer >= 1.0 - cell(1.0) {
                return Err(format!("vortex {j} disc reaches the outer boundary"));
            }
            if rc - outer <= tip + tb {
                return Err(format!("vortex {j} disc meets the tip disc"));
            }
            for i in j + 1..centers.len() {
                if near_distance(centers[i], centers[j], a) <= outer + holes[i] + blend[i] {
                    return Err(format!("vortex discs {i} and {j} overlap"));
                }
            }
        }
        Ok(())
    };
    check().map_err(RenormError::OverlappingExcisions)?;

    let phase = problem.disc_phase(config);
    let sector_phase = |w: Complex64| -> f64 {
        let r = w.norm();
        let th = if w.arg() < 0.0 { w.arg() + TAU } else { w.arg() };
        let z = Complex64::from_polar(r.powf(inv), th * inv);
        phase(z) + th
    };

    let s = config.offtip_degree() as f64;
    let tip_omega = match config.case {
        Case::Two => 1.0 - TAU / a,
        _ => 1.0,
    };
    let circ_mean = |f: &dyn Fn(f64) -> f64, span: f64| -> f64 {
        let n = 128;
        (0..n).map(|k| Complex64::cis(f(span * (k as f64 + 0.5) / n as f64))).sum::<Complex64>().arg()
    };
    let betas: Vec<f64> = centers
        .iter()
        .zip(&holes)
        .map(|(c, &h)| {
            circ_mean(
                &|t| {
                    let w = c + Complex64::from_polar(h, t);
                    sector_phase(wrap_into_sector(w, a)) - s * t
                },
                TAU,
            )
        })
        .collect();
    let beta0 = circ_mean(&|t| sector_phase(Complex64::from_polar(tip, t)) - tip_omega * t, a);

    let cores: Vec<_> =
        holes.iter().map(|&h| radial_core(TAU, 1.0, epsilon / h, opts.core_nodes)).collect::<Result<Vec<_>, _>>()?;

    let n = grid.n_theta();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut in_blend = vec![false; grid.len()];
    let tb = tip_blend(tip);
    for i in 0..grid.n_r() {
        let r = grid.radius(i);
        for k in 0..n {
            let th = grid.theta(k);
            let w = Complex64::from_polar(r, th);
            let idx = grid.index(i, k);
            let mut done = false;
            for (j, c) in centers.iter().enumerate() {
                let (cw, _) = ConePoint::from_plane(*c, &cone).to_plane_near(th, &cone);
                let off = w - cw;
                let rho = off.norm();
                if rho >= holes[j] + blend[j] {
                    continue;
                }
                let t = off.arg();
                let base = s * t + betas[j];
                values[idx] = if rho < holes[j] {
                    Complex64::from_polar(cores[j].eval(rho / holes[j]), base)
                } else {
                    in_blend[idx] = true;
                    let x = (rho - holes[j]) / blend[j];
                    Complex64::cis(base + x * wrap_pi(sector_phase(w) - base))
                };
                done = true;
                break;
            }
            if done {
                continue;
            }
            values[idx] = if r < tip {
                Complex64::new(0.0, 0.0)
            } else if r < tip + tb {
                in_blend[idx] = true;
                let base = tip_omega * th + beta0;
                let x = (r - tip) / tb;
                Complex64::cis(base + x * wrap_pi(sector_phase(w) - base))
            } else {
                Complex64::cis(sector_phase(w))
            };
        }
    }

    fill_tip_core(grid, &mut values, tip, tip_omega, beta0, epsilon, opts)?;

    let bc = problem.boundary.sector_boundary(grid);
    let last = grid.n_r() - 1;
    values[last * n..].copy_from_slice(&bc.profile);

    let field = TangentField::new(grid.clone(), values).expect("sizes match the grid");
    let (bd, bp) = energy_parts_masked(grid, field.values(), epsilon, Some(&in_blend));
    Ok(TestField { field, config: config.clone(), tip_radius: tip, hole_radii: holes, blend_energy: bd + bp })
}

fn wrap_into_sector(w: Complex64, alpha: f64) -> Complex64 {
    let th = w.arg().rem_euclid(alpha);
    Complex64::from_polar(w.norm(), th)
}

/// Straight-line distance between two sector points through the shorter way
/// around the seam.
fn near_distance(a: Complex64, b: Complex64, alpha: f64) -> f64 {
    let gap = (a.arg() - b.arg()).rem_euclid(alpha);
    let gap = gap.min(alpha - gap);
    (a.norm_sqr() + b.norm_sqr() - 2.0 * a.norm() * b.norm() * gap.cos()).max(0.0).sqrt()
}

/// Minimizes the tip problem on the grid rings inside `tip` (plus `tip`
/// itself as the boundary ring) and copies the result into `values`.
fn fill_tip_core(
    grid: &SectorGrid,
    values: &mut [Complex64],
    tip: f64,
    omega: f64,
    beta: f64,
    epsilon: f64,
    opts: &TestFieldOptions,
) -> Result<(), RenormError> {
    let n = grid.n_theta();
    let inner: Vec<usize> = (0..grid.n_r()).filter(|&i| grid.radius(i) < tip).collect();
    if inner.is_empty() {
        return Ok(());
    }
    let mut radii: Vec<f64> = inner.iter().map(|&i| grid.radius(i)).collect();
    let step = radii.windows(2).last().map_or(tip, |w| w[1] - w[0]);
    while radii.len() > 1 && tip - radii[radii.len() - 1] < 0.25 * step {
        radii.pop();
    }
    let kept = radii.len();
    radii.push(tip);
    let profile = radial_core(grid.alpha(), omega, epsilon / tip, opts.core_nodes)?;
    let rot = Complex64::cis(beta);
    let sub = SectorGrid::from_radii(*grid.cone(), n, radii.clone()).ok();
    let solved = sub.and_then(|sub| {
        let bc = BoundaryData {
            dbar: 0,
            profile: (0..n).map(|k| Complex64::cis(omega * sub.theta(k)) * rot).collect(),
        };
        let init = TangentField::from_fn(sub.clone(), |r, th| Complex64::from_polar(profile.eval(r / tip), omega * th) * rot);
        minimizer::minimize(&init, &bc, epsilon, &opts.tip_solver).ok().map(|o| o.field)
    });
    for (row, &i) in inner.iter().enumerate() {
        for k in 0..n {
            let r = grid.radius(i);
            values[grid.index(i, k)] = match (&solved, row < kept) {
                (Some(f), true) => f.get(row, k),
                _ => Complex64::from_polar(profile.eval(r / tip), omega * grid.theta(k)) * rot,
            };
        }
    }
    Ok(())
}
