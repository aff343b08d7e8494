//! Minimization of the discrete Ginzburg–Landau energy on the sector with
//! Dirichlet data on the outer ring, free inner ring, and the seam condition.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descent::{self, DescentOptions, DescentReport, Objective, StepRule, StopReason};
use crate::field::{energy_parts, EnergyBreakdown, SectorGrid, TangentField};

/// Unit boundary data on the outer ring, one value per angular node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub dbar: i64,
    pub profile: Vec<Complex64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("profile has {got} values, grid has {expected} angular nodes")]
    Length { expected: usize, got: usize },
    #[error("profile value at node {0} is not of unit modulus")]
    NotUnit(usize),
}

impl BoundaryData {
    pub fn new(dbar: i64, profile: Vec<Complex64>) -> Result<Self, BoundaryError> {
        if let Some(k) = profile.iter().position(|v| !((v.norm() - 1.0).abs() <= 1e-12)) {
            return Err(BoundaryError::NotUnit(k));
        }
        Ok(Self { dbar, profile })
    }
}

/// Planar angular frequency `(d̄−1)·2π/α + 1` of the canonical degree-`d̄` datum.
pub fn canonical_frequency(dbar: i64, alpha: f64) -> f64 {
    (dbar - 1) as f64 * TAU / alpha + 1.0
}

/// `ĝ(θ) = e^{i((d̄−1)(2π/α)+1)θ}` sampled on the outer ring.
pub fn canonical_boundary(dbar: i64, grid: &SectorGrid) -> BoundaryData {
    let w = canonical_frequency(dbar, grid.alpha());
    let profile = (0..grid.n_theta()).map(|k| Complex64::from_polar(1.0, w * grid.theta(k))).collect();
    BoundaryData { dbar, profile }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    Identity,
    /// Inverse of the discrete Dirichlet form plus a mass shift `M/ε²`,
    /// applied by FFT in angle and tridiagonal solves in radius.
    #[default]
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_rule: StepRule,
    pub seed: u64,
    pub preconditioner: Preconditioner,
    /// Amplitude of seeded uniform noise added to the interior of the
    /// initial field.
    pub init_noise: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-6,
            step_rule: StepRule::BarzilaiBorwein,
            seed: 0,
            preconditioner: Preconditioner::Sobolev,
            init_noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOutcome {
    pub field: TangentField,
    pub energy: EnergyBreakdown,
    pub diagnostics: DescentReport,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimizeError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid options: {0}")]
    InvalidOptions(&'static str),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("energy became non-finite")]
    NonFinite,
    #[error("no convergence after {} iterations ({:?}), relative gradient {:.3e}",
        .0.diagnostics.iterations, .0.diagnostics.reason, .0.diagnostics.rel_grad)]
    NotConverged(Box<MinimizeOutcome>),
}

impl MinimizeError {
    /// The last iterate when the error is a non-convergence.
    pub fn last_iterate(self) -> Option<MinimizeOutcome> {
        match self {
            MinimizeError::NotConverged(o) => Some(*o),
            _ => None,
        }
    }
}

/// Boundary profile extended inward with modulus ramping linearly from 0.1
/// at `r_min` to 1 at the outer ring.
pub fn initial_field(bc: &BoundaryData, grid: &SectorGrid) -> TangentField {
    let (r0, r1) = (grid.r_min(), grid.r_max());
    let n = grid.n_theta();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.n_r() {
        let s = 0.1 + 0.9 * (grid.radius(i) - r0) / (r1 - r0);
        values.extend(bc.profile.iter().take(n).map(|v| v * s));
    }
    TangentField::new(grid.clone(), values).expect("finite by construction")
}

/// Minimizes the discrete energy from `init` with `bc` imposed on the outer ring.
pub fn minimize(
    init: &TangentField,
    bc: &BoundaryData,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<MinimizeOutcome, MinimizeError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(MinimizeError::InvalidEpsilon(epsilon));
    }
    if opts.max_iters < 1 {
        return Err(MinimizeError::InvalidOptions("max_iters must be at least 1"));
    }
    if !(opts.grad_tol > 0.0) {
        return Err(MinimizeError::InvalidOptions("grad_tol must be positive"));
    }
    let grid = init.grid().clone();
    let n = grid.n_theta();
    if bc.profile.len() != n {
        return Err(BoundaryError::Length { expected: n, got: bc.profile.len() }.into());
    }

    let mut values = init.values().to_vec();
    let outer = grid.n_r() - 1;
    if opts.init_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for v in &mut values[..outer * n] {
            *v += Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * opts.init_noise;
        }
    }
    values[outer * n..].copy_from_slice(&bc.profile);

    let mut problem = GlProblem::new(&grid, epsilon, opts.preconditioner);
    let dopts = DescentOptions {
        max_iters: opts.max_iters,
        rel_tol: opts.grad_tol,
        abs_tol: 0.0,
        step_rule: opts.step_rule,
        initial_step: problem.initial_step(),
        memory: 1,
    };
    let report = descent::minimize(&mut problem, bytemuck::cast_slice_mut(&mut values), &dopts);
    if report.reason == StopReason::NonFinite {
        return Err(MinimizeError::NonFinite);
    }
    let field = TangentField::new(grid, values).map_err(|_| MinimizeError::NonFinite)?;
    let energy = field.gl_energy(epsilon);
    let outcome = MinimizeOutcome { field, energy, diagnostics: report };
    if outcome.diagnostics.converged() {
        Ok(outcome)
    } else {
        Err(MinimizeError::NotConverged(Box::new(outcome)))
    }
}

/// Energy and gradient of the discrete GL functional; gradient is
/// `∂E/∂Re u + i ∂E/∂Im u`, zero on the outer ring.
pub(crate) fn energy_gradient(grid: &SectorGrid, u: &[Complex64], epsilon: f64, grad: &mut [Complex64]) -> f64 {
    let n = grid.n_theta();
    let nr = grid.n_r();
    let dt = grid.dtheta();
    let seam = Complex64::from_polar(1.0, grid.alpha());
    let c = 1.0 / (4.0 * epsilon * epsilon);
    grad.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
    let mut e = 0.0;
    for i in 0..nr {
        let base = i * n;
        let a = grid.theta_weight(i) / dt;
        let ad = grid.area_weight(i) * dt;
        let mut et = 0.0;
        let mut ep = 0.0;
        for k in 0..n {
            let u_k = u[base + k];
            let (next, kn) = if k + 1 == n { (u[base] * seam, 0) } else { (u[base + k + 1], k + 1) };
            let diff = next - u_k;
            et += diff.norm_sqr();
            grad[base + k] -= diff * a;
            if kn == 0 {
                grad[base] += diff * seam.conj() * a;
            } else {
                grad[base + kn] += diff * a;
            }
            let q = 1.0 - u_k.norm_sqr();
            ep += q * q;
            grad[base + k] -= u_k * (4.0 * c * q * ad);
        }
        e += 0.5 * a * et + c * ad * ep;
        if i + 1 < nr {
            let bdt = grid.radial_weight(i) * dt;
            let mut er = 0.0;
            for k in 0..n {
                let diff = u[base + n + k] - u[base + k];
                er += diff.norm_sqr();
                grad[base + k] -= diff * bdt;
                grad[base + n + k] += diff * bdt;
            }
            e += 0.5 * bdt * er;
        }
    }
    grad[(nr - 1) * n..].iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
    e
}

struct GlProblem<'a> {
    grid: &'a SectorGrid,
    epsilon: f64,
    grad: Vec<Complex64>,
    sobolev: Option<SobolevPreconditioner>,
    diag_max: f64,
}

impl<'a> GlProblem<'a> {
    fn new(grid: &'a SectorGrid, epsilon: f64, kind: Preconditioner) -> Self {
        let sigma = 1.0 / (epsilon * epsilon);
        let dt = grid.dtheta();
        let diag_max = (0..grid.n_r())
            .map(|i| {
                let mut d = 4.0 * grid.theta_weight(i) / dt + 3.0 * sigma * grid.area_weight(i) * dt;
                if i > 0 {
                    d += grid.radial_weight(i - 1) * dt;
                }
                if i + 1 < grid.n_r() {
                    d += grid.radial_weight(i) * dt;
                }
                d
            })
            .fold(0.0, f64::max);
        Self {
            grid,
            epsilon,
            grad: vec![Complex64::new(0.0, 0.0); grid.len()],
            sobolev: (kind == Preconditioner::Sobolev).then(|| SobolevPreconditioner::new(grid, sigma)),
            diag_max,
        }
    }

    fn initial_step(&self) -> f64 {
        if self.sobolev.is_some() {
            1.0
        } else {
            1.0 / self.diag_max
        }
    }
}

impl Objective for GlProblem<'_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let u: &[Complex64] = bytemuck::cast_slice(x);
        let e = energy_gradient(self.grid, u, self.epsilon, &mut self.grad);
        grad.copy_from_slice(bytemuck::cast_slice(&self.grad));
        e
    }

    fn precondition(&mut self, g: &[f64], out: &mut [f64]) {
        match &mut self.sobolev {
            Some(p) => p.apply(bytemuck::cast_slice(g), bytemuck::cast_slice_mut(out)),
            None => out.copy_from_slice(g),
        }
    }
}

/// Solves `(H_D + σM) x = g` for the discrete Dirichlet form `H_D` with the
/// outer ring eliminated. The seam twist is removed by `e^{-ikα/n}`, after
/// which each angular Fourier mode decouples into a tridiagonal radial system.
pub(crate) struct SobolevPreconditioner {
    n: usize,
    m: usize,
    twist: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    off: Vec<f64>,
    cprime: Vec<f64>,
    inv_denom: Vec<f64>,
    work: Vec<Complex64>,
    ring: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SobolevPreconditioner {
    pub(crate) fn new(grid: &SectorGrid, sigma: f64) -> Self {
        let n = grid.n_theta();
        let m = grid.n_r() - 1;
        let dt = grid.dtheta();
        let alpha = grid.alpha();
        let twist = (0..n).map(|k| Complex64::from_polar(1.0, -(k as f64) * alpha / n as f64)).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());

        let a: Vec<f64> = (0..m).map(|i| grid.theta_weight(i) / dt).collect();
        let bdt: Vec<f64> = (0..m).map(|i| grid.radial_weight(i) * dt).collect();
        let sig: Vec<f64> = (0..m).map(|i| sigma * grid.area_weight(i) * dt).collect();
        let off: Vec<f64> = (0..m.saturating_sub(1)).map(|i| -bdt[i]).collect();
        let mut cprime = vec![0.0; n * m];
        let mut inv_denom = vec![0.0; n * m];
        for j in 0..n {
            let phase = alpha / n as f64 + TAU * j as f64 / n as f64;
            let lambda = 4.0 * (0.5 * phase).sin().powi(2);
            let base = j * m;
            for i in 0..m {
                let mut diag = lambda * a[i] + bdt[i] + sig[i];
                if i > 0 {
                    diag += bdt[i - 1];
                    diag -= off[i - 1] * cprime[base + i - 1];
                }
                inv_denom[base + i] = 1.0 / diag;
                if i + 1 < m {
                    cprime[base + i] = off[i] / diag;
                }
            }
        }
        Self {
            n,
            m,
            twist,
            fwd,
            inv,
            off,
            cprime,
            inv_denom,
            work: vec![Complex64::new(0.0, 0.0); n * m],
            ring: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub(crate) fn apply(&mut self, g: &[Complex64], out: &mut [Complex64]) {
        let (n, m) = (self.n, self.m);
        for i in 0..m {
            for k in 0..n {
                self.ring[k] = g[i * n + k] * self.twist[k];
            }
            self.fwd.process_with_scratch(&mut self.ring, &mut self.scratch);
            for j in 0..n {
                self.work[j * m + i] = self.ring[j];
            }
        }
        for j in 0..n {
            let base = j * m;
            let x = &mut self.work[base..base + m];
            x[0] *= self.inv_denom[base];
            for i in 1..m {
                x[i] = (x[i] - x[i - 1] * self.off[i - 1]) * self.inv_denom[base + i];
            }
            for i in (0..m - 1).rev() {
                x[i] -= x[i + 1] * self.cprime[base + i];
            }
        }
        let scale = 1.0 / n as f64;
        for i in 0..m {
            for j in 0..n {
                self.ring[j] = self.work[j * m + i];
            }
            self.inv.process_with_scratch(&mut self.ring, &mut self.scratch);
            for k in 0..n {
                out[i * n + k] = self.ring[k] * self.twist[k].conj() * scale;
            }
        }
        out[m * n..].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    }
}

/// Energy breakdown of raw values on `grid`.
pub fn energy_of(grid: &SectorGrid, values: &[Complex64], epsilon: f64) -> EnergyBreakdown {
    let (d, p) = energy_parts(grid, values, epsilon);
    EnergyBreakdown::new(d, p, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeParams;
    use crate::field::RadialSpacing;
    use std::f64::consts::PI;

    fn grid(alpha: f64, nr: usize, nt: usize) -> SectorGrid {
        SectorGrid::new(ConeParams::new(alpha).unwrap(), nr, nt, 1e-3).unwrap()
    }

    fn random_field(grid: &SectorGrid, seed: u64) -> TangentField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TangentField::from_fn(grid.clone(), |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn canonical_boundary_degrees() {
        for alpha in [PI / 2.0, PI, 1.5 * PI] {
            let g = grid(alpha, 16, 64);
            for dbar in -2..=3 {
                let bc = canonical_boundary(dbar, &g);
                let mut f = TangentField::zeros(g.clone());
                for k in 0..g.n_theta() {
                    f.set(g.n_r() - 1, k, bc.profile[k]);
                }
                assert_eq!(f.degree(g.n_r() - 1).unwrap(), dbar);
            }
        }
        let g = grid(PI, 16, 32);
        let bc = canonical_boundary(0, &g);
        assert!((bc.profile[5] - Complex64::from_polar(1.0, -g.theta(5))).norm() < 1e-15);
        let bc = canonical_boundary(3, &g);
        assert!((bc.profile[5] - Complex64::from_polar(1.0, 5.0 * g.theta(5))).norm() < 1e-14);
    }

    #[test]
    fn gradient_matches_energy_and_finite_differences() {
        let g = SectorGrid::with_spacing(ConeParams::new(2.0).unwrap(), 16, 16, 0.01, 1.0, RadialSpacing::Graded { ratio: 1.3 })
            .unwrap();
        let f = random_field(&g, 3);
        let eps = 0.3;
        let mut grad = vec![Complex64::new(0.0, 0.0); g.len()];
        let e = energy_gradient(&g, f.values(), eps, &mut grad);
        assert!((e - f.gl_energy(eps).total).abs() < 1e-10 * e);
        let h = 1e-6;
        for idx in [0usize, 5, 15, 16, 100, 200, g.len() - 17] {
            for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let mut p = f.values().to_vec();
                p[idx] += dir * h;
                let ep = energy_of(&g, &p, eps).total;
                p[idx] -= dir * (2.0 * h);
                let em = energy_of(&g, &p, eps).total;
                let fd = (ep - em) / (2.0 * h);
                let an = (grad[idx].conj() * dir).re;
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "idx {idx}: fd {fd} vs {an}");
            }
        }
        assert!(grad[g.len() - 16..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn preconditioner_inverts_quadratic_form() {
        // The Dirichlet part plus σ·M is exactly what the preconditioner inverts:
        // check P⁻¹(Hx) = x on the free rings using the gradient at ε→∞ (no potential).
        let g = grid(PI / 2.0, 20, 24);
        let mut x = random_field(&g, 9).into_values();
        let n = g.n_theta();
        let outer = g.n_r() - 1;
        x[outer * n..].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut hx = vec![Complex64::new(0.0, 0.0); g.len()];
        energy_gradient(&g, &x, 1e150, &mut hx);
        let mut p = SobolevPreconditioner::new(&g, 0.0);
        let mut back = vec![Complex64::new(0.0, 0.0); g.len()];
        p.apply(&hx, &mut back);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn descent_keeps_boundary_and_decreases_energy() {
        let g = grid(PI, 24, 48);
        let bc = canonical_boundary(2, &g);
        let init = initial_field(&bc, &g);
        for rule in [StepRule::BarzilaiBorwein, StepRule::ConjugateGradient] {
            for pre in [Preconditioner::Sobolev, Preconditioner::Identity] {
                let opts = SolverOptions {
                    max_iters: 200,
                    step_rule: rule,
                    preconditioner: pre,
                    init_noise: 0.05,
                    seed: 4,
                    ..Default::default()
                };
                let out = match minimize(&init, &bc, 0.2, &opts) {
                    Ok(o) => o,
                    Err(e) => e.last_iterate().unwrap(),
                };
                let h = &out.diagnostics.history;
                assert!(h.windows(2).all(|w| w[1].energy <= w[0].energy));
                assert!(out.energy.total <= out.diagnostics.initial_energy);
                let outer = g.n_r() - 1;
                assert_eq!(out.field.ring(outer), &bc.profile[..]);
            }
        }
    }

    #[test]
    fn converges_and_respects_modulus_bound() {
        let g = grid(PI, 32, 64);
        let bc = canonical_boundary(1, &g);
        let out = minimize(&initial_field(&bc, &g), &bc, 0.1, &SolverOptions::default()).unwrap();
        assert!(out.diagnostics.converged());
        assert!(out.field.max_modulus() <= 1.0 + 1e-6);
        assert_eq!(out.field.degree(g.n_r() - 1).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = grid(PI, 16, 16);
        let bc = canonical_boundary(1, &g);
        let init = initial_field(&bc, &g);
        assert!(matches!(minimize(&init, &bc, 0.0, &SolverOptions::default()), Err(MinimizeError::InvalidEpsilon(_))));
        let opts = SolverOptions { grad_tol: 0.0, ..Default::default() };
        assert!(minimize(&init, &bc, 0.1, &opts).is_err());
        let short = BoundaryData { dbar: 1, profile: bc.profile[..4].to_vec() };
        assert!(minimize(&init, &short, 0.1, &SolverOptions::default()).is_err());
        assert!(BoundaryData::new(1, vec![Complex64::new(0.5, 0.0)]).is_err());
    }
}
