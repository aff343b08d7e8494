//! Core energies: the tip problems `μ₁`, `μ₂` on a sector of radius `η`,
//! the radial vortex core constant `γ`, and the tip constant `γ₀(d, α)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree_cost::tip_free_branch;
use crate::descent::{self, DescentOptions, Objective, StepRule, StopReason};
use crate::field::{GridError, RadialSpacing, SectorGrid, TangentField};
use crate::geometry::ConeParams;
use crate::minimizer::{minimize, BoundaryData, MinimizeError, SolverOptions};

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("need 0 < epsilon < eta <= 1, got epsilon={epsilon}, eta={eta}")]
    InvalidScales { epsilon: f64, eta: f64 },
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    InvalidEpsilon(f64),
    #[error("epsilon sequence must be strictly decreasing with at least 3 entries")]
    InvalidSequence,
    #[error("radial solver stopped with relative gradient {0:.3e} ({1:?})")]
    RadialNotConverged(f64, StopReason),
    #[error("increments do not decrease (ratio {ratio:.3}); no extrapolation")]
    NotConverged { ratio: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Minimize(#[from] MinimizeError),
}

/// Which tip problem: boundary data `e^{iθ}` or `e^{i(1−2π/α)θ}` at `r = η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreProblem {
    Mu1,
    Mu2,
}

impl CoreProblem {
    /// Planar angular frequency of the boundary data.
    pub fn frequency(self, alpha: f64) -> f64 {
        match self {
            CoreProblem::Mu1 => 1.0,
            CoreProblem::Mu2 => 1.0 - TAU / alpha,
        }
    }

    /// Coefficient `c` of the subtracted term `c·log(1/ε)`.
    pub fn log_coefficient(self, alpha: f64) -> f64 {
        0.5 * alpha * self.frequency(alpha).powi(2)
    }

    /// Problem used for `γ₀(d, α)`.
    pub fn for_degree(d: i64, cone: &ConeParams) -> Self {
        if tip_free_branch(d, cone) {
            CoreProblem::Mu2
        } else {
            CoreProblem::Mu1
        }
    }
}

/// Resolution of the sector used for the tip problems, given for `η = 1` and
/// scaled with `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub r_min: f64,
    pub spacing: RadialSpacing,
}

impl Default for CoreGrid {
    fn default() -> Self {
        Self { n_r: 240, n_theta: 64, r_min: 1e-9, spacing: RadialSpacing::Graded { ratio: 1.1 } }
    }
}

#[derive(Debug, Clone)]
pub struct CoreSolution {
    pub value: f64,
    pub field: TangentField,
    /// Energy of the best radial profile `f(r)e^{iωθ}` on the same sector.
    pub radial_value: f64,
}

/// Minimal discrete value of the tip problem on the sector of radius `eta`.
pub fn solve_core_mu(
    which: CoreProblem,
    epsilon: f64,
    eta: f64,
    cone: &ConeParams,
    opts: &SolverOptions,
) -> Result<CoreSolution, CoreError> {
    solve_core_mu_on(which, epsilon, eta, cone, opts, &CoreGrid::default())
}

pub fn solve_core_mu_on(
    which: CoreProblem,
    epsilon: f64,
    eta: f64,
    cone: &ConeParams,
    opts: &SolverOptions,
    res: &CoreGrid,
) -> Result<CoreSolution, CoreError> {
    if !(epsilon > 0.0 && epsilon < eta && eta <= 1.0) {
        return Err(CoreError::InvalidScales { epsilon, eta });
    }
    let grid = SectorGrid::with_spacing(*cone, res.n_r, res.n_theta, res.r_min, 1.0, res.spacing)?.scaled(eta)?;
    let omega = which.frequency(cone.alpha());
    let profile: Vec<Complex64> =
        (0..grid.n_theta()).map(|k| Complex64::from_polar(1.0, omega * grid.theta(k))).collect();
    let bc = BoundaryData { dbar: 0, profile };
    let init = TangentField::from_fn(grid.clone(), |r, th| {
        Complex64::from_polar((r / epsilon).min(1.0).powf(omega.abs().max(0.5)), omega * th)
    });
    let out = minimize(&init, &bc, epsilon, opts)?;
    let radial = radial_core_on(cone.alpha(), omega, epsilon, grid.radii())?;
    Ok(CoreSolution { value: out.energy.total, field: out.field, radial_value: radial.energy })
}

/// Optimal radial profile `f` with `f(r_max) = 1` for `f(r)e^{iωθ}` on a
/// sector of angle `angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCore {
    pub energy: f64,
    pub radii: Vec<f64>,
    pub profile: Vec<f64>,
}

impl RadialCore {
    /// Linear interpolation of the profile, `1` beyond the outer radius.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        if r >= self.radii[n - 1] {
            return 1.0;
        }
        if r <= self.radii[0] {
            return self.profile[0];
        }
        let j = self.radii.partition_point(|&x| x <= r) - 1;
        let s = (r - self.radii[j]) / (self.radii[j + 1] - self.radii[j]);
        self.profile[j] * (1.0 - s) + self.profile[j + 1] * s
    }
}

/// Nodes `r_j = (j/N)²` on `[0, 1]`.
pub fn quadratic_mesh(nodes: usize) -> Vec<f64> {
    let n = (nodes - 1) as f64;
    (0..nodes).map(|j| (j as f64 / n).powi(2)).collect()
}

/// 1-D radial problem on the unit disc sector with `f(0) = 0`, `f(1) = 1`:
/// minimizes `(A/2) ∫ (f'² + ω² f²/r² + (1−f²)²/(2ε²)) r dr`.
pub fn radial_core(angle: f64, omega: f64, epsilon: f64, nodes: usize) -> Result<RadialCore, CoreError> {
    let radii = quadratic_mesh(nodes.max(3));
    radial_core_mesh(angle, omega, epsilon, &radii, true)
}

/// Radial problem on the given radii with a free inner end, matching the 2-D
/// tip problem on a grid with these radii.
pub fn radial_core_on(angle: f64, omega: f64, epsilon: f64, radii: &[f64]) -> Result<RadialCore, CoreError> {
    radial_core_mesh(angle, omega, epsilon, radii, false)
}

struct Radial {
    angle: f64,
    omega2: f64,
    inv_eps2: f64,
    b: Vec<f64>,
    w: Vec<f64>,
    m: Vec<f64>,
    first_free: usize,
    // Thomas factorization of the preconditioner on the free nodes
    cprime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Radial {
    fn new(angle: f64, omega: f64, epsilon: f64, r: &[f64], pinned_origin: bool) -> Self {
        let n = r.len();
        let mut b = vec![0.0; n - 1];
        let mut w = vec![0.0; n];
        let mut m = vec![0.0; n];
        for j in 0..n - 1 {
            let (a, c) = (r[j], r[j + 1]);
            let h = c - a;
            b[j] = (a + c) / (2.0 * h);
            m[j] += h * (c + 2.0 * a) / 6.0;
            m[j + 1] += h * (2.0 * c + a) / 6.0;
            if a == 0.0 {
                // ∫ hat/r over [0, c] for the node at c; the node at 0 is pinned to zero
                w[j + 1] += 1.0;
            } else {
                let l = (c / a).ln();
                w[j] += (c / h) * l - 1.0;
                w[j + 1] += 1.0 - (a / h) * l;
            }
        }
        let first_free = usize::from(pinned_origin);
        let mut s = Self {
            angle,
            omega2: omega * omega,
            inv_eps2: 1.0 / (epsilon * epsilon),
            b,
            w,
            m,
            first_free,
            cprime: vec![0.0; n],
            inv_denom: vec![0.0; n],
        };
        s.factor();
        s
    }

    fn factor(&mut self) {
        let n = self.w.len();
        let last = n - 2;
        for j in self.first_free..=last {
            let mut diag = self.omega2 * self.w[j] + self.inv_eps2 * self.m[j] + self.b[j];
            if j > 0 {
                diag += self.b[j - 1];
            }
            if j > self.first_free {
                diag -= -self.b[j - 1] * self.cprime[j - 1];
            }
            diag *= self.angle;
            self.inv_denom[j] = 1.0 / diag;
            self.cprime[j] = -self.angle * self.b[j] / diag;
        }
    }
}

impl Objective for Radial {
    fn eval(&mut self, f: &[f64], g: &mut [f64]) -> f64 {
        let n = f.len();
        let a = self.angle;
        let mut e = 0.0;
        g.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n - 1 {
            let d = f[j + 1] - f[j];
            e += self.b[j] * d * d;
            g[j] -= a * self.b[j] * d;
            g[j + 1] += a * self.b[j] * d;
        }
        for j in 0..n {
            let q = 1.0 - f[j] * f[j];
            e += self.omega2 * self.w[j] * f[j] * f[j] + 0.5 * self.inv_eps2 * self.m[j] * q * q;
            g[j] += a * (self.omega2 * self.w[j] * f[j] - self.inv_eps2 * self.m[j] * q * f[j]);
        }
        g[..self.first_free].fill(0.0);
        g[n - 1] = 0.0;
        0.5 * a * e
    }

    fn precondition(&mut self, g: &[f64], out: &mut [f64]) {
        let n = g.len();
        let last = n - 2;
        out.iter_mut().for_each(|v| *v = 0.0);
        let s = self.first_free;
        out[s] = g[s] * self.inv_denom[s];
        for j in s + 1..=last {
            out[j] = (g[j] + self.angle * self.b[j - 1] * out[j - 1]) * self.inv_denom[j];
        }
        for j in (s..last).rev() {
            out[j] -= self.cprime[j] * out[j + 1];
        }
    }
}

fn radial_core_mesh(
    angle: f64,
    omega: f64,
    epsilon: f64,
    radii: &[f64],
    pinned_origin: bool,
) -> Result<RadialCore, CoreError> {
    let mut f: Vec<f64> = radii
        .iter()
        .map(|&r| (r / epsilon).min(1.0).powf(omega.abs().max(0.5)))
        .collect();
    if pinned_origin {
        f[0] = 0.0;
    }
    let n = f.len();
    f[n - 1] = 1.0;
    let mut obj = Radial::new(angle, omega, epsilon, radii, pinned_origin);
    let opts = DescentOptions {
        max_iters: 200_000,
        rel_tol: 1e-8,
        abs_tol: 1e-12,
        step_rule: StepRule::BarzilaiBorwein,
        initial_step: 1.0,
        memory: 10,
    };
    let rep = descent::minimize(&mut obj, &mut f, &opts);
    if !rep.converged() {
        return Err(CoreError::RadialNotConverged(rep.rel_grad, rep.reason));
    }
    Ok(RadialCore { energy: rep.energy, radii: radii.to_vec(), profile: f })
}

/// Default node count for [`gamma_radial`].
pub const GAMMA_NODES: usize = 4001;

/// `γ(ε)`: minimal radial degree-one energy in the unit disc minus `π log(1/ε)`.
pub fn gamma_radial(epsilon: f64) -> Result<f64, CoreError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(CoreError::InvalidEpsilon(epsilon));
    }
    let core = radial_core(TAU, 1.0, epsilon, GAMMA_NODES)?;
    Ok(core.energy - PI * (1.0 / epsilon).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma0Estimate {
    pub value: f64,
    /// `|a_n − a_{n−1}|` for the last two terms of the subtracted sequence.
    pub last_increment: f64,
    pub problem: CoreProblem,
    pub sequence: Vec<(f64, f64)>,
}

/// Subtracted tip values `μ(ε, 1) − c log(1/ε)` for each `ε`.
pub fn subtracted_sequence(
    problem: CoreProblem,
    cone: &ConeParams,
    eps: &[f64],
    opts: &SolverOptions,
    res: &CoreGrid,
) -> Result<Vec<(f64, f64)>, CoreError> {
    let c = problem.log_coefficient(cone.alpha());
    eps.iter()
        .map(|&e| {
            let mu = solve_core_mu_on(problem, e, 1.0, cone, opts, res)?;
            Ok((e, mu.value - c * (1.0 / e).ln()))
        })
        .collect()
}

/// Aitken extrapolation of the last three terms of a sequence.
pub fn aitken(a: &[f64]) -> Result<(f64, f64), CoreError> {
    let n = a.len();
    if n < 3 {
        return Err(CoreError::InvalidSequence);
    }
    let (a1, a2, a3) = (a[n - 3], a[n - 2], a[n - 1]);
    let d1 = a2 - a1;
    let d2 = a3 - a2;
    if d2 == 0.0 {
        return Ok((a3, 0.0));
    }
    let q = d2 / d1;
    if !(q > 0.0 && q < 1.0) {
        return Err(CoreError::NotConverged { ratio: q });
    }
    Ok((a3 + d2 * q / (1.0 - q), d2.abs()))
}

/// `γ₀(d, α)` extrapolated from the tip problems over a decreasing `ε` sequence.
pub fn gamma0(
    dbar: i64,
    cone: &ConeParams,
    eps_sequence: &[f64],
    opts: &SolverOptions,
) -> Result<Gamma0Estimate, CoreError> {
    gamma0_on(dbar, cone, eps_sequence, opts, &CoreGrid::default())
}

pub fn gamma0_on(
    dbar: i64,
    cone: &ConeParams,
    eps_sequence: &[f64],
    opts: &SolverOptions,
    res: &CoreGrid,
) -> Result<Gamma0Estimate, CoreError> {
    if eps_sequence.len() < 3 || eps_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CoreError::InvalidSequence);
    }
    let problem = CoreProblem::for_degree(dbar, cone);
    let sequence = subtracted_sequence(problem, cone, eps_sequence, opts, res)?;
    let vals: Vec<f64> = sequence.iter().map(|s| s.1).collect();
    let (value, last_increment) = aitken(&vals)?;
    Ok(Gamma0Estimate { value, last_increment, problem, sequence })
}
