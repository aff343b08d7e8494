//! Preconditioned first-order minimization with a monotone Armijo safeguard.
//!
//! Used for the 2-D Ginzburg–Landau energy, the 1-D radial core problem and
//! the renormalized energy over vortex positions.

use serde::{Deserialize, Serialize};

/// A smooth objective over a flat real vector.
pub trait Objective {
    /// Energy at `x` and its gradient written to `grad`. Components the
    /// objective keeps fixed must have zero gradient. May return a non-finite
    /// value for infeasible points; the line search then backtracks.
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Applies the inverse preconditioner. Must be symmetric positive definite.
    fn precondition(&mut self, g: &[f64], out: &mut [f64]) {
        out.copy_from_slice(g);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Barzilai–Borwein step lengths, backtracked until Armijo holds.
    #[default]
    BarzilaiBorwein,
    /// Polak–Ribière+ nonlinear conjugate gradient with Armijo backtracking.
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    pub max_iters: usize,
    /// Stop when `‖g‖_P / ‖g₀‖_P` falls below this.
    pub rel_tol: f64,
    /// Stop when the preconditioned gradient norm falls below this.
    pub abs_tol: f64,
    pub step_rule: StepRule,
    pub initial_step: f64,
    /// Armijo reference is the maximum energy over this many past iterates
    /// (1 = monotone descent).
    pub memory: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            rel_tol: 1e-6,
            abs_tol: 0.0,
            step_rule: StepRule::default(),
            initial_step: 1.0,
            memory: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    /// The line search could not decrease the energy any further.
    Stagnated,
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub energy: f64,
    pub initial_energy: f64,
    pub grad_norm: f64,
    pub rel_grad: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub reason: StopReason,
    pub history: Vec<IterRecord>,
}

impl DescentReport {
    pub fn converged(&self) -> bool {
        self.reason == StopReason::Converged
    }
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `obj` starting from `x`, which is overwritten by the last
/// accepted iterate. With `memory == 1` accepted iterates never increase the
/// energy.
pub fn minimize<O: Objective + ?Sized>(obj: &mut O, x: &mut [f64], opts: &DescentOptions) -> DescentReport {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut pg = vec![0.0; n];
    let mut f = obj.eval(x, &mut g);
    let mut evaluations = 1;
    let initial_energy = f;
    if !f.is_finite() {
        return DescentReport {
            energy: f,
            initial_energy,
            grad_norm: f64::NAN,
            rel_grad: f64::NAN,
            iterations: 0,
            evaluations,
            reason: StopReason::NonFinite,
            history: Vec::new(),
        };
    }
    obj.precondition(&g, &mut pg);
    let mut gpg = dot(&g, &pg).max(0.0);
    let g0 = gpg.sqrt();
    let mut history = vec![IterRecord { iter: 0, energy: f, grad_norm: g0 }];

    let mut p = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut pg_new = vec![0.0; n];
    let mut t = opts.initial_step;
    let mut iterations = 0;
    let reason;

    let done = |gn: f64| gn <= opts.abs_tol || (g0 > 0.0 && gn / g0 <= opts.rel_tol) || g0 == 0.0;

    loop {
        let gn = gpg.sqrt();
        if done(gn) {
            reason = StopReason::Converged;
            break;
        }
        if iterations >= opts.max_iters {
            reason = StopReason::MaxIters;
            break;
        }

        match opts.step_rule {
            StepRule::BarzilaiBorwein => {
                for (pi, q) in p.iter_mut().zip(&pg) {
                    *pi = -q;
                }
            }
            StepRule::ConjugateGradient => {
                if dot(&g, &p) >= 0.0 || iterations == 0 {
                    for (pi, q) in p.iter_mut().zip(&pg) {
                        *pi = -q;
                    }
                }
            }
        }
        let slope = dot(&g, &p);
        if !(slope < 0.0) {
            reason = StopReason::Stagnated;
            break;
        }

        let start = history.len().saturating_sub(opts.memory.max(1));
        let f_ref = history[start..].iter().map(|h| h.energy).fold(f, f64::max);
        let mut accepted = false;
        let mut f_new = f;
        for _ in 0..MAX_BACKTRACKS {
            for i in 0..n {
                x_new[i] = x[i] + t * p[i];
            }
            f_new = obj.eval(&x_new, &mut g_new);
            evaluations += 1;
            if f_new.is_finite() && f_new <= f_ref + ARMIJO_C1 * t * slope {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            reason = StopReason::Stagnated;
            break;
        }
        iterations += 1;
        obj.precondition(&g_new, &mut pg_new);
        let gpg_new = dot(&g_new, &pg_new).max(0.0);

        // s = t p, y = g_new - g
        let mut sy = 0.0;
        for i in 0..n {
            sy += t * p[i] * (g_new[i] - g[i]);
        }
        match opts.step_rule {
            StepRule::BarzilaiBorwein => {
                // P p = -g, so sᵀ P s = t² gᵀ P⁻¹ g
                let sps = t * t * gpg;
                t = if sy > 0.0 { sps / sy } else { 2.0 * t };
            }
            StepRule::ConjugateGradient => {
                let num: f64 = (0..n).map(|i| g_new[i] * (pg_new[i] - pg[i])).sum();
                let beta = (num / gpg).max(0.0);
                let old_slope = slope;
                for i in 0..n {
                    p[i] = -pg_new[i] + beta * p[i];
                }
                let new_slope = dot(&g_new, &p);
                if new_slope < 0.0 {
                    t = (t * old_slope / new_slope).min(1e3 * opts.initial_step);
                } else {
                    for i in 0..n {
                        p[i] = -pg_new[i];
                    }
                    t = opts.initial_step;
                }
            }
        }
        if !(t.is_finite() && t > 0.0) {
            t = opts.initial_step;
        }
        t = t.clamp(1e-12 * opts.initial_step, 1e8 * opts.initial_step);

        x.copy_from_slice(&x_new);
        std::mem::swap(&mut g, &mut g_new);
        std::mem::swap(&mut pg, &mut pg_new);
        f = f_new;
        gpg = gpg_new;
        history.push(IterRecord { iter: iterations, energy: f, grad_norm: gpg.sqrt() });
    }

    let grad_norm = gpg.sqrt();
    DescentReport {
        energy: f,
        initial_energy,
        grad_norm,
        rel_grad: if g0 > 0.0 { grad_norm / g0 } else { 0.0 },
        iterations,
        evaluations,
        reason,
        history,
    }
}
