//! Vortex detection in converged fields and the fit of the energy expansion
//! in `log(1/ε)`.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{offtip_loop_degree, winding, DegreeError, TangentField};
use crate::geometry::{geodesic_distance, ConePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vortex {
    pub position: ConePoint,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexSet {
    pub alpha: f64,
    pub dbar: i64,
    pub epsilon: f64,
    pub tip_degree: i64,
    pub vortices: Vec<Vortex>,
}

impl VortexSet {
    pub fn total_degree(&self) -> i64 {
        self.tip_degree + self.vortices.iter().map(|v| v.degree).sum::<i64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectOptions {
    /// Nodes with modulus below this belong to a core.
    pub core_threshold: f64,
    /// Loops used for degrees must stay above this modulus.
    pub clean_threshold: f64,
    /// Cores whose centroids are closer than this multiple of `ε` are merged.
    pub merge_factor: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { core_threshold: 0.5, clean_threshold: 0.7, merge_factor: 4.0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("tip degree {tip} plus vortex degrees {vortices} differs from boundary degree {dbar}")]
    InconsistentDegrees { tip: i64, vortices: i64, dbar: i64 },
    #[error("no clean loop around the core near r={r:.4}, theta={theta:.4}")]
    UnresolvedCore { r: f64, theta: f64 },
    #[error("no clean ring separates the tip from the other cores")]
    UnresolvedTip,
    #[error(transparent)]
    Degree(#[from] DegreeError),
}

/// A connected low-modulus region with node coordinates `(i, k)` where `k` is
/// the unrolled angular index (it may leave `[0, n_θ)` across the seam).
#[derive(Debug, Clone)]
struct Component {
    nodes: Vec<(usize, i64)>,
    touches_tip: bool,
}

fn components(field: &TangentField, threshold: f64) -> Vec<Component> {
    let g = field.grid();
    let (nr, n) = (g.n_r(), g.n_theta());
    let low: Vec<bool> = field.values().iter().map(|v| v.norm() < threshold).collect();
    let mut seen = vec![false; g.len()];
    let mut out = Vec::new();
    for start in 0..g.len() {
        if !low[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let (i0, k0) = (start / n, (start % n) as i64);
        let mut queue = VecDeque::from([(i0, k0)]);
        let mut nodes = Vec::new();
        while let Some((i, k)) = queue.pop_front() {
            nodes.push((i, k));
            let mut nbrs = vec![(i, k - 1), (i, k + 1)];
            if i > 0 {
                nbrs.push((i - 1, k));
            }
            if i + 1 < nr {
                nbrs.push((i + 1, k));
            }
            for (a, b) in nbrs {
                let idx = a * n + b.rem_euclid(n as i64) as usize;
                if low[idx] && !seen[idx] {
                    seen[idx] = true;
                    queue.push_back((a, b));
                }
            }
        }
        let touches_tip = nodes.iter().any(|&(i, _)| i == 0);
        out.push(Component { nodes, touches_tip });
    }
    out
}

/// Weighted centroid kept in a local chart: planar sum relative to the
/// unrolled reference angle `phi_ref`.
#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<usize>,
    phi_ref: f64,
    sum: Complex64,
    weight: f64,
}

impl Cluster {
    /// Centroid radius and unrolled angle.
    fn centroid(&self) -> (f64, f64) {
        let c = self.sum / self.weight;
        (c.norm(), self.phi_ref + c.arg())
    }
}

/// Unrolled index rectangle `[i0, i1] × [k0, k1]`.
#[derive(Debug, Clone, Copy)]
struct Rect {
    i0: usize,
    i1: usize,
    k0: i64,
    k1: i64,
}

impl Rect {
    fn contains(&self, i: usize, k: i64) -> bool {
        (self.i0..=self.i1).contains(&i) && (self.k0..=self.k1).contains(&k)
    }
}

fn rect_loop(rect: Rect) -> Vec<(usize, i64)> {
    let mut pts = Vec::new();
    for k in rect.k0..rect.k1 {
        pts.push((rect.i0, k));
    }
    for i in rect.i0..rect.i1 {
        pts.push((i, rect.k1));
    }
    for k in (rect.k0 + 1..=rect.k1).rev() {
        pts.push((rect.i1, k));
    }
    for i in (rect.i0 + 1..=rect.i1).rev() {
        pts.push((i, rect.k0));
    }
    pts.push((rect.i0, rect.k0));
    // counterclockwise in the plane: increasing r first, then decreasing θ
    pts.reverse();
    pts
}

/// Detects vortices with the default thresholds.
pub fn detect_vortices(field: &TangentField, epsilon: f64) -> Result<VortexSet, DetectError> {
    detect_vortices_with(field, epsilon, &DetectOptions::default())
}

pub fn detect_vortices_with(
    field: &TangentField,
    epsilon: f64,
    opts: &DetectOptions,
) -> Result<VortexSet, DetectError> {
    let g = field.grid();
    let cone = *g.cone();
    let (nr, n) = (g.n_r(), g.n_theta() as i64);
    let dt = g.dtheta();
    let comps = components(field, opts.core_threshold);

    let weight = |i: usize, k: i64| (1.0 - field.sample(i, k).norm_sqr()).max(0.0);

    // off-tip cores, merged when centroids are within merge_factor·ε
    let mut clusters: Vec<Cluster> = Vec::new();
    for (ci, c) in comps.iter().enumerate() {
        if c.touches_tip {
            continue;
        }
        let phi_ref = c.nodes[0].1 as f64 * dt;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut w = 0.0;
        for &(i, k) in &c.nodes {
            let wt = weight(i, k);
            sum += Complex64::from_polar(g.radius(i), k as f64 * dt - phi_ref) * wt;
            w += wt;
        }
        if w == 0.0 {
            sum = Complex64::from_polar(g.radius(c.nodes[0].0), 0.0);
            w = 1.0;
        }
        clusters.push(Cluster { members: vec![ci], phi_ref, sum, weight: w });
    }
    let point = |(r, phi): (f64, f64)| ConePoint::new_unchecked(r, phi, &cone);
    loop {
        let mut merged = false;
        'outer: for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ca, cb) = (clusters[a].centroid(), clusters[b].centroid());
                if geodesic_distance(&point(ca), &point(cb), &cone) < opts.merge_factor * epsilon {
                    let wraps = ((ca.1 - cb.1) / cone.alpha()).round();
                    let cl = clusters.remove(b);
                    let rot = cl.phi_ref + wraps * cone.alpha() - clusters[a].phi_ref;
                    clusters[a].sum += cl.sum * Complex64::from_polar(1.0, rot);
                    clusters[a].weight += cl.weight;
                    clusters[a].members.extend(cl.members);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut vortices = Vec::new();
    for cl in &clusters {
        let position = point(cl.centroid());
        // members in the chart of the first member
        let mut own: Vec<(usize, i64)> = Vec::new();
        let base = &comps[cl.members[0]];
        let base_k = base.nodes[0].1;
        for &m in &cl.members {
            let c = &comps[m];
            let shift = ((base_k - c.nodes[0].1) as f64 / n as f64).round() as i64 * n;
            own.extend(c.nodes.iter().map(|&(i, k)| (i, k + shift)));
        }
        let others: Vec<&Component> = comps
            .iter()
            .enumerate()
            .filter(|(ci, _)| !cl.members.contains(ci))
            .map(|(_, c)| c)
            .collect();
        let rect0 = Rect {
            i0: own.iter().map(|p| p.0).min().unwrap(),
            i1: own.iter().map(|p| p.0).max().unwrap(),
            k0: own.iter().map(|p| p.1).min().unwrap(),
            k1: own.iter().map(|p| p.1).max().unwrap(),
        };
        let mut degree = None;
        for margin in 1..(nr.max(n as usize)) {
            let Some(i0) = rect0.i0.checked_sub(margin) else { break };
            // the outer ring has unit modulus, so loops may run along it
            let i1 = (rect0.i1 + margin).min(nr - 1);
            let rect = Rect { i0, i1, k0: rect0.k0 - margin as i64, k1: rect0.k1 + margin as i64 };
            if rect.k1 - rect.k0 >= n {
                break;
            }
            // other cores inside the rectangle, in any unrolled copy
            let foreign = others.iter().any(|c| {
                c.nodes.iter().any(|&(i, k)| {
                    let k = k.rem_euclid(n);
                    (-2..=2).any(|w| rect.contains(i, k + w * n))
                })
            });
            if foreign {
                break;
            }
            let path = rect_loop(rect);
            if path.iter().any(|&(i, k)| field.sample(i, k).norm() <= opts.clean_threshold) {
                continue;
            }
            let current = winding(path.iter().map(|&(i, k)| field.sample(i, k)))?;
            degree = Some(offtip_loop_degree(current)?);
            break;
        }
        match degree {
            Some(d) => vortices.push(Vortex { position, degree: d }),
            None => return Err(DetectError::UnresolvedCore { r: position.r, theta: position.theta }),
        }
    }

    // tip degree on the smallest clean ring inside every off-tip core
    let inner_limit = comps
        .iter()
        .filter(|c| !c.touches_tip)
        .flat_map(|c| c.nodes.iter().map(|p| p.0))
        .min()
        .unwrap_or(nr);
    let clean_ring = (0..inner_limit.min(nr)).find(|&i| {
        field.ring(i).iter().all(|v| v.norm() > opts.clean_threshold)
    });
    let tip_degree = match clean_ring {
        Some(i) => field.degree(i)?,
        None => return Err(DetectError::UnresolvedTip),
    };
    let dbar = field.degree(nr - 1)?;
    let set = VortexSet { alpha: cone.alpha(), dbar, epsilon, tip_degree, vortices };
    let vsum: i64 = set.vortices.iter().map(|v| v.degree).sum();
    if tip_degree + vsum != dbar {
        return Err(DetectError::InconsistentDegrees { tip: tip_degree, vortices: vsum, dbar });
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 runs, got {0}")]
    TooFewRuns(usize),
    #[error("all epsilon values coincide")]
    DegenerateDesign,
}

/// Least squares of `E` against `log(1/ε)` over `(ε, E)` pairs.
pub fn fit_expansion(runs: &[(f64, f64)]) -> Result<ExpansionFit, FitError> {
    if runs.len() < 3 {
        return Err(FitError::TooFewRuns(runs.len()));
    }
    let xs: Vec<f64> = runs.iter().map(|r| (1.0 / r.0).ln()).collect();
    let n = runs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = runs.iter().map(|r| r.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(FitError::DegenerateDesign);
    }
    let sxy: f64 = xs.iter().zip(runs).map(|(x, r)| (x - mx) * (r.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(runs)
        .map(|(x, r)| (r.1 - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);
    Ok(ExpansionFit { slope, intercept, max_residual })
}
