//! The degree-cost function `m(d, α)`: the cheapest way to split a total
//! degree `d` between a tip singularity and unit vortices away from the tip.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ConeParams;

/// Ties in the brute-force minimum are decided within this tolerance.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeSplit {
    pub d0: i64,
    pub d1: i64,
    pub cost: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DegreeCostError {
    #[error("split sums to {got}, expected {expected}")]
    SplitMismatch { expected: i64, got: i64 },
    #[error("empty split")]
    EmptySplit,
}

/// Cost of a tip singularity of degree `d0`.
pub fn tip_cost(d0: i64, cone: &ConeParams) -> f64 {
    let k = cone.ratio();
    let x = d0 as f64 - 1.0 + k;
    x * x / k
}

/// Smallest bound accepted by [`m_bruteforce`].
pub fn minimal_bound(d: i64, cone: &ConeParams) -> i64 {
    d.abs() + (TAU / cone.alpha()).ceil() as i64 + 2
}

/// Default search bound: `|d| + 10`, widened when the cone is so narrow that
/// this would violate [`minimal_bound`].
pub fn default_bound(d: i64, cone: &ConeParams) -> i64 {
    (d.abs() + 10).max(minimal_bound(d, cone))
}

/// Exhaustive minimum over `d0 ∈ [−bound, bound]`, ties resolved toward the
/// smallest `|d0|` (then the smaller `d0`).
pub fn m_bruteforce(d: i64, cone: &ConeParams, bound: i64) -> DegreeSplit {
    assert!(
        bound >= minimal_bound(d, cone),
        "bound {bound} below |d| + ceil(2π/α) + 2 = {}",
        minimal_bound(d, cone)
    );
    let mut best: Option<DegreeSplit> = None;
    for d0 in -bound..=bound {
        let d1 = d - d0;
        let cost = tip_cost(d0, cone) + d1.abs() as f64;
        let better = match &best {
            None => true,
            Some(b) => {
                cost < b.cost - TIE_TOL
                    || ((cost - b.cost).abs() <= TIE_TOL && d0.abs() < b.d0.abs())
            }
        };
        if better {
            best = Some(DegreeSplit { d0, d1, cost });
        }
    }
    best.expect("non-empty search range")
}

/// True when the closed form selects the tip-vortex-free branch, i.e. the
/// tip carries degree 0: `d ≤ 0` and `α > 2π/3`.
pub fn tip_free_branch(d: i64, cone: &ConeParams) -> bool {
    d <= 0 && cone.alpha() > TAU / 3.0
}

/// Closed form of `m(d, α)`.
pub fn m_closed(d: i64, cone: &ConeParams) -> f64 {
    let a = cone.alpha();
    if tip_free_branch(d, cone) {
        d.abs() as f64 + (a - TAU).powi(2) / (TAU * a)
    } else {
        (d - 1).abs() as f64 + a / TAU
    }
}

/// Checks `m(d̄) ≤ m(split[0]) + Σ_{j≥1} |split[j]|`.
pub fn additivity_check(dbar: i64, split: &[i64], cone: &ConeParams) -> Result<bool, DegreeCostError> {
    let (first, rest) = split.split_first().ok_or(DegreeCostError::EmptySplit)?;
    let sum: i64 = split.iter().sum();
    if sum != dbar {
        return Err(DegreeCostError::SplitMismatch { expected: dbar, got: sum });
    }
    let rhs = m_closed(*first, cone) + rest.iter().map(|d| d.abs() as f64).sum::<f64>();
    Ok(m_closed(dbar, cone) <= rhs + 1e-12)
}

/// One row of the `m(d, α)` table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MRow {
    pub d: i64,
    pub alpha: f64,
    pub closed: f64,
    pub bruteforce: f64,
    pub d0: i64,
    pub d1: i64,
}

pub fn m_table(ds: impl IntoIterator<Item = i64>, alphas: &[ConeParams]) -> Vec<MRow> {
    let mut rows = Vec::new();
    for d in ds {
        for cone in alphas {
            let s = m_bruteforce(d, cone, default_bound(d, cone));
            rows.push(MRow {
                d,
                alpha: cone.alpha(),
                closed: m_closed(d, cone),
                bruteforce: s.cost,
                d0: s.d0,
                d1: s.d1,
            });
        }
    }
    rows
}

pub fn m_table_csv(rows: &[MRow]) -> String {
    let mut out = String::from("d,alpha,m_closed,m_bruteforce,d0,d1\n");
    for r in rows {
        writeln!(out, "{},{:.17e},{:.17e},{:.17e},{},{}", r.d, r.alpha, r.closed, r.bruteforce, r.d0, r.d1)
            .unwrap();
    }
    out
}
