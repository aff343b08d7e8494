//! The cone `C_α` through its isometric unrolling into a planar sector of
//! opening angle `α`, with the two straight edges identified.
//!
//! Points are stored in polar coordinates `(r, θ)` on the sector with
//! `θ ∈ [0, α)`. The unit disc is related to the sector by the conformal map
//! `P(z) = z^{α/2π}`, with the branch fixed by `arg z ∈ [0, 2π)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points of the closed unit disc may overshoot |z| = 1 by this much.
pub const DISC_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("cone angle {0} outside (0, 2π)")]
    InvalidAngle(f64),
    #[error("radial coordinate {0} outside [0, 1]")]
    InvalidRadius(f64),
    #[error("point {0} lies outside the closed unit disc")]
    OutsideDisc(Complex64),
    #[error("argument {arg} of sector point outside [0, {alpha})")]
    OutsideSector { arg: f64, alpha: f64 },
    #[error("conformal derivative is singular at the origin")]
    SingularAtOrigin,
}

/// Opening angle of the unrolled sector. The generator length is fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConeParams {
    alpha: f64,
}

impl ConeParams {
    pub fn new(alpha: f64) -> Result<Self, GeometryError> {
        if alpha.is_finite() && alpha > 0.0 && alpha < TAU {
            Ok(Self { alpha })
        } else {
            Err(GeometryError::InvalidAngle(alpha))
        }
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn generator_length(&self) -> f64 {
        1.0
    }

    /// The exponent `α/2π` of the conformal map.
    #[inline]
    pub fn ratio(&self) -> f64 {
        self.alpha / TAU
    }

    /// Wraps an angle into `[0, α)`.
    pub fn wrap_angle(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(self.alpha);
        // rem_euclid can round up to alpha itself
        if t >= self.alpha {
            0.0
        } else {
            t
        }
    }
}

impl TryFrom<f64> for ConeParams {
    type Error = GeometryError;
    fn try_from(alpha: f64) -> Result<Self, Self::Error> {
        Self::new(alpha)
    }
}

impl From<ConeParams> for f64 {
    fn from(c: ConeParams) -> f64 {
        c.alpha
    }
}

/// A point of the cone in sector coordinates. The tip is `r = 0` with `θ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub theta: f64,
}

impl ConePoint {
    pub const TIP: ConePoint = ConePoint { r: 0.0, theta: 0.0 };

    /// Builds a point, wrapping `theta` into `[0, α)`.
    pub fn new(r: f64, theta: f64, cone: &ConeParams) -> Result<Self, GeometryError> {
        if !(r.is_finite() && (0.0..=1.0).contains(&r)) {
            return Err(GeometryError::InvalidRadius(r));
        }
        Ok(Self::new_unchecked(r, theta, cone))
    }

    /// Like [`ConePoint::new`] but without the `r ≤ 1` restriction, for the
    /// extended cone used by ball growth.
    pub fn new_unchecked(r: f64, theta: f64, cone: &ConeParams) -> Self {
        if r == 0.0 {
            Self::TIP
        } else {
            Self { r, theta: cone.wrap_angle(theta) }
        }
    }

    /// Builds a point from a planar position, reading its angle as the
    /// principal argument in `(−π, π]` of the unrolled plane.
    pub fn from_plane(w: Complex64, cone: &ConeParams) -> Self {
        let r = w.norm();
        if r == 0.0 {
            return Self::TIP;
        }
        Self::new_unchecked(r, w.arg(), cone)
    }

    pub fn is_tip(&self) -> bool {
        self.r == 0.0
    }

    /// Planar position in the fundamental sector.
    pub fn to_plane(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    /// Planar position in the unrolled copy whose angle lies within `α/2`
    /// of `reference`; returns the position and the copy index `w`, so that
    /// the angle used is `θ + w·α`.
    pub fn to_plane_near(&self, reference: f64, cone: &ConeParams) -> (Complex64, i64) {
        let a = cone.alpha();
        let wraps = ((reference - self.theta) / a).round() as i64;
        let theta = self.theta + wraps as f64 * a;
        (Complex64::from_polar(self.r, theta), wraps)
    }
}

/// Minimal angular gap between two angles on the cone, in `[0, α/2]`.
pub fn angular_gap(theta_p: f64, theta_q: f64, cone: &ConeParams) -> f64 {
    let d = (theta_p - theta_q).abs().rem_euclid(cone.alpha());
    d.min(cone.alpha() - d)
}

/// Geodesic distance on the cone.
///
/// For `α < 2π` the minimal gap `δ ≤ α/2 < π`, so the straight segment in the
/// unrolled plane never meets the tip and the law of cosines is exact.
pub fn geodesic_distance(p: &ConePoint, q: &ConePoint, cone: &ConeParams) -> f64 {
    let delta = angular_gap(p.theta, q.theta, cone);
    debug_assert!(delta < PI);
    let sq = p.r * p.r + q.r * q.r - 2.0 * p.r * q.r * delta.cos();
    // (r_p - r_q)^2 + 4 r_p r_q sin^2(δ/2) avoids cancellation for nearby points
    let half = (0.5 * delta).sin();
    let stable = (p.r - q.r).powi(2) + 4.0 * p.r * q.r * half * half;
    debug_assert!((sq - stable).abs() <= 1e-12 * (1.0 + sq.abs()));
    stable.max(0.0).sqrt()
}

fn arg_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        let b = a + TAU;
        if b >= TAU {
            0.0
        } else {
            b
        }
    } else {
        a
    }
}

/// The conformal map `P(z) = z^{α/2π}` from the unit disc onto the sector.
pub fn disc_to_sector(z: Complex64, cone: &ConeParams) -> Result<Complex64, GeometryError> {
    let m = z.norm();
    if !(m <= 1.0 + DISC_TOLERANCE) {
        return Err(GeometryError::OutsideDisc(z));
    }
    if m == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = cone.ratio();
    Ok(Complex64::from_polar(m.powf(k), k * arg_2pi(z)))
}

/// Inverse of [`disc_to_sector`] on the sector `arg w ∈ [0, α)`.
pub fn sector_to_disc(w: Complex64, cone: &ConeParams) -> Result<Complex64, GeometryError> {
    let m = w.norm();
    if !(m <= 1.0 + DISC_TOLERANCE) {
        return Err(GeometryError::OutsideDisc(w));
    }
    if m == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut arg = w.arg();
    if arg < 0.0 {
        arg = if arg > -DISC_TOLERANCE { 0.0 } else { arg + TAU };
    }
    if !(0.0..cone.alpha()).contains(&arg) {
        return Err(GeometryError::OutsideSector { arg, alpha: cone.alpha() });
    }
    let k = 1.0 / cone.ratio();
    Ok(Complex64::from_polar(m.powf(k), k * arg))
}

/// `|P'(z)| = (α/2π)|z|^{α/2π − 1}`.
pub fn conformal_derivative_modulus(z: Complex64, cone: &ConeParams) -> Result<f64, GeometryError> {
    let m = z.norm();
    if m == 0.0 {
        return Err(GeometryError::SingularAtOrigin);
    }
    let k = cone.ratio();
    Ok(k * m.powf(k - 1.0))
}
