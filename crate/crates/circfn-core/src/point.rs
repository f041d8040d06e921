//! Points on a surface in band coordinates, with polar charts near
//! isolated extrema.
//!
//! Band coordinates are `(angle, base)` with the angle in `[0, 1)` and the
//! base the value of the prime function. On the disk and sphere the fiber
//! over an extremum degenerates to a point; a polar chart `(x, y)` with
//! `x^2 + y^2` equal to the distance-from-pole base coordinate covers a
//! neighborhood, overlapping band coordinates on the collar.

use crate::base::{circle_dist, wrap_unit, BaseSpace};
use crate::error::{Error, Result};
use crate::surface::SurfaceKind;
use crate::tolerances::COLLAR;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Which pole a polar chart is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    /// Base coordinate 0 (disk center, sphere south pole).
    Low,
    /// Base coordinate 1 (sphere north pole).
    High,
}

/// A point in band coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    /// Fiber angle in `[0, 1)`; meaningless at a pole.
    pub angle: f64,
    /// Base coordinate.
    pub base: f64,
}

impl SurfacePoint {
    pub fn new(angle: f64, base: f64) -> Self {
        SurfacePoint {
            angle: wrap_unit(angle),
            base,
        }
    }

    /// Validate the base coordinate against a surface and wrap the angle.
    pub fn on_surface(kind: SurfaceKind, angle: f64, base: f64) -> Result<Self> {
        let b = match kind.geometry().base() {
            BaseSpace::Circle => wrap_unit(base),
            BaseSpace::Interval => {
                if !(-1e-12..=1.0 + 1e-12).contains(&base) {
                    return Err(Error::Domain(format!(
                        "base coordinate {base} outside [0, 1] on the {}",
                        kind.name()
                    )));
                }
                base.clamp(0.0, 1.0)
            }
        };
        Ok(SurfacePoint::new(angle, b))
    }

    /// Convert a polar-chart point. The chart radius satisfies
    /// `x^2 + y^2 = base` at the low pole and `= 1 - base` at the high one.
    pub fn from_polar(kind: SurfaceKind, pole: Pole, x: f64, y: f64) -> Result<Self> {
        let r2 = x * x + y * y;
        if r2 > COLLAR.1 + 1e-12 {
            return Err(Error::Domain(format!(
                "polar point with r^2 = {r2} outside the chart collar"
            )));
        }
        let base = match (kind, pole) {
            (SurfaceKind::Disk, Pole::Low) | (SurfaceKind::Sphere, Pole::Low) => r2,
            (SurfaceKind::Sphere, Pole::High) => 1.0 - r2,
            _ => {
                return Err(Error::Domain(format!(
                    "the {} has no polar chart at that end",
                    kind.name()
                )))
            }
        };
        let angle = if r2 == 0.0 {
            0.0
        } else {
            wrap_unit(y.atan2(x) / TAU)
        };
        Ok(SurfacePoint::new(angle, base))
    }

    /// Express the point in the polar chart at `pole`.
    pub fn to_polar(&self, kind: SurfaceKind, pole: Pole) -> Result<(f64, f64)> {
        let r2 = match (kind, pole) {
            (SurfaceKind::Disk, Pole::Low) | (SurfaceKind::Sphere, Pole::Low) => self.base,
            (SurfaceKind::Sphere, Pole::High) => 1.0 - self.base,
            _ => {
                return Err(Error::Domain(format!(
                    "the {} has no polar chart at that end",
                    kind.name()
                )))
            }
        };
        if !(0.0..=COLLAR.1 + 1e-12).contains(&r2) {
            return Err(Error::Domain(format!(
                "point with base {} is outside the {:?}-pole chart",
                self.base, pole
            )));
        }
        let r = r2.max(0.0).sqrt();
        let th = TAU * self.angle;
        Ok((r * th.cos(), r * th.sin()))
    }

    /// True when the point is an isolated extremum of the surface.
    pub fn is_pole(&self, kind: SurfaceKind) -> bool {
        match kind {
            SurfaceKind::Disk => self.base <= 0.0,
            SurfaceKind::Sphere => self.base <= 0.0 || self.base >= 1.0,
            _ => false,
        }
    }

    /// Distance-like comparison that identifies all angles at a pole and
    /// wraps angle and (on the torus) base.
    pub fn same_point(&self, other: &SurfacePoint, kind: SurfaceKind, tol: f64) -> bool {
        let base_ok = match kind.geometry().base() {
            BaseSpace::Circle => circle_dist(self.base, other.base) <= tol,
            BaseSpace::Interval => (self.base - other.base).abs() <= tol,
        };
        if !base_ok {
            return false;
        }
        if self.is_pole(kind) && other.is_pole(kind) {
            return true;
        }
        circle_dist(self.angle, other.angle) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_round_trip() {
        let p = SurfacePoint::new(0.125, 0.04);
        let (x, y) = p.to_polar(SurfaceKind::Disk, Pole::Low).unwrap();
        assert!((x * x + y * y - 0.04).abs() < 1e-15);
        let q = SurfacePoint::from_polar(SurfaceKind::Disk, Pole::Low, x, y).unwrap();
        assert!(p.same_point(&q, SurfaceKind::Disk, 1e-12));
    }

    #[test]
    fn sphere_north_chart() {
        let p = SurfacePoint::new(0.75, 0.97);
        let (x, y) = p.to_polar(SurfaceKind::Sphere, Pole::High).unwrap();
        let q = SurfacePoint::from_polar(SurfaceKind::Sphere, Pole::High, x, y).unwrap();
        assert!(p.same_point(&q, SurfaceKind::Sphere, 1e-12));
    }

    #[test]
    fn poles_ignore_angle() {
        let a = SurfacePoint::new(0.1, 0.0);
        let b = SurfacePoint::new(0.9, 0.0);
        assert!(a.same_point(&b, SurfaceKind::Disk, 1e-12));
        assert!(!a.same_point(&b, SurfaceKind::Cylinder, 1e-12));
    }

    #[test]
    fn cylinder_has_no_polar_chart() {
        assert!(SurfacePoint::new(0.0, 0.0)
            .to_polar(SurfaceKind::Cylinder, Pole::Low)
            .is_err());
    }
}
