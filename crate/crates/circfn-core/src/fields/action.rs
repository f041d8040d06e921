//! The circle action induced by a period-normalized vertical field.
//!
//! Once the field rotates every circle fiber at unit speed, flowing for
//! time `g` defines an action of the circle group: fibers rotate rigidly
//! by `±g` turns and point fibers (disk center, sphere poles) stay fixed.

use serde::{Deserialize, Serialize};

use crate::base::wrap_unit;
use crate::error::{Error, Result};
use crate::point::SurfacePoint;
use crate::records::ExtremumLocation;

use super::tangent::TangentField;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleAction {
    pub field: TangentField,
    /// Rotation direction: the constant unit coefficient of the field.
    pub speed: f64,
}

/// Fixed-point set of a single group element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum FixedSet {
    /// The identity element fixes everything.
    EveryPoint,
    /// Non-trivial rotations fix exactly the point fibers.
    IsolatedExtrema { locations: Vec<ExtremumLocation> },
    /// Surfaces without point fibers are moved everywhere.
    Empty,
}

impl FixedSet {
    /// Number of fixed components, when finite.
    pub fn count(&self) -> Option<usize> {
        match self {
            FixedSet::EveryPoint => None,
            FixedSet::IsolatedExtrema { locations } => Some(locations.len()),
            FixedSet::Empty => Some(0),
        }
    }
}

/// Wrap a period-normalized field into the action it induces.
pub fn circle_action(field: &TangentField) -> Result<CircleAction> {
    if !field.normalized {
        return Err(Error::NotNormalized(
            "the field must be period-normalized before it induces a circle action".into(),
        ));
    }
    let speed = field.coefficient(0.0);
    if speed.abs() != 1.0 {
        return Err(Error::NotNormalized(format!(
            "normalized coefficient must be a unit constant, got {speed}"
        )));
    }
    for i in 0..=100 {
        let b = i as f64 / 100.0;
        if field.coefficient(b) != speed {
            return Err(Error::NotNormalized(
                "normalized coefficient is not constant across the base".into(),
            ));
        }
    }
    Ok(CircleAction {
        field: field.clone(),
        speed,
    })
}

impl CircleAction {
    /// Act by the group element `g` (in turns).
    pub fn act(&self, pt: SurfacePoint, g: f64) -> SurfacePoint {
        if pt.is_pole(self.field.surface.kind) {
            return pt;
        }
        SurfacePoint::new(pt.angle + self.speed * g, pt.base)
    }

    /// Fixed points of the element `g`.
    pub fn fixed_points(&self, g: f64) -> FixedSet {
        let r = wrap_unit(self.speed * g);
        let trivial = r.abs() < 1e-12 || (1.0 - r).abs() < 1e-12;
        if trivial {
            return FixedSet::EveryPoint;
        }
        let locations = self.field.surface.geometry().extrema_locations().to_vec();
        if locations.is_empty() {
            FixedSet::Empty
        } else {
            FixedSet::IsolatedExtrema { locations }
        }
    }
}
