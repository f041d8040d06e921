//! Records describing the critical set of a normal form.

use serde::{Deserialize, Serialize};

/// Whether a critical element is a local maximum or minimum of the function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalKind {
    Maximum,
    Minimum,
}

impl ExtremalKind {
    pub fn flipped(self) -> Self {
        match self {
            ExtremalKind::Maximum => ExtremalKind::Minimum,
            ExtremalKind::Minimum => ExtremalKind::Maximum,
        }
    }
}

/// A critical circle of the composed function: a whole fiber on which the
/// profile derivative vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCircleRecord {
    /// Base coordinate of the fiber.
    pub base_position: f64,
    /// Function value on the circle (lift value for circle targets).
    pub level: f64,
    /// Vanishing order `n >= 2`: the local model is `+/- y^n`.
    pub order: usize,
    /// Extremal circles are exactly those of even order.
    pub extremal: bool,
    /// Max/min flavor for extremal circles, `None` otherwise.
    pub extremal_kind: Option<ExtremalKind>,
}

/// Where an isolated extremum of a surface sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumLocation {
    DiskCenter,
    SphereSouth,
    SphereNorth,
}

impl ExtremumLocation {
    /// Base coordinate of the extremum in band coordinates.
    pub fn base_coordinate(self) -> f64 {
        match self {
            ExtremumLocation::DiskCenter | ExtremumLocation::SphereSouth => 0.0,
            ExtremumLocation::SphereNorth => 1.0,
        }
    }
}

/// An isolated extremum point (disk center or sphere pole) with the local
/// model `+/- (x^2 + y^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolatedExtremumRecord {
    pub location: ExtremumLocation,
    pub kind: ExtremalKind,
    pub level: f64,
}
