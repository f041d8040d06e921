//! The four admissible surfaces and their geometry strategies.
//!
//! Everything surface-specific (base space, Euler characteristic, isolated
//! extrema, endpoint regularity constraints, decomposition piece counts)
//! lives behind [`SurfaceGeometry`]. The four implementations are
//! registered by name and selected at runtime from the CLI flag or the
//! JSON surface tag.

use crate::base::{BaseSpace, TargetSpace};
use crate::error::{Error, Result};
use crate::records::ExtremumLocation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Cylinder,
    Torus,
    Disk,
    Sphere,
}

impl SurfaceKind {
    pub fn geometry(self) -> &'static dyn SurfaceGeometry {
        match self {
            SurfaceKind::Cylinder => &CYLINDER,
            SurfaceKind::Torus => &TORUS,
            SurfaceKind::Disk => &DISK,
            SurfaceKind::Sphere => &SPHERE,
        }
    }

    pub fn name(self) -> &'static str {
        self.geometry().name()
    }
}

/// A surface together with the target space of functions on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub base: BaseSpace,
    pub target: TargetSpace,
}

impl Surface {
    pub fn new(kind: SurfaceKind, target: TargetSpace) -> Self {
        Surface {
            kind,
            base: kind.geometry().base(),
            target,
        }
    }

    /// Real-valued functions on the surface (circle-valued for the torus is
    /// chosen explicitly via [`Surface::new`]).
    pub fn real(kind: SurfaceKind) -> Self {
        Surface::new(kind, TargetSpace::RealLine)
    }

    pub fn geometry(&self) -> &'static dyn SurfaceGeometry {
        self.kind.geometry()
    }
}

/// Per-surface behavior used by validity checks, decomposition and fields.
pub trait SurfaceGeometry: Send + Sync {
    fn kind(&self) -> SurfaceKind;
    fn name(&self) -> &'static str;
    fn base(&self) -> BaseSpace;
    fn euler_characteristic(&self) -> i64;
    /// Isolated extrema this surface must carry (`chi(M)` many).
    fn extrema_locations(&self) -> &'static [ExtremumLocation];
    /// Base coordinates at which the profile derivative must not vanish,
    /// with a human-readable reason (boundary or isolated extremum image).
    fn regular_endpoints(&self) -> &'static [(f64, &'static str)];
    /// Number of boundary circles of the surface.
    fn boundary_components(&self) -> usize;
    /// Whether an orientation-reversing base reparametrization is a valid
    /// self-diffeomorphism (it is not on the disk: the center is a point
    /// fiber, the boundary a circle).
    fn allows_base_flip(&self) -> bool;
    /// Decomposition piece count for a given number of critical circles.
    fn expected_pieces(&self, circles: usize) -> usize;
}

macro_rules! geometry {
    ($ty:ident, $kind:expr, $name:expr, $base:expr, $chi:expr, $extrema:expr,
     $ends:expr, $boundaries:expr, $flip:expr, $pieces:expr) => {
        pub struct $ty;

        impl SurfaceGeometry for $ty {
            fn kind(&self) -> SurfaceKind {
                $kind
            }
            fn name(&self) -> &'static str {
                $name
            }
            fn base(&self) -> BaseSpace {
                $base
            }
            fn euler_characteristic(&self) -> i64 {
                $chi
            }
            fn extrema_locations(&self) -> &'static [ExtremumLocation] {
                $extrema
            }
            fn regular_endpoints(&self) -> &'static [(f64, &'static str)] {
                $ends
            }
            fn boundary_components(&self) -> usize {
                $boundaries
            }
            fn allows_base_flip(&self) -> bool {
                $flip
            }
            fn expected_pieces(&self, circles: usize) -> usize {
                let f: fn(usize) -> usize = $pieces;
                f(circles)
            }
        }
    };
}

geometry!(
    CylinderGeometry,
    SurfaceKind::Cylinder,
    "cylinder",
    BaseSpace::Interval,
    0,
    &[],
    &[(0.0, "boundary circle"), (1.0, "boundary circle")],
    2,
    true,
    |n| n + 1
);

geometry!(
    TorusGeometry,
    SurfaceKind::Torus,
    "torus",
    BaseSpace::Circle,
    0,
    &[],
    &[],
    0,
    true,
    |n| n.max(1)
);

geometry!(
    DiskGeometry,
    SurfaceKind::Disk,
    "disk",
    BaseSpace::Interval,
    1,
    &[ExtremumLocation::DiskCenter],
    &[(0.0, "isolated extremum (center)"), (1.0, "boundary circle")],
    1,
    false,
    |n| n + 1
);

geometry!(
    SphereGeometry,
    SurfaceKind::Sphere,
    "sphere",
    BaseSpace::Interval,
    2,
    &[
        ExtremumLocation::SphereSouth,
        ExtremumLocation::SphereNorth
    ],
    &[
        (0.0, "isolated extremum (south pole)"),
        (1.0, "isolated extremum (north pole)")
    ],
    0,
    true,
    |n| n + 1
);

pub static CYLINDER: CylinderGeometry = CylinderGeometry;
pub static TORUS: TorusGeometry = TorusGeometry;
pub static DISK: DiskGeometry = DiskGeometry;
pub static SPHERE: SphereGeometry = SphereGeometry;

/// All registered surface geometries.
pub fn registry() -> [&'static dyn SurfaceGeometry; 4] {
    [&CYLINDER, &TORUS, &DISK, &SPHERE]
}

/// Look a geometry up by its registered name.
pub fn by_name(name: &str) -> Result<&'static dyn SurfaceGeometry> {
    registry()
        .into_iter()
        .find(|g| g.name() == name)
        .ok_or_else(|| {
            Error::Validation(format!(
                "unknown surface '{name}' (expected cylinder, torus, disk or sphere)"
            ))
        })
}
