//! Membership checks for profiles: finitely many non-flat critical circles
//! in the interior, and a non-degenerate derivative at the distinguished
//! base endpoints of the surface (boundary circles and poles).

use serde::{Deserialize, Serialize};

use crate::analysis::critical::find_critical_points;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::records::CriticalCircleRecord;
use crate::surface::{Surface, SurfaceKind};
use crate::tolerances::NONZERO_REL;

/// Outcome of the profile validity checks. `condition_a` is interior
/// non-flatness (finitely many critical circles, all of finite order);
/// `condition_b` is endpoint regularity (nonzero derivative at boundary
/// circles and poles). Violations carry human-readable diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidityReport {
    pub surface: SurfaceKind,
    pub condition_a: bool,
    pub condition_b: bool,
    pub valid: bool,
    pub violations: Vec<String>,
    /// Critical circles found in the interior (present when `condition_a`).
    pub records: Vec<CriticalCircleRecord>,
}

/// Check a profile against a surface: interior critical circles must be
/// detectable and of finite order, and the derivative must be clearly
/// nonzero at every distinguished endpoint of the base.
///
/// Returns a report; hard errors are reserved for structurally unusable
/// input (NaN or infinite coefficients, base or target mismatch).
pub fn validate_profile(p: &Profile, kind: SurfaceKind) -> Result<ValidityReport> {
    if p.has_non_finite() {
        return Err(Error::Validation(
            "profile has NaN or infinite coefficients".into(),
        ));
    }
    if p.target == crate::base::TargetSpace::Circle && kind != SurfaceKind::Torus {
        return Err(Error::Validation(format!(
            "circle-valued profiles only exist on the torus, not the {}",
            kind.name()
        )));
    }
    let surface = Surface::new(kind, p.target);
    if p.base != surface.base {
        return Err(Error::Validation(format!(
            "profile base {:?} does not match the {} base {:?}",
            p.base,
            kind.name(),
            surface.base
        )));
    }

    let mut violations = Vec::new();
    let (condition_a, records) = match find_critical_points(p) {
        Ok(r) => (true, r),
        Err(e) => {
            violations.push(format!("interior critical set: {e}"));
            (false, Vec::new())
        }
    };

    let d1 = p.derivative_profile();
    let mut condition_b = true;
    for &(coord, label) in kind.geometry().regular_endpoints() {
        let v = d1.value(coord);
        let scale = d1.local_scale(coord);
        if v.abs() < NONZERO_REL * scale {
            condition_b = false;
            violations.push(format!(
                "derivative is not clearly nonzero at the {label} (base {coord}): \
                 {v:.3e} against scale {scale:.3e}"
            ));
        }
    }

    Ok(ValidityReport {
        surface: kind,
        condition_a,
        condition_b,
        valid: condition_a && condition_b,
        violations,
        records,
    })
}
