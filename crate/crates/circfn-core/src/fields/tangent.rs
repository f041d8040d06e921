//! Nowhere-zero tangent fields in the fiber direction.
//!
//! A vertical field is described by its rotation coefficient `g(b)`: the
//! field moves the fiber over `b` at angular speed `g(b)` and never moves
//! the base. The glued construction takes the profile derivative away from
//! critical circles (sign-corrected per slice so it points one way) and
//! blends it into a constant rotation inside collars around the circles,
//! where the derivative vanishes. The result is smooth and nowhere zero.

use serde::{Deserialize, Serialize};

use crate::analysis::critical::find_critical_points;
use crate::base::{base_dist, BaseSpace};
use crate::bump::{BumpFunction, BumpWindow, Polarity};
use crate::combinatorics::validate_membership;
use crate::diffeo::DiffeoChain;
use crate::error::{Error, Result};
use crate::normal_form::NormalForm;
use crate::profile::Profile;
use crate::records::ExtremumLocation;
use crate::surface::Surface;
use crate::tolerances::{COLLAR, SCAN_POINTS};

/// Data of the glued coefficient, in profile coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HFieldData {
    /// Negated profile derivative.
    pub neg_derivative: Profile,
    /// Critical circle positions, ascending.
    pub positions: Vec<f64>,
    /// Sign correction per slice between circles. On an interval base
    /// slice `j` lies left of `positions[j]` (so there are `n + 1`); on a
    /// circle base slice `j` follows `positions[j]` cyclically (`n`, or a
    /// single slice when there are no circles).
    pub slice_signs: Vec<f64>,
    /// Constant rotation sign inside the collar around each circle.
    pub collar_signs: Vec<f64>,
    /// Exactly 0 within `v_radius` of each circle, exactly 1 beyond
    /// `w_radius`.
    pub alpha: BumpFunction,
    pub v_radius: f64,
    pub w_radius: f64,
    pub base: BaseSpace,
}

impl HFieldData {
    fn slice_sign_at(&self, b: f64) -> f64 {
        let n = self.positions.len();
        match self.base {
            BaseSpace::Interval => {
                let j = self.positions.iter().filter(|&&p| p < b).count();
                self.slice_signs[j.min(n)]
            }
            BaseSpace::Circle => {
                if n == 0 {
                    return self.slice_signs[0];
                }
                let j = match self.positions.iter().rposition(|&p| p <= b) {
                    Some(j) => j,
                    None => n - 1, // before the first circle: the wrap slice
                };
                self.slice_signs[j]
            }
        }
    }

    fn collar_term(&self, b: f64) -> f64 {
        for (i, &p) in self.positions.iter().enumerate() {
            if base_dist(self.base, b, p) <= self.w_radius {
                return self.collar_signs[i];
            }
        }
        0.0
    }

    pub fn eval(&self, b: f64) -> f64 {
        let a = self.alpha.value(b);
        let ham = if a == 0.0 {
            0.0
        } else {
            a * self.slice_sign_at(b) * self.neg_derivative.value(b)
        };
        let zeta = if a == 1.0 {
            0.0
        } else {
            (1.0 - a) * self.collar_term(b)
        };
        ham + zeta
    }
}

/// How a field coefficient is represented.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldCoeff {
    /// A plain profile of the base coordinate.
    Exact { profile: Profile },
    /// The glued nowhere-zero construction.
    Glued { data: HFieldData },
    /// A coefficient transported through a fiber-preserving chain. With
    /// `jacobian` the inverse base derivative multiplies in (the rule for
    /// a derivative-of-the-function coefficient); without it the value is
    /// carried over unchanged (the rule for a rotation speed).
    Pushforward {
        inner: Box<FieldCoeff>,
        chain: DiffeoChain,
        jacobian: bool,
    },
}

impl FieldCoeff {
    pub fn value(&self, b: f64) -> f64 {
        match self {
            FieldCoeff::Exact { profile } => profile.value(b),
            FieldCoeff::Glued { data } => data.eval(b),
            FieldCoeff::Pushforward {
                inner,
                chain,
                jacobian,
            } => {
                let t = chain.base_inverse(b);
                let v = inner.value(t);
                if *jacobian {
                    v / chain.base_forward_derivative(t)
                } else {
                    v
                }
            }
        }
    }
}

/// A vertical tangent field on a surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangentField {
    pub surface: Surface,
    pub coeff: FieldCoeff,
    /// Point fibers where the field vector has zero length even though the
    /// rotation coefficient does not vanish.
    pub singular_extrema: Vec<ExtremumLocation>,
    /// Whether the coefficient has been normalized to unit rotation speed.
    pub normalized: bool,
}

impl TangentField {
    pub fn coefficient(&self, b: f64) -> f64 {
        self.coeff.value(b)
    }

    /// `(b, g(b))` pairs on a uniform grid.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|i| {
                let b = i as f64 / n as f64;
                (b, self.coefficient(b))
            })
            .collect()
    }

    pub fn min_abs_on_scan(&self, n: usize) -> f64 {
        self.sample(n)
            .into_iter()
            .map(|(_, g)| g.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Gaps between consecutive circles, including the interval endpoints on
/// interval bases and the wrap gap on circle bases.
fn min_gap(base: BaseSpace, positions: &[f64]) -> f64 {
    let n = positions.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let mut m = f64::INFINITY;
    for w in positions.windows(2) {
        m = m.min(w[1] - w[0]);
    }
    match base {
        BaseSpace::Interval => m.min(positions[0]).min(1.0 - positions[n - 1]),
        BaseSpace::Circle => {
            if n == 1 {
                1.0
            } else {
                m.min(positions[0] + 1.0 - positions[n - 1])
            }
        }
    }
}

fn collar_windows(base: BaseSpace, positions: &[f64], v: f64, w: f64) -> Result<BumpFunction> {
    let windows = positions
        .iter()
        .map(|&p| {
            let wrap = |x: f64| match base {
                BaseSpace::Circle => x.rem_euclid(1.0),
                BaseSpace::Interval => x,
            };
            BumpWindow {
                support: [wrap(p - w), wrap(p + w)],
                plateau: [wrap(p - v), wrap(p + v)],
            }
        })
        .collect();
    BumpFunction::new(base, windows, Polarity::ZeroInsideOneOutside)
}

/// Collar radii with comfortable margins for a normal form's circles.
pub fn suggest_radii(nf: &NormalForm) -> Result<(f64, f64)> {
    let records = find_critical_points(&nf.profile)?;
    let positions: Vec<f64> = records.iter().map(|r| r.base_position).collect();
    let gap = min_gap(nf.profile.base, &positions);
    if gap.is_infinite() {
        return Ok(COLLAR);
    }
    Ok((gap / 6.0, gap / 3.0))
}

/// Build the glued nowhere-zero vertical field for a valid normal form.
/// `v` and `w` are the inner and outer collar radii around each critical
/// circle; both must fit twice into every gap between circles.
pub fn build_h_field(nf: &NormalForm, v: f64, w: f64) -> Result<TangentField> {
    let membership = validate_membership(&nf.profile, nf.surface.kind)?;
    if !membership.valid {
        return Err(Error::Validation(format!(
            "profile is not a valid normal form on the {}: {}",
            nf.surface.kind.name(),
            membership.violations.join("; ")
        )));
    }
    let records = find_critical_points(&nf.profile)?;
    let positions: Vec<f64> = records.iter().map(|r| r.base_position).collect();
    let n = positions.len();
    let base = nf.profile.base;

    let gap = min_gap(base, &positions);
    if !(v > 0.0 && w > v) {
        return Err(Error::Gap(format!(
            "collar radii must satisfy 0 < v < w, got v = {v}, w = {w}"
        )));
    }
    if w >= 0.5 * gap {
        return Err(Error::Gap(format!(
            "outer collar radius {w} reaches past the midpoint of the smallest \
             gap {gap} between circles"
        )));
    }

    let neg_derivative = nf.profile.derivative_profile().scaled(-1.0);

    // probe the slice midpoints for the sign correction
    let mut slice_signs = Vec::new();
    match base {
        BaseSpace::Interval => {
            let mut cuts = Vec::with_capacity(n + 2);
            cuts.push(0.0);
            cuts.extend(positions.iter().copied());
            cuts.push(1.0);
            for j in 0..=n {
                let mid = 0.5 * (cuts[j] + cuts[j + 1]);
                slice_signs.push(neg_derivative.value(mid).signum());
            }
        }
        BaseSpace::Circle => {
            if n == 0 {
                slice_signs.push(neg_derivative.value(0.5).signum());
            } else {
                for j in 0..n {
                    let a = positions[j];
                    let b = if j + 1 < n {
                        positions[j + 1]
                    } else {
                        positions[0] + 1.0
                    };
                    let mid = (0.5 * (a + b)).rem_euclid(1.0);
                    slice_signs.push(neg_derivative.value(mid).signum());
                }
            }
        }
    }

    let alpha = collar_windows(base, &positions, v, w)?;

    // the collar rotation must agree in sign with the corrected derivative
    // on both side collars; probing one side suffices because the slice
    // correction flips exactly where the derivative does
    let data_probe = HFieldData {
        neg_derivative: neg_derivative.clone(),
        positions: positions.clone(),
        slice_signs: slice_signs.clone(),
        collar_signs: vec![0.0; n],
        alpha: alpha.clone(),
        v_radius: v,
        w_radius: w,
        base,
    };
    let collar_signs: Vec<f64> = positions
        .iter()
        .map(|&p| {
            let probe = match base {
                BaseSpace::Circle => (p + 0.5 * (v + w)).rem_euclid(1.0),
                BaseSpace::Interval => p + 0.5 * (v + w),
            };
            (data_probe.slice_sign_at(probe) * neg_derivative.value(probe)).signum()
        })
        .collect();

    let data = HFieldData {
        neg_derivative,
        positions,
        slice_signs,
        collar_signs,
        alpha,
        v_radius: v,
        w_radius: w,
        base,
    };

    // construction-time audit: the glued coefficient must be bounded away
    // from zero everywhere
    let mut min_abs = f64::INFINITY;
    for i in 0..=SCAN_POINTS {
        let b = i as f64 / SCAN_POINTS as f64;
        min_abs = min_abs.min(data.eval(b).abs());
    }
    if !(min_abs > 1e-9) {
        return Err(Error::NotHField(format!(
            "glued coefficient dips to {min_abs:.3e} on the scan grid"
        )));
    }

    let coeff = if nf.chain.is_base_trivial() {
        FieldCoeff::Glued { data }
    } else {
        FieldCoeff::Pushforward {
            inner: Box::new(FieldCoeff::Glued { data }),
            chain: nf.chain.clone(),
            jacobian: false,
        }
    };
    Ok(TangentField {
        surface: nf.surface,
        coeff,
        singular_extrema: nf.surface.geometry().extrema_locations().to_vec(),
        normalized: false,
    })
}

/// The derivative coefficient of the function itself: vanishes on critical
/// circles, transported with the inverse-jacobian rule through the chain.
pub fn hamiltonian_field(nf: &NormalForm) -> TangentField {
    let neg = nf.profile.derivative_profile().scaled(-1.0);
    let inner = FieldCoeff::Exact { profile: neg };
    let coeff = if nf.chain.is_base_trivial() {
        inner
    } else {
        FieldCoeff::Pushforward {
            inner: Box::new(inner),
            chain: nf.chain.clone(),
            jacobian: true,
        }
    };
    TangentField {
        surface: nf.surface,
        coeff,
        singular_extrema: nf.surface.geometry().extrema_locations().to_vec(),
        normalized: false,
    }
}

/// Rescale a nowhere-zero field to unit rotation speed. The coefficient of
/// a nowhere-zero vertical field has a constant sign, so the normalized
/// coefficient is the constant `+1` or `-1`.
pub fn normalize_period(field: &TangentField) -> Result<TangentField> {
    let mut min_abs = f64::INFINITY;
    let mut sign = 0.0;
    for i in 0..=SCAN_POINTS {
        let b = i as f64 / SCAN_POINTS as f64;
        let g = field.coefficient(b);
        min_abs = min_abs.min(g.abs());
        if sign == 0.0 {
            sign = g.signum();
        } else if g.signum() != sign {
            return Err(Error::NotHField(
                "coefficient changes sign; the field has a zero".into(),
            ));
        }
    }
    if !(min_abs > 1e-9) {
        return Err(Error::NotHField(format!(
            "coefficient dips to {min_abs:.3e}; cannot normalize a vanishing field"
        )));
    }
    Ok(TangentField {
        surface: field.surface,
        coeff: FieldCoeff::Exact {
            profile: Profile::constant(sign),
        },
        singular_extrema: field.singular_extrema.clone(),
        normalized: true,
    })
}
