//! Detection and classification of the critical circles of a profile.
//!
//! A profile value depends only on the base coordinate, so every interior
//! root of the first derivative is a whole critical circle of the induced
//! function. Roots are located by a dense sign scan plus bisection (odd
//! multiplicity) and by a scan of the second derivative (even multiplicity),
//! then classified by the first non-vanishing exact derivative.

use crate::base::{bisect, wrap_unit, BaseSpace};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::records::{CriticalCircleRecord, ExtremalKind};
use crate::tolerances::{NONZERO_REL, ROOT_TOL, SCAN_POINTS, ZERO_REL};

/// Successive exact derivative profiles `[p, p', p'', ...]`. The declared
/// maximal derivative order bounds joint smoothness at knots; symbolic
/// derivatives of the pieces exist to any order, and classification happens
/// at points interior to pieces, so the chain keeps a floor of 8 levels.
fn derivative_chain(p: &Profile) -> Vec<Profile> {
    let kmax = p.max_derivative_order.max(8);
    let mut chain = Vec::with_capacity(kmax + 1);
    chain.push(p.clone());
    for k in 0..kmax {
        let next = chain[k].derivative_profile();
        chain.push(next);
    }
    chain
}

/// Order of the first derivative of `p` that is clearly nonzero at `t0`,
/// judged against the piece-local coefficient scale of that derivative:
/// `>= 1e-6 * scale` counts as nonzero, `<= 1e-9 * scale` as zero, and the
/// band in between is reported as ill-conditioned. A regular point has
/// order 1; all orders exhausted means the profile is flat at `t0`.
pub fn vanishing_order(p: &Profile, t0: f64) -> Result<usize> {
    order_from_chain(&derivative_chain(p), t0)
}

fn order_from_chain(chain: &[Profile], t0: f64) -> Result<usize> {
    for (k, dk) in chain.iter().enumerate().skip(1) {
        let v = dk.value(t0);
        let scale = dk.local_scale(t0);
        if v.abs() >= NONZERO_REL * scale {
            return Ok(k);
        }
        if v.abs() > ZERO_REL * scale {
            return Err(Error::Validation(format!(
                "derivative {k} at base {t0} is neither clearly zero nor clearly \
                 nonzero ({v:.3e} against scale {scale:.3e})"
            )));
        }
    }
    Err(Error::FlatProfile(format!(
        "all derivatives up to order {} vanish at base {t0}",
        chain.len() - 1
    )))
}

/// Scan a derivative profile on the uniform grid and collect its roots:
/// exact grid hits plus bisected sign changes.
fn scan_roots(d: &Profile) -> Vec<f64> {
    let n = SCAN_POINTS;
    let f = |t: f64| d.value(t);
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        vals.push(f(i as f64 / n as f64));
    }
    let mut roots = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        let t = i as f64 / n as f64;
        if v == 0.0 {
            roots.push(t);
        } else if i < n && v * vals[i + 1] < 0.0 {
            roots.push(bisect(&f, t, (i + 1) as f64 / n as f64, ROOT_TOL));
        }
    }
    roots
}

/// Half-width of the refinement window around a scanned root candidate:
/// slightly more than the scan spacing, so the true root always lies inside.
const REFINE_WINDOW: f64 = 1.5e-4;

/// Polish a root candidate of the first derivative.
///
/// Sign-based bisection of the first derivative stalls at the evaluation
/// noise floor: at a root of multiplicity `m` the achievable position error
/// is of order `(eps / |lead|)^(1/m)`, which for `m >= 3` is large enough to
/// corrupt the order classification (a higher derivative evaluated at the
/// offset position looks "clearly nonzero" one level too early). Walk up the
/// derivative chain instead: the first derivative that is clearly nonzero
/// across the whole window pins the previous one to a simple root, which
/// bisection then resolves to full precision. A candidate that refines onto
/// a nearby root of a *higher* derivative only (an inflection, not the
/// critical circle) is rejected by keeping whichever position makes the
/// first derivative smallest.
fn refine_root(chain: &[Profile], base: BaseSpace, r0: f64) -> f64 {
    let eval = |d: &Profile, t: f64| -> f64 {
        match base {
            BaseSpace::Circle => d.value(wrap_unit(t)),
            BaseSpace::Interval => d.value(t.clamp(0.0, 1.0)),
        }
    };
    let (lo, hi) = match base {
        BaseSpace::Circle => (r0 - REFINE_WINDOW, r0 + REFINE_WINDOW),
        BaseSpace::Interval => (
            (r0 - REFINE_WINDOW).max(0.0),
            (r0 + REFINE_WINDOW).min(1.0),
        ),
    };
    let mut best = r0;
    for k in 1..chain.len() - 1 {
        let dnext = &chain[k + 1];
        let (vlo, vhi) = (eval(dnext, lo), eval(dnext, hi));
        let thresh = NONZERO_REL * dnext.local_scale(wrap_unit(r0));
        if vlo.abs() >= thresh && vhi.abs() >= thresh {
            if vlo.signum() == vhi.signum() {
                // Nonzero across the window: `chain[k]` has a simple,
                // well-conditioned root here.
                let dk = &chain[k];
                if eval(dk, lo) * eval(dk, hi) <= 0.0 {
                    best = bisect(|t| eval(dk, t), lo, hi, ROOT_TOL);
                }
                break;
            }
            // The next derivative itself crosses zero: recenter on its root
            // and keep walking.
            best = bisect(|t| eval(dnext, t), lo, hi, ROOT_TOL);
        }
    }
    let d1 = &chain[1];
    if eval(d1, best).abs() <= eval(d1, r0).abs() {
        best
    } else {
        r0
    }
}

/// Relative floor for trusting the *sign* of a derivative value: absolute
/// Horner evaluation noise is a few machine epsilons times the coefficient
/// scale, so values above `1e-13 * scale` have reliable signs even when they
/// sit far below the (much more conservative) nonzero-classification
/// threshold.
const SIGN_FLOOR_REL: f64 = 1e-13;

/// Whether the derivative changes sign across the refinement window around
/// `r`, or `None` when either side is too close to the evaluation noise
/// floor to read a sign at all.
fn derivative_sign_flip(d1: &Profile, base: BaseSpace, r: f64) -> Option<bool> {
    let eval = |t: f64| -> f64 {
        match base {
            BaseSpace::Circle => d1.value(wrap_unit(t)),
            BaseSpace::Interval => d1.value(t.clamp(0.0, 1.0)),
        }
    };
    let floor = SIGN_FLOOR_REL * d1.local_scale(wrap_unit(r));
    let (vlo, vhi) = (eval(r - REFINE_WINDOW), eval(r + REFINE_WINDOW));
    if vlo.abs() <= floor || vhi.abs() <= floor {
        return None;
    }
    Some(vlo.signum() != vhi.signum())
}

/// Merge candidate roots closer than `tol` (cyclically on the circle) into
/// cluster means, and drop interval-endpoint hits, which are boundary
/// regularity matters rather than interior critical circles.
fn dedupe(mut cand: Vec<f64>, base: BaseSpace, tol: f64) -> Vec<f64> {
    if base == BaseSpace::Circle {
        for c in cand.iter_mut() {
            *c = wrap_unit(*c);
        }
    }
    cand.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cand.dedup_by(|a, b| {
        if (*a - *b).abs() <= tol {
            *b = 0.5 * (*a + *b);
            true
        } else {
            false
        }
    });
    if base == BaseSpace::Circle && cand.len() > 1 {
        let first = cand[0];
        let last = *cand.last().unwrap();
        if 1.0 - last + first <= tol {
            cand.pop();
            cand[0] = wrap_unit(0.5 * (first + last - 1.0));
        }
    }
    if base == BaseSpace::Interval {
        cand.retain(|&t| t > 1e-9 && t < 1.0 - 1e-9);
    }
    cand
}

/// Find every critical circle of `p` in the base interior, sorted by base
/// position, with vanishing order, extremality, and level.
///
/// Errors: `FlatProfile` when the derivative vanishes identically on a piece
/// or all derivatives vanish at a root; `Validation` when a derivative value
/// falls in the ill-conditioned band between the zero and nonzero
/// thresholds.
pub fn find_critical_points(p: &Profile) -> Result<Vec<CriticalCircleRecord>> {
    if p.has_non_finite() {
        return Err(Error::Validation(
            "profile has NaN or infinite coefficients".into(),
        ));
    }
    let chain = derivative_chain(p);
    let d1 = &chain[1];
    for piece in d1.pieces.iter() {
        if piece.is_identically_zero() {
            return Err(Error::FlatProfile(format!(
                "derivative vanishes identically on [{}, {}]",
                piece.domain()[0],
                piece.domain()[1]
            )));
        }
    }

    let mut cand = scan_roots(d1);
    // Even-multiplicity roots of the derivative do not change its sign; they
    // are isolated minima of |d1| and hence sign changes of the second
    // derivative where d1 itself is (clearly) zero.
    let d2 = &chain[2];
    for s in scan_roots(d2) {
        let v = d1.value(s);
        let scale = d1.local_scale(s);
        if v.abs() <= ZERO_REL * scale {
            cand.push(s);
        } else if v.abs() < NONZERO_REL * scale {
            return Err(Error::Validation(format!(
                "derivative at base {s} is neither clearly zero nor clearly \
                 nonzero ({v:.3e} against scale {scale:.3e})"
            )));
        }
    }

    let coarse = dedupe(cand, p.base, 1e-7);
    let refined: Vec<f64> = coarse
        .into_iter()
        .map(|r| refine_root(&chain, p.base, r))
        .collect();
    let roots = dedupe(refined, p.base, 1e-7);
    let mut records = Vec::with_capacity(roots.len());
    for r in roots {
        let mut order = order_from_chain(&chain, r)?;
        if order < 2 {
            // A scan artifact that classification rejects; skip it.
            continue;
        }
        // Coefficient rounding can split an exact multiple root of the
        // derivative into a tight cluster whose pointwise ladder reading
        // contradicts the observable sign behavior. Extremality is decided
        // by the sign change of the derivative, so when the signs across
        // the window are clearly readable and disagree with the ladder's
        // parity, shift the order by one.
        if let Some(flips) = derivative_sign_flip(d1, p.base, r) {
            if flips != (order % 2 == 0) && order + 1 < chain.len() {
                order += 1;
            }
        }
        let extremal = order % 2 == 0;
        let extremal_kind = if extremal {
            Some(if chain[order].value(r) > 0.0 {
                ExtremalKind::Minimum
            } else {
                ExtremalKind::Maximum
            })
        } else {
            None
        };
        records.push(CriticalCircleRecord {
            base_position: r,
            level: p.target_value(r),
            order,
            extremal,
            extremal_kind,
        });
    }
    records.sort_by(|a, b| a.base_position.partial_cmp(&b.base_position).unwrap());
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::TargetSpace;
    use crate::segment::Segment;

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn square_profile_has_one_minimum() {
        // (2t-1)^2 on the interval
        let p = Profile::poly(vec![1.0, -4.0, 4.0]);
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].base_position - 0.5).abs() < 1e-10);
        assert_eq!(r[0].order, 2);
        assert!(r[0].extremal);
        assert_eq!(r[0].extremal_kind, Some(ExtremalKind::Minimum));
        assert!(r[0].level.abs() < 1e-12);
    }

    #[test]
    fn cube_profile_has_one_non_extremal_circle() {
        // (2t-1)^3
        let p = Profile::poly(vec![-1.0, 6.0, -12.0, 8.0]);
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].base_position - 0.5).abs() < 1e-9);
        assert_eq!(r[0].order, 3);
        assert!(!r[0].extremal);
        assert_eq!(r[0].extremal_kind, None);
    }

    #[test]
    fn quartic_order_detected() {
        // (2t-1)^4: coefficients 1, -8, 24, -32, 16
        let p = Profile::poly(vec![1.0, -8.0, 24.0, -32.0, 16.0]);
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].order, 4);
        assert_eq!(r[0].extremal_kind, Some(ExtremalKind::Minimum));
        assert_eq!(vanishing_order(&p, 0.5).unwrap(), 4);
        assert_eq!(vanishing_order(&p, 0.25).unwrap(), 1);
    }

    #[test]
    fn cosine_on_circle_max_and_min() {
        let p = Profile::circle_trig(TargetSpace::RealLine, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r[0].base_position.abs() < 1e-10);
        assert_eq!(r[0].extremal_kind, Some(ExtremalKind::Maximum));
        assert!((r[0].level - 1.0).abs() < 1e-12);
        assert!((r[1].base_position - 0.5).abs() < 1e-10);
        assert_eq!(r[1].extremal_kind, Some(ExtremalKind::Minimum));
        assert!((r[1].level + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_one_circle_map_with_order_three_circle() {
        // t - sin(2 pi t)/(2 pi): circle-valued of degree 1, derivative
        // 1 - cos(2 pi t) vanishes to order 2 at t = 0.
        let p = Profile::circle_trig(TargetSpace::Circle, vec![1.0, 0.0, 0.0, -1.0 / TAU])
            .unwrap();
        assert_eq!(p.degree(), 1);
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].base_position.abs() < 1e-9, "pos {}", r[0].base_position);
        assert_eq!(r[0].order, 3);
        assert!(!r[0].extremal);
    }

    #[test]
    fn interior_order_three_on_interval() {
        // t + sin(2 pi t)/(2 pi): derivative 1 + cos(2 pi t), root at 0.5.
        let p = Profile {
            base: BaseSpace::Interval,
            target: TargetSpace::RealLine,
            pieces: vec![Segment::trig(vec![1.0, 0.0, 0.0, 1.0 / TAU], [0.0, 1.0])],
            max_derivative_order: 16,
        };
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].base_position - 0.5).abs() < 1e-9);
        assert_eq!(r[0].order, 3);
    }

    #[test]
    fn identity_profile_is_regular() {
        let p = Profile::identity();
        assert!(find_critical_points(&p).unwrap().is_empty());
    }

    #[test]
    fn constant_profile_is_flat() {
        let p = Profile::constant(0.7);
        assert!(matches!(
            find_critical_points(&p),
            Err(Error::FlatProfile(_))
        ));
    }

    #[test]
    fn near_degenerate_dip_is_reported_ill_conditioned() {
        // derivative (t-1/2)^2 + 1e-7: no root, but the dip falls in the
        // ambiguous band between the zero and nonzero thresholds.
        let p = Profile::poly(vec![0.0, 0.25 + 1e-7, -0.5, 1.0 / 3.0]);
        assert!(matches!(
            find_critical_points(&p),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn endpoint_roots_are_not_interior_circles() {
        // t^2: derivative 2t vanishes only at the interval endpoint.
        let p = Profile::poly(vec![0.0, 0.0, 1.0]);
        assert!(find_critical_points(&p).unwrap().is_empty());
    }

    #[test]
    fn two_separated_circles() {
        // derivative (t - 0.3)(t - 0.7), integral has a max then a min
        let p = Profile::poly(vec![0.0, 0.21, -0.5, 1.0 / 3.0]);
        let r = find_critical_points(&p).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].base_position - 0.3).abs() < 1e-9);
        assert_eq!(r[0].extremal_kind, Some(ExtremalKind::Maximum));
        assert!((r[1].base_position - 0.7).abs() < 1e-9);
        assert_eq!(r[1].extremal_kind, Some(ExtremalKind::Minimum));
    }
}
