//! Degeneracy removal: replace every critical circle of order above 2 by a
//! window carrying a quintic that matches the 2-jets of the profile at the
//! window ends, perturbed when necessary so only order-2 circles remain.

use crate::analysis::critical::find_critical_points;
use crate::analysis::interp::hermite_quintic;
use crate::base::{circle_dist, BaseSpace};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::records::CriticalCircleRecord;
use crate::segment::{poly_add, poly_mul, poly_compose_affine, Segment};

const MIN_RADIUS: f64 = 0.02;
const MAX_RADIUS: f64 = 0.2;

/// Distance from `t` to the closed interval `[a, b]`; on the circle a keep
/// interval with `a > b` wraps through 0.
fn keep_distance(t: f64, k: [f64; 2], base: BaseSpace) -> f64 {
    let [a, b] = k;
    match base {
        BaseSpace::Interval => {
            if t < a {
                a - t
            } else if t > b {
                t - b
            } else {
                0.0
            }
        }
        BaseSpace::Circle => {
            let inside = if a <= b {
                (a..=b).contains(&t)
            } else {
                t >= a || t <= b
            };
            if inside {
                0.0
            } else {
                circle_dist(t, a).min(circle_dist(t, b))
            }
        }
    }
}

/// Pick a replacement radius around `t0`: clear of other critical circles,
/// keep intervals, and (on the interval) the base endpoints.
fn window_radius(
    t0: f64,
    records: &[CriticalCircleRecord],
    keep: &[[f64; 2]],
    base: BaseSpace,
) -> Result<f64> {
    let mut r = MAX_RADIUS;
    for rec in records {
        if rec.base_position == t0 {
            continue;
        }
        let d = match base {
            BaseSpace::Interval => (rec.base_position - t0).abs(),
            BaseSpace::Circle => circle_dist(rec.base_position, t0),
        };
        r = r.min(d / 2.2);
    }
    for k in keep {
        r = r.min(0.9 * keep_distance(t0, *k, base));
    }
    if base == BaseSpace::Interval {
        r = r.min(0.9 * t0).min(0.9 * (1.0 - t0));
    }
    if r < MIN_RADIUS {
        return Err(Error::Morsify(format!(
            "no room for a replacement window around base {t0} (radius {r:.4})"
        )));
    }
    Ok(r)
}

/// Evaluate profile lift data at an unwrapped coordinate `x` in `[-1, 2]`:
/// on the circle the lift continues across 0 and 1 by the integer jump.
fn lift_jet(p: &Profile, x: f64, jump: f64) -> (f64, f64, f64) {
    let (t, off) = if x < 0.0 {
        (x + 1.0, -jump)
    } else if x > 1.0 {
        (x - 1.0, jump)
    } else {
        (x, 0.0)
    };
    (
        p.value(t) + off,
        p.derivative_value(t, 1),
        p.derivative_value(t, 2),
    )
}

/// Splice the polynomial `q` (in the unwrapped coordinate over
/// `[t0 - r, t0 + r]`) into the profile, splitting at the circle origin when
/// the window wraps.
fn splice(p: &Profile, t0: f64, r: f64, q: &[f64], jump: f64) -> Result<Profile> {
    let (lo, hi) = (t0 - r, t0 + r);
    if lo >= 0.0 && hi <= 1.0 {
        return p.window_replace(lo, hi, vec![Segment::poly(q.to_vec(), [lo, hi])]);
    }
    if p.base != BaseSpace::Circle {
        return Err(Error::Morsify(format!(
            "window [{lo}, {hi}] escapes the interval base"
        )));
    }
    // The window wraps through 0, so both split parts must be spliced in a
    // single rebuild; replacing one at a time would break circle closure.
    let (first, first_dom, second, second_dom, mid) = if lo < 0.0 {
        // low part on [0, hi] is q(t); high part on [lo+1, 1] is q(t-1)+jump
        let mut a = poly_compose_affine(q, -1.0, 1.0);
        if !a.is_empty() {
            a[0] += jump;
        }
        (q.to_vec(), [0.0, hi], a, [lo + 1.0, 1.0], (hi, lo + 1.0))
    } else {
        // hi > 1: low part on [0, hi-1] is q(t+1)-jump; high part is q(t)
        let mut b = poly_compose_affine(q, 1.0, 1.0);
        if !b.is_empty() {
            b[0] -= jump;
        }
        (b, [0.0, hi - 1.0], q.to_vec(), [lo, 1.0], (hi - 1.0, lo))
    };
    let mut pieces = vec![Segment::poly(first, first_dom)];
    pieces.extend(p.segments_on(mid.0, mid.1));
    pieces.push(Segment::poly(second, second_dom));
    let mut out = Profile::new(p.base, p.target, pieces)?;
    out.max_derivative_order = 2;
    Ok(out)
}

/// `((x - t0)^2 - r^2)^3`: vanishes to third order at both window ends, so
/// adding a multiple of it preserves the glued 2-jets.
fn bump_sextic(t0: f64, r: f64) -> Vec<f64> {
    let w = vec![t0 * t0 - r * r, -2.0 * t0, 1.0];
    poly_mul(&poly_mul(&w, &w), &w)
}

fn inside_window(t: f64, t0: f64, r: f64, base: BaseSpace) -> bool {
    match base {
        BaseSpace::Interval => (t - t0).abs() <= r + 1e-9,
        BaseSpace::Circle => circle_dist(t, t0) <= r + 1e-9,
    }
}

/// Check a replacement outcome: detection succeeds, circles inside the
/// already-processed windows have order 2, and records away from those
/// windows are unchanged (degenerate circles awaiting their own window
/// included).
fn check_replacement(
    new: &Profile,
    original: &[CriticalCircleRecord],
    windows: &[(f64, f64)],
) -> bool {
    let found = match find_critical_points(new) {
        Ok(f) => f,
        Err(_) => return false,
    };
    let in_windows = |t: f64| {
        windows
            .iter()
            .any(|&(t0, r)| inside_window(t, t0, r, new.base))
    };
    if found
        .iter()
        .any(|r| in_windows(r.base_position) && r.order != 2)
    {
        return false;
    }
    // Records outside every window must survive unchanged.
    for orig in original.iter().filter(|o| !in_windows(o.base_position)) {
        if !found.iter().any(|f| {
            (f.base_position - orig.base_position).abs() < 1e-6 && f.order == orig.order
        }) {
            return false;
        }
    }
    // No stray circles outside the windows beyond the original ones.
    for f in found.iter().filter(|f| !in_windows(f.base_position)) {
        if !original
            .iter()
            .any(|o| (f.base_position - o.base_position).abs() < 1e-6)
        {
            return false;
        }
    }
    true
}

/// Replace every critical circle of order above 2 by an order-2 model while
/// leaving the profile bit-identical on each `keep` interval.
///
/// A profile already free of degenerate circles is returned as-is, so the
/// operation is idempotent. Fails with `Morsify` when a degenerate circle
/// lies inside a keep interval, when there is no room for a replacement
/// window, or when no perturbation yields a clean outcome.
pub fn morsify(p: &Profile, keep: &[[f64; 2]]) -> Result<Profile> {
    for k in keep {
        if !(k[0] <= k[1]) && p.base == BaseSpace::Interval {
            return Err(Error::Domain(format!(
                "keep interval [{}, {}] is reversed",
                k[0], k[1]
            )));
        }
        if k[0] < -1e-12 || k[1] > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "keep interval [{}, {}] escapes the base",
                k[0], k[1]
            )));
        }
    }
    let records = find_critical_points(p)?;
    let degenerate: Vec<&CriticalCircleRecord> =
        records.iter().filter(|r| r.order > 2).collect();
    if degenerate.is_empty() {
        return Ok(p.clone());
    }
    for d in &degenerate {
        if keep
            .iter()
            .any(|k| keep_distance(d.base_position, *k, p.base) == 0.0)
        {
            return Err(Error::Morsify(format!(
                "degenerate circle at base {} lies inside a keep interval",
                d.base_position
            )));
        }
    }

    let jump = (p.lift_value(1.0) - p.lift_value(0.0)).round();
    let mut current = p.clone();
    let mut windows: Vec<(f64, f64)> = Vec::new();
    for d in &degenerate {
        let t0 = d.base_position;
        let r = window_radius(t0, &records, keep, p.base)?;
        windows.push((t0, r));
        let left = lift_jet(&current, t0 - r, jump);
        let right = lift_jet(&current, t0 + r, jump);
        let quintic = hermite_quintic(t0 - r, t0 + r, left, right)?;
        let center = lift_jet(&current, t0, jump).0;
        let height = (left.0 - center).abs().max((right.0 - center).abs());
        let eps_base = 0.5 * height.max(1e-6 * current.local_scale(t0)) / r.powi(6);
        let kind_sign = if d.order % 2 == 0 {
            current.derivative_value(t0, d.order).signum()
        } else {
            1.0
        };

        let mut done = None;
        'search: for k in 0..6 {
            let magnitude = eps_base * 10f64.powi(-k);
            for sign in [kind_sign, -kind_sign] {
                let eps = sign * magnitude;
                let mut bump = bump_sextic(t0, r);
                for c in bump.iter_mut() {
                    *c *= eps;
                }
                let q = poly_add(&quintic, &bump);
                let candidate = splice(&current, t0, r, &q, jump)?;
                if check_replacement(&candidate, &records, &windows) {
                    done = Some(candidate);
                    break 'search;
                }
                if d.order % 2 != 0 {
                    // for odd orders both signs are tried; for even orders
                    // only the kind-preserving one
                    continue;
                }
                break;
            }
            // also try the unperturbed quintic once, cheapest first
            if k == 0 {
                let candidate = splice(&current, t0, r, &quintic, jump)?;
                if check_replacement(&candidate, &records, &windows) {
                    done = Some(candidate);
                    break 'search;
                }
            }
        }
        current = done.ok_or_else(|| {
            Error::Morsify(format!(
                "no perturbation cleaned the window around base {t0}"
            ))
        })?;
    }

    let final_records = find_critical_points(&current)?;
    if let Some(bad) = final_records.iter().find(|r| r.order != 2) {
        return Err(Error::Morsify(format!(
            "an order-{} circle at base {} survived degeneracy removal",
            bad.order, bad.base_position
        )));
    }
    Ok(current)
}
