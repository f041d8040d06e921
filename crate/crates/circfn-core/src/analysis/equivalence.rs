//! Equivalence of profiles with witness construction.
//!
//! Two profiles are compared as `q = ell ∘ p ∘ beta` with `beta` a diffeo of
//! the base and `ell` a diffeo of the level space. Modes: `Right` fixes
//! `ell = id`; `LeftRight` demands matching vanishing orders; `Topological`
//! only matches the extremal pattern. A positive decision carries both
//! witnesses: `beta` as a profile on the base, `ell` as a profile with its
//! level-domain frame.

use serde::{Deserialize, Serialize};

use crate::analysis::critical::find_critical_points;
use crate::analysis::interp::{hermite_cubic_segments, monotone_cubic_segments};
use crate::base::{bisect, circle_signed_delta, wrap_unit, BaseSpace, TargetSpace};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::records::CriticalCircleRecord;
use crate::surface::SurfaceKind;
use crate::tolerances::WITNESS_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalenceMode {
    /// `q = p ∘ beta`: base diffeos only, levels must match numerically.
    Right,
    /// `q = ell ∘ p ∘ beta`: orders must match, levels up to a monotone map.
    LeftRight,
    /// Like `LeftRight` but only the extremal pattern matters, not orders.
    Topological,
}

/// The level-space witness: a monotone map defined on the level range of
/// the left profile. For real targets `domain` is that range and `map` is
/// its affine reparametrization to `[0, 1]`; for circle targets `map` is a
/// degree-`±1` circle profile anchored at `domain[0]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelWitness {
    pub map: Profile,
    pub domain: [f64; 2],
}

impl LevelWitness {
    fn identity(domain: [f64; 2]) -> LevelWitness {
        LevelWitness {
            map: Profile::poly(vec![domain[0], domain[1] - domain[0]]),
            domain,
        }
    }

    fn circle_identity(flip: f64) -> LevelWitness {
        let mut map = Profile::poly(vec![0.0, flip]);
        map.base = BaseSpace::Circle;
        map.target = TargetSpace::Circle;
        LevelWitness {
            map,
            domain: [0.0, 1.0],
        }
    }

    fn is_circle(&self) -> bool {
        self.map.target == TargetSpace::Circle
    }

    /// Apply the witness to a level value (lift-valued for circle maps).
    pub fn apply_lift(&self, v: f64) -> f64 {
        if self.is_circle() {
            let u = v - self.domain[0];
            let k = u.floor();
            let jump = self.map.lift_value(1.0) - self.map.lift_value(0.0);
            self.map.lift_value(u - k) + jump * k
        } else {
            let w = (self.domain[1] - self.domain[0]).max(1e-300);
            let u = ((v - self.domain[0]) / w).clamp(0.0, 1.0);
            self.map.value(u)
        }
    }

    /// Apply and reduce into the target (mod 1 for circle maps).
    pub fn apply(&self, v: f64) -> f64 {
        if self.is_circle() {
            wrap_unit(self.apply_lift(v))
        } else {
            self.apply_lift(v)
        }
    }

    /// Slope of the lift at a domain value.
    fn derivative_lift(&self, v: f64) -> f64 {
        if self.is_circle() {
            let u = v - self.domain[0];
            self.map.derivative_value(u - u.floor(), 1)
        } else {
            let w = (self.domain[1] - self.domain[0]).max(1e-300);
            let u = ((v - self.domain[0]) / w).clamp(0.0, 1.0);
            self.map.derivative_value(u, 1) / w
        }
    }

    /// Invert the (monotone) witness on its lift.
    fn invert_lift(&self, w: f64) -> f64 {
        if self.is_circle() {
            let jump = self.map.lift_value(1.0) - self.map.lift_value(0.0); // ±1
            let w0 = self.map.lift_value(0.0);
            let k = ((w - w0) / jump).floor();
            let target = w - jump * k;
            let f = |u: f64| self.map.lift_value(u) - target;
            let u = if f(0.0) == 0.0 {
                0.0
            } else if f(1.0) == 0.0 {
                1.0
            } else {
                bisect(&f, 0.0, 1.0, 1e-14)
            };
            self.domain[0] + u + k
        } else {
            let lo = self.map.value(0.0);
            let hi = self.map.value(1.0);
            let target = w.clamp(lo.min(hi), lo.max(hi));
            let f = |u: f64| self.map.value(u) - target;
            let u = bisect(&f, 0.0, 1.0, 1e-14);
            self.domain[0] + u * (self.domain[1] - self.domain[0])
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceDecision {
    pub equivalent: bool,
    pub mode: EquivalenceMode,
    /// First mismatching invariant when negative; a summary when positive.
    pub reason: String,
    /// `beta`: base diffeo with `q = ell ∘ p ∘ beta` (present when positive).
    pub base_witness: Option<Profile>,
    pub level_witness: Option<LevelWitness>,
}

/// Maximum of `|q(t) - ell(p(beta(t)))|` over a sample grid (wrapped
/// distance for circle targets). `None` when the decision has no witnesses.
pub fn witness_defect(
    p: &Profile,
    q: &Profile,
    d: &EquivalenceDecision,
    samples: usize,
) -> Option<f64> {
    let beta = d.base_witness.as_ref()?;
    let ell = d.level_witness.as_ref()?;
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        let x = beta.target_value(t);
        let through = ell.apply(p.target_value(x));
        let direct = q.target_value(t);
        let err = match q.target {
            TargetSpace::Circle => circle_signed_delta(direct, through).abs(),
            TargetSpace::RealLine => (direct - through).abs(),
        };
        worst = worst.max(err);
    }
    Some(worst)
}

struct Plan {
    /// base orientation: +1 keeps, -1 reverses
    sb: f64,
    /// level orientation
    sl: f64,
    /// cyclic record offset (circle base only)
    offset: usize,
}

/// Index of the left-profile record matched to right-profile record `j`.
fn matched_index(plan: &Plan, j: usize, m: usize) -> usize {
    if plan.sb > 0.0 {
        (j + plan.offset) % m
    } else {
        (plan.offset + m - j % m) % m
    }
}

enum PlanFail {
    Mismatch(String),
    Hard(Error),
}

impl From<Error> for PlanFail {
    fn from(e: Error) -> Self {
        PlanFail::Hard(e)
    }
}

fn check_records(
    rp: &[CriticalCircleRecord],
    rq: &[CriticalCircleRecord],
    plan: &Plan,
    mode: EquivalenceMode,
) -> std::result::Result<(), String> {
    let m = rp.len();
    for (j, cq) in rq.iter().enumerate() {
        let cp = &rp[matched_index(plan, j, m)];
        match mode {
            EquivalenceMode::Right | EquivalenceMode::LeftRight => {
                if cp.order != cq.order {
                    return Err(format!(
                        "matched circles have different vanishing orders ({} vs {})",
                        cp.order, cq.order
                    ));
                }
            }
            EquivalenceMode::Topological => {
                if cp.extremal != cq.extremal {
                    return Err("matched circles differ in extremality".into());
                }
            }
        }
        if cp.extremal {
            let expect = if plan.sl > 0.0 {
                cp.extremal_kind
            } else {
                cp.extremal_kind.map(|k| k.flipped())
            };
            if expect != cq.extremal_kind {
                return Err("matched extremal circles have incompatible kinds".into());
            }
        }
    }
    Ok(())
}

/// Pairwise order-isomorphism of two matched level sequences.
fn order_isomorphic(
    ps: &[f64],
    qs: &[f64],
    sl: f64,
    tol: f64,
) -> std::result::Result<(), String> {
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let dp = ps[i] - ps[j];
            let dq = qs[i] - qs[j];
            let zp = dp.abs() <= tol;
            let zq = dq.abs() <= tol;
            if zp != zq {
                return Err(format!(
                    "levels collide on one side only ({:.6} vs {:.6} against {:.6} vs {:.6})",
                    ps[i], ps[j], qs[i], qs[j]
                ));
            }
            if !zp && (dp.signum() != sl * dq.signum()) {
                return Err("levels are ordered incompatibly".into());
            }
        }
    }
    Ok(())
}

fn require_equal(
    ps: &[f64],
    qs: &[f64],
    tol: f64,
    circle: bool,
) -> std::result::Result<(), String> {
    for (a, b) in ps.iter().zip(qs) {
        let d = if circle {
            circle_signed_delta(*a, *b).abs()
        } else {
            (a - b).abs()
        };
        if d > tol {
            return Err(format!("levels differ ({a:.9} vs {b:.9})"));
        }
    }
    Ok(())
}

/// Lift value of a profile at an unbounded coordinate: the circle-base lift
/// continues by the closure jump; interval coordinates clamp.
fn lift_at(p: &Profile, x: f64) -> f64 {
    match p.base {
        BaseSpace::Interval => p.value(x),
        BaseSpace::Circle => {
            let k = x.floor();
            let jump = p.lift_value(1.0) - p.lift_value(0.0);
            p.lift_value(x - k) + jump * k
        }
    }
}

/// Monotone span structure for building `beta`: a right-profile span with
/// its matched left-profile bracket, all in unwrapped coordinates. The
/// bracket may extend past the span (for spans clipped at the walk
/// boundary); `pin0`/`pin1` mark boundary knots whose left position is the
/// bracket end exactly instead of a pointwise solve.
struct Span {
    t0: f64,
    t1: f64,
    x0: f64,
    x1: f64,
    pin0: bool,
    pin1: bool,
}

/// Solve `lift_at(p, x) = w` on `[lo, hi]` (monotone there).
fn solve_on(p: &Profile, lo: f64, hi: f64, w: f64) -> f64 {
    let a = lift_at(p, lo);
    let b = lift_at(p, hi);
    let w = w.clamp(a.min(b), a.max(b));
    if w == a {
        return lo;
    }
    if w == b {
        return hi;
    }
    bisect(&|x: f64| lift_at(p, x) - w, lo, hi, 1e-14)
}

/// First derivative at an unbounded base coordinate.
fn d1_at(p: &Profile, x: f64) -> f64 {
    match p.base {
        BaseSpace::Interval => p.derivative_value(x.clamp(0.0, 1.0), 1),
        BaseSpace::Circle => p.derivative_value(x - x.floor(), 1),
    }
}

fn build_beta(
    p: &Profile,
    q: &Profile,
    spans: &[Span],
    ell: &LevelWitness,
    knots_per_span: usize,
    circle: bool,
    sb: f64,
) -> std::result::Result<Profile, PlanFail> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut ds: Vec<f64> = Vec::new();
    for span in spans {
        // The inverted right lift can sit an integer number of left turns
        // away from this span's bracket; align branches at a pinned end.
        let offset = if span.pin0 {
            lift_at(p, span.x0) - ell.invert_lift(lift_at(q, span.t0))
        } else {
            lift_at(p, span.x1) - ell.invert_lift(lift_at(q, span.t1))
        };
        for k in 0..=knots_per_span {
            let f = k as f64 / knots_per_span as f64;
            let t = span.t0 + f * (span.t1 - span.t0);
            let x = if k == 0 && span.pin0 {
                span.x0
            } else if k == knots_per_span && span.pin1 {
                span.x1
            } else {
                let w = ell.invert_lift(lift_at(q, t)) + offset;
                solve_on(p, span.x0.min(span.x1), span.x0.max(span.x1), w)
            };
            if let Some(last) = xs.last() {
                if t <= *last + 1e-13 {
                    continue;
                }
            }
            // exact slope by the chain rule; NaN marks a fallback (used
            // near matched critical positions, where the left derivative
            // vanishes and the defect is insensitive to the slope anyway)
            let denom = ell.derivative_lift(lift_at(p, x)) * d1_at(p, x);
            let slope = d1_at(q, t) / denom;
            ds.push(if denom.abs() > 1e-9 && slope.is_finite() {
                slope
            } else {
                f64::NAN
            });
            xs.push(t);
            ys.push(x);
        }
    }
    for k in 0..ds.len() {
        if ds[k].is_nan() {
            let (i, j) = if k == 0 {
                (0, 1)
            } else if k == ds.len() - 1 {
                (k - 1, k)
            } else {
                (k - 1, k + 1)
            };
            ds[k] = (ys[j] - ys[i]) / (xs[j] - xs[i]);
        }
    }
    let segs = hermite_cubic_segments(&xs, &ys, &ds).map_err(PlanFail::Hard)?;
    let target = if circle {
        TargetSpace::Circle
    } else {
        TargetSpace::RealLine
    };
    let mut beta = Profile::new(p.base, target, segs).map_err(PlanFail::Hard)?;
    beta.max_derivative_order = 2;
    if circle {
        let jump = beta.lift_value(1.0) - beta.lift_value(0.0);
        if (jump - sb).abs() > 1e-6 {
            return Err(PlanFail::Mismatch(format!(
                "base witness winding came out {jump:.3} instead of {sb}"
            )));
        }
    }
    Ok(beta)
}

/// Interval-base spans: right pieces between consecutive critical positions
/// (endpoints included) matched to left pieces straight or reversed.
fn interval_spans(rp: &[CriticalCircleRecord], rq: &[CriticalCircleRecord], sb: f64) -> Vec<Span> {
    let m = rp.len();
    let mut tk = Vec::with_capacity(m + 2);
    tk.push(0.0);
    tk.extend(rq.iter().map(|r| r.base_position));
    tk.push(1.0);
    let mut xk = Vec::with_capacity(m + 2);
    xk.push(0.0);
    xk.extend(rp.iter().map(|r| r.base_position));
    xk.push(1.0);
    (0..=m)
        .map(|j| {
            let (x0, x1) = if sb > 0.0 {
                (xk[j], xk[j + 1])
            } else {
                (xk[m - j + 1], xk[m - j])
            };
            Span {
                t0: tk[j],
                t1: tk[j + 1],
                x0,
                x1,
                pin0: true,
                pin1: true,
            }
        })
        .collect()
}

/// Circle-base spans covering `[0, 1]` in walk order, with unwrapped left
/// anchors chained so the lift of `beta` is continuous.
fn circle_spans(
    rp: &[CriticalCircleRecord],
    rq: &[CriticalCircleRecord],
    plan: &Plan,
) -> Vec<Span> {
    let m = rp.len();
    let sq: Vec<f64> = rq.iter().map(|r| r.base_position).collect();
    // cyclic gap from record j to j+1 on the right profile
    let gap_q = |j: usize| wrap_pos(sq[(j + 1) % m] - sq[j]);
    // matched left-profile arc length for right piece j, in walk direction
    let gap_p = |j: usize| {
        let a = rp[matched_index(plan, j, m)].base_position;
        let b = rp[matched_index(plan, j + 1, m)].base_position;
        wrap_pos(plan.sb * (b - a))
    };
    // piece containing t = 0 is the one starting at the last position
    let jlast = m - 1;
    // walk pieces jlast, 0, 1, .., jlast: anchors chain from the start of
    // the wrapping piece
    let mut spans = Vec::new();
    let mut anchor_t = sq[jlast] - 1.0;
    let mut anchor_x = rp[matched_index(plan, jlast, m)].base_position;
    for step in 0..=m {
        let j = (jlast + step) % m;
        let t0 = anchor_t;
        let t1 = t0 + gap_q(j);
        let x0 = anchor_x;
        let x1 = x0 + plan.sb * gap_p(j);
        // clip to [0, 1]; clipped ends keep the full arc as solve bracket
        let lo = t0.max(0.0);
        let hi = t1.min(1.0);
        if hi > lo + 1e-13 {
            spans.push(Span {
                t0: lo,
                t1: hi,
                x0,
                x1,
                pin0: lo == t0,
                pin1: hi == t1,
            });
        }
        anchor_t = t1;
        anchor_x = x1;
    }
    spans
}

fn wrap_pos(d: f64) -> f64 {
    let w = d.rem_euclid(1.0);
    if w == 0.0 {
        1.0
    } else {
        w
    }
}

fn build_level_witness_interval(
    ps: &[f64],
    qs: &[f64],
    tol: f64,
) -> std::result::Result<LevelWitness, PlanFail> {
    // sort pairs by left level, dedupe collisions (already checked coherent)
    let mut pairs: Vec<(f64, f64)> = ps.iter().copied().zip(qs.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.dedup_by(|a, b| (a.0 - b.0).abs() <= tol);
    if pairs.len() < 2 {
        return Err(PlanFail::Mismatch(
            "level range degenerates to a point".into(),
        ));
    }
    let lo = pairs[0].0;
    let hi = pairs[pairs.len() - 1].0;
    let xs: Vec<f64> = pairs.iter().map(|(a, _)| (a - lo) / (hi - lo)).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, b)| *b).collect();
    let segs = monotone_cubic_segments(&xs, &ys).map_err(PlanFail::Hard)?;
    let mut map = Profile::new(BaseSpace::Interval, TargetSpace::RealLine, segs)
        .map_err(PlanFail::Hard)?;
    map.max_derivative_order = 2;
    Ok(LevelWitness {
        map,
        domain: [lo, hi],
    })
}

/// Circle-target witness through matched level pairs: walk left levels
/// cyclically from the anchor, unwrap right levels in the `sl` direction,
/// and interpolate the lift.
fn build_level_witness_circle(
    pairs: &[(f64, f64)],
    sl: f64,
    tol: f64,
) -> std::result::Result<LevelWitness, PlanFail> {
    if pairs.is_empty() {
        return Ok(LevelWitness::circle_identity(sl));
    }
    let anchor = pairs[0];
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| {
        wrap_pos_zero(a.0 - anchor.0)
            .partial_cmp(&wrap_pos_zero(b.0 - anchor.0))
            .unwrap()
    });
    sorted.dedup_by(|a, b| circle_signed_delta(a.0, b.0).abs() <= tol);
    if let Some(last) = sorted.last() {
        if sorted.len() > 1 && circle_signed_delta(last.0, anchor.0).abs() <= tol {
            sorted.pop();
        }
    }
    // knots: u_k = wrapped distance from the anchor level; values: right
    // lifts unwrapped in the sl direction
    let mut us = Vec::with_capacity(sorted.len() + 1);
    let mut vs = Vec::with_capacity(sorted.len() + 1);
    let mut v_prev = anchor.1;
    for (k, (a, b)) in sorted.iter().enumerate() {
        let u = if k == 0 { 0.0 } else { wrap_pos_zero(a - anchor.0) };
        let v = if k == 0 {
            anchor.1
        } else {
            // advance along the sl direction from the previous value
            let step = wrap_pos(sl * circle_signed_delta_dir(wrap_unit(v_prev), *b));
            v_prev + sl * step
        };
        if k > 0 && u <= us[k - 1] + tol {
            return Err(PlanFail::Mismatch(
                "left levels are not cyclically separated".into(),
            ));
        }
        us.push(u);
        vs.push(v);
        v_prev = v;
    }
    // closure knot
    us.push(1.0);
    vs.push(anchor.1 + sl);
    // the right levels must fit within one turn
    if (vs[vs.len() - 1] - vs[0]).abs() > 1.0 + 1e-9 {
        return Err(PlanFail::Mismatch(
            "right levels wind more than once around the circle".into(),
        ));
    }
    for w in vs.windows(2) {
        if sl * (w[1] - w[0]) <= tol {
            return Err(PlanFail::Mismatch(
                "levels are not in a compatible cyclic order".into(),
            ));
        }
    }
    let segs = monotone_cubic_segments(&us, &vs).map_err(PlanFail::Hard)?;
    let mut map =
        Profile::new(BaseSpace::Circle, TargetSpace::Circle, segs).map_err(PlanFail::Hard)?;
    map.max_derivative_order = 2;
    Ok(LevelWitness {
        map,
        domain: [anchor.0, anchor.0 + 1.0],
    })
}

fn wrap_pos_zero(d: f64) -> f64 {
    d.rem_euclid(1.0)
}

/// Wrapped distance from `a` to `b` (forward direction), in `[0, 1)`.
fn circle_signed_delta_dir(a: f64, b: f64) -> f64 {
    (b - a).rem_euclid(1.0)
}

fn try_plan(
    p: &Profile,
    q: &Profile,
    rp: &[CriticalCircleRecord],
    rq: &[CriticalCircleRecord],
    plan: &Plan,
    mode: EquivalenceMode,
    tol: f64,
) -> std::result::Result<EquivalenceDecision, PlanFail> {
    let m = rp.len();
    let circle_base = p.base == BaseSpace::Circle;
    let circle_target = p.target == TargetSpace::Circle;

    if circle_target {
        let dq = q.degree();
        let expect = (plan.sl * plan.sb) as i64 * p.degree();
        if dq != expect {
            return Err(PlanFail::Mismatch(format!(
                "winding numbers are incompatible ({} vs expected {expect})",
                dq
            )));
        }
    }
    if m > 0 {
        check_records(rp, rq, plan, mode).map_err(PlanFail::Mismatch)?;
    }

    // ----- level data -----
    let ell = if !circle_base {
        let (e0, e1) = if plan.sb > 0.0 { (0.0, 1.0) } else { (1.0, 0.0) };
        let mut ps = vec![p.value(e0)];
        let mut qs = vec![q.value(0.0)];
        for (j, cq) in rq.iter().enumerate() {
            ps.push(rp[matched_index(plan, j, m)].level);
            qs.push(cq.level);
        }
        ps.push(p.value(e1));
        qs.push(q.value(1.0));
        match mode {
            EquivalenceMode::Right => {
                require_equal(&ps, &qs, tol, false).map_err(PlanFail::Mismatch)?;
                let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                LevelWitness::identity([lo, hi])
            }
            _ => {
                order_isomorphic(&ps, &qs, plan.sl, tol).map_err(PlanFail::Mismatch)?;
                build_level_witness_interval(&ps, &qs, tol)?
            }
        }
    } else {
        let pairs: Vec<(f64, f64)> = rq
            .iter()
            .enumerate()
            .map(|(j, cq)| (rp[matched_index(plan, j, m.max(1))].level, cq.level))
            .collect();
        if circle_target {
            match mode {
                EquivalenceMode::Right => {
                    let ps: Vec<f64> = pairs.iter().map(|x| x.0).collect();
                    let qs: Vec<f64> = pairs.iter().map(|x| x.1).collect();
                    require_equal(&ps, &qs, tol, true).map_err(PlanFail::Mismatch)?;
                    LevelWitness::circle_identity(1.0)
                }
                _ => build_level_witness_circle(&pairs, plan.sl, tol)?,
            }
        } else {
            let ps: Vec<f64> = pairs.iter().map(|x| x.0).collect();
            let qs: Vec<f64> = pairs.iter().map(|x| x.1).collect();
            match mode {
                EquivalenceMode::Right => {
                    require_equal(&ps, &qs, tol, false).map_err(PlanFail::Mismatch)?;
                    let lo = ps.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    LevelWitness::identity([lo, hi])
                }
                _ => {
                    order_isomorphic(&ps, &qs, plan.sl, tol).map_err(PlanFail::Mismatch)?;
                    build_level_witness_interval(&ps, &qs, tol)?
                }
            }
        }
    };

    // ----- base witness -----
    let spans = if !circle_base {
        interval_spans(rp, rq, plan.sb)
    } else if m == 0 {
        if !circle_target {
            return Err(PlanFail::Mismatch(
                "a real-valued circle profile cannot be free of critical circles".into(),
            ));
        }
        // monotone circle maps: a single span using the lift inverse
        let x0 = solve_lift_global(p, ell.invert_lift(lift_at(q, 0.0)));
        let x1 = x0 + plan.sb;
        vec![Span {
            t0: 0.0,
            t1: 1.0,
            x0,
            x1,
            pin0: true,
            pin1: true,
        }]
    } else {
        circle_spans(rp, rq, plan)
    };

    // tolerance follows the value range of the right profile, not its
    // coefficient magnitudes (a degree-n polynomial can have large
    // coefficients while staying within a unit range)
    let value_scale = match q.target {
        TargetSpace::Circle => 1.0,
        TargetSpace::RealLine => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in rq {
                lo = lo.min(r.level);
                hi = hi.max(r.level);
            }
            if q.base == BaseSpace::Interval {
                for v in [q.value(0.0), q.value(1.0)] {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            (hi - lo).max(1.0)
        }
    };
    let defect_tol = WITNESS_TOL * value_scale;
    for knots in [33usize, 129, 513] {
        let beta = build_beta(p, q, &spans, &ell, knots, circle_base, plan.sb)?;
        let dec = EquivalenceDecision {
            equivalent: true,
            mode,
            reason: describe_plan(plan, m),
            base_witness: Some(beta),
            level_witness: Some(ell.clone()),
        };
        if let Some(defect) = witness_defect(p, q, &dec, 1000) {
            if defect <= defect_tol {
                return Ok(dec);
            }
            if knots == 513 {
                return Err(PlanFail::Hard(Error::Witness(format!(
                    "matched invariants but witness construction stalled at defect {defect:.3e} \
                     (tolerance {defect_tol:.3e})"
                ))));
            }
        }
    }
    unreachable!("escalation loop always returns");
}

/// Solve `lift_at(p, x) = w` globally for a monotone circle profile.
fn solve_lift_global(p: &Profile, w: f64) -> f64 {
    let l0 = p.lift_value(0.0);
    let jump = p.lift_value(1.0) - l0;
    let k = ((w - l0) / jump).floor();
    let target = w - jump * k;
    let f = |x: f64| p.lift_value(x) - target;
    let x = if f(0.0) == 0.0 {
        0.0
    } else {
        bisect(&f, 0.0, 1.0, 1e-14)
    };
    x + k
}

fn describe_plan(plan: &Plan, m: usize) -> String {
    let base = if plan.sb > 0.0 {
        "orientation-preserving"
    } else {
        "orientation-reversing"
    };
    let level = if plan.sl > 0.0 {
        "increasing"
    } else {
        "decreasing"
    };
    if m > 0 && plan.offset > 0 {
        format!("{base} base map, {level} level map, cyclic offset {}", plan.offset)
    } else {
        format!("{base} base map, {level} level map")
    }
}

/// Decide whether `q = ell ∘ p ∘ beta` for diffeo witnesses in the given
/// mode, and construct the witnesses when it does.
pub fn profiles_equivalent(
    p: &Profile,
    q: &Profile,
    mode: EquivalenceMode,
) -> Result<EquivalenceDecision> {
    profiles_equivalent_flips(p, q, mode, true)
}

/// Like [`profiles_equivalent`], but base-orientation-reversing witnesses
/// are only offered when the surface admits them (the disk does not).
pub fn equivalent_on(
    kind: SurfaceKind,
    p: &Profile,
    q: &Profile,
    mode: EquivalenceMode,
) -> Result<EquivalenceDecision> {
    profiles_equivalent_flips(p, q, mode, kind.geometry().allows_base_flip())
}

fn profiles_equivalent_flips(
    p: &Profile,
    q: &Profile,
    mode: EquivalenceMode,
    allow_base_flip: bool,
) -> Result<EquivalenceDecision> {
    if p.base != q.base {
        return Err(Error::Domain(
            "profiles live on different base spaces".into(),
        ));
    }
    let negative = |reason: String| EquivalenceDecision {
        equivalent: false,
        mode,
        reason,
        base_witness: None,
        level_witness: None,
    };
    if p.target != q.target {
        return Ok(negative("target spaces differ".into()));
    }
    let rp = find_critical_points(p)?;
    let rq = find_critical_points(q)?;
    if rp.len() != rq.len() {
        return Ok(negative(format!(
            "critical circle counts differ ({} vs {})",
            rp.len(),
            rq.len()
        )));
    }
    let m = rp.len();
    let tol = 1e-9 * p.coefficient_scale().max(q.coefficient_scale()).max(1.0);

    let sbs: &[f64] = if allow_base_flip { &[1.0, -1.0] } else { &[1.0] };
    let sls: &[f64] = match mode {
        EquivalenceMode::Right => &[1.0],
        _ => &[1.0, -1.0],
    };
    let offsets: Vec<usize> = if p.base == BaseSpace::Circle {
        (0..m.max(1)).collect()
    } else {
        vec![0]
    };

    let mut first_reason: Option<String> = None;
    for &sl in sls {
        for &sb in sbs {
            for &offset in &offsets {
                let plan = Plan { sb, sl, offset };
                match try_plan(p, q, &rp, &rq, &plan, mode, tol) {
                    Ok(dec) => return Ok(dec),
                    Err(PlanFail::Mismatch(r)) => {
                        first_reason.get_or_insert(r);
                    }
                    Err(PlanFail::Hard(e)) => return Err(e),
                }
            }
        }
    }
    Ok(negative(
        first_reason.unwrap_or_else(|| "no candidate matching".into()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = std::f64::consts::TAU;

    fn defect_ok(p: &Profile, q: &Profile, d: &EquivalenceDecision) {
        let defect = witness_defect(p, q, d, 1000).expect("witnesses");
        assert!(defect <= 1e-8, "defect {defect:.3e}");
    }

    #[test]
    fn reflexive_on_interval() {
        let p = Profile::poly(vec![1.0, -4.0, 4.0]);
        let d = profiles_equivalent(&p, &p, EquivalenceMode::Right).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &p, &d);
    }

    #[test]
    fn affine_base_change_is_right_equivalent() {
        // q(t) = p(t^2-ish monotone reparam): p = t, q = t(2-t)/1 monotone?
        // use p(t) = 2t, q(t) = 2(t + t(1-t)) with beta(t) = t + t(1-t)...
        // beta must fix endpoints: beta = t(2-t) works: q(t) = 2 t (2 - t) / ...
        let p = Profile::poly(vec![0.0, 2.0]);
        let q = Profile::poly(vec![0.0, 4.0, -2.0]); // 2 * t(2-t)
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Right).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &q, &d);
    }

    #[test]
    fn scaled_levels_need_a_level_map() {
        let p = Profile::poly(vec![1.0, -4.0, 4.0]); // (2t-1)^2
        let q = Profile::poly(vec![3.0, -12.0, 12.0]); // 3 (2t-1)^2
        let right = profiles_equivalent(&p, &q, EquivalenceMode::Right).unwrap();
        assert!(!right.equivalent);
        assert!(right.reason.contains("levels differ"), "{}", right.reason);
        let lr = profiles_equivalent(&p, &q, EquivalenceMode::LeftRight).unwrap();
        assert!(lr.equivalent, "{}", lr.reason);
        defect_ok(&p, &q, &lr);
    }

    #[test]
    fn reflection_matches_with_reversed_base() {
        // q(t) = p(1-t) with p monotone
        let p = Profile::poly(vec![0.0, 1.0, 1.0]); // t + t^2 increasing
        let q = Profile::poly(vec![2.0, -3.0, 1.0]); // p(1-t) = (1-t) + (1-t)^2
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Right).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &q, &d);
    }

    #[test]
    fn order_mismatch_is_negative_in_left_right_but_topological_ok() {
        // both have a single interior minimum, orders 2 vs 4
        let p = Profile::poly(vec![1.0, -4.0, 4.0]);
        let q = Profile::poly(vec![1.0, -8.0, 24.0, -32.0, 16.0]);
        let lr = profiles_equivalent(&p, &q, EquivalenceMode::LeftRight).unwrap();
        assert!(!lr.equivalent);
        assert!(lr.reason.contains("vanishing orders"), "{}", lr.reason);
        let topo = profiles_equivalent(&p, &q, EquivalenceMode::Topological).unwrap();
        assert!(topo.equivalent, "{}", topo.reason);
        defect_ok(&p, &q, &topo);
    }

    #[test]
    fn min_max_count_mismatch() {
        let p = Profile::poly(vec![0.0, 1.0]);
        let q = Profile::poly(vec![1.0, -4.0, 4.0]);
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Topological).unwrap();
        assert!(!d.equivalent);
        assert!(d.reason.contains("counts differ"), "{}", d.reason);
    }

    #[test]
    fn monotone_profile_against_identity_certifies_diffeo() {
        // p strictly increasing without critical points: equivalent to the
        // identity, and the witnesses certify p is a diffeo onto its image.
        let p = Profile::poly(vec![0.2, 1.0, -0.8, 0.4]); // p' = 1 - 1.6t + 1.2t^2 > 0
        let q = Profile::identity();
        let d = profiles_equivalent(&p, &q, EquivalenceMode::LeftRight).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &q, &d);
    }

    #[test]
    fn rotated_cosine_on_torus() {
        // cos(2 pi t) vs cos(2 pi (t - 0.3)): right-equivalent by rotation
        let p = Profile::circle_trig(TargetSpace::RealLine, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let c = (TAU * 0.3).cos();
        let s = (TAU * 0.3).sin();
        // cos(2 pi (t - 0.3)) = cos(2pi t) cos(0.6pi) + sin(2pi t) sin(0.6pi)
        let q = Profile::circle_trig(TargetSpace::RealLine, vec![0.0, 0.0, c, s]).unwrap();
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Right).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &q, &d);
    }

    #[test]
    fn circle_level_count_respected() {
        // one harmonic (two circles) vs a dominant second harmonic (four)
        let p = Profile::circle_trig(TargetSpace::RealLine, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let q = Profile::circle_trig(
            TargetSpace::RealLine,
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.2],
        )
        .unwrap();
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Topological).unwrap();
        assert!(!d.equivalent);
        assert!(d.reason.contains("counts differ"), "{}", d.reason);
    }

    #[test]
    fn monotone_degree_one_circle_maps() {
        // t vs t + 0.2 sin(2 pi t)/(2 pi)*... both degree-1 monotone
        let p = Profile::circle_trig(TargetSpace::Circle, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = Profile::circle_trig(
            TargetSpace::Circle,
            vec![1.0, 0.1, 0.0, -0.5 / TAU],
        )
        .unwrap();
        let d = profiles_equivalent(&p, &q, EquivalenceMode::LeftRight).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &q, &d);
    }

    #[test]
    fn degree_one_with_degenerate_circle_is_reflexive() {
        let p = Profile::circle_trig(TargetSpace::Circle, vec![1.0, 0.0, 0.0, -1.0 / TAU])
            .unwrap();
        let d = profiles_equivalent(&p, &p, EquivalenceMode::LeftRight).unwrap();
        assert!(d.equivalent, "{}", d.reason);
        defect_ok(&p, &p, &d);
    }

    #[test]
    fn degree_mismatch_is_negative() {
        let p = Profile::circle_trig(TargetSpace::Circle, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = Profile::circle_trig(TargetSpace::Circle, vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        let d = profiles_equivalent(&p, &q, EquivalenceMode::Topological).unwrap();
        assert!(!d.equivalent);
        assert!(d.reason.contains("winding"), "{}", d.reason);
    }

    #[test]
    fn disk_refuses_base_reversal() {
        let p = Profile::poly(vec![0.0, 1.0, 1.0]);
        let q = Profile::poly(vec![2.0, -3.0, 1.0]); // p(1-t)
        let ok = equivalent_on(SurfaceKind::Cylinder, &p, &q, EquivalenceMode::Right).unwrap();
        assert!(ok.equivalent);
        let no = equivalent_on(SurfaceKind::Disk, &p, &q, EquivalenceMode::Right).unwrap();
        assert!(!no.equivalent);
    }
}
