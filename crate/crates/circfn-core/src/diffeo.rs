//! Fiber-preserving diffeomorphisms as chains of three elementary moves.
//!
//! * `FiberShift`  — `(z, b) -> (z + tau(b), b)`, a base-dependent twist;
//! * `BaseReparam` — `(z, b) -> (z, beta(b))`, a reparametrization of the
//!   base by a monotone bijection;
//! * `FiberRotation` — `(z, b) -> (z + c, b)`, a rigid rotation.
//!
//! A chain applies its elements left to right. Every element is exactly
//! invertible: shifts negate, rotations negate mod 1, and base
//! reparametrizations flip an `inverted` flag and are resolved by bisection
//! on the stored monotone profile.

use crate::base::{bisect, wrap_unit, BaseSpace, TargetSpace};
use crate::bump::BumpFunction;
use crate::error::{Error, Result};
use crate::point::SurfacePoint;
use crate::profile::Profile;
use crate::surface::Surface;
use crate::tolerances::{SCAN_POINTS, ZERO_REL};
use serde::{Deserialize, Serialize};

/// The angle function of a fiber shift.
///
/// Conjugator isotopies need shifts of the form `scale * delta(b) * D(b)`
/// where `D` is the fiber displacement of another chain and `delta` a bump;
/// such amounts leave the segment family, so they are kept in structured
/// form and evaluated on demand. This also makes the boundary behavior
/// exact: wherever the bump is exactly 0 or the displacement cancels, the
/// shift is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauFunction {
    Profile(Profile),
    Damped {
        chain: Box<DiffeoChain>,
        bump: BumpFunction,
        scale: f64,
    },
}

impl TauFunction {
    pub fn value(&self, b: f64) -> f64 {
        match self {
            TauFunction::Profile(p) => p.value(b),
            TauFunction::Damped { chain, bump, scale } => {
                let d = bump.value(b);
                if d == 0.0 {
                    0.0
                } else {
                    scale * d * chain.fiber_displacement(b)
                }
            }
        }
    }

    fn negated(&self) -> TauFunction {
        match self {
            TauFunction::Profile(p) => TauFunction::Profile(p.scaled(-1.0)),
            TauFunction::Damped { chain, bump, scale } => TauFunction::Damped {
                chain: chain.clone(),
                bump: bump.clone(),
                scale: -scale,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ElementaryDiffeo {
    FiberShift {
        tau: TauFunction,
    },
    BaseReparam {
        beta: Profile,
        orientation: i8,
        #[serde(default)]
        inverted: bool,
    },
    FiberRotation {
        angle: f64,
    },
}

impl ElementaryDiffeo {
    pub fn fiber_shift(tau: Profile) -> Self {
        ElementaryDiffeo::FiberShift {
            tau: TauFunction::Profile(tau),
        }
    }

    pub fn fiber_rotation(angle: f64) -> Self {
        ElementaryDiffeo::FiberRotation {
            angle: wrap_unit(angle),
        }
    }

    /// Validate and build a base reparametrization. The profile must be a
    /// monotone bijection of its base: endpoints map to endpoints on the
    /// interval, the lift has degree +/-1 on the circle, and the derivative
    /// may not vanish at any interior scan point.
    pub fn base_reparam(beta: Profile) -> Result<Self> {
        let scale = beta.coefficient_scale();
        let d = beta.derivative_profile();
        let mut sign = 0.0f64;
        for i in 1..SCAN_POINTS {
            let t = i as f64 / SCAN_POINTS as f64;
            let v = d.value(t);
            if v.abs() <= ZERO_REL * scale {
                return Err(Error::Validation(format!(
                    "base reparametrization derivative hits zero near t = {t}"
                )));
            }
            if sign == 0.0 {
                sign = v.signum();
            } else if sign != v.signum() {
                return Err(Error::Validation(format!(
                    "base reparametrization is not monotone (derivative changes sign near t = {t})"
                )));
            }
        }
        let orientation: i8 = if sign >= 0.0 { 1 } else { -1 };
        match beta.base {
            BaseSpace::Interval => {
                let (v0, v1) = (beta.value(0.0), beta.value(1.0));
                let ok = if orientation == 1 {
                    v0.abs() <= 1e-9 && (v1 - 1.0).abs() <= 1e-9
                } else {
                    (v0 - 1.0).abs() <= 1e-9 && v1.abs() <= 1e-9
                };
                if !ok {
                    return Err(Error::Validation(format!(
                        "base reparametrization must map endpoints to endpoints, got {v0} -> {v1}"
                    )));
                }
            }
            BaseSpace::Circle => {
                if beta.target != TargetSpace::Circle || beta.degree() != orientation as i64 {
                    return Err(Error::Validation(
                        "circle base reparametrization must be a degree +/-1 circle map".into(),
                    ));
                }
            }
        }
        Ok(ElementaryDiffeo::BaseReparam {
            beta,
            orientation,
            inverted: false,
        })
    }

    pub fn inverse(&self) -> ElementaryDiffeo {
        match self {
            ElementaryDiffeo::FiberShift { tau } => ElementaryDiffeo::FiberShift {
                tau: tau.negated(),
            },
            ElementaryDiffeo::BaseReparam {
                beta,
                orientation,
                inverted,
            } => ElementaryDiffeo::BaseReparam {
                beta: beta.clone(),
                orientation: *orientation,
                inverted: !inverted,
            },
            ElementaryDiffeo::FiberRotation { angle } => ElementaryDiffeo::FiberRotation {
                angle: wrap_unit(-angle),
            },
        }
    }

    /// Forward base map of this element.
    pub fn base_forward(&self, b: f64) -> f64 {
        match self {
            ElementaryDiffeo::FiberShift { .. } | ElementaryDiffeo::FiberRotation { .. } => b,
            ElementaryDiffeo::BaseReparam { beta, inverted, .. } => {
                if *inverted {
                    invert_monotone(beta, b)
                } else {
                    reparam_value(beta, b)
                }
            }
        }
    }

    fn base_backward(&self, b: f64) -> f64 {
        match self {
            ElementaryDiffeo::FiberShift { .. } | ElementaryDiffeo::FiberRotation { .. } => b,
            ElementaryDiffeo::BaseReparam { beta, inverted, .. } => {
                if *inverted {
                    reparam_value(beta, b)
                } else {
                    invert_monotone(beta, b)
                }
            }
        }
    }

    /// Derivative of the forward base map at `b`.
    pub fn base_forward_derivative(&self, b: f64) -> f64 {
        match self {
            ElementaryDiffeo::FiberShift { .. } | ElementaryDiffeo::FiberRotation { .. } => 1.0,
            ElementaryDiffeo::BaseReparam { beta, inverted, .. } => {
                if *inverted {
                    1.0 / beta.derivative_value(invert_monotone(beta, b), 1)
                } else {
                    beta.derivative_value(b, 1)
                }
            }
        }
    }

    fn apply(&self, pt: SurfacePoint) -> SurfacePoint {
        match self {
            ElementaryDiffeo::FiberShift { tau } => {
                SurfacePoint::new(pt.angle + tau.value(pt.base), pt.base)
            }
            ElementaryDiffeo::FiberRotation { angle } => {
                SurfacePoint::new(pt.angle + angle, pt.base)
            }
            ElementaryDiffeo::BaseReparam { .. } => {
                SurfacePoint::new(pt.angle, self.base_forward(pt.base))
            }
        }
    }

    /// Real-valued (lifted, not reduced mod 1) fiber displacement of this
    /// element over base point `b`.
    fn displacement(&self, b: f64) -> f64 {
        match self {
            ElementaryDiffeo::FiberShift { tau } => tau.value(b),
            ElementaryDiffeo::FiberRotation { angle } => *angle,
            ElementaryDiffeo::BaseReparam { .. } => 0.0,
        }
    }
}

/// Evaluate beta respecting the base: wraps on the circle.
fn reparam_value(beta: &Profile, b: f64) -> f64 {
    match beta.base {
        BaseSpace::Interval => beta.value(b).clamp(0.0, 1.0),
        BaseSpace::Circle => wrap_unit(beta.value(b)),
    }
}

/// Solve `beta(x) = b` for a validated monotone reparametrization.
fn invert_monotone(beta: &Profile, b: f64) -> f64 {
    match beta.base {
        BaseSpace::Interval => {
            let b = b.clamp(0.0, 1.0);
            let f = |x: f64| beta.value(x) - b;
            if f(0.0).abs() <= 1e-15 {
                return 0.0;
            }
            if f(1.0).abs() <= 1e-15 {
                return 1.0;
            }
            bisect(f, 0.0, 1.0, 1e-15)
        }
        BaseSpace::Circle => {
            // Work on the lift: it moves monotonically across one full turn.
            let v0 = beta.lift_value(0.0);
            let increasing = beta.degree() >= 0;
            let y = if increasing {
                v0 + wrap_unit(b - v0)
            } else {
                v0 - wrap_unit(v0 - b)
            };
            let f = |x: f64| beta.lift_value(x) - y;
            if f(0.0).abs() <= 1e-15 {
                return 0.0;
            }
            wrap_unit(bisect(f, 0.0, 1.0, 1e-15))
        }
    }
}

/// A composition of elementary diffeomorphisms, applied left to right.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiffeoChain {
    pub elements: Vec<ElementaryDiffeo>,
}

impl DiffeoChain {
    pub fn identity() -> Self {
        DiffeoChain { elements: vec![] }
    }

    pub fn of(elements: Vec<ElementaryDiffeo>) -> Self {
        DiffeoChain { elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Append an element (applied after everything already in the chain).
    pub fn then(mut self, e: ElementaryDiffeo) -> Self {
        self.elements.push(e);
        self
    }

    /// Apply the chain to a point.
    pub fn apply(&self, pt: SurfacePoint) -> SurfacePoint {
        self.elements.iter().fold(pt, |p, e| e.apply(p))
    }

    /// The inverse chain: reversed order, each element inverted.
    pub fn invert(&self) -> DiffeoChain {
        DiffeoChain {
            elements: self.elements.iter().rev().map(|e| e.inverse()).collect(),
        }
    }

    /// Forward base map of the whole chain.
    pub fn base_forward(&self, b: f64) -> f64 {
        self.elements.iter().fold(b, |x, e| e.base_forward(x))
    }

    /// Inverse base map of the whole chain.
    pub fn base_inverse(&self, b: f64) -> f64 {
        self.elements
            .iter()
            .rev()
            .fold(b, |x, e| e.base_backward(x))
    }

    /// Derivative of the forward base map (chain rule over the elements).
    pub fn base_forward_derivative(&self, b: f64) -> f64 {
        let mut x = b;
        let mut d = 1.0;
        for e in &self.elements {
            d *= e.base_forward_derivative(x);
            x = e.base_forward(x);
        }
        d
    }

    /// Continuous lift of the net fiber rotation the chain performs over
    /// base point `b`: the sum of every shift/rotation amount, each read at
    /// the base coordinate current when that element applies.
    pub fn fiber_displacement(&self, b: f64) -> f64 {
        let mut x = b;
        let mut disp = 0.0;
        for e in &self.elements {
            disp += e.displacement(x);
            x = e.base_forward(x);
        }
        disp
    }

    /// True when no element moves the base coordinate.
    pub fn is_base_trivial(&self) -> bool {
        self.elements
            .iter()
            .all(|e| !matches!(e, ElementaryDiffeo::BaseReparam { .. }))
    }

    /// Surface-specific validity: profile bases must match the surface base
    /// and the disk admits no orientation-reversing base reparametrization.
    pub fn validate_for(&self, surface: &Surface) -> Result<()> {
        for e in &self.elements {
            match e {
                ElementaryDiffeo::FiberShift {
                    tau: TauFunction::Profile(p),
                } => {
                    if p.base != surface.base {
                        return Err(Error::Validation(
                            "fiber shift profile base does not match the surface".into(),
                        ));
                    }
                }
                ElementaryDiffeo::FiberShift { .. } => {}
                ElementaryDiffeo::BaseReparam {
                    beta, orientation, ..
                } => {
                    if beta.base != surface.base {
                        return Err(Error::Validation(
                            "base reparametrization base does not match the surface".into(),
                        ));
                    }
                    if *orientation < 0 && !surface.geometry().allows_base_flip() {
                        return Err(Error::Validation(format!(
                            "the {} admits no orientation-reversing base reparametrization",
                            surface.geometry().name()
                        )));
                    }
                }
                ElementaryDiffeo::FiberRotation { .. } => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfaceKind;

    fn pt(z: f64, b: f64) -> SurfacePoint {
        SurfacePoint::new(z, b)
    }

    #[test]
    fn identity_chain() {
        let c = DiffeoChain::identity();
        let p = pt(0.3, 0.7);
        assert_eq!(c.apply(p), p);
        assert_eq!(c.fiber_displacement(0.2), 0.0);
    }

    #[test]
    fn rotation_composes_mod_one() {
        let c = DiffeoChain::identity()
            .then(ElementaryDiffeo::fiber_rotation(0.7))
            .then(ElementaryDiffeo::fiber_rotation(0.6));
        let out = c.apply(pt(0.0, 0.5));
        assert!((out.angle - 0.3).abs() < 1e-12);
        assert_eq!(out.base, 0.5);
    }

    #[test]
    fn shift_then_invert_is_identity() {
        let tau = Profile::poly(vec![0.1, 0.5]); // 0.1 + 0.5 b
        let c = DiffeoChain::identity().then(ElementaryDiffeo::fiber_shift(tau));
        let p = pt(0.9, 0.3);
        let q = c.invert().apply(c.apply(p));
        assert!(p.same_point(&q, SurfaceKind::Cylinder, 1e-14));
    }

    #[test]
    fn base_reparam_square_inverts_by_bisection() {
        let beta = Profile::poly(vec![0.0, 0.0, 1.0]); // b^2, monotone on (0,1]
        let e = ElementaryDiffeo::base_reparam(beta).unwrap();
        let c = DiffeoChain::identity().then(e);
        // forward: 0.5 -> 0.25; inverse: 0.25 -> 0.5
        assert!((c.base_forward(0.5) - 0.25).abs() < 1e-15);
        assert!((c.base_inverse(0.25) - 0.5).abs() < 1e-12);
        let p = pt(0.3, 0.25);
        let q = c.invert().apply(p);
        assert!((q.base - 0.5).abs() < 1e-12);
        assert_eq!(q.angle, 0.3);
    }

    #[test]
    fn non_monotone_reparam_rejected() {
        // b + sin(2 pi b): derivative 1 + 2 pi cos(2 pi b) changes sign
        let beta = Profile {
            base: BaseSpace::Interval,
            target: TargetSpace::RealLine,
            pieces: vec![crate::segment::Segment::trig(
                vec![1.0, 0.0, 0.0, 1.0],
                [0.0, 1.0],
            )],
            max_derivative_order: 16,
        };
        assert!(ElementaryDiffeo::base_reparam(beta).is_err());
    }

    #[test]
    fn orientation_flip_detected_and_disk_rejects_it() {
        let beta = Profile::poly(vec![1.0, -1.0]); // 1 - b
        let e = ElementaryDiffeo::base_reparam(beta).unwrap();
        match &e {
            ElementaryDiffeo::BaseReparam { orientation, .. } => assert_eq!(*orientation, -1),
            _ => unreachable!(),
        }
        let chain = DiffeoChain::identity().then(e);
        let disk = Surface::real(SurfaceKind::Disk);
        assert!(chain.validate_for(&disk).is_err());
        let cyl = Surface::real(SurfaceKind::Cylinder);
        assert!(chain.validate_for(&cyl).is_ok());
    }

    #[test]
    fn circle_reparam_inverts_on_lift() {
        // degree-1 circle map with a wobble: b + 0.1 sin(2 pi b)
        let beta = Profile::new(
            BaseSpace::Circle,
            TargetSpace::Circle,
            vec![crate::segment::Segment::trig(
                vec![1.0, 0.0, 0.0, 0.1],
                [0.0, 1.0],
            )],
        )
        .unwrap();
        let e = ElementaryDiffeo::base_reparam(beta).unwrap();
        let c = DiffeoChain::identity().then(e);
        for b in [0.0, 0.1, 0.45, 0.9] {
            let fwd = c.base_forward(b);
            let back = c.base_inverse(fwd);
            assert!(
                crate::base::circle_dist(back, b) < 1e-12,
                "round trip failed at {b}: {back}"
            );
        }
    }

    #[test]
    fn chain_round_trip_mixed() {
        let beta = Profile::poly(vec![0.0, 0.5, 0.5]); // (b + b^2)/2... increasing
        let chain = DiffeoChain::identity()
            .then(ElementaryDiffeo::fiber_shift(Profile::poly(vec![0.0, 1.0])))
            .then(ElementaryDiffeo::base_reparam(beta).unwrap())
            .then(ElementaryDiffeo::fiber_rotation(0.25));
        let inv = chain.invert();
        for i in 0..50 {
            let p = pt(
                (i as f64 * 0.137) % 1.0,
                0.02 + 0.96 * ((i as f64 * 0.071) % 1.0),
            );
            let q = inv.apply(chain.apply(p));
            assert!(
                p.same_point(&q, SurfaceKind::Cylinder, 1e-12),
                "round trip failed: {p:?} vs {q:?}"
            );
        }
    }

    #[test]
    fn displacement_tracks_base_motion() {
        // shift by tau(b) = b, then square the base, then shift by tau again:
        // displacement at b should be b + b^2.
        let tau = Profile::poly(vec![0.0, 1.0]);
        let chain = DiffeoChain::identity()
            .then(ElementaryDiffeo::fiber_shift(tau.clone()))
            .then(ElementaryDiffeo::base_reparam(Profile::poly(vec![0.0, 0.0, 1.0])).unwrap())
            .then(ElementaryDiffeo::fiber_shift(tau));
        let d = chain.fiber_displacement(0.5);
        assert!((d - 0.75).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let chain = DiffeoChain::identity()
            .then(ElementaryDiffeo::fiber_shift(Profile::poly(vec![0.0, 1.0])))
            .then(ElementaryDiffeo::base_reparam(Profile::poly(vec![0.0, 0.0, 1.0])).unwrap())
            .then(ElementaryDiffeo::fiber_rotation(0.125));
        let j = serde_json::to_string(&chain).unwrap();
        let back: DiffeoChain = serde_json::from_str(&j).unwrap();
        assert_eq!(back, chain);
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v[0]["variant"], "fiber_shift");
        assert_eq!(v[1]["variant"], "base_reparam");
        assert_eq!(v[2]["variant"], "fiber_rotation");
    }
}
