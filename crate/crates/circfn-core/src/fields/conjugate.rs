//! Untwisting a diffeomorphism near distinguished circles.
//!
//! A chain that fixes the base pointwise on a collar can be isotoped,
//! without touching anything outside the collar, to one that preserves
//! fibers rigidly on the collar's core. The isotopy appends a damped
//! counter-shift: at stage `s` the appended shift cancels the fraction
//! `s` of the chain's own fiber displacement, weighted by a bump that
//! is exactly 1 on the collar core and exactly 0 outside the collar.
//! The endpoint of the isotopy conjugates the induced circle action to
//! itself, which is checked pointwise by [`verify_conjugation`].

use serde::{Deserialize, Serialize};

use crate::bump::{BumpFunction, Polarity};
use crate::diffeo::{DiffeoChain, ElementaryDiffeo, TauFunction};
use crate::error::{Error, Result};
use crate::point::SurfacePoint;

use super::action::CircleAction;
use super::flow::point_distance;

/// One-parameter family of chains from the original chain (`s = 0`) to
/// its untwisted form (`s = 1`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjugationIsotopy {
    pub chain: DiffeoChain,
    pub bump: BumpFunction,
}

impl ConjugationIsotopy {
    /// Stage `s` of the isotopy. Outside the bump support every stage is
    /// bit-identical to the original chain; on the plateau the stage `s`
    /// cancels the fraction `s` of the fiber displacement.
    pub fn at(&self, s: f64) -> DiffeoChain {
        self.chain.clone().then(ElementaryDiffeo::FiberShift {
            tau: TauFunction::Damped {
                chain: Box::new(self.chain.clone()),
                bump: self.bump.clone(),
                scale: -s,
            },
        })
    }
}

/// Result of the untwisting: the endpoint chain plus the full isotopy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conjugation {
    pub h_tilde: DiffeoChain,
    pub isotopy: ConjugationIsotopy,
}

const BASE_FIX_TOL: f64 = 1e-9;
const PRECONDITION_SCAN: usize = 2001;

/// Build the untwisted chain. Requires a bump that is 1 inside and 0
/// outside, and a chain that fixes the base pointwise wherever the bump
/// is positive; the counter-shift is read at the image base coordinate,
/// so base motion inside the support would evaluate it off-collar.
pub fn isotope_conjugator(h: &DiffeoChain, bump: &BumpFunction) -> Result<Conjugation> {
    if bump.polarity != Polarity::OneInsideZeroOutside {
        return Err(Error::Precondition(
            "the conjugation bump must be 1 on its plateau and 0 outside".into(),
        ));
    }
    for i in 0..PRECONDITION_SCAN {
        let b = i as f64 / (PRECONDITION_SCAN - 1) as f64;
        if bump.value(b) > 0.0 {
            let moved = (h.base_forward(b) - b).abs();
            if moved > BASE_FIX_TOL {
                return Err(Error::Precondition(format!(
                    "chain moves the base by {moved:.3e} at b = {b} inside the bump support"
                )));
            }
        }
    }
    let isotopy = ConjugationIsotopy {
        chain: h.clone(),
        bump: bump.clone(),
    };
    Ok(Conjugation {
        h_tilde: isotopy.at(1.0),
        isotopy,
    })
}

/// Largest defect of `act(x, g)` against `h̃ ∘ act ∘ h̃⁻¹ (x, g)` over a
/// grid of points and a spread of group elements.
pub fn verify_conjugation(action: &CircleAction, h_tilde: &DiffeoChain, samples: usize) -> f64 {
    let kind = action.field.surface.kind;
    let inverse = h_tilde.invert();
    let n = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let angle = i as f64 / n as f64;
        for j in 0..n {
            let b = j as f64 / (n - 1) as f64;
            let x = SurfacePoint::new(angle, b);
            for g in [0.125, 0.5, 0.875, 1.618] {
                let direct = action.act(x, g);
                let conjugated = h_tilde.apply(action.act(inverse.apply(x), g));
                worst = worst.max(point_distance(kind, &direct, &conjugated));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::circle_signed_delta;
    use crate::fields::action::circle_action;
    use crate::fields::tangent::{build_h_field, normalize_period, suggest_radii};
    use crate::normal_form::NormalForm;
    use crate::profile::Profile;
    use crate::segment::{poly_mul, Segment};
    use crate::surface::SurfaceKind;

    /// Base reparametrization that is the identity outside (0.6, 0.9) and
    /// a gentle C^2 wiggle inside, assembled from three pieces.
    fn partially_twisting_beta() -> Profile {
        let hump = [-0.54, 1.5, -1.0];
        let cubed = poly_mul(&poly_mul(&hump, &hump), &hump);
        let mut middle = vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for (k, c) in cubed.iter().enumerate() {
            middle[k] += 50.0 * c;
        }
        Profile::new(
            crate::base::BaseSpace::Interval,
            crate::base::TargetSpace::RealLine,
            vec![
                Segment::poly(vec![0.0, 1.0], [0.0, 0.6]),
                Segment::poly(middle, [0.6, 0.9]),
                Segment::poly(vec![0.0, 1.0], [0.9, 1.0]),
            ],
        )
        .unwrap()
    }

    fn twisting_chain() -> DiffeoChain {
        DiffeoChain::identity()
            .then(ElementaryDiffeo::fiber_shift(Profile::poly(vec![
                0.05, 0.4, -0.3,
            ])))
            .then(ElementaryDiffeo::base_reparam(partially_twisting_beta()).unwrap())
            .then(ElementaryDiffeo::fiber_rotation(0.37))
    }

    fn collar_bump() -> BumpFunction {
        BumpFunction::plateau(
            crate::base::BaseSpace::Interval,
            [0.05, 0.45],
            [0.15, 0.35],
        )
        .unwrap()
    }

    #[test]
    fn plateau_points_stop_twisting() {
        let conj = isotope_conjugator(&twisting_chain(), &collar_bump()).unwrap();
        for b in [0.15, 0.2, 0.29, 0.35] {
            for angle in [0.0, 0.33, 0.81] {
                let x = SurfacePoint::new(angle, b);
                let y = conj.h_tilde.apply(x);
                assert_eq!(y.base, b);
                assert!(
                    circle_signed_delta(x.angle, y.angle).abs() <= 1e-13,
                    "residual twist at b = {b}"
                );
            }
        }
    }

    #[test]
    fn outside_the_support_nothing_changes() {
        let h = twisting_chain();
        let conj = isotope_conjugator(&h, &collar_bump()).unwrap();
        for b in [0.0, 0.02, 0.5, 0.7, 0.88, 1.0] {
            for angle in [0.1, 0.62] {
                let x = SurfacePoint::new(angle, b);
                let plain = h.apply(x);
                let tilde = conj.h_tilde.apply(x);
                assert_eq!(plain.angle, tilde.angle, "angle drift at b = {b}");
                assert_eq!(plain.base, tilde.base, "base drift at b = {b}");
            }
        }
    }

    #[test]
    fn isotopy_starts_at_the_original_chain() {
        let h = twisting_chain();
        let conj = isotope_conjugator(&h, &collar_bump()).unwrap();
        let start = conj.isotopy.at(0.0);
        for b in [0.1, 0.25, 0.75] {
            let x = SurfacePoint::new(0.4, b);
            let a = h.apply(x);
            let c = start.apply(x);
            assert!(circle_signed_delta(a.angle, c.angle).abs() < 1e-15);
            assert_eq!(a.base, c.base);
        }
    }

    #[test]
    fn isotopy_interpolates_the_twist_linearly() {
        let conj = isotope_conjugator(&twisting_chain(), &collar_bump()).unwrap();
        let b = 0.25;
        let x = SurfacePoint::new(0.0, b);
        let full = conj.isotopy.chain.fiber_displacement(b);
        for s in [0.25, 0.5, 0.75] {
            let y = conj.isotopy.at(s).apply(x);
            let seen = circle_signed_delta(0.0, y.angle);
            let want = circle_signed_delta(0.0, (1.0 - s) * full);
            assert!(
                circle_signed_delta(seen, want).abs() < 1e-12,
                "stage {s}: saw {seen}, wanted {want}"
            );
        }
    }

    #[test]
    fn base_motion_inside_the_bump_is_rejected() {
        let h = DiffeoChain::identity()
            .then(ElementaryDiffeo::base_reparam(Profile::poly(vec![0.0, 0.5, 0.5])).unwrap());
        let err = isotope_conjugator(&h, &collar_bump()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn inverted_bump_polarity_is_rejected() {
        let bump = collar_bump().with_polarity(Polarity::ZeroInsideOneOutside);
        let err = isotope_conjugator(&DiffeoChain::identity(), &bump).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn untwisted_chain_conjugates_the_action_to_itself() {
        let nf = NormalForm::prime(
            SurfaceKind::Cylinder,
            Profile::poly(vec![1.0, -4.0, 4.0]),
        )
        .unwrap();
        let (v, w) = suggest_radii(&nf).unwrap();
        let unit = normalize_period(&build_h_field(&nf, v, w).unwrap()).unwrap();
        let action = circle_action(&unit).unwrap();
        let conj = isotope_conjugator(&twisting_chain(), &collar_bump()).unwrap();
        let defect = verify_conjugation(&action, &conj.h_tilde, 24);
        assert!(defect <= 1e-8, "conjugation defect {defect:.3e}");
    }
}
