//! The normal form `f = kappa ∘ f0 ∘ h^{-1}`.
//!
//! `f0` is the prime function of the surface (the base coordinate in band
//! coordinates), `kappa` a 1-D profile on the base, and `h` a
//! fiber-preserving chain. Because every chain element carries the base
//! coordinate independently of the angle, evaluation reduces to
//! `f(z, b) = kappa(B^{-1}(b))` with `B` the forward base map of the chain.

use crate::base::{wrap_unit, TargetSpace};
use crate::diffeo::DiffeoChain;
use crate::error::{Error, Result};
use crate::point::SurfacePoint;
use crate::profile::Profile;
use crate::records::{
    CriticalCircleRecord, ExtremalKind, ExtremumLocation, IsolatedExtremumRecord,
};
use crate::surface::{Surface, SurfaceKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormalFormRepr", into = "NormalFormRepr")]
pub struct NormalForm {
    pub surface: Surface,
    pub profile: Profile,
    pub chain: DiffeoChain,
}

/// Wire format: the surface is a plain tag; base and target spaces travel
/// inside the profile.
#[derive(Serialize, Deserialize)]
struct NormalFormRepr {
    surface: SurfaceKind,
    profile: Profile,
    #[serde(default)]
    diffeo: DiffeoChain,
}

impl TryFrom<NormalFormRepr> for NormalForm {
    type Error = Error;

    fn try_from(r: NormalFormRepr) -> Result<NormalForm> {
        NormalForm::new(r.surface, r.profile, r.diffeo)
    }
}

impl From<NormalForm> for NormalFormRepr {
    fn from(nf: NormalForm) -> NormalFormRepr {
        NormalFormRepr {
            surface: nf.surface.kind,
            profile: nf.profile,
            diffeo: nf.chain,
        }
    }
}

impl NormalForm {
    /// Build a normal form, checking the structural compatibility of the
    /// three parts (base spaces agree, the chain is valid on the surface).
    pub fn new(kind: SurfaceKind, profile: Profile, chain: DiffeoChain) -> Result<Self> {
        let surface = Surface::new(kind, profile.target);
        if profile.base != surface.base {
            return Err(Error::Validation(format!(
                "profile base {:?} does not match the {} base {:?}",
                profile.base,
                kind.name(),
                surface.base
            )));
        }
        if kind != SurfaceKind::Torus && profile.target == TargetSpace::Circle {
            // Functions on simply-connected-base surfaces lift; keep the
            // real-valued representative.
            return Err(Error::Validation(
                "circle-valued profiles are only admitted on the torus".into(),
            ));
        }
        let nf = NormalForm {
            surface,
            profile,
            chain,
        };
        nf.chain.validate_for(&nf.surface)?;
        Ok(nf)
    }

    /// Normal form with the identity chain.
    pub fn prime(kind: SurfaceKind, profile: Profile) -> Result<Self> {
        NormalForm::new(kind, profile, DiffeoChain::identity())
    }

    /// Value of `f` at a band-coordinate point (reduced mod 1 for circle
    /// targets).
    pub fn evaluate(&self, pt: SurfacePoint) -> Result<f64> {
        let lift = self.evaluate_lift(pt)?;
        Ok(match self.profile.target {
            TargetSpace::RealLine => lift,
            TargetSpace::Circle => wrap_unit(lift),
        })
    }

    /// Lift value of `f` (no mod-1 reduction).
    pub fn evaluate_lift(&self, pt: SurfacePoint) -> Result<f64> {
        let pt = SurfacePoint::on_surface(self.surface.kind, pt.angle, pt.base)?;
        let prime_base = self.chain.base_inverse(pt.base);
        Ok(self.profile.value(prime_base))
    }

    /// Critical circles of `f` in surface coordinates: profile records with
    /// base positions pushed through the base map of the chain, re-sorted.
    /// Levels, orders and kinds are invariant under the conjugation.
    pub fn critical_circles(&self) -> Result<Vec<CriticalCircleRecord>> {
        let mut records = crate::analysis::find_critical_points(&self.profile)?;
        for r in records.iter_mut() {
            r.base_position = self.chain.base_forward(r.base_position);
        }
        records.sort_by(|a, b| a.base_position.partial_cmp(&b.base_position).unwrap());
        Ok(records)
    }

    /// Recover the profile from the composed function: the transversal
    /// arc through the chain image of the zero-angle section satisfies
    /// `f(h(0, s)) = κ(s)` identically, so sampling along it reads the
    /// profile back without touching any coefficient. Returns `(s, κ(s))`
    /// pairs at `samples` evenly spaced parameters.
    pub fn extract_profile(&self, samples: usize) -> Result<Vec<(f64, f64)>> {
        let n = samples.max(2);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let s = i as f64 / (n - 1) as f64;
            let pt = self.chain.apply(SurfacePoint::new(0.0, s));
            out.push((s, self.evaluate(pt)?));
        }
        Ok(out)
    }

    /// The isolated extrema of the surface with their levels and kinds.
    pub fn isolated_extrema(&self) -> Vec<IsolatedExtremumRecord> {
        self.surface
            .geometry()
            .extrema_locations()
            .iter()
            .map(|loc| {
                let b = loc.base_coordinate();
                let t = self.chain.base_inverse(b);
                let level = self.profile.value(t);
                // Slope of f in the base direction pointing away from the
                // pole; the pole is a minimum iff f grows along it.
                let jac = safe_inverse_jacobian(&self.chain, b);
                let slope = self.profile.derivative_value(t, 1) * jac;
                let outward = match loc {
                    ExtremumLocation::SphereNorth => -1.0,
                    _ => 1.0,
                };
                let kind = if slope * outward > 0.0 {
                    ExtremalKind::Minimum
                } else {
                    ExtremalKind::Maximum
                };
                IsolatedExtremumRecord {
                    location: *loc,
                    kind,
                    level,
                }
            })
            .collect()
    }
}

/// Sign-stable derivative of the inverse base map; tolerates
/// endpoint-degenerate reparametrizations (where the forward derivative
/// vanishes at an interval end, the inverse slope is +infinity, which is
/// fine for sign decisions).
fn safe_inverse_jacobian(chain: &DiffeoChain, b: f64) -> f64 {
    let t = chain.base_inverse(b);
    let fwd = chain.base_forward_derivative(t);
    if fwd == 0.0 {
        f64::INFINITY
    } else {
        1.0 / fwd
    }
}
