//! Piecewise profiles: the 1-D functions `kappa`, shift amounts and base
//! reparameterizations are all values of this type.
//!
//! A profile is a list of segments over a partition of the normalized base.
//! Values are stored as *lifts*: a circle-valued profile evaluates to a real
//! number and is reduced mod 1 only where an angle is actually consumed.

use crate::base::{wrap_unit, BaseSpace, TargetSpace};
use crate::error::{Error, Result};
use crate::segment::Segment;
use serde::{Deserialize, Serialize};

fn default_max_order() -> usize {
    16
}

fn default_base() -> BaseSpace {
    BaseSpace::Interval
}

fn default_target() -> TargetSpace {
    TargetSpace::RealLine
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(default = "default_base")]
    pub base: BaseSpace,
    #[serde(default = "default_target")]
    pub target: TargetSpace,
    pub pieces: Vec<Segment>,
    /// Joint smoothness guaranteed at interior knots; per-segment symbolic
    /// derivatives exist to any order regardless.
    #[serde(default = "default_max_order")]
    pub max_derivative_order: usize,
}

/// Knots must agree to this absolute slack before they are snapped together.
const KNOT_SLACK: f64 = 1e-9;

impl Profile {
    /// Build and structurally validate a profile.
    pub fn new(base: BaseSpace, target: TargetSpace, pieces: Vec<Segment>) -> Result<Self> {
        let p = Profile {
            base,
            target,
            pieces,
            max_derivative_order: default_max_order(),
        };
        p.validate_structure()?;
        Ok(p)
    }

    /// Single polynomial piece on `[0, 1]`, interval base, real target.
    pub fn poly(coeffs: Vec<f64>) -> Self {
        Profile {
            base: BaseSpace::Interval,
            target: TargetSpace::RealLine,
            pieces: vec![Segment::poly(coeffs, [0.0, 1.0])],
            max_derivative_order: default_max_order(),
        }
    }

    /// Single trigonometric piece on the circle base.
    /// Coefficients are `[lin, c, a1, b1, ...]`; the drift must be an
    /// integer for the profile to close up.
    pub fn circle_trig(target: TargetSpace, coeffs: Vec<f64>) -> Result<Self> {
        Profile::new(
            BaseSpace::Circle,
            target,
            vec![Segment::trig(coeffs, [0.0, 1.0])],
        )
    }

    pub fn constant(c: f64) -> Self {
        Profile::poly(vec![c])
    }

    /// The identity profile t -> t.
    pub fn identity() -> Self {
        Profile::poly(vec![0.0, 1.0])
    }

    fn validate_structure(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::Validation("profile has no pieces".into()));
        }
        let first = self.pieces[0].domain();
        let last = self.pieces[self.pieces.len() - 1].domain();
        if first[0].abs() > KNOT_SLACK || (last[1] - 1.0).abs() > KNOT_SLACK {
            return Err(Error::Validation(format!(
                "piece domains must cover [0,1], got [{}, {}]",
                first[0], last[1]
            )));
        }
        for w in self.pieces.windows(2) {
            let a = w[0].domain();
            let b = w[1].domain();
            if (a[1] - b[0]).abs() > KNOT_SLACK {
                return Err(Error::Validation(format!(
                    "piece domains must form a partition; gap at {} vs {}",
                    a[1], b[0]
                )));
            }
        }
        for p in &self.pieces {
            let [a, b] = p.domain();
            if !(b > a) {
                return Err(Error::Validation(format!(
                    "piece domain [{a}, {b}] is empty or reversed"
                )));
            }
        }
        // Joint continuity at interior knots, relative to coefficient scale.
        let scale = self.coefficient_scale().max(1.0);
        for w in self.pieces.windows(2) {
            let knot = w[1].domain()[0];
            let l = w[0].value(knot);
            let r = w[1].value(knot);
            if (l - r).abs() > 1e-9 * scale {
                return Err(Error::Validation(format!(
                    "pieces disagree at knot {knot}: {l} vs {r}"
                )));
            }
        }
        if self.base == BaseSpace::Circle {
            let jump = self.raw_value(1.0) - self.raw_value(0.0);
            let ok = match self.target {
                TargetSpace::RealLine => jump.abs() <= 1e-9 * scale,
                TargetSpace::Circle => (jump - jump.round()).abs() <= 1e-9 * scale,
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "circle-base profile does not close up: f(1)-f(0) = {jump}"
                )));
            }
        }
        Ok(())
    }

    /// Index of the piece owning coordinate `t` (pieces own `[a, b)`, the
    /// last one also owns its right end).
    fn piece_index(&self, t: f64) -> usize {
        let n = self.pieces.len();
        for (i, p) in self.pieces.iter().enumerate() {
            if t < p.domain()[1] {
                return i;
            }
        }
        n - 1
    }

    /// Normalize an input coordinate into the base: wrap on the circle,
    /// clamp tiny overshoot on the interval.
    pub fn normalize_coord(&self, t: f64) -> f64 {
        match self.base {
            BaseSpace::Circle => wrap_unit(t),
            BaseSpace::Interval => t.clamp(0.0, 1.0),
        }
    }

    /// Check that `t` lies in the base (with tiny slack on the interval).
    pub fn check_coord(&self, t: f64) -> Result<()> {
        if self.base == BaseSpace::Interval && !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(Error::Domain(format!(
                "coordinate {t} outside the interval base"
            )));
        }
        Ok(())
    }

    /// Lift value without wrapping the input coordinate; `t` must already
    /// lie in `[0, 1]`. On the circle base this evaluates the lift, so
    /// `lift_value(1.0)` differs from `lift_value(0.0)` by the degree.
    pub fn lift_value(&self, t: f64) -> f64 {
        let idx = if t >= 1.0 {
            self.pieces.len() - 1
        } else {
            self.piece_index(t.max(0.0))
        };
        self.pieces[idx].value(t)
    }

    fn raw_value(&self, t: f64) -> f64 {
        self.lift_value(t)
    }

    /// Lift value at `t` (no mod-1 reduction of the output).
    pub fn value(&self, t: f64) -> f64 {
        let t = self.normalize_coord(t);
        self.pieces[self.piece_index(t)].value(t)
    }

    /// Value reduced into the target: mod 1 for circle targets.
    pub fn target_value(&self, t: f64) -> f64 {
        match self.target {
            TargetSpace::RealLine => self.value(t),
            TargetSpace::Circle => wrap_unit(self.value(t)),
        }
    }

    /// Exact `order`-th derivative at `t` (one-sided from the owning piece
    /// at knots).
    pub fn derivative_value(&self, t: f64, order: usize) -> f64 {
        let t = self.normalize_coord(t);
        self.pieces[self.piece_index(t)].derivative_value(t, order)
    }

    /// Exact symbolic derivative as a profile. The derivative of a
    /// circle-valued profile is real-valued.
    pub fn derivative_profile(&self) -> Profile {
        Profile {
            base: self.base,
            target: TargetSpace::RealLine,
            pieces: self.pieces.iter().map(|p| p.derivative()).collect(),
            max_derivative_order: self.max_derivative_order,
        }
    }

    /// Antiderivative with value `c0` at base coordinate 0, glued
    /// continuously across pieces. Fails for trig pieces with drift.
    pub fn antiderivative_profile(&self, c0: f64, target: TargetSpace) -> Result<Profile> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut level = c0;
        for p in &self.pieces {
            let anti = p.antiderivative(level).ok_or_else(|| {
                Error::Validation("cannot integrate a drifting trig segment".into())
            })?;
            level = anti.value(p.domain()[1]);
            pieces.push(anti);
        }
        Ok(Profile {
            base: self.base,
            target,
            pieces,
            max_derivative_order: self.max_derivative_order,
        })
    }

    /// Interior knots (piece boundaries), excluding 0 and 1.
    pub fn interior_knots(&self) -> Vec<f64> {
        self.pieces
            .windows(2)
            .map(|w| w[1].domain()[0])
            .collect()
    }

    pub fn coefficient_scale(&self) -> f64 {
        self.pieces
            .iter()
            .fold(0.0f64, |acc, p| acc.max(p.coefficient_scale()))
            .max(1e-30)
    }

    /// True when any coefficient or domain bound is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.pieces.iter().any(|p| {
            !p.domain().iter().all(|d| d.is_finite())
                || !p.all_coefficients().iter().all(|c| c.is_finite())
        })
    }

    /// Coefficient scale of the piece owning `t`, the reference for relative
    /// tolerances at that point. Piece-local so that one large-coefficient
    /// piece does not loosen comparisons elsewhere.
    pub fn local_scale(&self, t: f64) -> f64 {
        let t = self.normalize_coord(t);
        self.pieces[self.piece_index(t)]
            .coefficient_scale()
            .max(1e-30)
    }

    /// Winding number of a circle-valued profile on the circle base.
    pub fn degree(&self) -> i64 {
        if self.target != TargetSpace::Circle {
            return 0;
        }
        (self.raw_value(1.0) - self.raw_value(0.0)).round() as i64
    }

    /// Multiply the function by a constant.
    pub fn scaled(&self, s: f64) -> Profile {
        Profile {
            base: self.base,
            target: self.target,
            pieces: self.pieces.iter().map(|p| p.scaled(s)).collect(),
            max_derivative_order: self.max_derivative_order,
        }
    }

    /// Add a constant to the function.
    pub fn shifted(&self, s: f64) -> Profile {
        Profile {
            base: self.base,
            target: self.target,
            pieces: self.pieces.iter().map(|p| p.shifted(s)).collect(),
            max_derivative_order: self.max_derivative_order,
        }
    }

    /// Replace the function on `[a, b]` with new segments (which must cover
    /// exactly `[a, b]`); pieces outside are kept bit-identical. Joint
    /// smoothness at the splice knots drops to whatever the new segments
    /// provide.
    pub fn window_replace(&self, a: f64, b: f64, new: Vec<Segment>) -> Result<Profile> {
        if !(a < b) || a < -1e-12 || b > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("bad replacement window [{a}, {b}]")));
        }
        // Left parts, then the window, then right parts.
        let mut rebuilt: Vec<Segment> = Vec::new();
        for p in &self.pieces {
            let [lo, hi] = p.domain();
            if hi <= a + 1e-15 {
                rebuilt.push(p.clone());
            } else if lo < a - 1e-15 {
                rebuilt.push(p.restricted(lo, a));
            }
        }
        for s in &new {
            rebuilt.push(s.clone());
        }
        for p in &self.pieces {
            let [lo, hi] = p.domain();
            if lo >= b - 1e-15 {
                rebuilt.push(p.clone());
            } else if hi > b + 1e-15 {
                rebuilt.push(p.restricted(b, hi));
            }
        }
        let out = Profile {
            base: self.base,
            target: self.target,
            pieces: rebuilt,
            max_derivative_order: 2,
        };
        out.validate_structure()?;
        Ok(out)
    }

    /// The segments of this profile restricted to `[a, b]`.
    pub fn segments_on(&self, a: f64, b: f64) -> Vec<Segment> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let [lo, hi] = p.domain();
            let s = lo.max(a);
            let e = hi.min(b);
            if e > s + 1e-15 {
                out.push(p.restricted(s, e));
            }
        }
        out
    }

    /// Uniform samples (n+1 points on the interval, n on the circle).
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        match self.base {
            BaseSpace::Interval => (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    (t, self.value(t))
                })
                .collect(),
            BaseSpace::Circle => (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    (t, self.value(t))
                })
                .collect(),
        }
    }
}
