//! Base/target space tags and circle arithmetic helpers.
//!
//! Every profile lives over a normalized base: the unit interval `[0, 1]`
//! or the unit circle `R/Z`. Fiber angles likewise live in `[0, 1)`.

use serde::{Deserialize, Serialize};

/// Domain of a profile: the normalized interval or the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseSpace {
    Interval,
    Circle,
}

/// Codomain of a profile: the real line or the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSpace {
    #[serde(rename = "real")]
    RealLine,
    Circle,
}

/// Reduce to `[0, 1)`. Values that land exactly on 1.0 after rounding wrap to 0.
pub fn wrap_unit(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Distance on `R/Z` (at most 1/2).
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    d.min(1.0 - d)
}

/// Signed difference `a - b` on `R/Z`, in `(-1/2, 1/2]`.
pub fn circle_signed_delta(a: f64, b: f64) -> f64 {
    let d = wrap_unit(a - b);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Distance between base coordinates, respecting circle wrap-around.
pub fn base_dist(space: BaseSpace, a: f64, b: f64) -> f64 {
    match space {
        BaseSpace::Interval => (a - b).abs(),
        BaseSpace::Circle => circle_dist(a, b),
    }
}

/// Affine chart `[lo, hi] -> [0, 1]` used when ingesting profiles stated on
/// other intervals. Keeps enough data to report results back in the original
/// coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineFrame {
    pub lo: f64,
    pub hi: f64,
}

impl AffineFrame {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "degenerate frame");
        AffineFrame { lo, hi }
    }

    /// The identity frame on [0, 1].
    pub fn unit() -> Self {
        AffineFrame { lo: 0.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Original coordinate -> normalized coordinate.
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.lo) / self.width()
    }

    /// Normalized coordinate -> original coordinate.
    pub fn from_unit(&self, t: f64) -> f64 {
        self.lo + t * self.width()
    }
}

/// Bisection root finding for a continuous function with a sign change on
/// `[lo, hi]`. Returns the midpoint of the final bracket of width <= `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(flo * fhi < 0.0, "bisect requires a sign change");
    // 64 iterations reach f64 resolution from any unit-scale bracket.
    for _ in 0..64 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}
