//! Smooth window bumps built from the standard `exp(-1/x)` gluing.
//!
//! A bump is a sum of per-interval plateaus: exactly 1 on each plateau,
//! exactly 0 outside the enclosing support, smoothly ramped in between.
//! Supports must be pairwise disjoint so the sum stays in `[0, 1]`.
//! Value and the first two derivatives are coded explicitly; no operation
//! needs higher ones.

use crate::base::{wrap_unit, BaseSpace};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    OneInsideZeroOutside,
    ZeroInsideOneOutside,
}

/// One plateau-with-ramps window. On a circle base the support may wrap
/// (`support[0] > support[1]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpWindow {
    pub support: [f64; 2],
    pub plateau: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub base: BaseSpace,
    pub windows: Vec<BumpWindow>,
    pub polarity: Polarity,
}

/// `exp(-1/x)` for positive x, 0 otherwise; with first two derivatives.
fn sigma(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = (-1.0 / x).exp();
    let x2 = x * x;
    let d1 = s / x2;
    let d2 = s * (1.0 - 2.0 * x) / (x2 * x2);
    (s, d1, d2)
}

/// Smooth step: 0 for x <= 0, 1 for x >= 1. Returns (value, d1, d2).
fn smooth_step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (u, du, ddu) = sigma(x);
    let (v, dv_raw, ddv_raw) = sigma(1.0 - x);
    let dv = -dv_raw;
    let ddv = ddv_raw;
    let w = u + v;
    let s = u / w;
    // s' = (u'v - uv') / w^2
    let num1 = du * v - u * dv;
    let d1 = num1 / (w * w);
    // s'' = [(u''v - uv'')w - 2(u'v - uv')(u' + v')] / w^3
    let num2 = (ddu * v - u * ddv) * w - 2.0 * num1 * (du + dv);
    let d2 = num2 / (w * w * w);
    (s, d1, d2)
}

impl BumpWindow {
    fn width_ok(&self) -> bool {
        let [slo, shi] = self.support;
        let [plo, phi] = self.plateau;
        // Local coordinates: on a wrapping window everything is shifted so
        // the support reads [slo, shi + 1].
        let shi_l = if shi < slo { shi + 1.0 } else { shi };
        let plo_l = if plo < slo { plo + 1.0 } else { plo };
        let phi_l = if phi < plo_l - 1e-12 { phi + 1.0 } else { phi };
        slo <= plo_l + 1e-12 && plo_l <= phi_l + 1e-12 && phi_l <= shi_l + 1e-12
    }

    /// (value, d1, d2) of the window bump at local coordinate `b`.
    fn eval(&self, b: f64, base: BaseSpace) -> (f64, f64, f64) {
        let [slo, shi] = self.support;
        let [plo, phi] = self.plateau;
        let wraps = shi < slo;
        let (shi, plo, phi, b) = if wraps {
            let shift = |x: f64| if x < slo - 1e-12 { x + 1.0 } else { x };
            let mut bl = b;
            if base == BaseSpace::Circle {
                bl = wrap_unit(b);
                if bl < slo - 1e-12 {
                    bl += 1.0;
                }
            }
            (shi + 1.0, shift(plo), shift(phi), bl)
        } else {
            let bl = if base == BaseSpace::Circle { wrap_unit(b) } else { b };
            (shi, plo, phi, bl)
        };
        if b < slo || b > shi {
            return (0.0, 0.0, 0.0);
        }
        if b < plo {
            let w = plo - slo;
            if w <= 0.0 {
                return (1.0, 0.0, 0.0);
            }
            let (s, d1, d2) = smooth_step((b - slo) / w);
            return (s, d1 / w, d2 / (w * w));
        }
        if b > phi {
            let w = shi - phi;
            if w <= 0.0 {
                return (1.0, 0.0, 0.0);
            }
            let (s, d1, d2) = smooth_step((shi - b) / w);
            return (s, -d1 / w, d2 / (w * w));
        }
        (1.0, 0.0, 0.0)
    }
}

impl BumpFunction {
    pub fn new(base: BaseSpace, windows: Vec<BumpWindow>, polarity: Polarity) -> Result<Self> {
        for w in &windows {
            if !w.width_ok() {
                return Err(Error::Validation(format!(
                    "bump plateau {:?} not nested in support {:?}",
                    w.plateau, w.support
                )));
            }
        }
        // Disjoint supports keep the sum within [0, 1]; a coarse sample
        // check is enough for construction-time validation.
        let bump = BumpFunction {
            base,
            windows,
            polarity,
        };
        for i in 0..=200 {
            let b = i as f64 / 200.0;
            let v = bump.value(b);
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Validation(
                    "bump windows overlap: value escapes [0, 1]".into(),
                ));
            }
        }
        Ok(bump)
    }

    /// Single window, 1 inside the plateau.
    pub fn plateau(base: BaseSpace, support: [f64; 2], plateau: [f64; 2]) -> Result<Self> {
        BumpFunction::new(
            base,
            vec![BumpWindow { support, plateau }],
            Polarity::OneInsideZeroOutside,
        )
    }

    pub fn with_polarity(mut self, polarity: Polarity) -> Self {
        self.polarity = polarity;
        self
    }

    fn raw(&self, b: f64) -> (f64, f64, f64) {
        let mut acc = (0.0, 0.0, 0.0);
        for w in &self.windows {
            let (v, d1, d2) = w.eval(b, self.base);
            acc.0 += v;
            acc.1 += d1;
            acc.2 += d2;
        }
        acc
    }

    pub fn value(&self, b: f64) -> f64 {
        let (v, _, _) = self.raw(b);
        match self.polarity {
            Polarity::OneInsideZeroOutside => v,
            Polarity::ZeroInsideOneOutside => 1.0 - v,
        }
    }

    pub fn derivative(&self, b: f64) -> f64 {
        let (_, d1, _) = self.raw(b);
        match self.polarity {
            Polarity::OneInsideZeroOutside => d1,
            Polarity::ZeroInsideOneOutside => -d1,
        }
    }

    pub fn second_derivative(&self, b: f64) -> f64 {
        let (_, _, d2) = self.raw(b);
        match self.polarity {
            Polarity::OneInsideZeroOutside => d2,
            Polarity::ZeroInsideOneOutside => -d2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support_are_exact() {
        let b = BumpFunction::plateau(BaseSpace::Interval, [0.2, 0.8], [0.4, 0.6]).unwrap();
        assert_eq!(b.value(0.5), 1.0);
        assert_eq!(b.value(0.4), 1.0);
        assert_eq!(b.value(0.1), 0.0);
        assert_eq!(b.value(0.9), 0.0);
        let v = b.value(0.3);
        assert!(v > 0.0 && v < 1.0);
        let flipped = b.clone().with_polarity(Polarity::ZeroInsideOneOutside);
        assert_eq!(flipped.value(0.5), 0.0);
        assert_eq!(flipped.value(0.1), 1.0);
    }

    #[test]
    fn half_open_window_at_interval_end() {
        // Support and plateau both starting at 0: no left ramp.
        let b = BumpFunction::plateau(BaseSpace::Interval, [0.0, 0.4], [0.0, 0.2]).unwrap();
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(0.2), 1.0);
        assert!(b.value(0.3) < 1.0);
        assert_eq!(b.value(0.5), 0.0);
    }

    #[test]
    fn wrapping_window_on_circle() {
        let b = BumpFunction::plateau(BaseSpace::Circle, [0.9, 0.2], [0.95, 0.1]).unwrap();
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(0.97), 1.0);
        assert_eq!(b.value(0.5), 0.0);
        assert!(b.value(0.15) > 0.0 && b.value(0.15) < 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = BumpFunction::plateau(BaseSpace::Interval, [0.2, 0.8], [0.45, 0.55]).unwrap();
        let h = 1e-6;
        for t in [0.25, 0.3, 0.45, 0.6, 0.7, 0.79] {
            let fd1 = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
            let fd2 = (b.value(t + h) - 2.0 * b.value(t) + b.value(t - h)) / (h * h);
            assert!(
                (b.derivative(t) - fd1).abs() < 1e-5 * (1.0 + fd1.abs()),
                "d1 mismatch at {t}: {} vs {}",
                b.derivative(t),
                fd1
            );
            assert!(
                (b.second_derivative(t) - fd2).abs() < 1e-3 * (1.0 + fd2.abs()),
                "d2 mismatch at {t}: {} vs {}",
                b.second_derivative(t),
                fd2
            );
        }
    }

    #[test]
    fn overlap_rejected() {
        let bad = BumpFunction::new(
            BaseSpace::Interval,
            vec![
                BumpWindow {
                    support: [0.1, 0.5],
                    plateau: [0.2, 0.4],
                },
                BumpWindow {
                    support: [0.3, 0.7],
                    plateau: [0.4, 0.6],
                },
            ],
            Polarity::OneInsideZeroOutside,
        );
        assert!(bad.is_err());
    }
}
