//! Polynomial and trigonometric segments with exact symbolic derivatives.
//!
//! A segment is one piece of a profile, valid on a sub-interval of the
//! normalized base. Polynomials are stored in the global base coordinate
//! (monomial basis), so restricting a segment to a narrower domain never
//! changes its coefficients. Trigonometric segments hold a linear drift
//! term plus a finite harmonic series:
//!
//! ```text
//! s(t) = lin*t + c + sum_k ( a_k cos(k*omega*t) + b_k sin(k*omega*t) )
//! ```
//!
//! with coefficients stored as `[lin, c, a1, b1, a2, b2, ...]`. The drift
//! term is what lets a circle-valued profile carry a nonzero degree, and a
//! free `omega` (default `2*pi`) admits functions like `cos(x)` ingested
//! from non-unit intervals.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn default_omega() -> f64 {
    TAU
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    Poly {
        coeffs: Vec<f64>,
        domain: [f64; 2],
    },
    Trig {
        coeffs: Vec<f64>,
        domain: [f64; 2],
        #[serde(default = "default_omega")]
        omega: f64,
    },
}

impl Segment {
    pub fn poly(coeffs: Vec<f64>, domain: [f64; 2]) -> Self {
        Segment::Poly { coeffs, domain }
    }

    pub fn trig(coeffs: Vec<f64>, domain: [f64; 2]) -> Self {
        Segment::Trig {
            coeffs,
            domain,
            omega: TAU,
        }
    }

    pub fn trig_with_omega(coeffs: Vec<f64>, domain: [f64; 2], omega: f64) -> Self {
        Segment::Trig {
            coeffs,
            domain,
            omega,
        }
    }

    /// Constant-zero segment.
    pub fn zero(domain: [f64; 2]) -> Self {
        Segment::Poly {
            coeffs: vec![],
            domain,
        }
    }

    pub fn domain(&self) -> [f64; 2] {
        match self {
            Segment::Poly { domain, .. } | Segment::Trig { domain, .. } => *domain,
        }
    }

    pub fn set_domain(&mut self, d: [f64; 2]) {
        match self {
            Segment::Poly { domain, .. } | Segment::Trig { domain, .. } => *domain = d,
        }
    }

    /// Same function, narrower domain. Valid because coefficients are stored
    /// in the global coordinate.
    pub fn restricted(&self, a: f64, b: f64) -> Self {
        let mut s = self.clone();
        s.set_domain([a, b]);
        s
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative_value(t, 0)
    }

    /// Exact `order`-th derivative at `t`.
    pub fn derivative_value(&self, t: f64, order: usize) -> f64 {
        match self {
            Segment::Poly { coeffs, .. } => poly_derivative_value(coeffs, t, order),
            Segment::Trig { coeffs, omega, .. } => trig_derivative_value(coeffs, *omega, t, order),
        }
    }

    /// Exact symbolic derivative, as a segment of the same family.
    pub fn derivative(&self) -> Self {
        match self {
            Segment::Poly { coeffs, domain } => Segment::Poly {
                coeffs: poly_derivative(coeffs),
                domain: *domain,
            },
            Segment::Trig {
                coeffs,
                domain,
                omega,
            } => Segment::Trig {
                coeffs: trig_derivative(coeffs, *omega),
                domain: *domain,
                omega: *omega,
            },
        }
    }

    /// Exact antiderivative with value `value_at` at the left end of the
    /// domain. For trig segments the drift coefficient must be zero
    /// (a quadratic drift leaves the family).
    pub fn antiderivative(&self, value_at_left: f64) -> Option<Self> {
        let [lo, _] = self.domain();
        match self {
            Segment::Poly { coeffs, domain } => {
                let mut anti = vec![0.0];
                for (k, c) in coeffs.iter().enumerate() {
                    anti.push(c / (k as f64 + 1.0));
                }
                let shift = value_at_left - poly_derivative_value(&anti, lo, 0);
                anti[0] += shift;
                Some(Segment::Poly {
                    coeffs: anti,
                    domain: *domain,
                })
            }
            Segment::Trig {
                coeffs,
                domain,
                omega,
            } => {
                let lin = coeffs.first().copied().unwrap_or(0.0);
                if lin != 0.0 {
                    return None;
                }
                let c0 = coeffs.get(1).copied().unwrap_or(0.0);
                let mut anti = vec![c0, 0.0];
                let mut k = 1usize;
                while 2 * k < coeffs.len() {
                    let a = coeffs[2 * k];
                    let b = coeffs.get(2 * k + 1).copied().unwrap_or(0.0);
                    let w = k as f64 * omega;
                    // int a cos(wt) + b sin(wt) = (a/w) sin(wt) - (b/w) cos(wt)
                    anti.push(-b / w);
                    anti.push(a / w);
                    k += 1;
                }
                let mut seg = Segment::Trig {
                    coeffs: anti,
                    domain: *domain,
                    omega: *omega,
                };
                let shift = value_at_left - seg.value(lo);
                if let Segment::Trig { coeffs, .. } = &mut seg {
                    coeffs[1] += shift;
                }
                Some(seg)
            }
        }
    }

    /// Multiply the function by a constant.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Segment::Poly { coeffs, .. } | Segment::Trig { coeffs, .. } => {
                for c in coeffs.iter_mut() {
                    *c *= s;
                }
            }
        }
        out
    }

    /// Add a constant to the function.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Segment::Poly { coeffs, .. } => {
                if coeffs.is_empty() {
                    coeffs.push(s);
                } else {
                    coeffs[0] += s;
                }
            }
            Segment::Trig { coeffs, .. } => {
                while coeffs.len() < 2 {
                    coeffs.push(0.0);
                }
                coeffs[1] += s;
            }
        }
        out
    }

    /// True when every coefficient is exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Segment::Poly { coeffs, .. } | Segment::Trig { coeffs, .. } => {
                coeffs.iter().all(|c| *c == 0.0)
            }
        }
    }

    /// Largest coefficient magnitude; feeds the relative tolerance ladder.
    pub fn coefficient_scale(&self) -> f64 {
        match self {
            Segment::Poly { coeffs, .. } | Segment::Trig { coeffs, .. } => coeffs
                .iter()
                .fold(0.0f64, |acc, c| acc.max(c.abs())),
        }
    }

    /// All stored coefficients, for finiteness checks.
    pub fn all_coefficients(&self) -> &[f64] {
        match self {
            Segment::Poly { coeffs, .. } | Segment::Trig { coeffs, .. } => coeffs,
        }
    }

    /// Linear drift of a trig segment (0 for polynomials); the winding
    /// contribution of circle-valued pieces.
    pub fn drift(&self) -> f64 {
        match self {
            Segment::Poly { .. } => 0.0,
            Segment::Trig { coeffs, .. } => coeffs.first().copied().unwrap_or(0.0),
        }
    }
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn poly_derivative_value(coeffs: &[f64], t: f64, order: usize) -> f64 {
    if order >= coeffs.len() {
        return 0.0;
    }
    // Horner on the symbolically differentiated coefficients. The falling
    // factorial k (k-1) ... (k-order+1) is exact in f64 for modest degrees.
    let mut acc = 0.0;
    for k in (order..coeffs.len()).rev() {
        let mut fall = 1.0;
        for j in 0..order {
            fall *= (k - j) as f64;
        }
        acc = acc * t + coeffs[k] * fall;
    }
    acc
}

fn trig_derivative(coeffs: &[f64], omega: f64) -> Vec<f64> {
    let lin = coeffs.first().copied().unwrap_or(0.0);
    let mut out = vec![0.0, lin];
    let mut k = 1usize;
    while 2 * k < coeffs.len() {
        let a = coeffs[2 * k];
        let b = coeffs.get(2 * k + 1).copied().unwrap_or(0.0);
        let w = k as f64 * omega;
        // d/dt (a cos + b sin) = (b w) cos - (a w) sin
        out.push(b * w);
        out.push(-a * w);
        k += 1;
    }
    out
}

fn trig_derivative_value(coeffs: &[f64], omega: f64, t: f64, order: usize) -> f64 {
    let lin = coeffs.first().copied().unwrap_or(0.0);
    let c0 = coeffs.get(1).copied().unwrap_or(0.0);
    let mut acc = match order {
        0 => lin * t + c0,
        1 => lin,
        _ => 0.0,
    };
    let mut k = 1usize;
    while 2 * k < coeffs.len() {
        let mut a = coeffs[2 * k];
        let mut b = coeffs.get(2 * k + 1).copied().unwrap_or(0.0);
        let w = k as f64 * omega;
        for _ in 0..order {
            let (na, nb) = (b * w, -a * w);
            a = na;
            b = nb;
        }
        let u = w * t;
        acc += a * u.cos() + b * u.sin();
        k += 1;
    }
    acc
}

/// Multiply two monomial-basis polynomials.
pub fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return vec![];
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Add two monomial-basis polynomials.
pub fn poly_add(p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| p.get(i).copied().unwrap_or(0.0) + q.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Expand `p(c0 + c1*x)` into a polynomial in `x`.
pub fn poly_compose_affine(p: &[f64], c0: f64, c1: f64) -> Vec<f64> {
    let mut out = vec![];
    // Horner: p = a_n; p = p*(c0 + c1 x) + a_k
    for &a in p.iter().rev() {
        out = poly_mul(&out, &[c0, c1]);
        if out.is_empty() {
            out.push(a);
        } else {
            out[0] += a;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_eval_and_derivatives() {
        // p(t) = 1 - 2t + 3t^2
        let s = Segment::poly(vec![1.0, -2.0, 3.0], [0.0, 1.0]);
        assert_eq!(s.value(0.0), 1.0);
        assert_eq!(s.value(1.0), 2.0);
        assert_eq!(s.derivative_value(0.5, 1), 1.0);
        assert_eq!(s.derivative_value(0.2, 2), 6.0);
        assert_eq!(s.derivative_value(0.2, 3), 0.0);
        let d = s.derivative();
        assert_eq!(d.value(0.5), 1.0);
    }

    #[test]
    fn trig_eval_and_derivatives() {
        // s(t) = cos(2 pi t)
        let s = Segment::trig(vec![0.0, 0.0, 1.0, 0.0], [0.0, 1.0]);
        assert!((s.value(0.0) - 1.0).abs() < 1e-15);
        assert!(s.value(0.25).abs() < 1e-15);
        // s'(t) = -2 pi sin(2 pi t): at t = 0.25 equals -2 pi
        assert!((s.derivative_value(0.25, 1) + TAU).abs() < 1e-12);
        // s''(0) = -(2 pi)^2
        assert!((s.derivative_value(0.0, 2) + TAU * TAU).abs() < 1e-10);
        let d = s.derivative();
        assert!((d.value(0.25) + TAU).abs() < 1e-12);
    }

    #[test]
    fn trig_drift_and_antiderivative() {
        // s(t) = 1 + cos(2 pi t); antiderivative from 0: t + sin(2 pi t)/(2 pi)
        let s = Segment::trig(vec![0.0, 1.0, 1.0, 0.0], [0.0, 1.0]);
        let a = s.antiderivative(0.0).unwrap();
        assert!((a.value(1.0) - 1.0).abs() < 1e-14);
        assert!((a.value(0.25) - (0.25 + 1.0 / TAU)).abs() < 1e-14);
        assert_eq!(a.drift(), 1.0);
    }

    #[test]
    fn poly_antiderivative_matches() {
        let s = Segment::poly(vec![0.0, 2.0], [0.0, 1.0]); // 2t
        let a = s.antiderivative(1.0).unwrap(); // t^2 + 1
        assert_eq!(a.value(0.0), 1.0);
        assert_eq!(a.value(1.0), 2.0);
    }

    #[test]
    fn affine_composition() {
        // p(x) = x^2, composed with x = 2u - 1: (2u-1)^2 = 1 - 4u + 4u^2
        let out = poly_compose_affine(&[0.0, 0.0, 1.0], -1.0, 2.0);
        assert_eq!(out, vec![1.0, -4.0, 4.0]);
    }

    #[test]
    fn json_shape() {
        let s = Segment::poly(vec![0.0, 1.0], [0.0, 0.5]);
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["kind"], "poly");
        let back: Segment = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
        let t = Segment::trig(vec![1.0, 0.0], [0.0, 1.0]);
        let j = serde_json::to_value(&t).unwrap();
        assert_eq!(j["kind"], "trig");
        let back: Segment = serde_json::from_value(j).unwrap();
        assert_eq!(back, t);
    }
}
