//! Interpolation and small linear-algebra helpers for witness and window
//! construction.

use crate::error::{Error, Result};
use crate::segment::{poly_compose_affine, Segment};

/// Solve a small dense system `A x = b` by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>> {
    for col in 0..n {
        // pivot
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return Err(Error::Validation("singular linear system".into()));
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * x[c];
        }
        x[col] = s / a[col * n + col];
    }
    Ok(x)
}

/// Monotone piecewise-cubic interpolation (Fritsch-Carlson slopes) through
/// strictly increasing knots with monotone values (either direction).
/// Returns polynomial segments in the global coordinate.
pub fn monotone_cubic_segments(x: &[f64], y: &[f64]) -> Result<Vec<Segment>> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Validation("need at least two interpolation knots".into()));
    }
    for w in x.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation("interpolation knots must increase".into()));
        }
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let sec: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = sec[0];
    d[n - 1] = sec[n - 2];
    for i in 1..n - 1 {
        if sec[i - 1] * sec[i] <= 0.0 {
            d[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
        }
    }
    // clamp ends to preserve monotonicity
    for (i, s) in [(0usize, sec[0]), (n - 1, sec[n - 2])] {
        if d[i] * s <= 0.0 {
            d[i] = 0.0;
        } else if d[i].abs() > 3.0 * s.abs() {
            d[i] = 3.0 * s;
        }
    }
    let mut segs = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        // cubic Hermite in local u = t - x[i]
        let hi = h[i];
        let (y0, d0, d1) = (y[i], d[i], d[i + 1]);
        let c0 = y0;
        let c1 = d0;
        let c2 = (3.0 * sec[i] - 2.0 * d0 - d1) / hi;
        let c3 = (d0 + d1 - 2.0 * sec[i]) / (hi * hi);
        let global = poly_compose_affine(&[c0, c1, c2, c3], -x[i], 1.0);
        segs.push(Segment::poly(global, [x[i], x[i + 1]]));
    }
    Ok(segs)
}

/// Piecewise-cubic Hermite interpolation through strictly increasing knots
/// with prescribed slopes. Fourth-order accurate when the slopes are exact,
/// unlike the Fritsch-Carlson estimate. Returns global-coordinate segments.
pub fn hermite_cubic_segments(x: &[f64], y: &[f64], d: &[f64]) -> Result<Vec<Segment>> {
    let n = x.len();
    if n < 2 || y.len() != n || d.len() != n {
        return Err(Error::Validation("need at least two interpolation knots".into()));
    }
    for w in x.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Validation("interpolation knots must increase".into()));
        }
    }
    let mut segs = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        let sec = (y[i + 1] - y[i]) / h;
        let (c0, c1) = (y[i], d[i]);
        let c2 = (3.0 * sec - 2.0 * d[i] - d[i + 1]) / h;
        let c3 = (d[i] + d[i + 1] - 2.0 * sec) / (h * h);
        let global = poly_compose_affine(&[c0, c1, c2, c3], -x[i], 1.0);
        segs.push(Segment::poly(global, [x[i], x[i + 1]]));
    }
    Ok(segs)
}

/// Quintic matching prescribed 2-jets at both ends of `[a, b]`, returned in
/// the global coordinate. Jets are `(value, d1, d2)`.
pub fn hermite_quintic(
    a: f64,
    b: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
) -> Result<Vec<f64>> {
    // Solve in the scaled coordinate w = (t - c) / r with c the center and
    // r the half-width, so the system stays well conditioned.
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut mat = vec![0.0; 36];
    let mut rhs = vec![0.0; 6];
    for (row, (w, jet)) in [(-1.0f64, left), (1.0f64, right)].iter().enumerate() {
        let w = *w;
        for k in 0..6usize {
            // value row
            mat[(3 * row) * 6 + k] = w.powi(k as i32);
            // first derivative row (d/dw)
            mat[(3 * row + 1) * 6 + k] = if k >= 1 {
                k as f64 * w.powi(k as i32 - 1)
            } else {
                0.0
            };
            // second derivative row
            mat[(3 * row + 2) * 6 + k] = if k >= 2 {
                (k * (k - 1)) as f64 * w.powi(k as i32 - 2)
            } else {
                0.0
            };
        }
        rhs[3 * row] = jet.0;
        rhs[3 * row + 1] = jet.1 * r; // d/dw = r * d/dt
        rhs[3 * row + 2] = jet.2 * r * r;
    }
    let coeff_w = solve_dense(&mut mat, &mut rhs, 6)?;
    // w = (t - c)/r
    Ok(poly_compose_affine(&coeff_w, -c / r, 1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::Segment;

    fn eval(segs: &[Segment], t: f64) -> f64 {
        for s in segs {
            let [a, b] = s.domain();
            if t >= a && t <= b {
                return s.value(t);
            }
        }
        panic!("t outside knots");
    }

    #[test]
    fn pchip_reproduces_linear_data() {
        let x = [0.0, 0.3, 0.7, 1.0];
        let y = [0.0, 0.6, 1.4, 2.0];
        let segs = monotone_cubic_segments(&x, &y).unwrap();
        for t in [0.1, 0.5, 0.9] {
            assert!((eval(&segs, t) - 2.0 * t).abs() < 1e-14);
        }
    }

    #[test]
    fn pchip_is_monotone_on_monotone_data() {
        let x = [0.0, 0.2, 0.5, 0.8, 1.0];
        let y = [0.0, 0.01, 0.5, 0.99, 1.0];
        let segs = monotone_cubic_segments(&x, &y).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let v = eval(&segs, t);
            assert!(v >= prev - 1e-12, "not monotone at {t}");
            prev = v;
        }
    }

    #[test]
    fn pchip_decreasing() {
        let x = [0.0, 0.5, 1.0];
        let y = [1.0, 0.3, 0.0];
        let segs = monotone_cubic_segments(&x, &y).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let v = eval(&segs, t);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn hermite_cubic_reproduces_cubics() {
        let p = |t: f64| 2.0 * t * t * t - t * t + 0.5 * t - 1.0;
        let dp = |t: f64| 6.0 * t * t - 2.0 * t + 0.5;
        let x = [0.0, 0.3, 0.55, 1.0];
        let y: Vec<f64> = x.iter().map(|&t| p(t)).collect();
        let d: Vec<f64> = x.iter().map(|&t| dp(t)).collect();
        let segs = hermite_cubic_segments(&x, &y, &d).unwrap();
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!((eval(&segs, t) - p(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn quintic_matches_jets() {
        // target: p(t) = sin-like cubic jets at ends of [0.3, 0.7]
        let p = |t: f64| t * t * t - t;
        let dp = |t: f64| 3.0 * t * t - 1.0;
        let ddp = |t: f64| 6.0 * t;
        let q = hermite_quintic(
            0.3,
            0.7,
            (p(0.3), dp(0.3), ddp(0.3)),
            (p(0.7), dp(0.7), ddp(0.7)),
        )
        .unwrap();
        let seg = Segment::poly(q, [0.3, 0.7]);
        for (t, f, df, ddf) in [(0.3, p(0.3), dp(0.3), ddp(0.3)), (0.7, p(0.7), dp(0.7), ddp(0.7))]
        {
            assert!((seg.value(t) - f).abs() < 1e-12);
            assert!((seg.derivative_value(t, 1) - df).abs() < 1e-11);
            assert!((seg.derivative_value(t, 2) - ddf).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_dense_small() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![3.0, 5.0];
        let x = solve_dense(&mut a, &mut b, 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }
}
