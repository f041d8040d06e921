//! Factorization of an even profile through the square: given `f` with
//! `f(-x) = f(x)` on a symmetric interval (normalized to `[0, 1]` with the
//! symmetry center at 1/2), produce a smooth `alpha` with
//! `f(x) = alpha(x^2)` (both in normalized coordinates).
//!
//! Polynomial inputs factor exactly through their even coefficients; other
//! inputs are fitted by piecewise polynomial interpolation at
//! Chebyshev-Lobatto nodes and verified pointwise.

use crate::analysis::interp::solve_dense;
use crate::base::BaseSpace;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::segment::{poly_compose_affine, Segment};

const EVEN_TOL: f64 = 1e-12;
const FIT_TOL: f64 = 1e-9;
const FIT_DEGREE: usize = 12;

/// `order`-th forward difference quotient of `f` at `x0` with step `h`:
/// an empirical smoothness probe; for a C^n function it approaches the n-th
/// derivative as `h` shrinks instead of blowing up.
pub fn divided_difference<F: Fn(f64) -> f64>(f: F, x0: f64, h: f64, order: usize) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=order {
        let sign = if (order - k) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * f(x0 + k as f64 * h);
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    sum / h.powi(order as i32)
}

/// Map the normalized input coordinate `t in [0,1]` (representing the
/// symmetric interval) to the normalized square coordinate `sigma = x^2`
/// with `x = 2t - 1`.
fn sigma_of_t(t: f64) -> f64 {
    let x = 2.0 * t - 1.0;
    x * x
}

fn check_even(p: &Profile, samples: usize) -> Result<()> {
    let scale = p.coefficient_scale().max(1.0);
    let mut worst = 0.0f64;
    for i in 0..=samples {
        let t = i as f64 / samples as f64;
        worst = worst.max((p.value(t) - p.value(1.0 - t)).abs());
    }
    if worst > EVEN_TOL * scale {
        return Err(Error::NotEven(format!(
            "profile is not even about the center: |f(t) - f(1-t)| reaches {worst:.3e}"
        )));
    }
    Ok(())
}

/// Exact factorization for a profile that is a single polynomial piece:
/// re-center to x = 2t - 1, require odd coefficients to vanish, keep the
/// even ones.
fn exact_poly_factor(p: &Profile) -> Option<Vec<f64>> {
    if p.pieces.len() != 1 {
        return None;
    }
    let coeffs = match &p.pieces[0] {
        Segment::Poly { coeffs, .. } => coeffs.clone(),
        Segment::Trig { .. } => return None,
    };
    // t = (x + 1) / 2
    let in_x = poly_compose_affine(&coeffs, 0.5, 0.5);
    let scale = p.coefficient_scale().max(1.0);
    let mut even = Vec::with_capacity(in_x.len() / 2 + 1);
    for (k, c) in in_x.iter().enumerate() {
        if k % 2 == 0 {
            even.push(*c);
        } else if c.abs() > EVEN_TOL * scale {
            return None;
        }
    }
    if even.is_empty() {
        even.push(0.0);
    }
    Some(even)
}

/// Interpolate `g` on `[a, b]` at Chebyshev-Lobatto nodes with the given
/// degree, returning monomial coefficients in the global coordinate.
fn fit_piece<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, degree: usize) -> Result<Vec<f64>> {
    let n = degree + 1;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        // Lobatto nodes include both endpoints, so adjacent pieces agree
        // exactly at shared knots.
        let u = (std::f64::consts::PI * j as f64 / degree as f64).cos();
        nodes.push(-u); // ascending
    }
    let mut mat = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    for (r, &u) in nodes.iter().enumerate() {
        let mut pw = 1.0;
        for c in 0..n {
            mat[r * n + c] = pw;
            pw *= u;
        }
        rhs[r] = g(mid + half * u);
    }
    let local = solve_dense(&mut mat, &mut rhs, n)?;
    Ok(poly_compose_affine(&local, -mid / half, 1.0 / half))
}

/// Factor an even profile through the square: returns `alpha` on the
/// normalized square coordinate with `alpha((2t-1)^2) = f(t)` within
/// `1e-9 * scale` at `samples` grid points (exact for polynomial input).
pub fn whitney_factor(p: &Profile, samples: usize) -> Result<Profile> {
    if p.base != BaseSpace::Interval {
        return Err(Error::Domain(
            "even-function factorization needs an interval base".into(),
        ));
    }
    let samples = samples.max(16);
    check_even(p, samples)?;

    let scale = p.coefficient_scale().max(1.0);
    let verify = |alpha: &Profile| -> f64 {
        let mut worst = 0.0f64;
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            worst = worst.max((alpha.value(sigma_of_t(t)) - p.value(t)).abs());
        }
        worst
    };

    if let Some(even) = exact_poly_factor(p) {
        let mut alpha = Profile::poly(even);
        alpha.max_derivative_order = 2;
        let worst = verify(&alpha);
        if worst <= FIT_TOL * scale {
            return Ok(alpha);
        }
    }

    // General path: interpolate alpha(sigma) = f((sqrt(sigma) + 1) / 2) by
    // piecewise polynomials, doubling the piece count until the pointwise
    // check passes.
    let g = |sigma: f64| p.value(0.5 * (sigma.max(0.0).sqrt() + 1.0));
    for pieces in [1usize, 2, 4] {
        let mut segs = Vec::with_capacity(pieces);
        let mut ok = true;
        for i in 0..pieces {
            let a = i as f64 / pieces as f64;
            let b = (i + 1) as f64 / pieces as f64;
            match fit_piece(&g, a, b, FIT_DEGREE) {
                Ok(c) => segs.push(Segment::poly(c, [a, b])),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let mut alpha = match Profile::new(p.base, p.target, segs) {
            Ok(a) => a,
            Err(_) => continue,
        };
        alpha.max_derivative_order = 2;
        if verify(&alpha) <= FIT_TOL * scale {
            return Ok(alpha);
        }
    }
    Err(Error::Validation(
        "even-function factorization did not converge to tolerance".into(),
    ))
}
