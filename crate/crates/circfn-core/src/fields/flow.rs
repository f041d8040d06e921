//! Flows of vertical tangent fields.
//!
//! A vertical field never moves the base, so each trajectory stays on its
//! starting fiber and the angle advances at the rotation coefficient. Away
//! from point fibers the flow integrates in the band chart `(angle, b)`;
//! near a pole of the disk or sphere it integrates in the Cartesian chart
//! around the pole, where smoothness of the field across the pole is what
//! is actually being exercised, and the fiber radius is restored exactly
//! afterwards.

use serde::{Deserialize, Serialize};

use crate::base::bisect;
use crate::error::{Error, Result};
use crate::point::SurfacePoint;
use crate::surface::SurfaceKind;

use super::tangent::TangentField;

/// Base distance from a pole below which the polar chart takes over.
const POLAR_CHART_RADIUS: f64 = 0.075;
/// Longest stored trajectory; longer runs are subsampled.
const MAX_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(time, point)` samples along the run.
    pub samples: Vec<(f64, SurfacePoint)>,
    /// Total angular displacement in turns, in lift coordinates.
    pub displacement: f64,
}

impl Trajectory {
    pub fn start(&self) -> SurfacePoint {
        self.samples.first().expect("trajectory has samples").1
    }

    pub fn end(&self) -> SurfacePoint {
        self.samples.last().expect("trajectory has samples").1
    }
}

/// Exact flow in the band chart: the coefficient is constant on the fiber.
pub fn closed_form_band(g: f64, start: SurfacePoint, time: f64) -> (SurfacePoint, f64) {
    let displacement = g * time;
    (
        SurfacePoint::new(start.angle + displacement, start.base),
        displacement,
    )
}

/// Integrate the flow of `field` from `start` for `time`.
pub fn integrate_flow(field: &TangentField, start: SurfacePoint, time: f64) -> Result<Trajectory> {
    let kind = field.surface.kind;
    if kind.geometry().base() == crate::base::BaseSpace::Interval
        && !(0.0..=1.0).contains(&start.base)
    {
        return Err(Error::Domain(format!(
            "base coordinate {} outside [0, 1]",
            start.base
        )));
    }

    if start.is_pole(kind) {
        return Ok(Trajectory {
            samples: vec![(0.0, start), (time, start)],
            displacement: 0.0,
        });
    }

    let pole_chart = match kind {
        SurfaceKind::Disk if start.base < POLAR_CHART_RADIUS => Some(0.0),
        SurfaceKind::Sphere if start.base < POLAR_CHART_RADIUS => Some(0.0),
        SurfaceKind::Sphere if start.base > 1.0 - POLAR_CHART_RADIUS => Some(1.0),
        _ => None,
    };

    match pole_chart {
        None => Ok(band_chart(field, start, time)),
        Some(center) => Ok(polar_chart(field, start, time, center)),
    }
}

fn band_chart(field: &TangentField, start: SurfacePoint, time: f64) -> Trajectory {
    let g = field.coefficient(start.base);
    let steps = ((time.abs() / 0.01).ceil() as usize).max(64);
    let h = time / steps as f64;
    let stride = steps.div_ceil(MAX_SAMPLES);
    let mut lift = start.angle;
    let mut samples = vec![(0.0, start)];
    for k in 1..=steps {
        // RK4 on d(angle)/ds = g(b); b never moves
        let (k1, k2, k3, k4) = (g, g, g, g);
        lift += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if k % stride == 0 || k == steps {
            samples.push((h * k as f64, SurfacePoint::new(lift, start.base)));
        }
    }
    Trajectory {
        samples,
        displacement: lift - start.angle,
    }
}

fn polar_chart(field: &TangentField, start: SurfacePoint, time: f64, center: f64) -> Trajectory {
    use std::f64::consts::TAU;
    let r0 = (start.base - center).abs();
    let base_of = |r: f64| if center == 0.0 { r } else { 1.0 - r };
    let g_of = |r: f64| field.coefficient(base_of(r));

    // state (x, y, lift): Cartesian chart around the pole plus the angular
    // lift; the radius is only approximately conserved by the integrator
    // and is restored exactly at the end
    let rhs = |x: f64, y: f64| {
        let g = g_of(x.hypot(y));
        (-TAU * g * y, TAU * g * x, g)
    };
    let steps = ((time.abs() / 0.001).ceil() as usize).max(640);
    let h = time / steps as f64;
    let stride = steps.div_ceil(MAX_SAMPLES);

    let mut x = r0 * (TAU * start.angle).cos();
    let mut y = r0 * (TAU * start.angle).sin();
    let mut lift = start.angle;
    let mut samples = vec![(0.0, start)];
    for k in 1..=steps {
        let (k1x, k1y, k1l) = rhs(x, y);
        let (k2x, k2y, k2l) = rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y);
        let (k3x, k3y, k3l) = rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y);
        let (k4x, k4y, k4l) = rhs(x + h * k3x, y + h * k3y);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        lift += h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l);
        if (k % stride == 0 || k == steps) && k != steps {
            let r = x.hypot(y);
            samples.push((
                h * k as f64,
                SurfacePoint::new(y.atan2(x) / TAU, base_of(r)),
            ));
        }
    }
    // restore the radius exactly: the true flow preserves every fiber
    let r = x.hypot(y);
    let angle = if r > 0.0 { y.atan2(x) / TAU } else { lift };
    samples.push((time, SurfacePoint::new(angle, start.base)));
    Trajectory {
        samples,
        displacement: lift - start.angle,
    }
}

/// Measure the smallest positive time after which the flow is the identity
/// on the fiber over `b`, by bisecting the integrated angular displacement
/// to one full turn.
pub fn measure_prime_period(field: &TangentField, b: f64) -> Result<f64> {
    let g = field.coefficient(b);
    if !(g.abs() > 1e-9) {
        return Err(Error::NotHField(format!(
            "fiber over {b} is (nearly) stationary: coefficient {g:.3e}"
        )));
    }
    let start = SurfacePoint::new(0.0, b);
    let t0 = 1.0 / g.abs();
    let turns = |t: f64| {
        integrate_flow(field, start, t)
            .map(|tr| tr.displacement.abs())
            .unwrap_or(f64::NAN)
    };
    let f = |t: f64| turns(t) - 1.0;
    let (lo, hi) = (0.5 * t0, 1.5 * t0);
    let period = bisect(&f, lo, hi, 1e-13 * t0.max(1.0));
    // the time-period flow must return to the start
    let end = integrate_flow(field, start, period)?.end();
    if !end.same_point(&start, field.surface.kind, 1e-6) {
        return Err(Error::NotHField(format!(
            "flow after the measured period {period} misses the start"
        )));
    }
    Ok(period)
}

/// Maximum distance between the time-`time` flow of `field` and of the
/// closed-form band rotation over a grid of start points: a consistency
/// probe for the two integration charts.
pub fn chart_consistency(field: &TangentField, time: f64, n: usize) -> Result<f64> {
    let kind = field.surface.kind;
    let mut worst = 0.0f64;
    for i in 0..n {
        let b = (i as f64 + 0.5) / n as f64;
        let start = SurfacePoint::new(0.37 * i as f64, b);
        let flow_end = integrate_flow(field, start, time)?.end();
        let (exact_end, _) = closed_form_band(field.coefficient(b), start, time);
        let d = point_distance(kind, &flow_end, &exact_end);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Surface metric surrogate: worst of base distance and fiber-angle
/// distance, with poles compared by base alone.
pub fn point_distance(kind: SurfaceKind, p: &SurfacePoint, q: &SurfacePoint) -> f64 {
    if p.is_pole(kind) && q.is_pole(kind) && (p.base - q.base).abs() < 1e-12 {
        return 0.0;
    }
    let db = match kind.geometry().base() {
        crate::base::BaseSpace::Interval => (p.base - q.base).abs(),
        crate::base::BaseSpace::Circle => crate::base::circle_dist(p.base, q.base),
    };
    db.max(crate::base::circle_dist(p.angle, q.angle))
}
