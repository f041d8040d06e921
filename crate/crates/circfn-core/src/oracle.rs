//! Independent grid check of the analytic critical-circle machinery.
//!
//! The oracle never looks at segment coefficients or derivatives: it
//! samples the function on a regular grid of cell centers, averages
//! each base slice over the fiber direction, takes finite differences
//! of the slice means, and reads critical circles straight off the
//! difference sequence. Sign changes mark extremal circles; isolated
//! dips of the difference magnitude, well away from any sign change,
//! mark non-extremal ones. The result can then be compared with the
//! positions the analytic side reports.

use std::f64::consts::TAU;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::base::{circle_dist, circle_signed_delta, wrap_unit, BaseSpace, TargetSpace};
use crate::error::{Error, Result};
use crate::normal_form::NormalForm;
use crate::point::SurfacePoint;
use crate::records::CriticalCircleRecord;
use crate::surface::SurfaceKind;

/// Function values at the centers of an `n_base x n_fiber` cell grid.
/// `values[i][j]` is the value at base `(i + 0.5) / n_base`, fiber angle
/// `(j + 0.5) / n_fiber`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub surface: SurfaceKind,
    pub circle_target: bool,
    pub n_base: usize,
    pub n_fiber: usize,
    pub values: Vec<Vec<f64>>,
}

/// A critical circle as seen by the grid: a cell-resolution position and
/// whether the slice means attain a local extremum there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLocus {
    pub base_index: usize,
    pub base_coord: f64,
    pub extremal: bool,
}

/// Verdict of the grid against the analytic records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub analytic_count: usize,
    pub grid_count: usize,
    pub count_ok: bool,
    pub extremal_ok: bool,
    pub position_tolerance: f64,
    pub max_position_error: f64,
    pub position_ok: bool,
}

impl OracleComparison {
    pub fn ok(&self) -> bool {
        self.count_ok && self.extremal_ok && self.position_ok
    }
}

/// Evaluate the function at every cell center.
pub fn sample_grid(nf: &NormalForm, n_base: usize, n_fiber: usize) -> Result<GridSample> {
    if n_base < 8 || n_fiber == 0 {
        return Err(Error::Validation(
            "grid needs at least 8 base cells and 1 fiber cell".into(),
        ));
    }
    let mut values = Vec::with_capacity(n_base);
    for i in 0..n_base {
        let b = (i as f64 + 0.5) / n_base as f64;
        let mut row = Vec::with_capacity(n_fiber);
        for j in 0..n_fiber {
            let angle = (j as f64 + 0.5) / n_fiber as f64;
            row.push(nf.evaluate(SurfacePoint::new(angle, b))?);
        }
        values.push(row);
    }
    Ok(GridSample {
        surface: nf.surface.kind,
        circle_target: nf.surface.target == TargetSpace::Circle,
        n_base,
        n_fiber,
        values,
    })
}

impl GridSample {
    /// Average of each base slice across the fiber. Circle-valued slices
    /// are averaged as unit vectors so the mean respects wrapping.
    pub fn fiber_means(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|row| {
                if self.circle_target {
                    let mut c = 0.0;
                    let mut s = 0.0;
                    for &v in row {
                        c += (TAU * v).cos();
                        s += (TAU * v).sin();
                    }
                    if c.hypot(s) < 1e-9 {
                        row[0]
                    } else {
                        wrap_unit(s.atan2(c) / TAU)
                    }
                } else {
                    row.iter().sum::<f64>() / row.len() as f64
                }
            })
            .collect()
    }

    fn base_is_circle(&self) -> bool {
        self.surface.geometry().base() == BaseSpace::Circle
    }

    /// One comment line carrying the grid metadata as JSON, then one CSV
    /// row per base slice: the slice index followed by its fiber values.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let header = serde_json::json!({
            "surface": self.surface,
            "circle_target": self.circle_target,
            "n_base": self.n_base,
            "n_fiber": self.n_fiber,
        });
        writeln!(w, "# {header}")?;
        for (i, row) in self.values.iter().enumerate() {
            write!(w, "{i}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<GridSample> {
        let bad = |msg: &str| Error::Validation(format!("grid file is malformed: {msg}"));
        let mut lines = reader.lines();
        let head = lines
            .next()
            .ok_or_else(|| bad("empty input"))?
            .map_err(|e| bad(&e.to_string()))?;
        let head = head
            .strip_prefix('#')
            .ok_or_else(|| bad("missing `#` header line"))?
            .trim();
        #[derive(Deserialize)]
        struct Header {
            surface: SurfaceKind,
            circle_target: bool,
            n_base: usize,
            n_fiber: usize,
        }
        let header: Header =
            serde_json::from_str(head).map_err(|e| bad(&format!("bad header: {e}")))?;
        let mut values = Vec::with_capacity(header.n_base);
        for line in lines {
            let line = line.map_err(|e| bad(&e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let idx: usize = fields
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|_| bad("row index is not an integer"))?;
            if idx != values.len() {
                return Err(bad(&format!("row {idx} out of order")));
            }
            let row = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| bad("row contains a non-numeric value"))?;
            if row.len() != header.n_fiber {
                return Err(bad(&format!(
                    "row {idx} has {} values, expected {}",
                    row.len(),
                    header.n_fiber
                )));
            }
            values.push(row);
        }
        if values.len() != header.n_base {
            return Err(bad(&format!(
                "{} rows, expected {}",
                values.len(),
                header.n_base
            )));
        }
        Ok(GridSample {
            surface: header.surface,
            circle_target: header.circle_target,
            n_base: header.n_base,
            n_fiber: header.n_fiber,
            values,
        })
    }
}

/// Read critical circles off the grid. Fails with [`Error::AmbiguousLoci`]
/// when two detected circles sit within two cells of each other: the grid
/// is then too coarse to separate them.
pub fn extract_critical_loci(grid: &GridSample) -> Result<Vec<GridLocus>> {
    let n = grid.n_base;
    if n < 8 {
        return Err(Error::Validation(
            "grid needs at least 8 base cells".into(),
        ));
    }
    let means = grid.fiber_means();
    let base_circle = grid.base_is_circle();
    let n_edges = if base_circle { n } else { n - 1 };
    let db = 1.0 / n as f64;

    // Differences of slice means across cell edges; d[i] sits at the edge
    // between cells i and i+1, i.e. at base (i + 1) / n.
    let mut d = Vec::with_capacity(n_edges);
    for i in 0..n_edges {
        let a = means[i];
        let b = means[(i + 1) % n];
        d.push(if grid.circle_target {
            circle_signed_delta(b, a)
        } else {
            b - a
        });
    }
    let scale = if grid.circle_target {
        1.0
    } else {
        let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo).max(1.0)
    };
    let noise = 1e-12 * scale;
    // A non-extremal circle of lowest order makes |d| bottom out around
    // Δb³ while a regular slope keeps |d| ≈ slope · Δb, so a Δb² floor
    // separates the two for any slope above Δb.
    let dip_threshold = db * db * scale;
    let edge_pos = |i: usize| (i as f64 + 1.0) / n as f64;

    // Extremal circles: consecutive non-negligible differences of opposite
    // sign. The locus sits midway between the two witnessing edges.
    let mut extremal_positions: Vec<f64> = Vec::new();
    let signs: Vec<i8> = d
        .iter()
        .map(|&x| {
            if x > noise {
                1
            } else if x < -noise {
                -1
            } else {
                0
            }
        })
        .collect();
    let nonzero: Vec<usize> = (0..n_edges).filter(|&i| signs[i] != 0).collect();
    let pairs: Vec<(usize, usize)> = if base_circle {
        (0..nonzero.len())
            .map(|k| (nonzero[k], nonzero[(k + 1) % nonzero.len()]))
            .collect()
    } else {
        (1..nonzero.len())
            .map(|k| (nonzero[k - 1], nonzero[k]))
            .collect()
    };
    for (i1, i2) in pairs {
        if i1 == i2 || signs[i1] == signs[i2] {
            continue;
        }
        let p1 = edge_pos(i1);
        let p2 = edge_pos(i2);
        let pos = if base_circle {
            let mut gap = p2 - p1;
            if gap <= 0.0 {
                gap += 1.0;
            }
            wrap_unit(p1 + 0.5 * gap)
        } else {
            0.5 * (p1 + p2)
        };
        extremal_positions.push(pos);
    }

    // Non-extremal circles: the difference keeps its sign but its size
    // dips to the quadratic-in-cell-width floor. Dips shouldering a sign
    // change belong to that extremal circle and are dropped.
    let mut dip_indices: Vec<usize> = Vec::new();
    for i in 0..n_edges {
        let (prev, next) = if base_circle {
            (
                d[(i + n_edges - 1) % n_edges].abs(),
                d[(i + 1) % n_edges].abs(),
            )
        } else {
            if i == 0 || i == n_edges - 1 {
                continue;
            }
            (d[i - 1].abs(), d[i + 1].abs())
        };
        let here = d[i].abs();
        if here <= prev && here <= next && here < dip_threshold {
            dip_indices.push(i);
        }
    }
    let mut dip_groups: Vec<Vec<usize>> = Vec::new();
    for &i in &dip_indices {
        match dip_groups.last_mut() {
            Some(g) if i == *g.last().unwrap() + 1 => g.push(i),
            _ => dip_groups.push(vec![i]),
        }
    }
    if base_circle && dip_groups.len() > 1 {
        let joins_wrap = dip_groups[0][0] == 0
            && *dip_groups.last().unwrap().last().unwrap() == n_edges - 1;
        if joins_wrap {
            let tail = dip_groups.pop().unwrap();
            for i in tail {
                dip_groups[0].push(i);
            }
        }
    }
    let dist = |a: f64, b: f64| {
        if base_circle {
            circle_dist(a, b)
        } else {
            (a - b).abs()
        }
    };
    let mut dip_positions: Vec<f64> = Vec::new();
    for group in dip_groups {
        let first = edge_pos(group[0]);
        let span = (group.len() - 1) as f64 * db;
        let pos = if base_circle {
            wrap_unit(first + 0.5 * span)
        } else {
            first + 0.5 * span
        };
        if extremal_positions
            .iter()
            .all(|&e| dist(e, pos) > 3.0 * db + 1e-12)
        {
            dip_positions.push(pos);
        }
    }

    let mut loci: Vec<GridLocus> = extremal_positions
        .into_iter()
        .map(|p| (p, true))
        .chain(dip_positions.into_iter().map(|p| (p, false)))
        .map(|(p, extremal)| GridLocus {
            base_index: ((p * n as f64).floor() as usize).min(n - 1),
            base_coord: p,
            extremal,
        })
        .collect();
    loci.sort_by(|a, b| a.base_coord.partial_cmp(&b.base_coord).unwrap());

    let m = loci.len();
    if m >= 2 {
        let last_pair = if base_circle { m } else { m - 1 };
        for k in 0..last_pair {
            let a = &loci[k];
            let b = &loci[(k + 1) % m];
            let sep = dist(a.base_coord, b.base_coord);
            if sep < 2.0 * db {
                return Err(Error::AmbiguousLoci(format!(
                    "circles near base {:.4} and {:.4} are {:.2} cells apart; refine the grid",
                    a.base_coord,
                    b.base_coord,
                    sep / db
                )));
            }
        }
    }
    Ok(loci)
}

/// Match grid loci against analytic records: equal counts, agreeing
/// extremal flags, and positions within two cells under the best
/// order-preserving alignment.
pub fn compare_with_analytic(
    loci: &[GridLocus],
    records: &[CriticalCircleRecord],
    kind: SurfaceKind,
    n_base: usize,
) -> OracleComparison {
    let tol = 2.0 / n_base as f64;
    let base_circle = kind.geometry().base() == BaseSpace::Circle;
    let mut loci: Vec<&GridLocus> = loci.iter().collect();
    loci.sort_by(|a, b| a.base_coord.partial_cmp(&b.base_coord).unwrap());
    let mut recs: Vec<&CriticalCircleRecord> = records.iter().collect();
    recs.sort_by(|a, b| a.base_position.partial_cmp(&b.base_position).unwrap());

    let count_ok = loci.len() == recs.len();
    let mut extremal_ok = count_ok;
    let mut max_err: f64 = 0.0;
    if count_ok && !recs.is_empty() {
        let m = recs.len();
        if base_circle {
            let alignment_error = |off: usize| {
                (0..m)
                    .map(|k| circle_dist(loci[(k + off) % m].base_coord, recs[k].base_position))
                    .fold(0.0, f64::max)
            };
            let best = (0..m).min_by(|&a, &b| {
                alignment_error(a)
                    .partial_cmp(&alignment_error(b))
                    .unwrap()
            });
            let off = best.unwrap_or(0);
            max_err = alignment_error(off);
            for k in 0..m {
                extremal_ok &= loci[(k + off) % m].extremal == recs[k].extremal;
            }
        } else {
            for (l, r) in loci.iter().zip(&recs) {
                max_err = max_err.max((l.base_coord - r.base_position).abs());
                extremal_ok &= l.extremal == r.extremal;
            }
        }
    }
    OracleComparison {
        analytic_count: recs.len(),
        grid_count: loci.len(),
        count_ok,
        extremal_ok,
        position_tolerance: tol,
        max_position_error: max_err,
        position_ok: count_ok && max_err <= tol,
    }
}

/// Sample, extract, and compare in one step.
pub fn audit_normal_form(nf: &NormalForm, n_base: usize, n_fiber: usize) -> Result<OracleComparison> {
    let grid = sample_grid(nf, n_base, n_fiber)?;
    let loci = extract_critical_loci(&grid)?;
    let records = nf.critical_circles()?;
    Ok(compare_with_analytic(
        &loci,
        &records,
        nf.surface.kind,
        n_base,
    ))
}
