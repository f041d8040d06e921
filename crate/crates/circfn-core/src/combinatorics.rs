//! Combinatorial structure of a normal form: cutting along critical
//! circles into elementary pieces, the parity and alternation laws, and an
//! extended membership report for the full validity checklist.

use serde::{Deserialize, Serialize};

use crate::analysis::validate_profile;
use crate::base::BaseSpace;
use crate::error::Result;
use crate::normal_form::NormalForm;
use crate::profile::Profile;
use crate::records::{
    CriticalCircleRecord, ExtremalKind, ExtremumLocation, IsolatedExtremumRecord,
};
use crate::surface::SurfaceKind;

/// Topological type of an elementary piece between critical circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    /// A band between two circles (or the uncut torus when there are no
    /// critical circles: slicing it along any regular fiber gives a band).
    Cylinder,
    /// A cap containing exactly one isolated extremum.
    Disk,
    /// The whole sphere, when a sphere profile has no critical circles.
    Sphere,
}

/// What a piece contains besides regular fibers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "content", rename_all = "snake_case")]
pub enum PieceContent {
    IsolatedExtremum { record: IsolatedExtremumRecord },
    Boundary { label: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionPiece {
    pub index: usize,
    pub kind: PieceKind,
    /// Base-coordinate span; on the torus the span wraps when
    /// `span[1] < span[0]`.
    pub span: [f64; 2],
    /// Indices into the critical-circle records bounding this piece.
    pub boundary_circles: Vec<usize>,
    pub contains: Vec<PieceContent>,
}

impl DecompositionPiece {
    /// Euler characteristic of the piece: bands contribute nothing, each
    /// isolated extremum caps the piece with a point.
    pub fn euler_characteristic(&self) -> i64 {
        self.contains
            .iter()
            .filter(|c| matches!(c, PieceContent::IsolatedExtremum { .. }))
            .count() as i64
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub surface: SurfaceKind,
    pub circles: Vec<CriticalCircleRecord>,
    pub pieces: Vec<DecompositionPiece>,
}

/// Cut the surface along the critical circles of a normal form.
pub fn decompose(nf: &NormalForm) -> Result<Decomposition> {
    let kind = nf.surface.kind;
    let circles = nf.critical_circles()?;
    let extrema = nf.isolated_extrema();
    let n = circles.len();
    let mut pieces = Vec::new();

    match nf.surface.base {
        BaseSpace::Interval => {
            let mut cuts = Vec::with_capacity(n + 2);
            cuts.push(0.0);
            cuts.extend(circles.iter().map(|c| c.base_position));
            cuts.push(1.0);
            for j in 0..=n {
                let mut contains = Vec::new();
                let mut piece_kind = PieceKind::Cylinder;
                if j == 0 {
                    match kind {
                        SurfaceKind::Cylinder => contains.push(PieceContent::Boundary {
                            label: "boundary circle at b = 0".into(),
                        }),
                        SurfaceKind::Disk | SurfaceKind::Sphere => {
                            piece_kind = PieceKind::Disk;
                            contains.push(PieceContent::IsolatedExtremum {
                                record: extrema[0].clone(),
                            });
                        }
                        SurfaceKind::Torus => unreachable!("torus base is the circle"),
                    }
                }
                if j == n {
                    match kind {
                        SurfaceKind::Cylinder | SurfaceKind::Disk => {
                            contains.push(PieceContent::Boundary {
                                label: "boundary circle at b = 1".into(),
                            })
                        }
                        SurfaceKind::Sphere => {
                            piece_kind = if j == 0 {
                                PieceKind::Sphere
                            } else {
                                PieceKind::Disk
                            };
                            contains.push(PieceContent::IsolatedExtremum {
                                record: extrema[1].clone(),
                            });
                        }
                        SurfaceKind::Torus => unreachable!("torus base is the circle"),
                    }
                }
                let mut boundary_circles = Vec::new();
                if j > 0 {
                    boundary_circles.push(j - 1);
                }
                if j < n {
                    boundary_circles.push(j);
                }
                pieces.push(DecompositionPiece {
                    index: j,
                    kind: piece_kind,
                    span: [cuts[j], cuts[j + 1]],
                    boundary_circles,
                    contains,
                });
            }
        }
        BaseSpace::Circle => {
            if n == 0 {
                pieces.push(DecompositionPiece {
                    index: 0,
                    kind: PieceKind::Cylinder,
                    span: [0.0, 1.0],
                    boundary_circles: Vec::new(),
                    contains: Vec::new(),
                });
            } else {
                for j in 0..n {
                    let k = (j + 1) % n;
                    pieces.push(DecompositionPiece {
                        index: j,
                        kind: PieceKind::Cylinder,
                        span: [circles[j].base_position, circles[k].base_position],
                        boundary_circles: vec![j, k],
                        contains: Vec::new(),
                    });
                }
            }
        }
    }

    Ok(Decomposition {
        surface: kind,
        circles,
        pieces,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerAudit {
    pub piece_characteristics: Vec<i64>,
    pub total: i64,
    pub expected: i64,
    pub piece_count: usize,
    pub expected_piece_count: usize,
    pub ok: bool,
}

/// Check that the piece count matches the counting law and that the piece
/// Euler characteristics add up to the surface's.
pub fn euler_audit(d: &Decomposition) -> EulerAudit {
    let g = d.surface.geometry();
    let piece_characteristics: Vec<i64> =
        d.pieces.iter().map(|p| p.euler_characteristic()).collect();
    let total = piece_characteristics.iter().sum();
    let expected = g.euler_characteristic();
    let piece_count = d.pieces.len();
    let expected_piece_count = g.expected_pieces(d.circles.len());
    EulerAudit {
        ok: total == expected && piece_count == expected_piece_count,
        piece_characteristics,
        total,
        expected,
        piece_count,
        expected_piece_count,
    }
}

/// On the torus the extremal circles must come in pairs: walking once
/// around the base, the profile must come back to its starting level.
pub fn check_torus_parity(records: &[CriticalCircleRecord]) -> bool {
    records.iter().filter(|r| r.extremal).count() % 2 == 0
}

/// Extremal circles must alternate between maxima and minima along the
/// base (wrapping around on a circle base): between two extremal circles
/// the profile is strictly monotone apart from non-extremal touch points.
pub fn check_alternation(records: &[CriticalCircleRecord], cyclic: bool) -> bool {
    let kinds: Vec<ExtremalKind> = records
        .iter()
        .filter(|r| r.extremal)
        .filter_map(|r| r.extremal_kind)
        .collect();
    for w in kinds.windows(2) {
        if w[0] == w[1] {
            return false;
        }
    }
    if cyclic && kinds.len() >= 2 && kinds[0] == kinds[kinds.len() - 1] {
        return false;
    }
    true
}

/// The full membership checklist for a profile on a surface: the two
/// analytic conditions plus the combinatorial laws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipReport {
    pub surface: SurfaceKind,
    pub valid: bool,
    pub condition_a: bool,
    pub condition_b: bool,
    pub parity_ok: bool,
    pub alternation_ok: bool,
    /// Constant fibers over the distinguished endpoints hold by
    /// construction of the fiber structure; recorded for completeness.
    pub boundary_constant: bool,
    pub violations: Vec<String>,
    pub circles: Vec<CriticalCircleRecord>,
    pub extrema: Vec<IsolatedExtremumRecord>,
}

/// Run the complete membership checklist for `profile` on `kind`.
pub fn validate_membership(profile: &Profile, kind: SurfaceKind) -> Result<MembershipReport> {
    let report = validate_profile(profile, kind)?;
    let cyclic = kind.geometry().base() == BaseSpace::Circle;
    let mut violations = report.violations.clone();

    let parity_ok = if kind == SurfaceKind::Torus {
        let ok = check_torus_parity(&report.records);
        if !ok {
            violations.push("odd number of extremal circles on the torus".into());
        }
        ok
    } else {
        true
    };
    let alternation_ok = check_alternation(&report.records, cyclic);
    if !alternation_ok {
        violations.push("extremal circles do not alternate between maxima and minima".into());
    }

    let extrema = if report.condition_b {
        isolated_extrema_of(profile, kind)
    } else {
        Vec::new()
    };

    Ok(MembershipReport {
        surface: kind,
        valid: report.valid && parity_ok && alternation_ok,
        condition_a: report.condition_a,
        condition_b: report.condition_b,
        parity_ok,
        alternation_ok,
        boundary_constant: true,
        violations,
        circles: report.records,
        extrema,
    })
}

/// Isolated extrema implied by a bare profile (identity chain): kind from
/// the slope along the base direction pointing away from the point.
fn isolated_extrema_of(profile: &Profile, kind: SurfaceKind) -> Vec<IsolatedExtremumRecord> {
    kind.geometry()
        .extrema_locations()
        .iter()
        .map(|loc| {
            let b = loc.base_coordinate();
            let slope = profile.derivative_value(b, 1);
            let outward = match loc {
                ExtremumLocation::SphereNorth => -1.0,
                _ => 1.0,
            };
            let k = if slope * outward > 0.0 {
                ExtremalKind::Minimum
            } else {
                ExtremalKind::Maximum
            };
            IsolatedExtremumRecord {
                location: *loc,
                kind: k,
                level: profile.value(b),
            }
        })
        .collect()
}
