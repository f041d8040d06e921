//! Invariants exercised across randomly generated corpora: counting laws,
//! parity and alternation, degeneracy removal, equivalence-relation axioms,
//! Hamiltonian sign changes, and grid-detection consistency.

use circfn_core::base::wrap_unit;
use circfn_core::corpus::{corpus_rng, random_normal_form, random_profile};
use circfn_core::segment::poly_mul;
use circfn_core::{
    audit_normal_form, check_alternation, check_torus_parity, decompose, equivalent_on,
    euler_audit, find_critical_points, hamiltonian_field, morsify, BaseSpace, EquivalenceMode,
    NormalForm, Profile, SurfaceKind,
};

const ALL_KINDS: [SurfaceKind; 4] = [
    SurfaceKind::Cylinder,
    SurfaceKind::Torus,
    SurfaceKind::Disk,
    SurfaceKind::Sphere,
];

#[test]
fn counting_laws_hold_on_two_hundred_profiles_per_surface() {
    let mut rng = corpus_rng(501);
    for kind in ALL_KINDS {
        let circle_base = kind.geometry().base() == BaseSpace::Circle;
        for case in 0..200 {
            let nf = random_normal_form(kind, &mut rng, 2);
            let records = nf.critical_circles().unwrap();
            for r in &records {
                assert!(r.order >= 2, "{kind:?} case {case}: order below two");
                assert_eq!(
                    r.extremal,
                    r.order % 2 == 0,
                    "{kind:?} case {case}: parity of order {} vs extremal flag",
                    r.order
                );
            }
            if kind == SurfaceKind::Torus {
                assert!(check_torus_parity(&records), "case {case}: odd extremal count");
            }
            assert!(
                check_alternation(&records, circle_base),
                "{kind:?} case {case}: consecutive extrema of the same kind"
            );

            let d = decompose(&nf).unwrap();
            let expected_pieces = if circle_base {
                records.len().max(1)
            } else {
                records.len() + 1
            };
            assert_eq!(d.pieces.len(), expected_pieces, "{kind:?} case {case}");
            let audit = euler_audit(&d);
            assert!(audit.ok, "{kind:?} case {case}: {audit:?}");

            let extrema = nf.isolated_extrema();
            assert_eq!(
                extrema.len() as i64,
                kind.geometry().euler_characteristic(),
                "{kind:?} case {case}"
            );
        }
    }
}

#[test]
fn removing_degeneracies_is_idempotent_on_morse_profiles() {
    let mut rng = corpus_rng(503);
    for kind in [SurfaceKind::Cylinder, SurfaceKind::Torus] {
        let mut checked = 0;
        while checked < 10 {
            let p = random_profile(kind, &mut rng);
            let records = find_critical_points(&p).unwrap();
            if records.iter().any(|r| r.order != 2) {
                continue;
            }
            let out = morsify(&p, &[]).unwrap();
            assert_eq!(
                serde_json::to_value(&out).unwrap(),
                serde_json::to_value(&p).unwrap(),
                "{kind:?}: Morse profile was modified"
            );
            checked += 1;
        }
    }
}

/// Exact polynomial composition `p ∘ beta` in the monomial basis.
fn compose_poly(p: &[f64], beta: &[f64]) -> Vec<f64> {
    let mut result = vec![*p.last().expect("nonempty")];
    for &c in p.iter().rev().skip(1) {
        result = poly_mul(&result, beta);
        result[0] += c;
    }
    result
}

fn poly_coeffs(p: &Profile) -> Vec<f64> {
    assert_eq!(p.pieces.len(), 1, "expected a single-segment profile");
    p.pieces[0].all_coefficients().to_vec()
}

#[test]
fn equivalence_is_reflexive_symmetric_and_transitive() {
    let mut rng = corpus_rng(505);
    let kind = SurfaceKind::Cylinder;
    let mode = EquivalenceMode::LeftRight;

    // Two random base profiles plus exact conjugates of the first: a base
    // reparametrization and a level map composed with a second
    // reparametrization, giving a genuine transitivity chain. Composition
    // squares the polynomial degree, so restrict the drawn profiles to low
    // degree and moderate coefficients to keep the composites inside the
    // classifier's relative-tolerance ladder.
    let orders = |p: &Profile| -> Vec<usize> {
        find_critical_points(p)
            .unwrap()
            .iter()
            .map(|r| r.order)
            .collect()
    };
    // Morse profiles only: at an exact multiple root the composite's
    // derivative values land in the classifier's ill-conditioned band.
    let tame = |p: &Profile| -> bool {
        let c = poly_coeffs(p);
        c.len() <= 5
            && c.iter().all(|x| x.abs() <= 6.0)
            && !orders(p).is_empty()
            && orders(p).iter().all(|&o| o == 2)
    };
    let p1 = loop {
        let q = random_profile(kind, &mut rng);
        if tame(&q) {
            break q;
        }
    };
    let p4 = loop {
        let q = random_profile(kind, &mut rng);
        if tame(&q) && orders(&q) != orders(&p1) {
            break q;
        }
    };
    // Quadratic base diffeos fixing both endpoints: t + a t (1 - t).
    let beta_a = [0.0, 1.35, -0.35];
    let beta_b = [0.0, 0.7, 0.3];
    let c1 = poly_coeffs(&p1);
    let p2 = Profile::poly(compose_poly(&c1, &beta_a));
    let mut level_shifted = compose_poly(&c1, &beta_b)
        .iter()
        .map(|c| 1.7 * c)
        .collect::<Vec<f64>>();
    level_shifted[0] -= 0.4;
    let p3 = Profile::poly(level_shifted);
    let p5 = Profile::poly(compose_poly(&poly_coeffs(&p4), &beta_a));
    let p6 = random_profile(kind, &mut rng);

    let members = [&p1, &p2, &p3, &p4, &p5, &p6];
    let n = members.len();
    let mut verdict = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = equivalent_on(kind, members[i], members[j], mode).unwrap();
            verdict[i][j] = d.equivalent;
        }
    }

    for i in 0..n {
        assert!(verdict[i][i], "member {i} not equivalent to itself");
        for j in 0..n {
            assert_eq!(verdict[i][j], verdict[j][i], "asymmetry at ({i}, {j})");
            for k in 0..n {
                if verdict[i][j] && verdict[j][k] {
                    assert!(verdict[i][k], "transitivity broken at ({i}, {j}, {k})");
                }
            }
        }
    }

    assert!(verdict[0][1] && verdict[0][2] && verdict[3][4], "constructed pairs must match");
    assert!(!verdict[0][3], "independent profiles with different orders must not match");
}

#[test]
fn hamiltonian_coefficient_changes_sign_exactly_at_extremal_circles() {
    let mut rng = corpus_rng(507);
    for kind in ALL_KINDS {
        let circle_base = kind.geometry().base() == BaseSpace::Circle;
        for case in 0..15 {
            let profile = random_profile(kind, &mut rng);
            let nf = NormalForm::prime(kind, profile).unwrap();
            let records = nf.critical_circles().unwrap();
            if records.is_empty() {
                continue;
            }
            let field = hamiltonian_field(&nf);
            let positions: Vec<f64> = records.iter().map(|r| r.base_position).collect();

            // Sample the coefficient in the middle of each band between
            // consecutive circles (plus the end bands on an interval base).
            let band_signs: Vec<f64> = if circle_base {
                (0..positions.len())
                    .map(|i| {
                        let a = positions[i];
                        let b = positions[(i + 1) % positions.len()];
                        let gap = wrap_unit(b - a);
                        let gap = if gap <= 0.0 { gap + 1.0 } else { gap };
                        let mid = wrap_unit(a + gap / 2.0);
                        field.coefficient(mid)
                    })
                    .collect()
            } else {
                let mut cuts = vec![0.0];
                cuts.extend_from_slice(&positions);
                cuts.push(1.0);
                cuts.windows(2).map(|w| field.coefficient((w[0] + w[1]) / 2.0)).collect()
            };
            for (i, s) in band_signs.iter().enumerate() {
                assert!(
                    s.abs() > 1e-9,
                    "{kind:?} case {case}: coefficient vanishes inside band {i}"
                );
            }

            for (i, r) in records.iter().enumerate() {
                let (left, right) = if circle_base {
                    let m = positions.len();
                    (band_signs[(i + m - 1) % m], band_signs[i])
                } else {
                    (band_signs[i], band_signs[i + 1])
                };
                let flips = left.signum() != right.signum();
                assert_eq!(
                    flips, r.extremal,
                    "{kind:?} case {case}: circle {i} order {} at {}",
                    r.order, r.base_position
                );
            }
        }
    }
}

#[test]
fn grid_detection_tightens_as_the_resolution_doubles() {
    let mut rng = corpus_rng(509);
    let mut checked = 0;
    while checked < 10 {
        let profile = random_profile(SurfaceKind::Cylinder, &mut rng);
        let nf = NormalForm::prime(SurfaceKind::Cylinder, profile).unwrap();
        if nf.critical_circles().unwrap().is_empty() {
            continue;
        }
        // Detected positions are midpoints of grid edges, so the error at
        // resolution n is quantized in steps of 1/(2n) and depends on how
        // the cells happen to align with the true position. Demand the
        // doubling improvement up to that quantization, and an outright
        // improvement from the coarsest to the finest grid.
        let resolutions = [128usize, 256, 512];
        let mut errors = Vec::new();
        for n_base in resolutions {
            let cmp = audit_normal_form(&nf, n_base, 4).unwrap();
            assert!(cmp.ok(), "member {checked} at {n_base} cells: {cmp:?}");
            errors.push(cmp.max_position_error);
        }
        for i in 0..2 {
            let quantum = 1.0 / resolutions[i + 1] as f64;
            assert!(
                errors[i + 1] <= errors[i] + quantum,
                "member {checked}: errors {errors:?} worsened past one cell"
            );
        }
        assert!(
            errors[2] <= errors[0] + 1e-12,
            "member {checked}: finest grid {:.3e} beat by coarsest {:.3e}",
            errors[2],
            errors[0]
        );
        checked += 1;
    }
}
