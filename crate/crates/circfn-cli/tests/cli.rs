//! End-to-end tests of the `circfn` binary: exit codes, output formats,
//! byte-level determinism, and the compose -> extract round trip.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use circfn_core::corpus::{corpus_rng, env_seed, random_circle_profile, random_normal_form};
use circfn_core::{NormalForm, SurfaceKind, TargetSpace};

const ALL_KINDS: [SurfaceKind; 4] = [
    SurfaceKind::Cylinder,
    SurfaceKind::Torus,
    SurfaceKind::Disk,
    SurfaceKind::Sphere,
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_circfn"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("circfn-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch dir");
    dir.join(name)
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn circfn");
    child
        .stdin
        .as_mut()
        .expect("stdin handle")
        .write_all(stdin.as_bytes())
        .expect("write stdin");
    child.wait_with_output().expect("wait for circfn")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn t_squared_form() -> String {
    r#"{
        "surface": "cylinder",
        "profile": {
            "base": "interval",
            "target": "real",
            "pieces": [
                { "kind": "poly", "coeffs": [0.25, -1.0, 1.0], "domain": [0.0, 1.0] }
            ]
        }
    }"#
    .to_string()
}

fn parse_csv(text: &str, header: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header), "csv header");
    lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().expect("csv number"))
                .collect()
        })
        .collect()
}

#[test]
fn analyze_prints_the_critical_circle_table() {
    let out = run_with_stdin(&["analyze"], &t_squared_form());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("critical circles: 1"), "table:\n{text}");
    let row = text.lines().find(|l| l.trim_start().starts_with('0')).unwrap();
    assert!(row.contains("0.500000") && row.contains('2') && row.contains("min"));
    assert!(text.contains("isolated extrema: 0"));
}

#[test]
fn exit_codes_follow_the_decision() {
    // Valid profile: 0.
    let out = run_with_stdin(&["validate"], &t_squared_form());
    assert_eq!(code(&out), 0);

    // Odd synthetic extremal list on the torus: 2, with a parity message.
    let records = r#"{ "surface": "torus", "records": [
        {"base_position": 0.2, "level": 0.0, "order": 2, "extremal": true, "extremal_kind": "minimum"},
        {"base_position": 0.5, "level": 1.0, "order": 2, "extremal": true, "extremal_kind": "maximum"},
        {"base_position": 0.8, "level": 0.5, "order": 2, "extremal": true, "extremal_kind": "minimum"}
    ]}"#;
    let out = run_with_stdin(&["validate"], records);
    assert_eq!(code(&out), 2);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("odd number of extremal circles"),
        "report:\n{text}"
    );

    // Malformed JSON: 1, single-line diagnostic on stderr.
    let out = run_with_stdin(&["validate"], "{ not json");
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "diagnostic:\n{err}");
    assert!(err.contains("malformed JSON"));

    // Unknown flag: 1.
    let out = run_with_stdin(&["validate", "--no-such-flag"], "");
    assert_eq!(code(&out), 1);

    // A profile whose derivative vanishes at a base endpoint: 2.
    let degenerate = r#"{
        "base": "interval",
        "target": "real",
        "pieces": [ { "kind": "poly", "coeffs": [0.0, 2.0, -1.0], "domain": [0.0, 1.0] } ]
    }"#;
    let out = run_with_stdin(&["validate"], degenerate);
    assert_eq!(code(&out), 2);
}

#[test]
fn identical_inputs_produce_byte_identical_outputs() {
    let mut rng = corpus_rng(env_seed(0xC11));
    let nf = random_normal_form(SurfaceKind::Sphere, &mut rng, 2);
    let doc = serde_json::to_string(&nf).unwrap();
    let path = scratch("determinism.json");
    fs::write(&path, &doc).unwrap();
    let path = path.to_str().unwrap();

    for args in [
        vec!["validate", "--input", path],
        vec!["analyze", "--input", path],
        vec!["decompose", "--input", path],
        vec!["field", "--input", path, "--samples", "64"],
        vec!["extract", "--input", path, "--samples", "64"],
        vec!["oracle", "--input", path, "--resolution", "128"],
    ] {
        let first = bin().args(&args).output().expect("run circfn");
        let second = bin().args(&args).output().expect("run circfn");
        assert_eq!(
            first.stdout, second.stdout,
            "{args:?} must be deterministic"
        );
        assert!(!first.stdout.is_empty(), "{args:?} must produce output");
    }
}

#[test]
fn compose_then_extract_recovers_every_corpus_profile() {
    let mut rng = corpus_rng(env_seed(0xC0));
    let mut members: Vec<NormalForm> = Vec::new();
    for kind in ALL_KINDS {
        for _ in 0..3 {
            members.push(random_normal_form(kind, &mut rng, 2));
        }
    }
    for _ in 0..2 {
        let profile = random_circle_profile(&mut rng);
        members.push(NormalForm::prime(SurfaceKind::Torus, profile).expect("circle-valued form"));
    }

    for (i, nf) in members.iter().enumerate() {
        let doc = serde_json::to_string(nf).unwrap();
        let composed = run_with_stdin(&["compose"], &doc);
        assert_eq!(code(&composed), 0, "member {i}: compose");
        let echoed = String::from_utf8(composed.stdout).unwrap();

        let extracted = run_with_stdin(&["extract", "--samples", "200"], &echoed);
        assert_eq!(code(&extracted), 0, "member {i}: extract");
        let text = String::from_utf8(extracted.stdout).unwrap();
        let rows = parse_csv(&text, "b,f");
        assert_eq!(rows.len(), 200, "member {i}: row count");

        let circle_target = nf.profile.target == TargetSpace::Circle;
        for row in rows {
            let (b, got) = (row[0], row[1]);
            let want = nf.profile.value(b);
            let err = if circle_target {
                let d = (got - want).rem_euclid(1.0);
                d.min(1.0 - d)
            } else {
                (got - want).abs()
            };
            assert!(
                err <= 1e-9,
                "member {i}: profile mismatch at b={b}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn field_csv_is_nowhere_zero_and_fully_sampled() {
    let mut rng = corpus_rng(env_seed(0xF1E1D));
    for kind in ALL_KINDS {
        let nf = random_normal_form(kind, &mut rng, 0);
        let doc = serde_json::to_string(&nf).unwrap();
        let out = run_with_stdin(&["field", "--samples", "257"], &doc);
        assert_eq!(code(&out), 0, "{kind:?}: field");
        let rows = parse_csv(&String::from_utf8(out.stdout).unwrap(), "b,g");
        assert_eq!(rows.len(), 257, "{kind:?}: row count");
        for row in &rows {
            assert!(row[1].abs() > 1e-9, "{kind:?}: zero at b={}", row[0]);
        }
    }
}

#[test]
fn flow_traces_a_closed_unit_period_orbit() {
    let doc = t_squared_form();
    let out = run_with_stdin(
        &["flow", "--angle", "0.1", "--base", "0.25", "--time", "1.0"],
        &doc,
    );
    assert_eq!(code(&out), 0);
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap(), "s,z,b");
    let first = rows.first().expect("samples");
    let last = rows.last().expect("samples");
    assert_eq!(first[0], 0.0);
    assert_eq!(last[0], 1.0);
    let dz = (last[1] - first[1]).rem_euclid(1.0);
    assert!(dz.min(1.0 - dz) < 1e-9, "orbit must close: {dz}");
    assert!((last[2] - first[2]).abs() < 1e-9, "base must be preserved");
}

#[test]
fn equiv_decides_and_reports_witnesses() {
    // q(t) = p(t^2 scaled): affine target change keeps equivalence.
    let p = r#"{
        "base": "interval",
        "target": "real",
        "pieces": [ { "kind": "poly", "coeffs": [0.25, -1.0, 1.0], "domain": [0.0, 1.0] } ]
    }"#;
    let q = r#"{
        "base": "interval",
        "target": "real",
        "pieces": [ { "kind": "poly", "coeffs": [1.0, -2.0, 2.0], "domain": [0.0, 1.0] } ]
    }"#;
    let q_path = scratch("equiv-other.json");
    fs::write(&q_path, q).unwrap();

    let out = run_with_stdin(
        &["equiv", "--other", q_path.to_str().unwrap(), "--mode", "left-right"],
        p,
    );
    assert_eq!(code(&out), 0, "affine images are equivalent");
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("equiv report is JSON");
    assert_eq!(report["ok"], serde_json::Value::Bool(true));
    assert!(report["witness_defect"].as_f64().expect("defect") <= 1e-8);

    // Right-mode cannot absorb the target scaling.
    let out = run_with_stdin(
        &["equiv", "--other", q_path.to_str().unwrap(), "--mode", "right"],
        p,
    );
    assert_eq!(code(&out), 2, "right equivalence must fail");
}

#[test]
fn action_check_and_conjugate_verify_a_fiber_twist() {
    let twisted = r#"{
        "surface": "cylinder",
        "profile": {
            "base": "interval",
            "target": "real",
            "pieces": [ { "kind": "poly", "coeffs": [0.25, -1.0, 1.0], "domain": [0.0, 1.0] } ]
        },
        "diffeo": [ { "variant": "fiber_shift", "tau": {
            "base": "interval",
            "target": "real",
            "pieces": [ { "kind": "poly", "coeffs": [0.0, 0.0, 0.3, -0.3], "domain": [0.0, 1.0] } ]
        } } ]
    }"#;

    let out = run_with_stdin(&["action-check"], twisted);
    assert_eq!(code(&out), 0, "action must satisfy the composition law");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["max_return_defect"].as_f64().unwrap() <= 1e-9);

    let bump_path = scratch("bump.json");
    fs::write(
        &bump_path,
        r#"{"base":"interval","windows":[{"support":[0.1,0.9],"plateau":[0.2,0.8]}],
            "polarity":"one_inside_zero_outside"}"#,
    )
    .unwrap();
    let out = run_with_stdin(
        &["conjugate", "--bump", bump_path.to_str().unwrap()],
        twisted,
    );
    assert_eq!(code(&out), 0, "conjugation must verify");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["defect"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn morsify_and_whitney_emit_profiles() {
    // Degenerate order-4 circle at t = 1/2.
    let quartic = r#"{
        "base": "interval",
        "target": "real",
        "pieces": [ { "kind": "poly",
            "coeffs": [0.0625, -0.5, 1.5, -2.0, 1.0], "domain": [0.0, 1.0] } ]
    }"#;
    let out = run_with_stdin(&["morsify"], quartic);
    assert_eq!(code(&out), 0);
    let morse: circfn_core::Profile =
        serde_json::from_slice(&out.stdout).expect("morsified profile is JSON");
    let records = circfn_core::find_critical_points(&morse).expect("analyzable");
    assert!(records.iter().all(|r| r.order == 2), "orders: {records:?}");

    // x^2 written about the base midpoint (x = 2t - 1) factors through
    // the square with alpha(u) = u.
    let even = r#"{
        "base": "interval",
        "target": "real",
        "pieces": [ { "kind": "poly", "coeffs": [1.0, -4.0, 4.0], "domain": [0.0, 1.0] } ]
    }"#;
    let out = run_with_stdin(&["whitney", "--samples", "600"], even);
    assert_eq!(code(&out), 0);
    let factor: circfn_core::Profile =
        serde_json::from_slice(&out.stdout).expect("factor profile is JSON");
    for i in 0..=50 {
        let u = i as f64 / 50.0;
        assert!((factor.value(u) - u).abs() <= 1e-9, "alpha(u) = u expected");
    }
}
