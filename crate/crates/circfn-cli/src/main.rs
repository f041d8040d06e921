//! `circfn` — command-line front end for the normal-form toolkit.
//!
//! Every subcommand reads a JSON document from `--input` (default `-`,
//! stdin) and writes JSON or CSV to stdout or `--output`.  Exit codes:
//! `0` success / positive decision, `2` validation failure or negative
//! decision, `1` usage or I/O error.

mod input;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use circfn_core::{
    audit_normal_form, build_h_field, check_alternation, check_torus_parity, circle_action,
    decompose, equivalent_on, euler_audit, integrate_flow, isotope_conjugator, morsify,
    normalize_period, suggest_radii, validate_membership, verify_conjugation, whitney_factor,
    witness_defect, BaseSpace, BumpFunction, CircleAction, EquivalenceMode, NormalForm, Profile,
    SurfacePoint, SurfaceKind,
};
use circfn_core::fields::point_distance;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use input::{parse_document, read_json, read_source, Document};

/// How a command run can fail before producing its report.
pub enum CliError {
    /// Bad flags, unreadable files, malformed JSON: exit 1.
    Usage(String),
    /// The input was understood and rejected by the library: exit 2.
    Rejected(String),
}

impl From<circfn_core::Error> for CliError {
    fn from(e: circfn_core::Error) -> Self {
        CliError::Rejected(e.to_string())
    }
}

/// A completed command: the text to emit and whether the decision was
/// positive (exit 0) or negative (exit 2).
struct Report {
    text: String,
    ok: bool,
}

impl Report {
    fn pass(text: String) -> Self {
        Report { text, ok: true }
    }

    fn decided(text: String, ok: bool) -> Self {
        Report { text, ok }
    }
}

#[derive(Parser)]
#[command(
    name = "circfn",
    about = "Normal forms for saddle-free circle-symmetric functions on \
             the cylinder, torus, disk, and sphere",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check membership: non-flatness, endpoint regularity, parity and
    /// alternation of the extremal circles.
    Validate(IoArgs),
    /// Print the critical-circle table and the isolated extrema.
    Analyze(IoArgs),
    /// Cut the surface along the critical circles and audit the Euler
    /// characteristic of the pieces.
    Decompose(IoArgs),
    /// Emit the band coefficient of the nowhere-zero circle field as CSV.
    Field(FieldArgs),
    /// Integrate the unit-period field from a start point; CSV trajectory.
    Flow(FlowArgs),
    /// Verify the induced circle action: period-one closure and the
    /// composition law at deterministic sample points.
    ActionCheck(ActionCheckArgs),
    /// Conjugate a fiber twist away over a bump window and measure how
    /// well the untwisted chain commutes with the action.
    Conjugate(ConjugateArgs),
    /// Decide whether two profiles are equivalent up to diffeomorphisms
    /// of base and target.
    Equiv(EquivArgs),
    /// Assemble a normal form from its parts; echo it back when valid so
    /// the result can be piped into other commands.
    Compose(IoArgs),
    /// Recover the profile along the angle-zero transversal arc; CSV.
    Extract(ExtractArgs),
    /// Replace every degenerate critical circle so all orders become 2.
    Morsify(MorsifyArgs),
    /// Factor an even profile through the square of the base coordinate.
    Whitney(WhitneyArgs),
    /// Cross-check the analytic circle table against an independent
    /// finite-difference grid scan.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Input document path; `-` reads JSON from stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Output path; omitted means stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Surface for a bare profile (default: inferred from the base space,
    /// interval -> cylinder, circle -> torus).
    #[arg(long, value_enum)]
    surface: Option<SurfaceArg>,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of base samples in the CSV.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Start fiber angle in turns.
    #[arg(long, default_value_t = 0.25)]
    angle: f64,
    /// Start base coordinate.
    #[arg(long, default_value_t = 0.5)]
    base: f64,
    /// Flow time in periods.
    #[arg(long, default_value_t = 1.0)]
    time: f64,
}

#[derive(Args)]
struct ActionCheckArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of sample points per check.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Largest accepted defect.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args)]
struct ConjugateArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Path to the bump-function JSON (1 on the plateau, 0 outside the
    /// support).
    #[arg(long)]
    bump: String,
    /// Verification samples per coordinate.
    #[arg(long, default_value_t = 12)]
    samples: usize,
    /// Largest accepted conjugation defect.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Args)]
struct EquivArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Path to the second profile (or normal form).
    #[arg(long)]
    other: String,
    /// Which diffeomorphisms may witness the equivalence.
    #[arg(long, value_enum, default_value_t = ModeArg::LeftRight)]
    mode: ModeArg,
    /// Samples for the witness-defect measurement.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Number of samples along the transversal arc.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct MorsifyArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Base window `lo,hi` whose circles must be kept as they are
    /// (repeatable).
    #[arg(long, value_parser = parse_window)]
    keep: Vec<[f64; 2]>,
}

#[derive(Args)]
struct WhitneyArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Samples for fitting and verifying the factor.
    #[arg(long, default_value_t = 1200)]
    samples: usize,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Base resolution of the grid scan.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    /// Fiber resolution of the grid scan.
    #[arg(long, default_value_t = 6)]
    fiber_resolution: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    Cylinder,
    Torus,
    Disk,
    Sphere,
}

impl From<SurfaceArg> for SurfaceKind {
    fn from(s: SurfaceArg) -> SurfaceKind {
        match s {
            SurfaceArg::Cylinder => SurfaceKind::Cylinder,
            SurfaceArg::Torus => SurfaceKind::Torus,
            SurfaceArg::Disk => SurfaceKind::Disk,
            SurfaceArg::Sphere => SurfaceKind::Sphere,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Base reparametrization only.
    Right,
    /// Base and target reparametrizations.
    LeftRight,
    /// Left-right with orientation-reversing witnesses allowed.
    Topological,
}

impl From<ModeArg> for EquivalenceMode {
    fn from(m: ModeArg) -> EquivalenceMode {
        match m {
            ModeArg::Right => EquivalenceMode::Right,
            ModeArg::LeftRight => EquivalenceMode::LeftRight,
            ModeArg::Topological => EquivalenceMode::Topological,
        }
    }
}

fn parse_window(raw: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err("expected `lo,hi`".into());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo < hi) {
        return Err("window needs lo < hi".into());
    }
    Ok([lo, hi])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let (io, result) = dispatch(cli.command);
    match result {
        Ok(report) => {
            if let Err(e) = emit(&io, &report.text) {
                eprintln!("circfn: {e}");
                return ExitCode::from(1);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("circfn: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Rejected(msg)) => {
            eprintln!("circfn: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> (IoArgs, Result<Report, CliError>) {
    match command {
        Command::Validate(io) => {
            let r = cmd_validate(&io);
            (io, r)
        }
        Command::Analyze(io) => {
            let r = cmd_analyze(&io);
            (io, r)
        }
        Command::Decompose(io) => {
            let r = cmd_decompose(&io);
            (io, r)
        }
        Command::Field(a) => {
            let r = cmd_field(&a);
            (a.io, r)
        }
        Command::Flow(a) => {
            let r = cmd_flow(&a);
            (a.io, r)
        }
        Command::ActionCheck(a) => {
            let r = cmd_action_check(&a);
            (a.io, r)
        }
        Command::Conjugate(a) => {
            let r = cmd_conjugate(&a);
            (a.io, r)
        }
        Command::Equiv(a) => {
            let r = cmd_equiv(&a);
            (a.io, r)
        }
        Command::Compose(io) => {
            let r = cmd_compose(&io);
            (io, r)
        }
        Command::Extract(a) => {
            let r = cmd_extract(&a);
            (a.io, r)
        }
        Command::Morsify(a) => {
            let r = cmd_morsify(&a);
            (a.io, r)
        }
        Command::Whitney(a) => {
            let r = cmd_whitney(&a);
            (a.io, r)
        }
        Command::Oracle(a) => {
            let r = cmd_oracle(&a);
            (a.io, r)
        }
    }
}

fn emit(io: &IoArgs, text: &str) -> Result<(), String> {
    match &io.output {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("writing {}: {e}", path.display()))
        }
    }
}

/// Pick the surface for a bare profile: the flag wins, otherwise the base
/// space decides (interval -> cylinder, circle -> torus).
fn surface_for(p: &Profile, io: &IoArgs) -> SurfaceKind {
    match io.surface {
        Some(s) => s.into(),
        None => match p.base {
            BaseSpace::Interval => SurfaceKind::Cylinder,
            BaseSpace::Circle => SurfaceKind::Torus,
        },
    }
}

/// Coerce the input into a normal form, wrapping bare profiles with the
/// identity chain.
fn form_from(io: &IoArgs) -> Result<NormalForm, CliError> {
    match parse_document(&read_source(&io.input)?)? {
        Document::Form(nf) => Ok(nf),
        Document::Profile(p) => {
            let kind = surface_for(&p, io);
            Ok(NormalForm::prime(kind, p)?)
        }
        Document::Records { .. } => Err(CliError::Usage(
            "this command needs a normal form or profile, not a records document".into(),
        )),
    }
}

/// Build the period-normalized circle action of the input's H-field.
fn unit_action(nf: &NormalForm) -> Result<CircleAction, CliError> {
    let (v, w) = suggest_radii(nf)?;
    let field = build_h_field(nf, v, w)?;
    let unit = normalize_period(&field)?;
    Ok(circle_action(&unit)?)
}

fn to_pretty(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}

fn cmd_validate(io: &IoArgs) -> Result<Report, CliError> {
    match parse_document(&read_source(&io.input)?)? {
        Document::Form(nf) => {
            let report = validate_membership(&nf.profile, nf.surface.kind)?;
            let ok = report.valid;
            Ok(Report::decided(to_pretty(&serde_json::to_value(&report).unwrap()), ok))
        }
        Document::Profile(p) => {
            let kind = surface_for(&p, io);
            let report = validate_membership(&p, kind)?;
            let ok = report.valid;
            Ok(Report::decided(to_pretty(&serde_json::to_value(&report).unwrap()), ok))
        }
        Document::Records { surface, records } => {
            let kind: SurfaceKind = match (surface, io.surface) {
                (Some(k), _) => k,
                (None, Some(s)) => s.into(),
                (None, None) => {
                    return Err(CliError::Usage(
                        "records document needs a `surface` field or --surface".into(),
                    ))
                }
            };
            let cyclic = kind.geometry().base() == BaseSpace::Circle;
            let parity_ok = kind != SurfaceKind::Torus || check_torus_parity(&records);
            let alternation_ok = check_alternation(&records, cyclic);
            let mut violations: Vec<String> = Vec::new();
            if !parity_ok {
                violations.push("odd number of extremal circles on the torus".into());
            }
            if !alternation_ok {
                violations
                    .push("extremal circles do not alternate between maxima and minima".into());
            }
            let ok = violations.is_empty();
            let report = json!({
                "surface": kind,
                "valid": ok,
                "parity_ok": parity_ok,
                "alternation_ok": alternation_ok,
                "violations": violations
            });
            Ok(Report::decided(to_pretty(&report), ok))
        }
    }
}

fn cmd_analyze(io: &IoArgs) -> Result<Report, CliError> {
    let nf = form_from(io)?;
    let circles = nf.critical_circles()?;
    let extrema = nf.isolated_extrema();
    let mut text = String::new();
    let _ = writeln!(text, "surface: {}", nf.surface.kind.geometry().name());
    let _ = writeln!(text, "critical circles: {}", circles.len());
    if !circles.is_empty() {
        let _ = writeln!(text, "  {:<4}{:<12}{:<7}{:<9}level", "#", "position", "order", "type");
        for (i, c) in circles.iter().enumerate() {
            let kind = match c.extremal_kind {
                Some(circfn_core::ExtremalKind::Minimum) => "min",
                Some(circfn_core::ExtremalKind::Maximum) => "max",
                None => "-",
            };
            let _ = writeln!(
                text,
                "  {:<4}{:<12.6}{:<7}{:<9}{:.6}",
                i, c.base_position, c.order, kind, c.level
            );
        }
    }
    let _ = writeln!(text, "isolated extrema: {}", extrema.len());
    if !extrema.is_empty() {
        let _ = writeln!(text, "  {:<14}{:<9}level", "location", "type");
        for e in &extrema {
            let loc = match e.location {
                circfn_core::ExtremumLocation::DiskCenter => "disk-center",
                circfn_core::ExtremumLocation::SphereSouth => "sphere-south",
                circfn_core::ExtremumLocation::SphereNorth => "sphere-north",
            };
            let kind = match e.kind {
                circfn_core::ExtremalKind::Minimum => "min",
                circfn_core::ExtremalKind::Maximum => "max",
            };
            let _ = writeln!(text, "  {:<14}{:<9}{:.6}", loc, kind, e.level);
        }
    }
    Ok(Report::pass(text))
}

fn cmd_decompose(io: &IoArgs) -> Result<Report, CliError> {
    let nf = form_from(io)?;
    let d = decompose(&nf)?;
    let audit = euler_audit(&d);
    let ok = audit.ok;
    let report = json!({ "decomposition": d, "euler_audit": audit });
    Ok(Report::decided(to_pretty(&report), ok))
}

fn cmd_field(a: &FieldArgs) -> Result<Report, CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let nf = form_from(&a.io)?;
    let (v, w) = suggest_radii(&nf)?;
    let field = build_h_field(&nf, v, w)?;
    let mut text = String::from("b,g\n");
    let circle = nf.surface.kind.geometry().base() == BaseSpace::Circle;
    for i in 0..a.samples {
        let b = if circle {
            i as f64 / a.samples as f64
        } else {
            i as f64 / (a.samples - 1) as f64
        };
        let _ = writeln!(text, "{},{}", b, field.coeff.value(b));
    }
    Ok(Report::pass(text))
}

fn cmd_flow(a: &FlowArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let (v, w) = suggest_radii(&nf)?;
    let field = build_h_field(&nf, v, w)?;
    let unit = normalize_period(&field)?;
    let start = SurfacePoint::new(a.angle, a.base);
    let trajectory = integrate_flow(&unit, start, a.time)?;
    let mut text = String::from("s,z,b\n");
    for (s, pt) in &trajectory.samples {
        let _ = writeln!(text, "{},{},{}", s, pt.angle, pt.base);
    }
    Ok(Report::pass(text))
}

fn cmd_action_check(a: &ActionCheckArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let action = unit_action(&nf)?;
    let kind = nf.surface.kind;
    // Low-discrepancy point set, kept away from the poles.
    let points: Vec<SurfacePoint> = (0..a.samples)
        .map(|i| {
            let angle = (0.17 + 0.618_033_988_75 * i as f64).fract();
            let base = 0.08 + 0.84 * (0.35 + 0.754_877_666_2 * i as f64).fract();
            SurfacePoint::new(angle, base)
        })
        .collect();
    let mut max_return: f64 = 0.0;
    let mut max_composition: f64 = 0.0;
    for (i, pt) in points.iter().enumerate() {
        let back = action.act(*pt, 1.0);
        max_return = max_return.max(point_distance(kind, pt, &back));
        let g1 = (0.05 + 0.43 * i as f64).fract();
        let g2 = (0.29 + 0.57 * i as f64).fract();
        let two_steps = action.act(action.act(*pt, g1), g2);
        let one_step = action.act(*pt, g1 + g2);
        max_composition = max_composition.max(point_distance(kind, &two_steps, &one_step));
    }
    let ok = max_return <= a.tolerance && max_composition <= a.tolerance;
    let report = json!({
        "points": a.samples,
        "max_return_defect": max_return,
        "max_composition_defect": max_composition,
        "tolerance": a.tolerance,
        "ok": ok
    });
    Ok(Report::decided(to_pretty(&report), ok))
}

fn cmd_conjugate(a: &ConjugateArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let bump: BumpFunction = read_json(&a.bump, "bump function")?;
    let conjugation = isotope_conjugator(&nf.chain, &bump)?;
    let action = unit_action(&nf)?;
    let defect = verify_conjugation(&action, &conjugation.h_tilde, a.samples);
    let ok = defect <= a.tolerance;
    let report = json!({
        "conjugation": conjugation,
        "defect": defect,
        "tolerance": a.tolerance,
        "ok": ok
    });
    Ok(Report::decided(to_pretty(&report), ok))
}

fn cmd_equiv(a: &EquivArgs) -> Result<Report, CliError> {
    let first = parse_document(&read_source(&a.io.input)?)?;
    let (p, kind) = match first {
        Document::Form(nf) => (nf.profile.clone(), nf.surface.kind),
        Document::Profile(p) => {
            let kind = surface_for(&p, &a.io);
            (p, kind)
        }
        Document::Records { .. } => {
            return Err(CliError::Usage("equiv needs profiles, not records".into()))
        }
    };
    let q = match parse_document(&read_source(&a.other)?)? {
        Document::Form(nf) => nf.profile,
        Document::Profile(p) => p,
        Document::Records { .. } => {
            return Err(CliError::Usage("equiv needs profiles, not records".into()))
        }
    };
    let decision = equivalent_on(kind, &p, &q, a.mode.into())?;
    let defect = witness_defect(&p, &q, &decision, a.samples);
    let ok = decision.equivalent;
    let report = json!({
        "decision": decision,
        "witness_defect": defect,
        "ok": ok
    });
    Ok(Report::decided(to_pretty(&report), ok))
}

fn cmd_compose(io: &IoArgs) -> Result<Report, CliError> {
    let nf = match parse_document(&read_source(&io.input)?)? {
        Document::Form(nf) => nf,
        Document::Profile(p) => {
            let kind = surface_for(&p, io);
            NormalForm::prime(kind, p)?
        }
        Document::Records { .. } => {
            return Err(CliError::Usage(
                "compose needs a normal-form document, not records".into(),
            ))
        }
    };
    let report = validate_membership(&nf.profile, nf.surface.kind)?;
    if !report.valid {
        let why = report
            .violations
            .first()
            .cloned()
            .unwrap_or_else(|| "membership violation".into());
        return Err(CliError::Rejected(format!("composed form rejected: {why}")));
    }
    let value = serde_json::to_value(&nf).expect("serializable normal form");
    Ok(Report::pass(to_pretty(&value)))
}

fn cmd_extract(a: &ExtractArgs) -> Result<Report, CliError> {
    if a.samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let nf = form_from(&a.io)?;
    let pairs = nf.extract_profile(a.samples)?;
    let mut text = String::from("b,f\n");
    for (b, f) in &pairs {
        let _ = writeln!(text, "{},{}", b, f);
    }
    Ok(Report::pass(text))
}

fn cmd_morsify(a: &MorsifyArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let morse = morsify(&nf.profile, &a.keep)?;
    let value = serde_json::to_value(&morse).expect("serializable profile");
    Ok(Report::pass(to_pretty(&value)))
}

fn cmd_whitney(a: &WhitneyArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let factor = whitney_factor(&nf.profile, a.samples)?;
    let value = serde_json::to_value(&factor).expect("serializable profile");
    Ok(Report::pass(to_pretty(&value)))
}

fn cmd_oracle(a: &OracleArgs) -> Result<Report, CliError> {
    let nf = form_from(&a.io)?;
    let comparison = audit_normal_form(&nf, a.resolution, a.fiber_resolution)?;
    let ok = comparison.ok();
    let value = serde_json::to_value(&comparison).expect("serializable comparison");
    Ok(Report::decided(to_pretty(&value), ok))
}
