use std::path::{Path, PathBuf};
use std::process::Command;

use gaussflux_cli::{JobConfig, RunReport, Status};
use serde_json::Value;
use tempfile::TempDir;

const ANNULUS: &str = r#"{"holes": [{"center": [0, 0], "radius": 0.3}]}"#;
const CATENOID: &str = r#"{"kind": "weierstrass", "g": "z", "phi3": "1/z"}"#;

struct Run {
    code: i32,
    report: RunReport,
    out: PathBuf,
}

fn run_in(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.join(format!("{cmd}.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("out-{cmd}-{}", extra.join("")));
    let status = Command::new(env!("CARGO_BIN_EXE_gaussflux"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    Run {
        code: status.code().unwrap(),
        report: serde_json::from_str(&text).unwrap(),
        out,
    }
}

fn run(cmd: &str, config: &str) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let r = run_in(dir.path(), cmd, config, &[]);
    (dir, r)
}

fn check(r: &RunReport, name: &str) -> f64 {
    r.checks
        .iter()
        .find(|c| c.name == name)
        .and_then(|c| c.value)
        .unwrap_or_else(|| panic!("no check {name}"))
}

fn result<'a>(r: &'a RunReport, key: &str) -> &'a Value {
    r.results
        .get(key)
        .unwrap_or_else(|| panic!("no result {key}"))
}

fn catenoid_job(flux: &str, extra: &str) -> String {
    format!(r#"{{"domain": {ANNULUS}, "input": {CATENOID}, "flux": {flux}{extra}}}"#)
}

#[test]
fn catenoid_synthesize_and_verify() {
    let dir = TempDir::new().unwrap();
    let s = run_in(
        dir.path(),
        "synthesize",
        &catenoid_job("[[0, 0, 6.283185307179586]]", r#", "resolution": 64"#),
        &[],
    );
    assert_eq!(s.code, 0, "{:?}", s.report);
    assert_eq!(s.report.status, Status::Pass);
    let range = result(&s.report, "h_modulus_range");
    assert!(
        (range[0].as_f64().unwrap() - 1.0).abs() < 1e-9
            && (range[1].as_f64().unwrap() - 1.0).abs() < 1e-9
    );
    assert!(check(&s.report, "flux") < 1e-9);
    for a in &s.report.artifacts {
        assert!(s.out.join(a).exists(), "{a}");
    }
    assert!(s.report.artifacts.contains(&"mesh.obj".to_string()));
    assert!(s.out.join("timings.json").exists());

    let field = s.out.join("field.json");
    let job = format!(
        r#"{{"domain": {ANNULUS}, "input": {CATENOID}, "flux": [[0, 0, 6.283185307179586]], "verify": {{"field": {field:?}}}}}"#
    );
    let v = run_in(dir.path(), "verify", &job, &[]);
    assert_eq!(v.code, 0, "{:?}", v.report);
    assert!(check(&v.report, "gauss") < 1e-6);

    let mesh = std::fs::read_to_string(s.out.join("mesh.obj")).unwrap();
    let mut k = 0;
    let bad: String = mesh
        .lines()
        .map(|l| {
            if let Some(rest) = l.strip_prefix("v ") {
                k += 1;
                let x: Vec<f64> = rest
                    .split_whitespace()
                    .map(|t| t.parse().unwrap())
                    .collect();
                let d = 1e-3 * ((k * 7919 % 1000) as f64 / 500.0 - 1.0);
                format!("v {} {} {}\n", x[0] + d, x[1] - d, x[2] + 0.5 * d)
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let bad_path = dir.path().join("bad.obj");
    std::fs::write(&bad_path, bad).unwrap();
    let job = format!(
        r#"{{"domain": {ANNULUS}, "input": {CATENOID}, "verify": {{"field": {field:?}, "mesh": {bad_path:?}}}}}"#
    );
    let v = run_in(dir.path(), "verify", &job, &["--seed", "1"]);
    assert_eq!(v.code, 1);
    assert!(check(&v.report, "conformality") > 1e-6);
}

#[test]
fn zero_flux_gives_a_null_curve() {
    let (_d, r) = run(
        "synthesize",
        &catenoid_job("[[0, 0, 0]]", r#", "resolution": 192"#),
    );
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert!(check(&r.report, "complex_period") < 1e-9);
    let range = result(&r.report, "h_modulus_range");
    assert!(range[1].as_f64().unwrap() / range[0].as_f64().unwrap() > 10.0);
}

#[test]
fn flux_rows_must_match_holes() {
    let (_d, r) = run("synthesize", &catenoid_job("[[0, 0, 1], [0, 0, 1]]", ""));
    assert_eq!(r.code, 2);
    assert_eq!(r.report.status, Status::ConfigError);
    assert!(r.report.artifacts.is_empty());
    assert!(!r.out.join("mesh.obj").exists());
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_gaussflux"))
        .args(["area", "--config"])
        .arg(dir.path().join("absent.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn four_dimensional_data_skips_gauss() {
    let n4 =
        r#"{"kind": "null-data", "components": ["(1/z^2 - 1)/2", "i*(1/z^2 + 1)/2", "1/z", "0"]}"#;
    let dir = TempDir::new().unwrap();
    let s = run_in(
        dir.path(),
        "synthesize",
        &format!(r#"{{"domain": {ANNULUS}, "input": {n4}}}"#),
        &[],
    );
    assert_eq!(s.code, 0, "{:?}", s.report);
    assert!(s.report.artifacts.contains(&"mesh.csv".to_string()));
    let field = s.out.join("field.json");
    let v = run_in(
        dir.path(),
        "verify",
        &format!(r#"{{"domain": {ANNULUS}, "input": {n4}, "verify": {{"field": {field:?}}}}}"#),
        &[],
    );
    assert_eq!(v.code, 0);
    let g = v.report.checks.iter().find(|c| c.name == "gauss").unwrap();
    assert_eq!(g.passed, None);
    assert_eq!(g.note.as_deref(), Some("n≠3"));
}

#[test]
fn reports_are_deterministic_and_echo_the_config() {
    let dir = TempDir::new().unwrap();
    let job = catenoid_job("[[0, 0, 6.283185307179586]]", "");
    let a = run_in(dir.path(), "synthesize", &job, &[]);
    let b = run_in(dir.path(), "synthesize", &job, &["--seed", "0"]);
    for f in ["report.json", "mesh.obj", "field.json"] {
        assert_eq!(
            std::fs::read(a.out.join(f)).unwrap(),
            std::fs::read(b.out.join(f)).unwrap(),
            "{f}"
        );
    }
    let echo = serde_json::to_string(&a.report.config).unwrap();
    assert_eq!(
        JobConfig::from_json(&echo).unwrap(),
        JobConfig::from_json(&job).unwrap()
    );

    let c = run_in(dir.path(), "synthesize", &job, &["--seed", "9"]);
    assert_eq!(
        std::fs::read(a.out.join("mesh.obj")).unwrap(),
        std::fs::read(c.out.join("mesh.obj")).unwrap()
    );
}

fn deform_job(kind: &str, extra: &str) -> String {
    format!(
        r#"{{"domain": {ANNULUS}, "input": {CATENOID}, "resolution": 192, "deform": {{"kind": "{kind}", "samples": 2{extra}}}}}"#
    )
}

#[test]
fn flux_isotopy_emits_one_mesh_per_sample() {
    let (_d, r) = run("deform", &deform_job("flux-isotopy", ""));
    assert_eq!(r.code, 0, "{:?}", r.report);
    let meshes = r
        .report
        .artifacts
        .iter()
        .filter(|a| a.ends_with(".obj"))
        .count();
    assert_eq!(
        meshes,
        result(&r.report, "parameters").as_array().unwrap().len()
    );
    assert!(meshes >= 3);
    assert!(check(&r.report, "endpoint_periods") < 1e-9);
}

#[test]
fn associated_family_is_isometric() {
    let (_d, r) = run(
        "deform",
        &deform_job("associated", r#", "preprocess": true"#),
    );
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert!(check(&r.report, "isometry[2]") < 1e-6);
}

#[test]
fn flatten_needs_exact_forms() {
    let (_d, r) = run("deform", &deform_job("flatten", ""));
    assert_eq!(r.code, 1);
    let err = r.report.error.unwrap();
    assert!(err.contains("phi3 on loop 0"), "{err}");
}

#[test]
fn flatten_after_preprocessing() {
    let (_d, r) = run("deform", &deform_job("flatten", r#", "preprocess": true"#));
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert!(check(&r.report, "flatness[0]") < 1e-8);
    assert!(check(&r.report, "matches_input[2]") < 1e-9);
}

#[test]
fn nonflatization_reaches_full_rank() {
    let (_d, r) = run("deform", &deform_job("nonflatize", ""));
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert!(check(&r.report, "gg2_periods") < 1e-9);
    assert_eq!(result(&r.report, "rank")["rank"], 3);
}

#[test]
fn classify_examples() {
    let (_d, r) = run(
        "classify",
        &format!(r#"{{"domain": {ANNULUS}, "input": {CATENOID}}}"#),
    );
    assert_eq!(r.code, 0);
    assert_eq!(result(&r.report, "class"), &serde_json::json!([0]));

    let flat = r#"{"kind": "null-data", "components": ["z", "i*z", "0"]}"#;
    let (_d, r) = run(
        "classify",
        &format!(
            r#"{{"domain": {ANNULUS}, "input": {flat}, "classify": {{"representative": true}}}}"#
        ),
    );
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert_eq!(result(&r.report, "class"), &serde_json::json!([1]));
    assert_eq!(
        result(&r.report, "representative_class"),
        &serde_json::json!([1])
    );

    let (_d, r) = run(
        "classify",
        r#"{"input": {"kind": "weierstrass", "g": "z + 2", "phi3": "1"}}"#,
    );
    assert_eq!(r.code, 0);
    assert_eq!(result(&r.report, "class"), &serde_json::json!([]));
    assert_eq!(r.report.stages[0].note.as_deref(), Some("simply connected"));
}

#[test]
fn area_verdicts() {
    let cases = [("z", "not-concluded"), ("0.1*z", "stable"), ("2", "stable")];
    for (g, verdict) in cases {
        let (_d, r) = run(
            "area",
            &format!(r#"{{"input": {{"kind": "weierstrass", "g": "{g}", "phi3": "1"}}}}"#),
        );
        assert_eq!(r.code, 0);
        assert_eq!(result(&r.report, "verdict"), verdict, "{g}");
    }
    let (_d, r) = run(
        "area",
        r#"{"input": {"kind": "weierstrass", "g": "z", "phi3": "1"}}"#,
    );
    let a = result(&r.report, "spherical_area").as_f64().unwrap();
    assert!((a - std::f64::consts::TAU).abs() < 1e-6);
}

#[test]
fn solve_interval_multiplier() {
    let job = r#"{"interval": {"kind": "multiplier", "components": ["exp(2*pi*i*s)", "exp(4*pi*i*s)"], "alpha": [[0.3, -0.2], [0.1, 0.5]]}}"#;
    let (_d, r) = run("solve-interval", job);
    assert_eq!(r.code, 0, "{:?}", r.report);
    assert!(check(&r.report, "verified_residual") < 1e-8);
    let csv = std::fs::read_to_string(r.out.join("multiplier.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1002);
}
