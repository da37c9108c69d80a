//! End-to-end tests of the binary: exit codes, output formats, config
//! merging, and seed resolution.

use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_expo-surf"));
    c.env_remove("EXPO_SURF_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn surface_exact_ball_json() {
    let out = run(&["surface", "--n", "5", "--p", "2", "--body", "ball=2", "--method", "exact"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["estimate"]["method"], "exact");
    let value = v["estimate"]["value"].as_f64().unwrap();
    assert!((value - 0.575903643).abs() < 1e-9, "{value}");
}

#[test]
fn bounds_reports_selected_variant() {
    let out = run(&["bounds", "--n", "16", "--p", "2", "--variant", "stated"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["variant"], "stated");
    assert_eq!(v["upper_bound"], v["upper_bound_as_stated"]);
    let lower = v["lower_bound"].as_f64().unwrap();
    assert!((lower - 0.210798449).abs() < 1e-9);
}

#[test]
fn domain_error_exits_2() {
    let out = run(&["bounds", "--n", "16", "--p", "0.01"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_method_exits_2() {
    let out = run(&["surface", "--n", "5", "--p", "2", "--body", "ball", "--method", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unsupported_body_method_pair_exits_2() {
    // The exact estimator handles spheres only.
    let out = run(&["surface", "--n", "5", "--p", "2", "--body", "cube", "--method", "exact"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_construction_exits_4() {
    // N grows like e^(sqrt(n)/2); n = 2000 overflows the resource cap.
    let out = run(&["randpoly", "--n", "2000", "--p", "2", "--trials", "2", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn missing_required_parameter_exits_2() {
    let out = run(&["bounds", "--n", "16"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn randpoly_csv_is_byte_deterministic() {
    let args = [
        "randpoly", "--n", "8", "--p", "2", "--trials", "5", "--samples", "500", "--seed", "11",
        "--workers", "3",
    ];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# seed=11 workers=3\n"));
    assert!(text.contains("trial,seed,n,p,N,rho,estimate,std_error,method\n"));
    assert!(!text.contains('\r'), "CSV must use LF line endings");
}

#[test]
fn scaling_csv_and_summary() {
    let dir = std::env::temp_dir().join(format!("expo-surf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("scaling.csv");
    let out = run(&[
        "scaling", "--p", "2", "--n-list", "8,12,16,24", "--target", "ball",
        "--output", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.lines().nth(1).unwrap()
        .starts_with("n,mean,stderr,lower_bound,upper_as_derived,rough_bound"));
    assert_eq!(csv.lines().count(), 6);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Sphere surface area is ~constant in n at p = 2: slope near zero.
    assert!(v["slope"].as_f64().unwrap().abs() < 0.05);
    assert_eq!(v["theory"].as_f64().unwrap(), 0.25);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn scaling_requires_four_points() {
    let out = run(&["scaling", "--p", "2", "--n-list", "8,12,16", "--target", "ball"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_resolution_order() {
    // Env var beats the default...
    let out = bin()
        .env("EXPO_SURF_SEED", "77")
        .args(["surface", "--n", "4", "--p", "2", "--body", "ball", "--method", "exact"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 77);
    // ...an explicit flag beats the env var...
    let out = bin()
        .env("EXPO_SURF_SEED", "77")
        .args(["surface", "--n", "4", "--p", "2", "--body", "ball", "--method", "exact", "--seed", "5"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 5);
    // ...and without either, the fixed default applies.
    let out = run(&["surface", "--n", "4", "--p", "2", "--body", "ball", "--method", "exact"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 0x5EED);
}

#[test]
fn config_file_supplies_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("expo-surf-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    std::fs::write(
        &cfg,
        r#"{"n": 16, "p": 2.0, "variant": "stated", "seed": 123}"#,
    )
    .unwrap();
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["n"], 16);
    assert_eq!(v["variant"], "stated");
    // Flag overrides the file.
    let out = run(&["bounds", "--config", cfg.to_str().unwrap(), "--variant", "derived"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["variant"], "derived");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_config_exits_2() {
    let dir = std::env::temp_dir().join(format!("expo-surf-badcfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, "not json").unwrap();
    let out = run(&["bounds", "--n", "8", "--p", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_passes_and_tamper_fails() {
    let out = run(&["verify"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_passed"], true);
    assert!(v["total"].as_u64().unwrap() >= 20);

    let out = run(&["verify", "--tamper"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_passed"], false);
}

#[test]
fn inline_json_body() {
    let body = r#"{"type":"slab","n":4,"parameters":{"offset":1.0},"directions":[[1.0,0.0,0.0,0.0]]}"#;
    let out = run(&["surface", "--n", "4", "--p", "2", "--body", body, "--method", "quadrature"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // Two parallel hyperplanes at distance 1: 2 phi(1).
    let value = v["estimate"]["value"].as_f64().unwrap();
    assert!((value - 2.0 * 0.241970725).abs() < 1e-6, "{value}");
}

#[test]
fn nine_significant_digit_output() {
    let out = run(&["surface", "--n", "5", "--p", "2", "--body", "ball=2", "--method", "exact"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let value = v["estimate"]["value"].as_f64().unwrap();
    let formatted = format!("{value:e}");
    let digits: usize = formatted
        .split('e')
        .next()
        .unwrap()
        .chars()
        .filter(char::is_ascii_digit)
        .count();
    assert!(digits <= 9, "more than 9 significant digits: {formatted}");
}
