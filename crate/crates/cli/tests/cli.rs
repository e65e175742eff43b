use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const THERMAL_3: &str = r#"{"modes":1,"mean":[0.0,0.0],"cov":[[3.0,0.0],[0.0,3.0]]}"#;
const VACUUM: &str = r#"{"modes":1,"mean":[0.0,0.0],"cov":[[1.0,0.0],[0.0,1.0]]}"#;
const LOSS_HALF: &str = r#"{"X":[[0.7071067811865476,0.0],[0.0,0.7071067811865476]],"Y":[[0.5,0.0],[0.0,0.5]],"delta":[0.0,0.0]}"#;
const IDENTITY: &str = r#"{"X":[[1.0,0.0],[0.0,1.0]],"Y":[[0.0,0.0],[0.0,0.0]],"delta":[0.0,0.0]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gauss-petz"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn petz_thermal_loss_writes_recovery_channel() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", THERMAL_3);
    let channel = write(&dir, "channel.json", LOSS_HALF);
    let out = dir.path().join("petz.json");
    let result = run(&[
        "petz",
        "--state",
        s(&state),
        "--channel",
        s(&channel),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&result), 0);
    let json: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let x = json["X_P"][0][0].as_f64().unwrap();
    let y = json["Y_P"][1][1].as_f64().unwrap();
    assert!((x - 2.0 / 3f64.sqrt()).abs() < 1e-10);
    assert!((y - 1.0 / 3.0).abs() < 1e-10);
    assert!(json["cp_min_eigenvalue"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn petz_identity_channel() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", THERMAL_3);
    let channel = write(&dir, "channel.json", IDENTITY);
    let result = run(&["petz", "--state", s(&state), "--channel", s(&channel)]);
    assert_eq!(code(&result), 0);
    let json: Value = serde_json::from_str(&stdout(&result)).unwrap();
    assert!((json["X_P"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(json["X_P"][0][1].as_f64().unwrap().abs() < 1e-12);
    assert!(json["Y_P"][0][0].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn petz_exit_codes() {
    let dir = TempDir::new().unwrap();
    let vacuum = write(&dir, "vacuum.json", VACUUM);
    let identity = write(&dir, "identity.json", IDENTITY);
    let result = run(&["petz", "--state", s(&vacuum), "--channel", s(&identity)]);
    assert_eq!(code(&result), 2);
    assert!(String::from_utf8_lossy(&result.stderr).contains("not faithful"));

    let broken = write(&dir, "broken.json", r#"{"modes":1,"mean":[0.0]"#);
    assert_eq!(
        code(&run(&[
            "petz",
            "--state",
            s(&broken),
            "--channel",
            s(&identity)
        ])),
        3
    );
    let wrong_modes = write(
        &dir,
        "wrong.json",
        r#"{"modes":2,"mean":[0.0,0.0],"cov":[[3.0,0.0],[0.0,3.0]]}"#,
    );
    assert_eq!(
        code(&run(&[
            "petz",
            "--state",
            s(&wrong_modes),
            "--channel",
            s(&identity)
        ])),
        3
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&run(&[
            "petz",
            "--state",
            s(&missing),
            "--channel",
            s(&identity)
        ])),
        3
    );
}

#[test]
fn verify_passes_and_detects_corruption() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", THERMAL_3);
    let channel = write(&dir, "channel.json", LOSS_HALF);
    let ok = run(&["verify", "--state", s(&state), "--channel", s(&channel)]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));

    let bad = run(&[
        "verify",
        "--state",
        s(&state),
        "--channel",
        s(&channel),
        "--corrupt-noise",
        "0.05",
    ]);
    assert_eq!(code(&bad), 1);
    let text = stdout(&bad);
    assert!(text.contains("at_w1") && text.contains("at_w2"));

    let trivial = run(&[
        "verify",
        "--state",
        s(&state),
        "--channel",
        s(&channel),
        "--grid",
        "1",
    ]);
    assert_eq!(code(&trivial), 0);
    assert!(stdout(&trivial).contains("0.000000e0"));
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    let args = ["search", "--seed", "9", "--samples", "3000", "--top", "5"];
    let a = bin()
        .args(args)
        .args(["--out", s(&first)])
        .env("GAUSS_PETZ_THREADS", "1")
        .output()
        .unwrap();
    let b = bin()
        .args(args)
        .args(["--out", s(&second)])
        .env("GAUSS_PETZ_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&a), code(&b));
    assert_eq!(fs::read(first).unwrap(), fs::read(second).unwrap());
}

#[test]
fn search_seed_42_finds_counterexample() {
    let result = run(&[
        "search",
        "--seed",
        "42",
        "--samples",
        "100000",
        "--top",
        "3",
    ]);
    assert_eq!(code(&result), 0);
    let json: Value = serde_json::from_str(&stdout(&result)).unwrap();
    let records = json["records"].as_array().unwrap();
    assert_eq!(records.len(), 3);
    assert!(records[0]["deficit"].as_f64().unwrap() < -1e-6);
}

#[test]
fn search_without_samples_fails() {
    let result = run(&["search", "--samples", "0"]);
    assert_eq!(code(&result), 1);
    let json: Value = serde_json::from_str(&stdout(&result)).unwrap();
    assert!(json["records"].as_array().unwrap().is_empty());
}

#[test]
fn search_rejects_three_modes() {
    assert_eq!(
        code(&run(&["search", "--samples", "10", "--modes", "3"])),
        3
    );
}

#[test]
fn bound_equal_states_and_config_error() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "state.json", THERMAL_3);
    let channel = write(&dir, "channel.json", LOSS_HALF);
    let result = run(&[
        "bound",
        "--rho",
        s(&state),
        "--sigma",
        s(&state),
        "--channel",
        s(&channel),
    ]);
    assert_eq!(code(&result), 0);
    let slack: f64 = stdout(&result)
        .lines()
        .find_map(|l| l.strip_prefix("slack\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(slack.abs() < 1e-9);

    let narrow = run(&[
        "bound",
        "--rho",
        s(&state),
        "--sigma",
        s(&state),
        "--channel",
        s(&channel),
        "--quad-range",
        "0.5",
    ]);
    assert_eq!(code(&narrow), 3);
}

#[test]
fn bound_holds_on_archived_instances() {
    let fixtures =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bound_instances.json");
    let instances: Vec<Value> =
        serde_json::from_str(&fs::read_to_string(fixtures).unwrap()).unwrap();
    assert_eq!(instances.len(), 20);
    let dir = TempDir::new().unwrap();
    for (i, instance) in instances.iter().enumerate() {
        let rho = write(&dir, &format!("rho{i}.json"), &instance["rho"].to_string());
        let sigma = write(
            &dir,
            &format!("sigma{i}.json"),
            &instance["sigma"].to_string(),
        );
        let channel = write(
            &dir,
            &format!("channel{i}.json"),
            &instance["channel"].to_string(),
        );
        let result = run(&[
            "bound",
            "--rho",
            s(&rho),
            "--sigma",
            s(&sigma),
            "--channel",
            s(&channel),
        ]);
        assert_eq!(code(&result), 0, "instance {i}: {}", stdout(&result));
    }
}

#[test]
fn oracle_default_passes() {
    let result = run(&["oracle"]);
    assert_eq!(code(&result), 0, "{}", stdout(&result));
    assert!(!stdout(&result).contains("FAIL"));
}

#[test]
fn oracle_low_cutoff_reports_truncation() {
    let result = run(&["oracle", "--cutoff", "6"]);
    assert_eq!(code(&result), 1);
    let text = stdout(&result);
    assert!(text.starts_with("check\terror\ttail_mass"));
    let failing: Vec<&str> = text.lines().filter(|l| l.contains("FAIL")).collect();
    assert!(!failing.is_empty());
    // Every failing row carries a nonzero tail diagnostic.
    for line in failing {
        let tail: f64 = line.split('\t').nth(2).unwrap().parse().unwrap();
        assert!(tail > 1e-6, "{line}");
    }
    assert_eq!(code(&run(&["oracle", "--cutoff", "6", "--tol", "10"])), 0);
    assert_eq!(code(&run(&["oracle", "--cutoff", "61"])), 3);
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = bin()
        .args(["search", "--samples", "1"])
        .env("GAUSS_PETZ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
}
