use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbe-mom"))
        .args(args)
        .env_remove("CBE_MOM_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn mom_exact_values() {
    let v = json(&[
        "mom", "--N", "2", "--k", "2", "--q", "1", "--beta", "2", "--method", "exact",
    ]);
    assert_eq!(v["value"]["rational"], "10");
    assert_eq!(v["value"]["num"], "10");
    assert_eq!(v["value"]["den"], "1");
    let v = json(&[
        "mom", "--N", "1", "--k", "3", "--q", "1", "--beta", "7/3", "--method", "exact",
    ]);
    assert_eq!(v["value"]["rational"], "8");
    let v = json(&[
        "mom", "--N", "3", "--k", "2", "--q", "1", "--beta", "1/2", "--method", "j-enum",
    ]);
    let w = json(&["mom", "--N", "3", "--k", "2", "--q", "1", "--beta", "1/2"]);
    assert_eq!(v["value"], w["value"]);
}

#[test]
fn mom_quadrature() {
    let v = json(&[
        "mom",
        "--N",
        "3",
        "--k",
        "1",
        "--q",
        "1",
        "--beta",
        "2",
        "--method",
        "quadrature",
    ]);
    let x = v["value"]["decimal"].as_f64().unwrap();
    assert!((x - 4.0).abs() < 1e-9, "{x}");
}

#[test]
fn decimal_beta_stays_off_exact_paths() {
    let out = run(&[
        "mom", "--N", "3", "--k", "1", "--q", "1", "--beta", "2.5", "--method", "exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("decimal"));
    let v = json(&[
        "mom",
        "--N",
        "2",
        "--k",
        "1",
        "--q",
        "1",
        "--beta",
        "2.0",
        "--mc-budget",
        "2000",
    ]);
    assert_eq!(v["method"], "monte-carlo");
    assert!(v["std_error"].is_number());
}

#[test]
fn coeff_k1_exact_tag() {
    let v = json(&["coeff", "--k", "1", "--q", "2", "--beta", "2"]);
    assert_eq!(v["value"]["exact"]["rational"], "1/12");
    assert!((v["value"]["decimal"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-12);
    assert_eq!(v["diagnostics"]["finiteness"]["status"], "finite");
}

#[test]
fn coeff_refuses_outside_known_domain() {
    let out = run(&["coeff", "--k", "2", "--q", "1", "--beta", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["error"]["kind"], "refused");
    assert_eq!(err["error"]["reason"], "A(2;1)=(0,4)");
}

#[test]
fn coeff_k2_estimate() {
    let v = json(&[
        "coeff",
        "--k",
        "2",
        "--q",
        "1",
        "--beta",
        "2",
        "--mc-budget",
        "1e6",
        "--seed",
        "7",
    ]);
    let (x, se) = (
        v["value"]["decimal"].as_f64().unwrap(),
        v["std_error"].as_f64().unwrap(),
    );
    assert!((x - 1.0 / 6.0).abs() < 3.0 * se + 1e-3, "{x} ± {se}");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["mc_budget"], 1_000_000);
}

#[test]
fn scan_ratio_column() {
    let out = run(&[
        "scan", "--N", "1..20", "--k", "1", "--q", "1", "--beta", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,MoM,ratio,slope"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let n: f64 = f[0].parse().unwrap();
        assert_eq!(f[1].parse::<f64>().unwrap(), n + 1.0);
        assert!((f[2].parse::<f64>().unwrap() - (n + 1.0) / n).abs() < 1e-12);
    }
}

#[test]
fn scan_with_two_points_warns() {
    let out = run(&["scan", "--N", "5,10", "--k", "1", "--q", "1", "--beta", "2"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        assert!(line.ends_with(','), "{line}");
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn stochastic_runs_are_byte_identical() {
    let scan = [
        "scan",
        "--N",
        "1..4",
        "--k",
        "2",
        "--q",
        "1",
        "--beta",
        "1",
        "--method",
        "mc",
        "--mc-budget",
        "4000",
        "--seed",
        "11",
    ];
    assert_eq!(run(&scan).stdout, run(&scan).stdout);
    let sample = [
        "sample",
        "--N",
        "4",
        "--beta",
        "3/2",
        "--mc-budget",
        "50",
        "--seed",
        "2",
        "--format",
        "csv",
    ];
    assert_eq!(run(&sample).stdout, run(&sample).stdout);
    let coeff = [
        "coeff",
        "--k",
        "3",
        "--q",
        "1",
        "--beta",
        "2",
        "--mc-budget",
        "20000",
        "--seed",
        "5",
    ];
    let a = run(&coeff);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&coeff).stdout);
}

#[test]
fn records_round_trip_as_config() {
    let dir = std::env::temp_dir().join(format!("cbe-mom-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cases: [&[&str]; 3] = [
        &["mom", "--N", "4", "--k", "2", "--q", "1", "--beta", "3/5"],
        &[
            "mom",
            "--N",
            "3",
            "--k",
            "1",
            "--q",
            "2",
            "--beta",
            "4",
            "--method",
            "mc",
            "--mc-budget",
            "3000",
            "--seed",
            "9",
        ],
        &[
            "coeff",
            "--k",
            "1",
            "--q",
            "3",
            "--beta",
            "1",
            "--method",
            "selberg",
            "--mc-budget",
            "5000",
            "--seed",
            "1",
        ],
    ];
    for (i, args) in cases.iter().enumerate() {
        let first = run(args);
        assert!(first.status.success());
        let path = dir.join(format!("record{i}.json"));
        std::fs::write(&path, &first.stdout).unwrap();
        let again = run(&["--config", path.to_str().unwrap(), args[0]]);
        assert_eq!(first.stdout, again.stdout, "{args:?}");
    }
    let exact: Value = serde_json::from_slice(&run(cases[0]).stdout).unwrap();
    let r = exact["value"]["rational"].as_str().unwrap();
    assert_eq!(
        format!(
            "{}/{}",
            exact["value"]["num"].as_str().unwrap(),
            exact["value"]["den"].as_str().unwrap()
        ),
        r
    );
}

#[test]
fn toml_config_and_flag_precedence() {
    let dir = std::env::temp_dir().join(format!("cbe-mom-toml-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.toml");
    std::fs::write(&path, "N = 2\nk = 2\nq = 1\nbeta = 2\n").unwrap();
    let v = json(&["--config", path.to_str().unwrap(), "mom"]);
    assert_eq!(v["value"]["rational"], "10");
    let v = json(&["--config", path.to_str().unwrap(), "mom", "--N", "1"]);
    assert_eq!(v["value"]["rational"], "4");
}

#[test]
fn workers_do_not_change_results() {
    let base = ["mom", "--N", "4", "--k", "2", "--q", "2", "--beta", "2"];
    let one: Value =
        serde_json::from_slice(&run(&[&["--workers", "1"], &base[..]].concat()).stdout).unwrap();
    let four: Value =
        serde_json::from_slice(&run(&[&["--workers", "4"], &base[..]].concat()).stdout).unwrap();
    assert_eq!(one["value"], four["value"]);
}

#[test]
fn resource_errors_are_structured() {
    let out = run(&[
        "mom",
        "--N",
        "30",
        "--k",
        "3",
        "--q",
        "2",
        "--beta",
        "2",
        "--max-layer-size",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["error"]["kind"], "resource");
    assert!(err["error"]["hint"].as_str().unwrap().contains("reduce"));
}

#[test]
fn auxiliary_commands() {
    let v = json(&["jack", "--lambda", "1,0", "--points", "1,1", "--beta", "2"]);
    assert!((v["value"]["re"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let v = json(&["singularity", "--k", "3", "--q", "1"]);
    assert_eq!(v["order"], "6(1-2/beta)");
    let v = json(&["singularity", "--k", "2", "--q", "2", "--point", "star"]);
    assert_eq!(v["threshold"]["rational"], "16");
    let v = json(&["finiteness", "--k", "3", "--q", "1", "--beta", "3"]);
    assert_eq!(v["report"]["status"], "unknown-conjectured-finite");
    let v = json(&["sample", "--N", "3", "--beta", "2", "--mc-budget", "10"]);
    assert_eq!(v["samples"].as_array().unwrap().len(), 10);
}
