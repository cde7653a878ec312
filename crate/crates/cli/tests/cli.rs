use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_softsqueeze"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(
        code(out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn entries(v: &Value) -> Vec<f64> {
    ["u11", "u12", "u21", "u22"]
        .iter()
        .map(|k| v[*k].as_f64().unwrap())
        .collect()
}

#[test]
fn evolve_mathieu_interval() {
    let out = run(&[
        "evolve",
        "--profile",
        r#"{"kind":"mathieu","beta0":1.217,"beta1":0.844}"#,
        "--from",
        "1.5707963",
        "--to",
        "7.8539816",
    ]);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], "evolve");
    let u = entries(&v["data"]["matrix"]);
    let expected = [0.22604473, -0.07208895, 0.096338, 4.39317958];
    for (a, b) in u.iter().zip(expected) {
        assert!((a - b).abs() < 1e-5, "{u:?}");
    }
    assert!((v["data"]["det"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["data"]["zone"]["zone"], "III");
}

#[test]
fn evolve_quarter_rotation_csv() {
    let out = run(&[
        "evolve",
        "--profile",
        r#"{"kind":"constant","beta":1.0}"#,
        "--from",
        "0",
        "--to",
        "pi/2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("from [1],to [1],u11 [1]"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let u: Vec<f64> = row[2..6].iter().map(|s| s.parse().unwrap()).collect();
    for (a, b) in u.iter().zip([0.0, 1.0, -1.0, 0.0]) {
        assert!((a - b).abs() < 1e-10);
    }
    assert_eq!(row[8], "I");
}

#[test]
fn evolve_profile_file_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(&path, r#"{"kind":"constant","beta":0.25}"#).unwrap();
    let out = run(&[
        "evolve",
        "--profile",
        path.to_str().unwrap(),
        "--from",
        "0",
        "--to",
        "pi",
    ]);
    let u = entries(&json(&out)["data"]["matrix"]);
    assert!((u[1] - 2.0).abs() < 1e-10);

    let missing = dir.path().join("absent.json");
    let out = run(&[
        "evolve",
        "--profile",
        missing.to_str().unwrap(),
        "--from",
        "0",
        "--to",
        "1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn evolve_bad_inputs_exit_2() {
    let out = run(&[
        "evolve",
        "--profile",
        r#"{"kind":"nope"}"#,
        "--from",
        "0",
        "--to",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "evolve",
        "--profile",
        r#"{"kind":"constant","beta":1}"#,
        "--from",
        "0",
    ]);
    assert_eq!(code(&out), 2);
    let out = run(&["evolve", "--from", "pie"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn config_file_supplies_defaults_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_path = dir.path().join("out.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"profile": {{"kind":"constant","beta":1.0}}, "from": "0", "to": "pi",
                "integrator": {{"method":"rk4","steps":4000}}, "seed": 42,
                "out": {:?}}}"#,
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "evolve"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["seed"], 42);
    let u = entries(&v["data"]["matrix"]);
    assert!((u[0] + 1.0).abs() < 1e-10);

    fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(
        code(&run(&["--config", cfg.to_str().unwrap(), "evolve"])),
        2
    );
}

#[test]
fn scan_small_grid_has_zone_three() {
    let out = run(&[
        "scan", "--n0", "6", "--n1", "6", "--steps", "4000", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 37);
    assert!(lines[0].contains("gamma [1]"));
    assert!(lines[1..].iter().any(|l| l.ends_with(",III")));
}

#[test]
fn scan_output_independent_of_threads() {
    let args = ["scan", "--n0", "5", "--n1", "4", "--steps", "2000"];
    let one = bin()
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    let many = bin()
        .args(args)
        .env("RAYON_NUM_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn scan_locus_csv() {
    let out = run(&[
        "scan", "--locus", "u12", "--n0", "12", "--n1", "12", "--steps", "4000",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "beta0 [1],beta1 [1],entry,lambda [1],residual [1]"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.contains(",u12,")));
}

#[test]
fn scan_double_zero() {
    let v = json(&run(&["scan", "--double-zero", "--seed", "1.217,0.844"]));
    assert_eq!(v["kind"], "double_zero");
    let u = entries(&v["data"]["matrix"]);
    assert!(u[1].abs() < 1e-6 && u[2].abs() < 1e-6);
    let b0 = v["data"]["beta0"].as_f64().unwrap();
    assert!((b0 - 1.22949).abs() < 1e-4);
}

#[test]
fn scan_double_zero_needs_seed() {
    assert_eq!(code(&run(&["scan", "--double-zero"])), 2);
    assert_eq!(
        code(&run(&["scan", "--double-zero", "--seed", "0.5,0.1"])),
        3
    );
}

#[test]
fn design_chain_reports_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("beta.csv");
    let out = run(&[
        "design",
        "--b",
        "5/3",
        "--b",
        "184/95",
        "--beta0",
        "0",
        "--beta-csv",
        csv.to_str().unwrap(),
        "--samples",
        "81",
    ]);
    let v = json(&out);
    let lambda = v["data"]["verification"]["lambda"].as_f64().unwrap();
    assert!((lambda + 1.16211).abs() < 1e-4);
    assert_eq!(v["data"]["pulse"]["stages"].as_array().unwrap().len(), 2);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "tau [1],beta [1]");
    assert_eq!(text.lines().count(), 82);
}

#[test]
fn design_printed_decimals() {
    let v = json(&run(&[
        "design", "--b", "1.6667", "--b", "1.9368", "--beta0", "0",
    ]));
    let lambda = v["data"]["verification"]["lambda"].as_f64().unwrap();
    assert!((lambda + 1.16211).abs() < 1e-3);
}

#[test]
fn design_with_tail() {
    let v = json(&run(&[
        "design", "--b", "1.99", "--beta0", "0.28", "--tail",
    ]));
    let amp = v["data"]["verification"]["amplification"].as_f64().unwrap();
    assert!((amp - 1.0530).abs() < 1e-3);
    assert_eq!(v["data"]["pulse"]["stages"][1]["kind"], "constant");
}

#[test]
fn design_errors() {
    assert_eq!(code(&run(&["design", "--b", "0"])), 2);
    assert_eq!(code(&run(&["design"])), 2);
    assert_eq!(code(&run(&["design", "--b", "1", "--tail"])), 2);
    let out = run(&["design", "--b", "0.3"]);
    assert_eq!(code(&out), 4);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(
        v["data"]["lemma"][0]["theta_zeros"]
            .as_array()
            .unwrap()
            .len()
            > 1
    );
    assert!(v["data"]["verification"].is_null());
}

#[test]
fn design_csv_samples() {
    let out = run(&["design", "--b", "2", "--format", "csv", "--samples", "11"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn shadow_peaks_inside_operation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("shadow.json");
    let out = run(&[
        "shadow",
        "--points",
        "101",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let tau = v["data"]["shadow"]["tau_of_max_dq"].as_f64().unwrap();
    assert!(tau > 0.0 && tau < std::f64::consts::PI, "{tau}");
    assert_eq!(v["data"]["within_belt"], true);
}

#[test]
fn shadow_congruence_endpoints() {
    let out = run(&["shadow", "--init", "1,0", "--init", "1,-1", "--points", "3"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<&str> = text
        .lines()
        .rfind(|l| l.starts_with("1,"))
        .unwrap()
        .split(',')
        .collect();
    let q: f64 = last[2].parse().unwrap();
    assert!((q + 1.16211).abs() < 1e-4);
}

#[test]
fn shadow_from_profile() {
    let out = run(&[
        "shadow",
        "--profile",
        r#"{"kind":"constant","beta":1}"#,
        "--from",
        "0",
        "--to",
        "pi",
        "--points",
        "5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 6);
    assert_eq!(
        code(&run(&[
            "shadow",
            "--profile",
            r#"{"kind":"constant","beta":1}"#
        ])),
        2
    );
}

#[test]
fn units_proton_report() {
    let v = json(&run(&["units"]));
    let paul = &v["data"]["paul"];
    assert!((paul["phi0"].as_f64().unwrap() - 1.268).abs() / 1.268 < 5e-3);
    assert!((paul["phi1"].as_f64().unwrap() - 1.759).abs() / 1.759 < 5e-3);
    assert!((paul["energy_ev"].as_f64().unwrap() - 1.0423).abs() / 1.0423 < 5e-3);
    assert_eq!(v["data"]["scaling"]["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn units_scaling_csv() {
    let out = run(&["units", "--format", "csv", "--t-values", "1,4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "quantity,unit,T=1 [s],T=4 [s]"
    );
    let q: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(2)
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((q[1] / q[0] - 2.0).abs() < 1e-12);
    assert_eq!(code(&run(&["units", "--t", "-1"])), 2);
}

#[test]
fn solenoid_cylinder() {
    let v = json(&run(&[
        "solenoid",
        "--cylinder",
        "--omega",
        "1",
        "--qlin",
        "1C",
    ]));
    let b = v["data"]["field"].as_f64().unwrap();
    assert!((b - 1.2556).abs() / 1.2556 < 1e-2);
    let v = json(&run(&[
        "solenoid",
        "--cylinder",
        "--qlin",
        "1C",
        "--convention",
        "standard",
    ]));
    let s = v["data"]["field"].as_f64().unwrap();
    assert!((b / s - 2.0 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn solenoid_series() {
    let v = json(&run(&[
        "solenoid",
        "--derivs",
        "1,0,2,0,5",
        "--order",
        "2",
        "--r",
        "3",
    ]));
    let coef: Vec<f64> = v["data"]["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_f64().unwrap())
        .collect();
    assert_eq!(coef, vec![1.0, 1.0 / 8.0, 1.0 / 192.0]);
    assert_eq!(
        code(&run(&["solenoid", "--derivs", "1,0", "--order", "1"])),
        2
    );
    assert_eq!(code(&run(&["solenoid"])), 2);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2)
        .map(|k| dir.path().join(format!("d{k}.json")))
        .collect();
    for p in &paths {
        let out = run(&["design", "--b", "184/95", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    assert!(Path::new(&paths[0]).exists());
}

#[test]
fn help_lists_subcommands() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["evolve", "scan", "design", "shadow", "units", "solenoid"] {
        assert!(text.contains(sub), "{sub}");
    }
}
