//! End-to-end runs of the `besov-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_besov-lab"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// `(t, norm)` rows of one `(j, p)` column of a trajectory CSV.
fn column(csv: &str, j: i32, p: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[1].parse::<i32>().unwrap() == j && f[2] == p)
                .then(|| (f[0].parse().unwrap(), f[3].parse().unwrap()))
        })
        .collect()
}

const HEAT: &str = r#"{
  "grid": {"d": 2, "N": 64},
  "solver": {"dt": 0.001, "T_end": 0.1, "cadence": 5, "p_list": [2, "inf"]},
  "law": {"law": "none"},
  "initial": {"synthetic": "single_mode(4)"}
}"#;

const SQG_SNAPSHOTS: &str = r#"{
  "grid": {"d": 2, "N": 32},
  "solver": {"dt": 0.002, "T_end": 0.02, "cadence": 5, "p_list": [2, "inf"], "snapshots": true},
  "law": {"law": "sqg"},
  "initial": {"synthetic": "holder_profile(1/4)", "amplitude": 2},
  "seed": 11
}"#;

#[test]
fn heat_shell_two_decays_like_exp_minus_16t() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "heat.json", HEAT);
    let out = tmp.path().join("out");
    let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,j,p,norm\n"));
    let sup = column(&csv, 2, "inf");
    assert_eq!(sup.len(), 21);
    for (t, v) in &sup {
        assert!((v - (-16.0 * t).exp()).abs() <= 1e-6, "t = {t}: {v}");
    }
    let l2 = column(&csv, 2, "2");
    for (t, v) in &l2 {
        assert!((v / l2[0].1 - (-16.0 * t).exp()).abs() <= 1e-6);
    }
    // Every other shell is empty.
    for j in [0, 1, 3, 4] {
        assert!(column(&csv, j, "2").iter().all(|(_, v)| *v == 0.0));
    }
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["partial"], Value::Bool(false));
    assert_eq!(manifest["status"]["status"], "completed");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn zero_datum_gives_zero_records() {
    let tmp = tempfile::tempdir().unwrap();
    let body = HEAT.replace("single_mode(4)", "zero").replace(r#""none""#, r#""sqg""#);
    let cfg = write_config(tmp.path(), "zero.json", &body);
    let out = tmp.path().join("out");
    let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap() == 0.0));
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sqg.json", SQG_SNAPSHOTS);
    let runs: Vec<PathBuf> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = tmp.path().join(name);
            let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
            out
        })
        .collect();
    let manifest = read_json(&runs[0].join("manifest.json"));
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert!(artifacts.len() > 1, "trajectory plus snapshots");
    for rel in artifacts.iter().map(|a| a["path"].as_str().unwrap()).chain(["manifest.json"]) {
        assert_eq!(
            std::fs::read(runs[0].join(rel)).unwrap(),
            std::fs::read(runs[1].join(rel)).unwrap(),
            "{rel} differs"
        );
    }

    let other = tmp.path().join("c");
    let res = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
        "--seed",
        "12",
    ]);
    assert_eq!(code(&res), 0);
    assert_ne!(
        std::fs::read(runs[0].join("trajectory.csv")).unwrap(),
        std::fs::read(other.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn outputs_contain_no_temporary_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sqg.json", SQG_SNAPSHOTS);
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let manifest = read_json(&out.join("manifest.json"));
    let mut listed: Vec<String> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["path"].as_str().unwrap().to_string())
        .chain(["manifest.json".to_string()])
        .collect();
    listed.sort();
    let mut found = Vec::new();
    for entry in walk(&out) {
        found.push(entry.strip_prefix(&out).unwrap().to_string_lossy().replace('\\', "/"));
    }
    found.sort();
    assert_eq!(found, listed);
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn snapshot_files_feed_back_as_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sqg.json", SQG_SNAPSHOTS);
    let out = tmp.path().join("run");
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let snap = out.join("snapshots/step_00000010.bsvf");
    assert!(snap.exists());
    assert_eq!(&std::fs::read(&snap).unwrap()[..4], b"BSVF");

    let body = format!(
        r#"{{"grid": {{"d": 2, "N": 32}}, "initial": {{"snapshot": "run/snapshots/step_00000010.bsvf"}},
            "besov": [{{"s": 0, "p": 2, "q": 2}}]}}"#
    );
    let dec = write_config(tmp.path(), "dec.json", &body);
    let dec_out = tmp.path().join("dec");
    let res = run(&["decompose", "--config", dec.to_str().unwrap(), "--out", dec_out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    // The decomposed shell-2 L² norm equals the recorded one at t = 0.02.
    let recorded = column(&std::fs::read_to_string(out.join("trajectory.csv")).unwrap(), 2, "2");
    let measured = column(&std::fs::read_to_string(dec_out.join("shells.csv")).unwrap(), 2, "2");
    assert_eq!(measured[0].1, recorded.last().unwrap().1);
    let besov = read_json(&dec_out.join("besov.json"));
    assert!(besov[0]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(besov[0]["index"]["p"], 2.0);

    let wrong_grid = write_config(tmp.path(), "wrong.json", &body.replace(r#""N": 32"#, r#""N": 64"#));
    assert_eq!(code(&run(&["decompose", "--config", wrong_grid.to_str().unwrap(), "--out", dec_out.to_str().unwrap()])), 2);
}

#[test]
fn strict_mode_rejects_a_divergent_matrix_with_its_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.json",
        r#"{"grid": {"d": 2, "N": 32},
            "law": {"law": "general_cz", "matrix": [["1", "0"], ["0", "1"]]},
            "initial": {"synthetic": "gaussian_bump(0.5)"},
            "solver": {"T_end": 0.01},
            "audits": ["divergence_free", "drift_bounds"]}"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["verify-all", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 1);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["pass"], Value::Bool(false));
    let audits = report["audits"].as_array().unwrap();
    let div = audits.iter().find(|a| a["name"] == "divergence_free").unwrap();
    assert_eq!(div["anchor"], "∇ · u = 0");
    assert_eq!(div["pass"], Value::Bool(false));
    assert!(div["details"]["symbol_residual"].as_f64().unwrap() >= 0.5);
    let drift = audits.iter().find(|a| a["name"] == "drift_bounds").unwrap();
    assert!(drift["error"].as_str().unwrap().contains("∇ · u = 0"));

    // `simulate` refuses the same law before integrating.
    let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("∇ · u = 0"));
}

#[test]
fn every_report_entry_names_an_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "small.json",
        r#"{"grid": {"d": 2, "N": 32},
            "solver": {"dt": 0.002, "T_end": 0.06, "cadence": 3},
            "law": {"law": "general_cz", "matrix": "riesz_antisymmetric"},
            "initial": {"synthetic": "holder_profile(1/4)"},
            "audit": {"window": [0.01, 0.06]},
            "seed": 5}"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["verify-all", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = read_json(&out.join("report.json"));
    let audits = report["audits"].as_array().unwrap();
    assert_eq!(audits.len(), 10);
    for a in audits {
        assert!(!a["anchor"].as_str().unwrap().is_empty());
        assert!(a["runtime_s"].as_f64().unwrap() >= 0.0);
        assert!(a["error"].is_null(), "{}: {}", a["name"], a["error"]);
    }
    let all_pass = audits.iter().all(|a| a["pass"] == Value::Bool(true));
    assert_eq!(report["pass"], Value::Bool(all_pass));
    assert_eq!(code(&res), if all_pass { 0 } else { 1 });
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["summary"]["total"], 10);
}

#[test]
fn desk_configuration_passes_every_audit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "desk.json",
        r#"{"grid": {"d": 2, "N": 64},
            "solver": {"dt": 0.001, "T_end": 0.3, "cadence": 4},
            "law": {"law": "sqg"},
            "initial": {"synthetic": "holder_profile(1/4)"},
            "audit": {"window": [0.05, 0.3]},
            "seed": 7}"#,
    );
    let out = tmp.path().join("out");
    let start = Instant::now();
    let res = run(&["verify-all", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let elapsed = start.elapsed().as_secs_f64();
    let stdout = String::from_utf8_lossy(&res.stdout);
    println!("{stdout}");
    assert_eq!(code(&res), 0, "{stdout}");
    assert!(elapsed <= 120.0, "{elapsed} s");
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["summary"]["passed"], 10);
    let duhamel = report["audits"].as_array().unwrap().iter().find(|a| a["name"] == "gronwall_duhamel").unwrap();
    for key in ["c", "K", "C"] {
        assert!(duhamel["fitted_constants"][key].is_number(), "{key}");
    }
}

#[test]
fn calculus_only_suite_is_pure_arithmetic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "calc.json", r#"{"audits": ["calculus_table"]}"#);
    let out = tmp.path().join("out");
    let start = Instant::now();
    let res = run(&["verify-all", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(elapsed < 1.0, "{elapsed} s");
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["audits"].as_array().unwrap().len(), 1);
    assert_eq!(report["audits"][0]["details"]["failures"].as_array().unwrap().len(), 0);
}

fn calculus(args: &[&str]) -> Value {
    let res = run(&[&["calculus"], args].concat());
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    serde_json::from_slice(&res.stdout).unwrap()
}

fn rational(v: &Value) -> (String, String) {
    (v["num"].as_str().unwrap().to_string(), v["den"].as_str().unwrap().to_string())
}

fn r(num: &str, den: &str) -> (String, String) {
    (num.to_string(), den.to_string())
}

#[test]
fn calculus_low_alpha_plan() {
    let v = calculus(&["1/4", "2"]);
    let plan = &v["plan"];
    assert_eq!(plan["branch"], "low_alpha");
    assert_eq!(rational(&plan["m_alpha"]), r("3", "2"));
    assert_eq!(rational(&plan["epsilon"]["value"]), r("1", "40"));
    assert_eq!(rational(&plan["p_star"]), r("64", "1"));
    assert_eq!(plan["iterations"], 16);
    assert_eq!(plan["schedule"].as_array().unwrap().len(), 16);
    assert_eq!(plan["m_alpha"]["decimal"], "1.5");
}

#[test]
fn calculus_half_uses_the_reduced_index() {
    let plan = calculus(&["1/2", "2"])["plan"].clone();
    assert_eq!(rational(&plan["alpha_input"]), r("1", "2"));
    assert_eq!(rational(&plan["alpha"]), r("31", "64"));
    assert_eq!(plan["branch"], "low_alpha");
}

#[test]
fn calculus_high_alpha_and_mqg_plans() {
    let plan = calculus(&["3/4", "2"])["plan"].clone();
    assert_eq!(plan["branch"], "high_alpha");
    assert_eq!(rational(&plan["high_alpha"]["p"]), r("14", "1"));
    assert_eq!(rational(&plan["target_index"]), r("8", "7"));

    let mqg = calculus(&["1/4", "2", "--beta", "7/4", "--p", "2"])["plan"].clone();
    assert_eq!(mqg["branch"], "mqg");
    assert_eq!(rational(&mqg["ratio_lower"]), r("5", "4"));
    assert_eq!(rational(&mqg["ratio_upper"]), r("5", "3"));
}

#[test]
fn calculus_reads_its_section_from_a_config_and_writes_plan_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "calc.json", r#"{"calculus": {"alpha": "3/4", "d": 3}}"#);
    let out = tmp.path().join("out");
    let res = run(&["calculus", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let v = read_json(&out.join("plan.json"));
    assert_eq!(v["input"]["d"], 3);
    assert_eq!(v["plan"]["branch"], "high_alpha");
    assert_eq!(serde_json::from_slice::<Value>(&res.stdout).unwrap(), v);
}

#[test]
fn calculus_domain_errors_are_surfaced_verbatim() {
    let res = run(&["calculus", "3/2", "2"]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("α = 3/2 is outside (0, 1)"));
    let res = run(&["calculus", "1/4", "2", "--beta", "7/4"]);
    assert_eq!(code(&res), 2);
    let res = run(&["calculus", "one quarter"]);
    assert_eq!(code(&res), 2);
}

#[test]
fn config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.json");
    assert_eq!(code(&run(&["simulate", "--config", missing.to_str().unwrap()])), 2);

    let typo = write_config(tmp.path(), "typo.json", r#"{"grid": {"d": 2, "N": 64}, "sovler": {}}"#);
    let res = run(&["simulate", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("sovler"));

    for body in [
        r#"{"grid": {"d": 2, "N": 48}, "law": {"law": "sqg"}, "initial": {"synthetic": "zero"}}"#,
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "sqg"}, "initial": {"synthetic": "spiral(3)"}}"#,
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "modified_sqg"}, "initial": {"synthetic": "zero"}}"#,
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "sqg"}, "initial": {"synthetic": "zero"}, "solver": {"dt": -1}}"#,
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "general_cz", "matrix": [["0", "zeta"], ["0", "0"]]},
            "initial": {"synthetic": "zero"}}"#,
    ] {
        let cfg = write_config(tmp.path(), "bad.json", body);
        let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
        assert_eq!(code(&res), 2, "{body}: {}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(code(&run(&["simulate"])), 2);
}

#[test]
fn cfl_abort_keeps_partial_outputs_and_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "fast.json",
        r#"{"grid": {"d": 2, "N": 32},
            "solver": {"dt": 0.05, "T_end": 1.0},
            "law": {"law": "sqg"},
            "initial": {"synthetic": "single_mode(1, 2)", "amplitude": 50}}"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 3, "{}", String::from_utf8_lossy(&res.stderr));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["partial"], Value::Bool(true));
    assert_eq!(manifest["status"]["status"], "cfl_abort");
    let suggested = manifest["status"]["suggested"].as_f64().unwrap();
    let limit = manifest["status"]["limit"].as_f64().unwrap();
    assert!((suggested - 0.9 * limit).abs() <= 1e-15 * limit);
    assert!(std::fs::read_to_string(out.join("trajectory.csv")).unwrap().lines().count() > 1);
}

#[test]
fn paraproduct_audit_writes_certificates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "pp.json",
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "sqg"},
            "initial": {"synthetic": "holder_profile(1/4, 2)"}, "audit": {"random_fields": 1}}"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["paraproduct-audit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stdout));
    let certs = read_json(&out.join("certificates.json"));
    let certs = certs.as_array().unwrap();
    assert!(!certs.is_empty());
    for c in certs {
        for key in ["j", "q", "p", "alpha", "J", "RHS", "ratios", "edge_flag"] {
            assert!(!c[key].is_null(), "{key}");
        }
        assert_eq!(c["q"]["num"], "5");
    }

    // q outside (p, m_α p) fails the certificate entry with the violated inequality.
    let bad = write_config(
        tmp.path(),
        "pp_bad.json",
        r#"{"grid": {"d": 2, "N": 32}, "law": {"law": "sqg"},
            "initial": {"synthetic": "holder_profile(1/4, 2)"}, "audit": {"q": "7/2", "random_fields": 0}}"#,
    );
    let res = run(&["paraproduct-audit", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 1);
    let report = read_json(&out.join("report.json"));
    let entry = &report["audits"][1];
    assert_eq!(entry["name"], "j_certificates");
    assert!(entry["error"].as_str().unwrap().contains("−α < 1−α−p/q−α(1−p/q) < 0"));
}
