use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scn_core::io::{parse_network, write_network};
use serde_json::Value;

fn scn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = scn(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str]) -> i32 {
    scn(args).status.code().expect("exited normally")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../schemas/{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let v = schema(name);
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

struct Files {
    dir: tempfile::TempDir,
}

impl Files {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn write(&self, name: &str, text: &str) -> String {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

const CONE: &str = r#"{"n":2,"m":2,"links":[[1],[1]]}"#;
const PARALLEL: &str = r#"{"n":2,"m":2,"links":[[1],[2]]}"#;

#[test]
fn cone_payoffs_match_closed_form() {
    let f = Files::new();
    let net = f.write("cone.json", CONE);
    let out = ok_json(&[
        "payoff", "--net", &net, "--lambda", "0.8", "--d", "1", "--c", "0", "--gamma", "0.02",
    ]);
    assert_valid("payoff", &out);
    assert_eq!(out["retailers"], serde_json::json!([0.096, 0.096]));
    assert_eq!(out["class"], "cone");
    let out = ok_json(&["payoff", "--net", &net, "--lambda", "0.8"]);
    assert_eq!(out["retailers"], serde_json::json!([0.128, 0.128]));
}

#[test]
fn reliable_suppliers_with_costly_links_leave_only_the_empty_network() {
    let out = ok_json(&["equilibria", "--n", "2", "--m", "2", "--lambda", "1", "--c", "0.01"]);
    assert_valid("equilibria", &out);
    assert_eq!(out["classes"], serde_json::json!(["empty"]));
    assert_eq!(out["equilibria"].as_array().unwrap().len(), 1);
}

#[test]
fn simulation_is_seeded_and_job_independent() {
    let f = Files::new();
    let net = f.write("cone.json", CONE);
    let run = |jobs: &str| {
        ok_json(&[
            "simulate",
            "--net",
            &net,
            "--lambda",
            "0.8",
            "--samples",
            "200000",
            "--seed",
            "7",
            "--jobs",
            jobs,
        ])
    };
    let a = run("1");
    assert_valid("simulate", &a);
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
    let mean = a["mean"][0][0].as_f64().unwrap();
    let se = a["std_error"][0][0].as_f64().unwrap();
    assert!((mean - 0.128).abs() < 4.0 * se, "{mean} ± {se}");
    let b = ok_json(&[
        "simulate",
        "--net",
        &net,
        "--lambda",
        "0.8",
        "--samples",
        "200000",
        "--seed",
        "8",
    ]);
    assert_ne!(a["mean"], b["mean"]);
}

#[test]
fn multi_tier_simulation_has_no_closed_form() {
    let f = Files::new();
    let net = f.write(
        "chain.json",
        r#"{"n":2,"m":1,"tiers":[2,2,1],"links":[[[1],[1,2]],[[1],[1]]]}"#,
    );
    let out = ok_json(&["simulate", "--net", &net, "--lambda", "0.9", "--samples", "5000"]);
    assert_valid("simulate", &out);
    assert_eq!(out["tiers"], serde_json::json!([2, 2, 1]));
    assert!(out["analytic"].is_null());
}

#[test]
fn nash_check_and_dynamics_report_one_based_networks() {
    let f = Files::new();
    let net = f.write("cone.json", CONE);
    let check = ok_json(&[
        "equilibria",
        "--mode",
        "nash-check",
        "--net",
        &net,
        "--lambda",
        "0.8",
        "--gamma",
        "0.1",
    ]);
    assert_valid("equilibria", &check);
    assert_eq!(check["is_nash"], false);
    let cert = &check["certificate"];
    assert!(cert["gain"].as_f64().unwrap() > 0.0);
    assert!(cert["retailer"].as_u64().unwrap() >= 1);

    let dyn_out = ok_json(&[
        "equilibria",
        "--mode",
        "br-dynamics",
        "--net",
        &net,
        "--lambda",
        "0.8",
        "--gamma",
        "0.1",
    ]);
    assert_valid("equilibria", &dyn_out);
    assert_eq!(dyn_out["trajectory"][0], serde_json::json!([[1], [1]]));
    if dyn_out["converged"] == true {
        let last = f.write("last.json", &dyn_out["final"].to_string());
        let again = ok_json(&[
            "equilibria",
            "--mode",
            "nash-check",
            "--net",
            &last,
            "--lambda",
            "0.8",
            "--gamma",
            "0.1",
        ]);
        assert_eq!(again["is_nash"], true);
    }
}

#[test]
fn enumeration_options_and_certificates() {
    let all = ok_json(&[
        "equilibria",
        "--n",
        "2",
        "--m",
        "3",
        "--lambda",
        "0.8",
        "--certificates",
    ]);
    assert_valid("equilibria", &all);
    let found = all["equilibria"].as_array().unwrap().len();
    assert_eq!(found + all["rejections"].as_array().unwrap().len(), 64);
    let canon = ok_json(&["equilibria", "--n", "2", "--m", "3", "--lambda", "0.8", "--canonical"]);
    assert!(canon["equilibria"].as_array().unwrap().len() <= found);
    assert_eq!(canon["classes"], all["classes"]);
}

#[test]
fn network_files_round_trip() {
    let f = Files::new();
    for text in [
        CONE,
        PARALLEL,
        r#"{"n":2,"m":1,"tiers":[2,3,1],"links":[[[1,3],[2]],[[1],[],[1]]]}"#,
    ] {
        let net = parse_network(text).unwrap();
        let written = write_network(&net);
        assert_eq!(parse_network(&written).unwrap(), net);
        let path = f.write("net.json", &written);
        if net.is_two_tier() {
            let out = ok_json(&["payoff", "--net", &path, "--lambda", "0.7"]);
            assert_eq!(parse_network(&out["network"].to_string()).unwrap(), net);
        }
    }
}

#[test]
fn flags_override_the_config_file() {
    let f = Files::new();
    let net = f.write("cone.json", CONE);
    let cfg = f.write(
        "cfg.json",
        r#"{"lambda":0.8,"d":1.0,"c":0.01,"gamma":0.02,"n":2,"m":2}"#,
    );
    let from_file = ok_json(&["payoff", "--net", &net, "--config", &cfg]);
    assert_eq!(from_file["retailers"][0], 0.086);
    let overridden = ok_json(&["payoff", "--net", &net, "--config", &cfg, "--c", "0", "--gamma", "0"]);
    assert_eq!(overridden["retailers"][0], 0.128);
}

#[test]
fn threshold_report_matches_schema() {
    let out = ok_json(&["thresholds", "--lambda", "0.8", "--gamma", "0.01", "--c", "0.001"]);
    assert_valid("thresholds", &out);
    let out = ok_json(&["thresholds", "--lambda", "0.8"]);
    assert_valid("thresholds", &out);
    assert!((out["gamma_hat"]["pz2"]["gamma"].as_f64().unwrap() - 4.0 * 0.8 * 0.04).abs() < 1e-11);
    assert_eq!(out["printed"]["gamma_hat"]["pz2"], 0.032);
    assert!(out["regime"]["d_hat"].is_null());
    let names: Vec<&str> = out["discrepancies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["quantity"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"gamma_hat_pz2"), "{names:?}");
}

#[test]
fn sweep_outputs_csv_and_json() {
    let f = Files::new();
    let grid = ["sweep", "--lambda-count", "6", "--gamma-count", "6", "--c", "0,0.01"];
    let csv_out = scn(&grid);
    assert!(csv_out.status.success());
    let text = String::from_utf8(csv_out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,gamma,c,predicted,enumerated,agree"));
    assert_eq!(lines.count(), 72);

    let report = f.path("report.json");
    let mut args = grid.to_vec();
    args.extend(["--format", "json", "--jobs", "2", "--report", report.to_str().unwrap()]);
    let json_out = ok_json(&args);
    assert_valid("sweep", &json_out);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(written, json_out["reconcile"]);
    assert_eq!(json_out["reconcile"]["disagreements"], serde_json::json!([]));

    let mut one_job = grid.to_vec();
    one_job.extend(["--format", "json", "--jobs", "1"]);
    assert_eq!(ok_json(&one_job), json_out);
}

#[test]
fn heterogeneous_experiments() {
    let f = Files::new();
    let net = f.write("parallel.json", PARALLEL);
    let out = ok_json(&[
        "hetero",
        "--net",
        &net,
        "--lambda-r",
        "0.8",
        "--lambda-sup",
        "0.8,0.7",
        "--gamma-sup",
        "0.02,0.02",
        "--samples",
        "20000",
        "--seed",
        "3",
    ]);
    assert_valid("hetero", &out);
    assert_eq!(out["class"], "parallel");
    assert_eq!(out["scans"].as_array().unwrap().len(), 4);
    assert!(out["reliability"][0]["lambda_hat"].is_number());

    let cfg = f.write(
        "h.json",
        r#"{"lambda_r":0.8,"lambda_sup":[0.8,0.7],"gamma_sup":[0.02,0.02]}"#,
    );
    let via_file = ok_json(&["hetero", "--net", &net, "--config", &cfg]);
    assert_eq!(via_file["retailers"], out["retailers"]);
    let via_payoff = ok_json(&["payoff", "--net", &net, "--config", &cfg]);
    assert_eq!(via_payoff["model"], "heterogeneous");
    assert_eq!(via_payoff["retailers"], out["retailers"]);
}

#[test]
fn numbers_carry_at_most_twelve_significant_digits() {
    let out = ok_json(&["thresholds", "--lambda", "0.7", "--gamma", "0.013", "--c", "0.002"]);
    fn walk(v: &Value) {
        match v {
            Value::Number(n) => {
                if let Some(x) = n.as_f64() {
                    assert_eq!(x, scn_core::phase::round_sig12(x), "{x}");
                }
            }
            Value::Array(a) => a.iter().for_each(walk),
            Value::Object(o) => o.values().for_each(walk),
            _ => {}
        }
    }
    walk(&out);
}

#[test]
fn exit_codes() {
    let f = Files::new();
    let net = f.write("cone.json", CONE);
    assert_eq!(code(&["payoff", "--net", &net, "--lambda", "1.5"]), 2);
    assert_eq!(code(&["payoff", "--net", &net, "--lambda", "0.8", "--bogus"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    let bad = f.write("bad.json", r#"{"n":2,"m":2,"links":[[3],[1]]}"#);
    assert_eq!(code(&["payoff", "--net", &bad, "--lambda", "0.8"]), 2);
    let junk = f.write("junk.json", "not json");
    assert_eq!(code(&["payoff", "--net", &junk, "--lambda", "0.8"]), 2);
    assert_eq!(code(&["payoff", "--net", "/no/such/file.json", "--lambda", "0.8"]), 2);
    assert_eq!(code(&["payoff", "--net", &net, "--lambda", "0.8", "--n", "3"]), 2);
    assert_eq!(code(&["equilibria", "--n", "5", "--m", "5", "--lambda", "0.8"]), 2);
    assert_eq!(
        code(&[
            "equilibria",
            "--mode",
            "nash-check",
            "--n",
            "2",
            "--m",
            "2",
            "--lambda",
            "0.8"
        ]),
        2
    );
    assert_eq!(code(&["thresholds", "--lambda", "1"]), 2);
    assert_eq!(code(&["simulate", "--net", &net, "--lambda", "0.8", "--jobs", "0"]), 2);
    let unwritable = f.path("missing-dir/out.json");
    assert_eq!(
        code(&[
            "payoff",
            "--net",
            &net,
            "--lambda",
            "0.8",
            "--out",
            unwritable.to_str().unwrap()
        ]),
        1
    );
    let written = f.path("out.json");
    assert_eq!(
        code(&[
            "payoff",
            "--net",
            &net,
            "--lambda",
            "0.8",
            "--out",
            written.to_str().unwrap()
        ]),
        0
    );
    assert!(written.exists());
}

#[test]
fn schemas_reject_malformed_documents() {
    let v = schema("payoff");
    assert!(!v.is_valid(&serde_json::json!({ "retailers": [1.0] })));
    let v = schema("equilibria");
    assert!(!v.is_valid(&serde_json::json!({ "is_nash": "yes" })));
}
