use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SKEW_ALPHA: &str = r#"sparse:{j:"3n+1", a_j:"(n+2)!*2^n", filler:1}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cocycle-lab"));
    c.env_remove("COCYCLE_LAB_THREADS").env_remove("COCYCLE_LAB_PRECISION_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Runs a command that must succeed and returns its JSON report, checked against its schema.
fn report(args: &[&str]) -> Value {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    validate(&v);
    v
}

fn validate(v: &Value) {
    let id = v["schema"].as_str().expect("schema field");
    let kind = id.strip_prefix("cocycle-lab/").and_then(|s| s.strip_suffix("/v1")).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{kind}.v1.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{kind}: {errors:#?}");
}

fn plan_file(dir: &Path) -> PathBuf {
    let path = dir.join("plan.json");
    let o = run(&["ostrowski", "construct-beta", "--alpha", SKEW_ALPHA, "--d", "n", "--n-max", "8", "--terms", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

#[test]
fn convergents_of_golden_are_fibonacci() {
    let v = report(&["cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "10"]);
    let qs: Vec<&str> = v["result"]["convergents"].as_array().unwrap().iter().map(|r| r["q"].as_str().unwrap()).collect();
    assert_eq!(qs, ["0", "1", "1", "2", "3", "5", "8", "13", "21", "34", "55", "89"]);
    assert_eq!(v["manifest"]["alpha"], "periodic:[0;1]");
}

#[test]
fn big_numbers_are_strings() {
    let v = report(&["cf", "convergents", "--alpha", "rule:factorial", "--n", "30"]);
    let last = &v["result"]["convergents"][31];
    assert!(last["q"].as_str().unwrap().len() > 30);
}

#[test]
fn unknown_flag_exits_2() {
    let o = run(&["cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "3", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn bad_spec_exits_2_and_cites_the_token() {
    let o = run(&["cf", "convergents", "--alpha", "rule:fibonacci", "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`fibonacci`"), "{}", stderr(&o));
}

#[test]
fn precision_exhaustion_exits_3() {
    let o = bin()
        .args(["cf", "norm", "--alpha", "periodic:[0;1]", "--k", "1000000", "--bits", "200"])
        .env("COCYCLE_LAB_PRECISION_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("norm of 1000000*alpha"), "{}", stderr(&o));
    let o = run(&["cf", "enclosure", "--alpha", "explicit:[0;1,2]", "--depth", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("a_3"));
}

#[test]
fn bad_thread_count_exits_2() {
    let o = bin().args(["cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "1"]).env("COCYCLE_LAB_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_report_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_file(dir.path());
    let plan = plan.to_str().unwrap();
    report(&["cf", "enclosure", "--alpha", "periodic:[0;2]", "--depth", "6"]);
    report(&["cf", "norm", "--alpha", "rule:pow2", "--k", "-12345"]);
    report(&["ostrowski", "expand", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--horizon", "12"]);
    validate(&serde_json::from_str(&std::fs::read_to_string(plan).unwrap()).unwrap());
    report(&["cocycle", "birkhoff", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--x", "lat:0-2*alpha", "--n", "1e4"]);
    report(&["coboundary", "series", "--id", "h4", "--alpha", SKEW_ALPHA, "--beta", plan, "--N", "1000"]);
    report(&["coboundary", "series", "--id", "C", "--alpha", "periodic:[0;2]", "--beta", "r:2/7", "--N", "500"]);
    report(&["skew", "simulate", "--alpha", SKEW_ALPHA, "--beta", plan, "--n", "1e4", "--seed", "3"]);
    report(&["skew", "quotient", "--alpha", "periodic:[0;1]", "--beta", "r:1/2", "--gamma", "r:1/2", "--a", "2,3", "--n", "1e4"]);
    report(&["skew", "probe", "--alpha", "periodic:[0;1]", "--beta", "r:1/2", "--infinity", "3", "--depth", "3", "--nmax", "1e4", "--gamma", "r:1/3"]);
    let sol = dir.path().join("sol.json");
    let o = run(&["coboundary", "solve", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--gamma", "lat:alpha", "--N", "2000", "--grid", "4096"]);
    assert!(o.status.success());
    validate(&serde_json::from_str(&stdout(&o)).unwrap());
    std::fs::write(&sol, &o.stdout).unwrap();
    let c = report(&["skew", "commute", "--psi", sol.to_str().unwrap()]);
    assert!(c["result"]["residual_l2"].as_f64().unwrap() < 0.05);
}

#[test]
fn criterion_series_with_plan_files_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_file(dir.path());
    let plan = plan.to_str().unwrap();
    let v = report(&["coboundary", "series", "--id", "criterion", "--alpha", "rule:factorial", "--beta", plan, "--gamma", plan, "--N", "10000"]);
    let s = &v["result"]["series"];
    assert_eq!(s["monotone"], true);
    let sums: Vec<f64> = s["partial_sums"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(sums.windows(2).all(|w| w[1] >= w[0]), "{sums:?}");
    assert_eq!(s["cutoffs"].as_array().unwrap().last().unwrap(), 10000);
}

#[test]
fn criterion_series_needs_gamma() {
    let o = run(&["coboundary", "series", "--id", "criterion", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--N", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fast_and_naive_agree() {
    let v = report(&["cocycle", "birkhoff", "--alpha", "periodic:[0;1]", "--beta", "r:1/2", "--gamma", "lat:1/5+3*alpha", "--x", "r:1/7", "--n", "1e5"]);
    assert_eq!(v["result"]["agree"], true);
    assert_eq!(v["result"]["fast"]["value"], v["result"]["naive"]["value"]);
}

#[test]
fn trajectory_csv_to_stdout_and_file() {
    let args = ["skew", "simulate", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--x", "r:1/7", "--n", "50"];
    let o = run(&[&args[..], &["--csv"]].concat());
    assert!(o.status.success());
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "j,x_j,y_j,y_u,y_v");
    assert_eq!(lines.len(), 52);
    assert!(lines[1].starts_with("0,0.14285714285714285,0"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let v = report(&[&args[..], &["--trajectory", path.to_str().unwrap()]].concat());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), csv);
    assert_eq!(v["result"]["run"]["n"], 50);
}

#[test]
fn shadowing_guard_refuses_long_runs() {
    let dir = tempfile::tempdir().unwrap();
    let plan = plan_file(dir.path());
    let o = run(&["skew", "quotient", "--alpha", SKEW_ALPHA, "--beta", plan.to_str().unwrap(), "--gamma", "r:1/3", "--n", "1e18"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("shadowing horizon"));
}

#[test]
fn replay_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["skew", "probe", "--alpha", "periodic:[0;1]", "--beta", "r:1/2", "--gamma", "r:1/2", "--value", "1", "--depth", "4", "--nmax", "2e4", "--seed", "17"],
        vec!["skew", "quotient", "--alpha", "periodic:[0;2]", "--beta", "r:1/2", "--gamma", "r:1/3", "--n", "3e4", "--seed", "5"],
        vec!["coboundary", "solve", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--gamma", "r:1/5", "--N", "500", "--grid", "1024"],
    ] {
        let first = run(&args);
        assert!(first.status.success(), "{}", stderr(&first));
        let path = dir.path().join("r.json");
        std::fs::write(&path, &first.stdout).unwrap();
        let again = run(&["replay", path.to_str().unwrap()]);
        assert!(again.status.success());
        assert_eq!(first.stdout, again.stdout, "{args:?}");
    }
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let args = ["coboundary", "series", "--id", "h4", "--alpha", "periodic:[0;1]", "--beta", "r:1/3", "--N", "20000"];
    let one = bin().args(args).env("COCYCLE_LAB_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("COCYCLE_LAB_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn timing_is_opt_in() {
    let v = report(&["cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "2"]);
    assert!(v["manifest"].get("wall_clock_seconds").is_none());
    let v = report(&["--timing", "cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "2"]);
    assert!(v["manifest"]["wall_clock_seconds"].is_number());
}

#[test]
fn verify_exit_code_follows_the_table() {
    let o = run(&["verify", "--profile", "quick"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
    assert_eq!(lines.len(), 12, "{text}");
    let all_pass = lines.iter().all(|l| l.starts_with("[PASS]"));
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
}

#[test]
fn verify_reports_a_corrupted_convergent() {
    let o = run(&["verify", "--profile", "quick", "--json", "--inject-convergent-fault", "6"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    validate(&v);
    let first = &v["result"]["results"][0];
    assert_eq!(first["passed"], false);
    assert!(first["detail"].as_str().unwrap().contains("determinant") || first["detail"].as_str().unwrap().contains("recurrence"));
}

#[test]
fn schemas_reject_float_integers() {
    let mut v = report(&["cf", "convergents", "--alpha", "periodic:[0;1]", "--n", "3"]);
    v["result"]["convergents"][2]["q"] = serde_json::json!(1);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/cf-convergents.v1.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert!(!jsonschema::validator_for(&schema).unwrap().is_valid(&v));
}
