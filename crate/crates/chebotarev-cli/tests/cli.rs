use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chebotarev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chebotarev"))
        .args(args)
        .env(key, val)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn text_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn assert_error(out: &Output, code: &str) {
    assert!(!out.status.success());
    assert!(
        out.stdout.is_empty(),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"]["code"], code, "{err}");
}

fn temp_file(name: &str, contents: &str) -> String {
    let path = std::env::temp_dir().join(format!("chebotarev-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn compute_alternating_four() {
    let v = json_ok(&["compute", "--group", r#"{"family":"alternating","n":4}"#]);
    assert_eq!(v["decimal"], "4.409091");
    assert_eq!(v["secondary_decimal"], "29.71074");
    assert_eq!(v["chebotarev"]["num"], "97");
    assert_eq!(v["chebotarev"]["den"], "22");
}

#[test]
fn compute_psl2_thirteen() {
    let v = json_ok(&["compute", "--group", r#"{"family":"psl2","p":13}"#]);
    assert_eq!(v["decimal"], "3.293965");
    assert_eq!(v["secondary_decimal"], "13.63659");
}

#[test]
fn compute_trivial_profile() {
    let path = temp_file(
        "trivial.json",
        r#"{"order":1,"class_sizes":[1],"maximal_classes":[]}"#,
    );
    let v = json_ok(&["compute", "--profile", &path]);
    assert_eq!(v["chebotarev"]["num"], "1");
    assert_eq!(v["chebotarev"]["den"], "1");
    assert_eq!(v["secondary"]["num"], "1");
}

#[test]
fn compute_partial_bounds() {
    let v = json_ok(&[
        "compute",
        "--group",
        r#"{"family":"symmetric","n":4}"#,
        "--partial",
        "0,1",
    ]);
    let p = &v["partial"];
    assert_eq!(p["e1"]["decimal"], "3.800000");
    let lo: f64 = p["c_lower"]["decimal"].as_str().unwrap().parse().unwrap();
    let hi: f64 = p["c_upper"]["decimal"].as_str().unwrap().parse().unwrap();
    assert!(lo <= 4.498380 && 4.498380 <= hi);
}

#[test]
fn tables_psl2_small() {
    let csv = text_ok(&["tables", "--table", "12", "--max-p", "5"]);
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let c: Vec<&str> = rows.iter().map(|r| &r[2]).collect();
    assert_eq!(c, ["3.800000", "4.409091", "4.136364"]);
    assert_eq!(&rows[0][0], "PSL(2,2)");
}

#[test]
fn tables_degree_seventeen() {
    let csv = text_ok(&["tables", "--table", "4", "--rows", "solvable"]);
    let h17 = csv.lines().find(|l| l.starts_with("H17,")).unwrap();
    assert!(h17.starts_with("H17,272,17.21053,"), "{h17}");
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn tables_partial_alternating() {
    let csv = text_ok(&["tables", "--table", "2", "--max-n", "7"]);
    assert!(csv.lines().any(|l| l == "5,60,2.500000,10.00000,"), "{csv}");
}

#[test]
fn tables_report_rows_beyond_caps() {
    let out = run(&["tables", "--table", "1", "--max-n", "8"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("A7,2520,4.782001,")));
    assert!(csv
        .lines()
        .any(|l| l.starts_with("A8,") && l.ends_with("order_cap")));
    assert!(String::from_utf8(out.stderr).unwrap().contains("order_cap"));
}

#[test]
fn tables_output_is_stable() {
    let args = ["tables", "--table", "3", "--max-n", "5"];
    assert_eq!(text_ok(&args), text_ok(&args));
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate",
        "--group",
        r#"{"family":"alternating","n":5}"#,
        "--trials",
        "20000",
        "--seed",
        "5",
    ];
    let a = text_ok(&args);
    assert_eq!(a, text_ok(&args));
    assert!(a.starts_with("k,count,frequency\n"));
}

#[test]
fn simulate_affine_mean() {
    let v = json_ok(&[
        "simulate",
        "--group",
        r#"{"family":"affine","p":31}"#,
        "--trials",
        "100000",
        "--seed",
        "7",
        "--format",
        "json",
    ]);
    let mean: f64 = v["mean"].as_str().unwrap().parse().unwrap();
    let se: f64 = v["stderr"].as_str().unwrap().parse().unwrap();
    let exact = json_ok(&["closed-form", "--affine", "31"]);
    let c: f64 = exact["decimal"].as_str().unwrap().parse().unwrap();
    assert!((mean - c).abs() <= 3.0 * se + 1e-4, "{mean} vs {c}");
    assert_eq!(v["seed"], 7);
}

#[test]
fn simulate_requires_seed() {
    assert_error(
        &run(&["simulate", "--group", r#"{"family":"cyclic","n":2}"#]),
        "usage",
    );
}

#[test]
fn simulate_poisson_json() {
    let v = json_ok(&[
        "simulate",
        "--poisson",
        "--l",
        "1",
        "--trials",
        "20000",
        "--seed",
        "3",
        "--format",
        "json",
    ]);
    let mean: f64 = v["mean"].as_str().unwrap().parse().unwrap();
    assert!((mean - std::f64::consts::E).abs() < 0.1);
    assert_eq!(v["l"], 1);
}

#[test]
fn coupon_two_halves() {
    let path = temp_file(
        "halves.json",
        r#"{"weights":[["1","2"],["1","2"]],"sets":[[0],[1]]}"#,
    );
    let v = json_ok(&["coupon", "--spec", &path]);
    assert_eq!(v["expected"]["num"], "3");
    assert_eq!(v["second_moment"]["num"], "11");
    assert_eq!(v["second_moment"]["den"], "1");
}

#[test]
fn closed_form_niven() {
    let v = json_ok(&["closed-form", "--niven", "--tol", "1e-12"]);
    let lo = v["limit"]["lower"].as_str().unwrap();
    let hi = v["limit"]["upper"].as_str().unwrap();
    assert!(
        lo <= "2.705211140105367764" && "2.705211140105367764" <= hi,
        "{lo} {hi}"
    );
}

#[test]
fn closed_form_exact_families() {
    assert_eq!(
        json_ok(&["closed-form", "--cyclic", "6"])["decimal"],
        "2.300000"
    );
    let v = json_ok(&["closed-form", "--elementary", "2,2"]);
    assert_eq!(
        (
            v["chebotarev"]["num"].as_str(),
            v["chebotarev"]["den"].as_str()
        ),
        (Some("10"), Some("3"))
    );
    assert_error(
        &run(&["closed-form", "--elementary", "4,2"]),
        "invalid_parameter",
    );
}

#[test]
fn errors_are_single_json_lines() {
    assert_error(
        &run(&["compute", "--group", r#"{"family":"symmetric","n":8}"#]),
        "order_cap",
    );
    assert_error(&run(&["compute", "--group", "not json"]), "invalid_spec");
    assert_error(
        &run(&["compute", "--group", r#"{"family":"klein"}"#]),
        "invalid_spec",
    );
    assert_error(
        &run(&["compute", "--profile", "/nonexistent/profile.json"]),
        "io",
    );
    let bad = temp_file(
        "bad.json",
        r#"{"order":2,"class_sizes":[1],"maximal_classes":[]}"#,
    );
    assert_error(&run(&["compute", "--profile", &bad]), "invalid_profile");
    assert_error(&run(&["tables", "--table", "9"]), "invalid_parameter");
    assert_error(
        &run(&["simulate", "--poisson", "--trials", "0", "--seed", "1"]),
        "invalid_parameter",
    );
    assert_error(&run(&["frobnicate"]), "usage");
}

#[test]
fn too_many_maximal_classes() {
    let rows: Vec<String> = (0..31)
        .map(|_| r#"{"contains":[true,false]}"#.to_string())
        .collect();
    let profile = format!(
        r#"{{"order":2,"class_sizes":[1,1],"maximal_classes":[{}]}}"#,
        rows.join(",")
    );
    let path = temp_file("many.json", &profile);
    assert_error(&run(&["compute", "--profile", &path]), "maximal_class_cap");
}

#[test]
fn environment_caps() {
    let out = run_env(
        &["compute", "--group", r#"{"family":"alternating","n":4}"#],
        "CHEBOTAREV_MAX_ORDER",
        "10",
    );
    assert_error(&out, "order_cap");
    let out = run_env(
        &["compute", "--group", r#"{"family":"alternating","n":4}"#],
        "CHEBOTAREV_MAX_ORDER",
        "12",
    );
    assert!(out.status.success());
}
