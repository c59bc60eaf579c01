use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn mpg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with(fixture_name: &str, args: &[&str]) -> Output {
    let path = fixture(fixture_name);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    mpg(&all)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn solve_example_game() {
    let out = run_with("fixA.json", &["solve"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "solve");
    assert_eq!(v["chibar"], "0");
    assert_eq!(v["method"], "pi");
    assert_eq!(v["perturbed_eigenpair"]["u"], serde_json::json!(["0", "0"]));
}

#[test]
fn solve_deterministic_two_cycle() {
    let out = run_with("fixD.det.json", &["solve"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["chibar"], "1/2");
    assert_eq!(v["method"], "deterministic");
    assert_eq!(v["spec"]["M"], "17");
    assert_eq!(v["spec"]["eps"], "1/9");
}

#[test]
fn solve_methods_agree_on_three_state_game() {
    for method in ["auto", "pi", "perturbed", "oracle"] {
        let out = run_with("fixB.json", &["solve", "--method", method]);
        assert_eq!(out.status.code(), Some(0), "method {method}");
        assert_eq!(json(&out)["chibar"], "6/5", "method {method}");
    }
}

#[test]
fn auto_falls_back_after_a_cycle() {
    let out = run_with(
        "cycling.json",
        &["solve", "--method", "pi", "--sigma0", "1,0,0"],
    );
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycled"));

    let auto = run_with("cycling.json", &["solve", "--sigma0", "1,0,0"]);
    assert_eq!(auto.status.code(), Some(0));
    let v = json(&auto);
    assert_eq!(v["method"], "perturbed");
    assert!(v["fallback"].as_str().unwrap().contains("cycled"));
    let oracle = run_with("cycling.json", &["oracle"]);
    assert_eq!(v["chibar"], json(&oracle)["chibar"]);
}

#[test]
fn malformed_input_exits_2_with_position() {
    let f = temp_file("{\"n\": 1,\n \"states\": [oops]}");
    let out = mpg(&["solve", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let missing = mpg(&["solve", "/nonexistent/game.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bad_sigma0_is_an_input_error() {
    let out = run_with("fixB.json", &["solve", "--sigma0", "5,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_lists_two_witnesses_on_example_game() {
    let out = run_with("fixA.json", &["oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["chibar"], "0");
    assert_eq!(v["witnesses"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_three_state_game() {
    let v = json(&run_with("fixB.json", &["oracle"]));
    assert_eq!(v["chibar"], "6/5");
    assert_eq!(v["chi"], serde_json::json!(["6/5", "6/5", "6/5"]));
}

#[test]
fn oracle_over_cap_exits_3() {
    let out = run_with("fixB.json", &["oracle", "--cap", "11"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn check_accepts_the_eigenpair() {
    let u = temp_file(r#"["-18/5", "-16/5", "0"]"#);
    let out = run_with(
        "fixB.json",
        &[
            "check",
            "--lambda",
            "6/5",
            "--u",
            u.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "ok\n");

    let u = temp_file("0");
    let out = run_with(
        "fixC.json",
        &[
            "check",
            "--lambda",
            "3/2",
            "--u",
            u.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn check_reports_first_violated_coordinate() {
    let u = temp_file("-2, -2, 0");
    let path = u.path().to_str().unwrap();
    let out = run_with("fixB.json", &["check", "--lambda", "1", "--u", path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("coordinate 2"));

    let out = run_with(
        "fixB.json",
        &["check", "--lambda", "1", "--u", path, "--format", "json"],
    );
    let v = json(&out);
    assert_eq!(v["ok"], false);
    assert_eq!(v["coordinate"], 2);
}

#[test]
fn check_rejects_bad_vectors() {
    let u = temp_file("1/2 x");
    let out = run_with(
        "fixC.json",
        &[
            "check",
            "--lambda",
            "3/2",
            "--u",
            u.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let u = temp_file("0 0");
    let out = run_with(
        "fixC.json",
        &[
            "check",
            "--lambda",
            "3/2",
            "--u",
            u.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run_with(
        "fixC.json",
        &[
            "check",
            "--lambda",
            "2/4",
            "--u",
            u.path().to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn map_grid_on_three_state_game() {
    let out = run_with(
        "fixB.json",
        &[
            "map", "--axes", "0,1", "--lo", "-5", "--hi", "5", "--step", "1/2",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "g0,g1,g2,sigma_0.0.0,sigma_1.0.0,sigma_0.1.0,sigma_1.1.0,lambda,verdict"
    );
    assert_eq!(lines.len(), 1 + 21 * 21);
    assert!(lines[1].starts_with("-5,-5,0,"));
    let verdicts: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert!(verdicts
        .iter()
        .all(|v| ["certified", "inconclusive", "none"].contains(v)));
    assert!(verdicts.contains(&"certified"));
}

#[test]
fn map_single_state_is_all_unique() {
    let out = run_with(
        "fixC.json",
        &[
            "map", "--axes", "0,0", "--lo", "-1", "--hi", "1", "--step", "1/3",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert_eq!(csv.lines().count(), 1 + 7);
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "U");
        assert_eq!(cols[3], "certified");
    }
}

#[test]
fn map_empty_grid_prints_header_only() {
    let out = run_with(
        "fixB.json",
        &[
            "map", "--axes", "0,1", "--lo", "1", "--hi", "0", "--step", "1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn map_over_cap_exits_3_with_partial_csv() {
    let out = run_with(
        "fixB.json",
        &[
            "map", "--axes", "0,1", "--lo", "0", "--hi", "1", "--step", "1", "--cap", "3",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("g0,g1,g2,"));
}

#[test]
fn bench_is_deterministic_and_agrees() {
    let args = [
        "bench",
        "--seed",
        "1",
        "--games",
        "8",
        "--max-states",
        "3",
        "--format",
        "json",
    ];
    let a = mpg(&args);
    assert_eq!(a.status.code(), Some(0));
    let b = mpg(&[&args[..], &["--sequential"]].concat());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["summary"]["perturbed_agree"], 8);
}

#[test]
fn bench_single_state_games() {
    let out = mpg(&["bench", "--games", "10", "--max-states", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("perturbed agrees with oracle: 10/10"));
}

#[test]
fn unsupported_format_and_bad_args() {
    assert_eq!(
        run_with("fixA.json", &["solve", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run_with("fixA.json", &["oracle", "--cap", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(mpg(&["frobnicate"]).status.code(), Some(2));
}
