//! End-to-end runs of the `fpi` binary.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpi"))
        .args(args)
        .env_remove("FPI_DEFAULT_DIGITS")
        .output()
        .expect("fpi runs")
}

fn ok(args: &[&str]) -> String {
    let out = fpi(args);
    assert!(
        out.status.success(),
        "fpi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

/// Header and rows of a CSV table.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn number(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("{s:?} is not a number"))
}

#[test]
fn pt_cubic_table_value() {
    let (h, rows) = table(&ok(&["sum", "--system", "pt_cubic", "-d", "10", "--digits", "120", "--beta", "1e3"]));
    assert_eq!(rows.len(), 1);
    let fp = number(&rows[0][column(&h, "fp_value_50")]);
    assert_eq!(format!("{fp:.6}"), "4.578585");
    assert_eq!(rows[0][column(&h, "digits")], "120");
    assert_eq!(rows[0][column(&h, "d")], "10");
}

#[test]
fn quartic_finite_part_agrees_with_pade() {
    let (h, rows) = table(&ok(&[
        "sum", "--system", "quartic", "-d", "10", "--beta", "0.1", "--methods", "finite_part,pade", "--pade", "5/6",
    ]));
    let fp = number(&rows[0][column(&h, "fp_value_50")]);
    let pade = number(&rows[0][column(&h, "pade_value")]);
    assert!((fp - pade).abs() <= 1e-8, "fp {fp} pade {pade}");
    assert_eq!(rows[0][column(&h, "partial_sum_value")], "");
}

#[test]
fn sum_header_is_documented_schema() {
    let (h, _) = table(&ok(&["sum", "--system", "quartic", "-d", "4", "--beta", "1", "--methods", "partial_sum"]));
    assert_eq!(
        h,
        [
            "beta",
            "d",
            "digits",
            "fp_value",
            "fp_value_50",
            "fp_head_tail",
            "fp_correction",
            "cancellation_digits",
            "tail_terms",
            "pade_value",
            "partial_sum_value",
            "wall_time_ms"
        ]
    );
}

#[test]
fn moment_file_round_trip() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("m.json");
    let file = file.to_str().unwrap();
    ok(&["moments", "--system", "sextic", "-d", "50", "--out", file]);
    let direct = table(&ok(&["sum", "--system", "sextic", "-d", "50", "--beta", "0.01", "--no-timing"]));
    let loaded = table(&ok(&["sum", "--moments", file, "--beta", "0.01", "--no-timing"]));
    let fp = column(&direct.0, "fp_value");
    assert_eq!(direct.1[0][fp], loaded.1[0][fp]);
    assert_eq!(direct, loaded);
}

#[test]
fn rs_moment_file_matches_generated_moments() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("rs.json");
    let file = file.to_str().unwrap();
    ok(&["moments", "--system", "funnel", "-d", "12", "--convention", "rs", "--out", file]);
    let direct = ok(&["sum", "--system", "funnel", "-d", "12", "--beta", "1", "--no-timing"]);
    let loaded = ok(&["sum", "--moments", file, "--beta", "1", "--no-timing"]);
    assert_eq!(direct, loaded);
}

#[test]
fn compare_terms_layout_and_limits() {
    let (h, rows) = table(&ok(&["compare-terms", "--system", "pt_cubic", "-d", "100", "--beta", "0.1,1e15"]));
    assert_eq!(
        h,
        [
            "beta",
            "d",
            "digits",
            "head_tail",
            "correction",
            "stieltjes",
            "total",
            "correction_over_total",
            "cancellation_digits"
        ]
    );
    let (ht, corr, ratio) = (column(&h, "head_tail"), column(&h, "correction"), column(&h, "correction_over_total"));
    // Weak coupling: the two parts nearly cancel.
    assert!(number(&rows[0][ht]) * number(&rows[0][corr]) < 0.0);
    // Strong coupling: the correction carries the value.
    assert!((number(&rows[1][ratio]) - 1.0).abs() < 1e-3);
}

#[test]
fn no_timing_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(format!("{name}.csv"));
        ok(&[
            "sum", "--system", "funnel", "-d", "10", "--grid", "0.1,10,2", "--methods", "finite_part,pade,partial_sum",
            "--no-timing", "--out", csv.to_str().unwrap(),
        ]);
        let sidecar = csv.with_extension("json");
        (std::fs::read(&csv).unwrap(), std::fs::read(sidecar).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let (_, rows) = table(std::str::from_utf8(&a.0).unwrap());
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.last().unwrap().is_empty()));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["sum", "--system", "quartic", "-d", "10", "--beta", "0.1,1,10,100", "--no-timing"];
    let one = ok(&[&["--jobs", "1"], &args[..]].concat());
    let many = ok(&[&["--jobs", "3"], &args[..]].concat());
    assert_eq!(one, many);
}

#[test]
fn sidecar_reruns_as_config() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first.csv");
    ok(&[
        "sum", "--system", "quartic", "-d", "8", "--beta", "2,500/27", "--methods", "finite_part,pade",
        "--no-timing", "--out", first.to_str().unwrap(),
    ]);
    let sidecar = first.with_extension("json");
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&sidecar).unwrap()).unwrap();
    assert_eq!(doc["config"]["digits"], 100);
    assert_eq!(doc["config"]["pade"]["m"], 4);
    assert!(doc["density_residual"].is_string());
    let second = dir.path().join("second.csv");
    ok(&["sum", "--config", sidecar.to_str().unwrap(), "--no-timing", "--out", second.to_str().unwrap()]);
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(second).unwrap());
}

#[test]
fn digits_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_fpi"))
        .args(["sum", "--system", "quartic", "-d", "6", "--beta", "1"])
        .env("FPI_DEFAULT_DIGITS", "140")
        .output()
        .unwrap();
    assert!(out.status.success());
    let (h, rows) = table(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(rows[0][column(&h, "digits")], "140");
}

#[test]
fn pade_subcommand() {
    let (h, rows) = table(&ok(&["pade", "--system", "sextic", "--pade", "25/26", "--beta", "0.01"]));
    assert_eq!(h, ["beta", "pade_n", "pade_m", "digits", "pade_value", "wall_time_ms"]);
    let v = &rows[0][column(&h, "pade_value")];
    assert!(v.starts_with("1.01674136331858137175447611"), "{v}");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| fpi(args).status.code().unwrap();
    // Configuration errors.
    assert_eq!(code(&["sum", "--system", "quartic", "-d", "1", "--beta", "1"]), 2);
    assert_eq!(code(&["sum", "--system", "quartic", "-d", "5", "--beta", "-1"]), 2);
    assert_eq!(code(&["sum", "--system", "quartic", "-d", "5", "--beta", "x"]), 2);
    assert_eq!(code(&["sum", "--system", "quartic", "--beta", "1"]), 2);
    assert_eq!(code(&["sum", "--system", "nonesuch", "-d", "5", "--beta", "1"]), 2);
    assert_eq!(code(&["selftest", "--criterion", "99"]), 2);
    // I/O errors.
    assert_eq!(code(&["sum", "--moments", "/nonexistent/m.json", "--beta", "1"]), 4);
    assert_eq!(
        code(&["sum", "--system", "quartic", "-d", "4", "--beta", "1", "--out", "/nonexistent/dir/o.csv"]),
        4
    );
    // Numerical failure: equal moments make the [2/2] Padé system singular.
    let dir = TempDir::new().unwrap();
    let flat = write(
        dir.path(),
        "flat.json",
        r#"{"system": "custom", "nu": "1/2", "lambda": "1/2", "kernel": "linear",
            "subtraction": "0", "prefactor": "1", "coeffs": ["1", "1", "1", "1", "1"],
            "convention": "mu"}"#,
    );
    let out = fpi(&["pade", "--moments", &flat, "--pade", "2/2", "--beta", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("pade") && msg.contains("pade_build"), "{msg}");
}

#[test]
fn diagnostics_name_the_module() {
    let out = fpi(&["sum", "--moments", "/nonexistent/m.json", "--beta", "1"]);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("error in moments") && msg.contains("/nonexistent/m.json"), "{msg}");
}

#[test]
fn selftest_single_criterion() {
    let out = ok(&["selftest", "--criterion", "7"]);
    assert!(out.starts_with("PASS criterion 7"), "{out}");
}
