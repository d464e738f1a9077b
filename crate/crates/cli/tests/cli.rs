//! Runs the built binary. Golden files pin the report layout; set
//! `STCONV_UPDATE_GOLDEN=1` to rewrite them after an intended change.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn stconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stconv"))
        .args(args)
        .env_remove("STCONV_HORIZON")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("STCONV_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

/// Object keys in document order, with array elements collapsed to the first.
fn skeleton(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = format!("{prefix}.{k}");
                out.push(p.clone());
                skeleton(x, &p, out);
            }
        }
        Value::Array(a) => {
            if let Some(x) = a.first() {
                skeleton(x, &format!("{prefix}[]"), out);
            }
        }
        _ => {}
    }
}

fn skeleton_of(json: &str) -> String {
    let v: Value = serde_json::from_str(json).unwrap();
    let mut out = Vec::new();
    skeleton(&v, "", &mut out);
    out.join("\n") + "\n"
}

#[test]
fn density_report() {
    let o = stconv(&["density", "--set", "primes", "--horizon", "100000"]);
    assert!(o.status.success());
    golden("density_primes.json", &stdout(&o));
}

#[test]
fn density_csv() {
    let o = stconv(&["--output", "csv", "density", "--set", "union(squares, multiples(5))", "--horizon", "10000"]);
    assert!(o.status.success());
    golden("density_union.csv", &stdout(&o));
}

#[test]
fn prime_count_at_default_horizon() {
    let o = stconv(&["density", "--set", "primes"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["horizon"], 1_000_000);
    assert_eq!(v["final_ratio"].as_f64(), Some(0.078498));
}

#[test]
fn converge_report() {
    let o = stconv(&["converge", "--sequence", "harmonic", "--candidate", "sparse{}", "--eps", "0.5,0.1", "--horizon", "10000"]);
    assert!(o.status.success());
    let out = stdout(&o);
    golden("converge_harmonic.json", &out);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"]["decision"], "refuted");
}

#[test]
fn converge_csv_rows() {
    let o = stconv(&[
        "--output", "csv", "converge", "--sequence", "spike(squares, n)", "--candidate", "dense[0]", "--eps", "0.5", "--horizon", "1000",
    ]);
    golden("converge_spikes.csv", &stdout(&o));
}

#[test]
fn bounded_and_cauchy_reports() {
    let o = stconv(&["bounded", "--sequence", "random(dim=3, seed=7)", "--horizon", "10000"]);
    golden("bounded_random.json", &stdout(&o));
    let o = stconv(&["cauchy", "--sequence", "harmonic", "--horizon", "100000", "--tolerance", "0.01"]);
    golden("cauchy_harmonic.json", &stdout(&o));
}

#[test]
fn classify_layout() {
    let o = stconv(&["classify", "--operator", "diag(prime_scale)", "--property", "st_bounded", "--horizon", "10000"]);
    assert!(o.status.success());
    let out = stdout(&o);
    golden("classify_layout.txt", &skeleton_of(&out));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["outcome"], "refuted");
    let reverified = stconv::classify::reverify_witnesses(&v["report"]).unwrap();
    assert!(!reverified.is_empty() && reverified.iter().all(|ok| *ok));
}

#[test]
fn suite_layout() {
    let o = stconv(&["suite", "--check", "compact_norm_limit", "--check", "unbounded_functional_not_compact", "--horizon", "10000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    golden("suite_layout.txt", &skeleton_of(&stdout(&o)));
}

#[test]
fn echoed_descriptors_reparse() {
    let o = stconv(&["bounded", "--sequence", "subseq(combine(harmonic, unit_coords, 1, -1), multiples(2))", "--horizon", "1000"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let echoed = v["config"]["sequence"].as_str().unwrap();
    let again = stconv(&["bounded", "--sequence", echoed, "--horizon", "1000"]);
    assert_eq!(stdout(&o), stdout(&again));
}

#[test]
fn parse_errors_exit_2_with_caret() {
    let o = stconv(&["density", "--set", "union(primes squares)"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error at column 14"), "{err}");
    assert!(err.contains("             ^"), "{err}");
}

#[test]
fn expect_mismatch_exits_1() {
    let args = ["--expect", "confirmed", "converge", "--sequence", "harmonic", "--candidate", "sparse{}", "--horizon", "1000"];
    assert_eq!(stconv(&args).status.code(), Some(1));
    let args = ["--expect", "refuted", "converge", "--sequence", "harmonic", "--candidate", "sparse{}", "--horizon", "1000"];
    assert_eq!(stconv(&args).status.code(), Some(0));
}

#[test]
fn horizon_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_stconv"))
        .args(["density", "--set", "squares"])
        .env("STCONV_HORIZON", "2500")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["horizon"], 2500);
    assert_eq!(v["verdict"]["profile"]["counts"].as_array().unwrap().last().unwrap(), 50);
}
