use std::io::Write;
use std::process::{Command, Output};

use qe2::qcore::{PrecisionCtx, QParam, Real};
use qe2::repmatrix::phi_mn;
use serde_json::Value;

fn qe2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qe2")).args(args).env_remove("QE2_DIGITS").output().unwrap()
}

fn json_line(o: &Output) -> Value {
    let s = String::from_utf8(o.stdout.clone()).unwrap();
    serde_json::from_str(s.lines().next().expect("one record")).unwrap()
}

fn grid_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn eval_bessel_at_zero() {
    let o = qe2(&["eval", "q_bessel", "--k", "0", "--x", "0", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_line(&o)["value"]["re"], 1.0);
}

#[test]
fn eval_kummer_a_one() {
    let o = qe2(&["eval", "q_kummer", "--a", "1", "--b", "0.25", "--x", "3", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_line(&o)["value"]["re_str"], "1e0");
}

#[test]
fn eval_round_trips_library_value() {
    let o = qe2(&["eval", "phi_mn", "--m", "0", "--n", "0", "--x", "0.4", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let ctx = PrecisionCtx::default();
    let _g = ctx.enter();
    let q = QParam::parse("0.5").unwrap();
    let lib = phi_mn(0, 0, &Real::parse("0.4").unwrap(), &q, &ctx).unwrap();
    let rec = json_line(&o);
    assert_eq!(rec["value"]["re_str"], lib.value.re.to_sci(50));
    assert_eq!(rec["terms_used"], lib.terms_used);
}

#[test]
fn digits_env_sets_default() {
    let o = Command::new(env!("CARGO_BIN_EXE_qe2"))
        .args(["eval", "q_exp", "--x", "0.1", "--q", "0.5"])
        .env("QE2_DIGITS", "60")
        .output()
        .unwrap();
    let s = json_line(&o)["value"]["re_str"].as_str().unwrap().to_string();
    let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 60);
}

#[test]
fn verify_output_is_byte_identical() {
    let g = grid_file("x = 0.25, 1\nq = 0.5\nn = 0, 1\n");
    let path = g.path().to_str().unwrap();
    let a = qe2(&["verify", "example-C", "--grid", path]);
    let b = qe2(&["verify", "example-C", "--grid", path]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 4);
}

#[test]
fn empty_grid_gives_empty_output() {
    let g = grid_file("");
    let o = qe2(&["verify", "example-C", "--grid", g.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_grid_reports_lines() {
    let g = grid_file("q = 0.5\nnot a pair\nn = 3..1\n");
    let o = qe2(&["verify", "example-C", "--grid", g.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(65));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(qe2(&["eval", "no_such_function", "--q", "0.5"]).status.code(), Some(64));
    assert_eq!(qe2(&["verify", "no_such_identity"]).status.code(), Some(64));
    assert_eq!(qe2(&["verify", "sum-two", "--bogus", "1"]).status.code(), Some(64));
    assert_eq!(qe2(&["eval", "q_exp", "--x", "0.1", "--q", "0.5", "--digits", "10"]).status.code(), Some(64));
}

#[test]
fn trivial_weight_collapses_to_unitarity() {
    let o = qe2(&["verify", "sum-four", "--j", "0", "--lambda", "0", "--m", "0..2", "--n", "0..2", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 9);
    for l in out.lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["status"], "PASS");
    }
}

#[test]
fn failing_identity_exits_1() {
    // U U† ≠ 1, so the two-factor sum fails at the trivial weight
    let o = qe2(&["verify", "sum-two", "--j", "0", "--lambda", "0", "--m", "0", "--n", "0", "--q", "0.5", "--N", "16"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_has_header_and_rows() {
    let o = qe2(&["verify", "example-C", "--x", "1", "--q", "0.5", "--n", "0,1", "--format", "csv"]);
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("identity_id,params,lhs_re,lhs_im"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn oracle_checks() {
    let o = qe2(&["oracle", "relations", "--q", "1/2", "--N", "10", "--J", "-8..8"]);
    assert_eq!(o.status.code(), Some(0));
    let o = qe2(&["oracle", "u-match", "--q", "0.5", "--N", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json_line(&o)["result"]["max_abs_err"].as_f64().unwrap() < 1e-15);
    let o = qe2(&["oracle", "covariance", "--j", "2", "--lambda", "0.5", "--cutoff", "8", "--q", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = qe2(&["oracle", "covariance", "--j", "2", "--lambda", "0.5", "--cutoff", "8", "--q", "1/2", "--norm", "printed"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.jsonl");
    let o = qe2(&["verify", "limit-q-to-1-kummer", "--m", "0", "--j", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(std::fs::read_to_string(&p).unwrap().trim()).unwrap();
    assert_eq!(v["identity_id"], "limit_q_to_1_kummer");
}
