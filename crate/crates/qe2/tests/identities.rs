use qe2::identities::{run_grid, verify, GridSpec, IdentityId, IdentityReport, Params, PrintedStatus, Status};
use qe2::qcore::{CxExt, PrecisionCtx};

fn ctx() -> PrecisionCtx {
    PrecisionCtx::default()
}

fn run(id: IdentityId, p: Params) -> IdentityReport {
    verify(id, &p, &ctx()).unwrap()
}

fn sum_params(j: i64, m: u64, n: u64, q: &str, lam: &str) -> Params {
    Params::new().with("j", j).with("m", m).with("n", n).with("q", q).with("lambda", lam)
}

#[test]
fn sum_three_and_four_hold() {
    for (j, m, n) in [(0, 0, 0), (1, 2, 3), (2, 1, 2), (0, 3, 1)] {
        for id in [IdentityId::SumThree, IdentityId::SumFour] {
            let r = run(id, sum_params(j, m, n, "0.5", "0.5"));
            assert_eq!(r.status, Status::PASS, "{id} j={j} m={m} n={n}: {}", r.discrepancy_note);
        }
    }
}

#[test]
fn sum_three_vanishes_below_j() {
    for (j, n) in [(1, 0), (2, 0), (2, 1)] {
        let r = run(IdentityId::SumThree, sum_params(j, 2, n, "0.4", "0.25"));
        assert_eq!(r.status, Status::PASS);
        assert!(r.lhs.0.abs().to_f64() <= 1e-30, "j={j} n={n}");
    }
}

#[test]
fn zero_weight() {
    for id in [IdentityId::SumThree, IdentityId::SumFour] {
        let r = run(id, sum_params(1, 1, 2, "0.5", "0"));
        assert_eq!(r.status, Status::PASS, "{id}");
    }
    // the two-sided sum needs U U† = 1, which fails on the truncated lattice
    let r = run(IdentityId::SumTwo, sum_params(0, 1, 1, "0.5", "0"));
    assert_eq!(r.status, Status::FAIL);
}

#[test]
fn truncation_error_does_not_grow() {
    for id in [IdentityId::SumThree, IdentityId::SumFour] {
        let errs: Vec<f64> = [16u32, 20, 24]
            .iter()
            .map(|n_max| run(id, sum_params(1, 1, 2, "0.7", "0.5").with("N", n_max)).rel_err)
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] * 1.01 + 1e-45, "{id}: {errs:?}");
        }
    }
}

#[test]
fn example_c_grid() {
    let g = GridSpec::new(IdentityId::ExampleC, ctx())
        .set("x", vec!["0.25".into(), "1".into(), "2".into()])
        .set("q", vec!["0.3".into(), "0.5".into(), "0.8".into()])
        .set("n", vec!["0".into(), "1".into(), "3".into()]);
    assert_eq!(g.size(), 27);
    let rs = run_grid(&g).unwrap();
    assert_eq!(rs.len(), 27);
    assert!(rs.iter().all(|r| r.status == Status::PASS));
    // last key varies fastest
    let ns: Vec<&str> = rs.iter().take(3).map(|r| r.params["n"].as_str()).collect();
    assert_eq!(ns, ["0", "1", "3"]);
}

#[test]
fn reports_are_reproducible() {
    let g = GridSpec::new(IdentityId::SumFour, ctx())
        .set("q", vec!["0.4".into(), "0.7".into()])
        .set("lambda", vec!["0.5".into()])
        .set("j", vec!["0".into(), "1".into()])
        .set("m", vec!["1".into()])
        .set("n", vec!["2".into()]);
    let a = serde_json::to_string(&run_grid(&g).unwrap()).unwrap();
    let b = serde_json::to_string(&run_grid(&g).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn classical_example_needs_doubled_argument() {
    let ctx = PrecisionCtx { rtol: 1e-10, ..PrecisionCtx::default() };
    let p = Params::new().with("j", 1).with("lambda", "0.5").with("x", "1");
    let r = verify(IdentityId::ExampleAClassical, &p, &ctx).unwrap();
    assert_eq!(r.status, Status::PASS, "{}", r.discrepancy_note);
    assert_eq!(r.printed_form_status, PrintedStatus::FAIL);
}

#[test]
fn limit_verdicts() {
    let p = Params::new().with("j", 1).with("lambda", "0.5").with("r", "1");
    let r = run(IdentityId::LimitQTo1Plane, p);
    assert_eq!(r.status, Status::PASS);
    assert!(r.discrepancy_note.starts_with("verdict: J_j(2λr) holds"), "{}", r.discrepancy_note);

    let p = Params::new().with("j", 1).with("lambda", "0.5").with("x", "0.3").with("q", "0.5");
    let r = run(IdentityId::LimitSigmaTo0, p);
    assert_eq!(r.status, Status::PASS);
    assert!(r.discrepancy_note.starts_with("verdict: ζ = 1 − (1−q) q^{-j} x/σ holds"), "{}", r.discrepancy_note);

    let p = Params::new().with("m", 1).with("j", 0).with("lambda", "1");
    let r = run(IdentityId::LimitQTo1Kummer, p);
    assert!(r.discrepancy_note.contains("1F1(-m;1+j;λ²)"));
}
