//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing so the remaining test targets still run; set
//! `QE2_ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::{Duration, Instant};

use qe2::identities::{run_grid, GridSpec, IdentityId, IdentityReport, PrintedStatus, Status};
use qe2::qalgebra::{check_closing_identities, check_relations, covariance_check, u_match, DNormalization, FockBasis};
use qe2::qcore::{CxExt, PrecisionCtx, QParam, Surd};
use qe2::repmatrix::RepWeight;

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

fn vals(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn range(lo: i64, hi: i64) -> Vec<String> {
    (lo..=hi).map(|v| v.to_string()).collect()
}

fn grid(id: IdentityId, ctx: &PrecisionCtx, axes: &[(&str, Vec<String>)]) -> Vec<IdentityReport> {
    let mut g = GridSpec::new(id, ctx.clone());
    for (k, v) in axes {
        g = g.set(k, v.clone());
    }
    run_grid(&g).expect("grid within budget")
}

fn brief(r: &IdentityReport) -> String {
    let p: Vec<String> = r.params.iter().filter(|(k, _)| *k != "N").map(|(k, v)| format!("{k}={v}")).collect();
    format!("{} {} {:?} rel_err={:.3e}", r.identity_id, p.join(","), r.status, r.rel_err)
}

fn failing_notes(rs: &[IdentityReport], pred: impl Fn(&IdentityReport) -> bool, limit: usize) -> Vec<String> {
    let bad: Vec<&IdentityReport> = rs.iter().filter(|r| !pred(r)).collect();
    let mut out: Vec<String> = bad.iter().take(limit).map(|r| brief(r)).collect();
    if bad.len() > limit {
        out.push(format!("... {} more", bad.len() - limit));
    }
    out
}

fn count(rs: &[IdentityReport], pred: impl Fn(&IdentityReport) -> bool) -> usize {
    rs.iter().filter(|r| pred(r)).count()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn basis() -> FockBasis {
    FockBasis::new(10, -8, 8).unwrap()
}

fn c1() -> Outcome {
    let t = Instant::now();
    let q = QParam::parse("1/2").unwrap();
    let checks = check_relations::<Surd>(&basis(), &q).unwrap();
    let el = t.elapsed();
    let exact = checks.iter().filter(|c| c.exact).count();
    let notes = checks.iter().filter(|c| !c.exact).map(|c| format!("{} violated by {:.3e}", c.name, c.max_violation)).collect();
    Outcome {
        pass: exact == checks.len() && el < Duration::from_secs(10),
        detail: format!("{exact}/{} relations exact on the interior of N=10, J=-8..8 in {} (limit 10s)", checks.len(), secs(el)),
        notes,
    }
}

fn c2(ctx: &PrecisionCtx) -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for qs in ["0.3", "0.7"] {
        let q = QParam::parse(qs).unwrap();
        let m = u_match(20, 10, &[-2, 0, 2], &q, ctx).unwrap();
        pass &= m.max_abs_err < 1e-15 && m.max_unitarity_err < 1e-15;
        parts.push(format!(
            "q={qs}: max|U_c-U|={:.2e} max|U*U-1|={:.2e} norm deficit={:.2e}",
            m.max_abs_err, m.max_unitarity_err, m.max_norm_deficit
        ));
    }
    let el = t.elapsed();
    pass &= el < Duration::from_secs(120);
    Outcome { pass, detail: format!("{} in {} (limit 120s)", parts.join("; "), secs(el)), notes: vec![] }
}

fn c3() -> Outcome {
    let q = QParam::parse("1/2").unwrap();
    let mut ok = 0;
    let mut total = 0;
    let mut notes = Vec::new();
    let mut printed_ok = 0;
    for lam in ["1/4", "1/2"] {
        let w = RepWeight::parse(lam).unwrap();
        for j in 1..=3 {
            total += 1;
            let c = covariance_check(j, &w, 8, &q, DNormalization::Covariant).unwrap();
            if c.p_relation && c.k_relation {
                ok += 1;
            } else {
                notes.push(format!("j={j} lambda={lam}: P {} K {}", c.p_relation, c.k_relation));
            }
            let pc = covariance_check(j, &w, 8, &q, DNormalization::Printed).unwrap();
            if pc.p_relation && pc.k_relation {
                printed_ok += 1;
            }
        }
    }
    notes.push(format!("printed D normalization satisfies both relations at {printed_ok}/{total} points"));
    Outcome {
        pass: ok == total,
        detail: format!("R(P) and R(K) relations exact through degree 7 at {ok}/{total} points (covariant D normalization)"),
        notes,
    }
}

fn c4(ctx: &PrecisionCtx) -> Outcome {
    let t = Instant::now();
    let q = vals(&["0.4", "0.7"]);
    let lam = vals(&["0.25", "0.5"]);
    let mn = range(0, 3);
    let two = grid(
        IdentityId::SumTwo,
        ctx,
        &[("q", q.clone()), ("lambda", lam.clone()), ("j", range(-2, 2)), ("m", mn.clone()), ("n", mn.clone())],
    );
    let axes = [("q", q), ("lambda", lam), ("j", range(0, 2)), ("m", mn.clone()), ("n", mn)];
    let three = grid(IdentityId::SumThree, ctx, &axes);
    let four = grid(IdentityId::SumFour, ctx, &axes);
    let el = t.elapsed();
    let pass_of = |rs: &[IdentityReport]| count(rs, |r| r.status == Status::PASS);
    let vanishing: Vec<&IdentityReport> = three
        .iter()
        .filter(|r| r.params["n"].parse::<i64>().unwrap() < r.params["j"].parse::<i64>().unwrap())
        .collect();
    let vanish_max = vanishing.iter().map(|r| r.lhs.0.abs().to_f64()).fold(0.0, f64::max);
    let vanish_ok = vanish_max <= 1e-30;
    let (p2, p3, p4) = (pass_of(&two), pass_of(&three), pass_of(&four));
    let pass = p2 == two.len() && p3 == three.len() && p4 == four.len() && vanish_ok && el < Duration::from_secs(600);
    let mut notes = Vec::new();
    for rs in [&two, &three, &four] {
        notes.extend(failing_notes(rs, |r| r.status == Status::PASS, 4));
    }
    Outcome {
        pass,
        detail: format!(
            "sum_two {p2}/{}, sum_three {p3}/{}, sum_four {p4}/{} PASS; n<j branch max|lhs|={vanish_max:.2e} over {} points (atol 1e-30); {} (limit 600s)",
            two.len(),
            three.len(),
            four.len(),
            vanishing.len(),
            secs(el)
        ),
        notes,
    }
}

fn c5(ctx: &PrecisionCtx) -> Outcome {
    let rs = grid(
        IdentityId::ExampleC,
        ctx,
        &[("x", vals(&["0.25", "1", "2"])), ("q", vals(&["0.3", "0.5", "0.8"])), ("n", vals(&["0", "1", "3"]))],
    );
    let ok = count(&rs, |r| r.status == Status::PASS);
    let pr = count(&rs, |r| r.printed_form_status == PrintedStatus::PASS);
    Outcome {
        pass: ok == rs.len() && rs.len() == 27,
        detail: format!("canonical {ok}/{} PASS; printed form PASS at {pr}/{} (recorded per point)", rs.len(), rs.len()),
        notes: failing_notes(&rs, |r| r.status == Status::PASS, 4),
    }
}

fn c6(ctx: &PrecisionCtx) -> Outcome {
    let rs = grid(
        IdentityId::ExampleA,
        ctx,
        &[
            ("j", vals(&["0", "1", "2", "4"])),
            ("lambda", vals(&["0.2", "0.5"])),
            ("x", vals(&["0.1", "0.5"])),
            ("q", vals(&["0.4", "0.7"])),
        ],
    );
    let ok = count(&rs, |r| r.status == Status::PASS);
    let pr = count(&rs, |r| r.printed_form_status == PrintedStatus::PASS);
    Outcome {
        pass: ok == rs.len(),
        detail: format!("canonical {ok}/{} PASS; printed q^{{s(1-s)/2}} form PASS at {pr}/{}", rs.len(), rs.len()),
        notes: failing_notes(&rs, |r| r.status == Status::PASS, 4),
    }
}

fn c7() -> Outcome {
    let ctx = PrecisionCtx { rtol: 1e-10, ..PrecisionCtx::default() };
    let rs = grid(
        IdentityId::ExampleAClassical,
        &ctx,
        &[("j", vals(&["0", "1", "3"])), ("lambda", vals(&["0.5", "1"])), ("x", vals(&["0.25", "1"]))],
    );
    let pr = count(&rs, |r| r.printed_form_status == PrintedStatus::PASS);
    let corrected = count(&rs, |r| r.status == Status::PASS);
    Outcome {
        pass: pr == rs.len(),
        detail: format!(
            "stated form with J_j(lambda sqrt x) holds at {pr}/{} points (rtol 1e-10); with J_j(2 lambda sqrt x) at {corrected}/{}",
            rs.len(),
            rs.len()
        ),
        notes: vec![],
    }
}

fn c8(ctx: &PrecisionCtx) -> Outcome {
    let rs = grid(
        IdentityId::ExampleB,
        ctx,
        &[
            ("k", vals(&["0", "1", "2"])),
            ("m", vals(&["0"])),
            ("lambda", vals(&["1"])),
            ("y", vals(&["0.2", "0.6"])),
            ("q", vals(&["0.4", "0.7"])),
        ],
    );
    let ok = count(&rs, |r| r.status == Status::PASS);
    let pr = count(&rs, |r| r.printed_form_status == PrintedStatus::PASS);
    // y → 0: only the s = 0 term survives, J^q_0(0) = 1 against q^0 y^0/(0)! = 1
    let q = QParam::parse("1/2").unwrap();
    let j0 = qe2::qspecial::q_bessel(0, &qe2::qcore::Cx::real(qe2::qcore::Real::from_i64(0)), &q, ctx).unwrap();
    let base_ok = j0.value == qe2::qcore::Cx::real(qe2::qcore::Real::from_i64(1));
    Outcome {
        pass: ok == rs.len() && base_ok,
        detail: format!(
            "canonical {ok}/{} PASS; printed form PASS at {pr}/{}; y=0 base case equals 1 exactly: {base_ok}",
            rs.len(),
            rs.len()
        ),
        notes: failing_notes(&rs, |r| r.status == Status::PASS, 4),
    }
}

fn c9(ctx: &PrecisionCtx) -> Outcome {
    let kummer = grid(
        IdentityId::LimitQTo1Kummer,
        ctx,
        &[("m", range(0, 4)), ("j", range(0, 3)), ("lambda", vals(&["1"]))],
    );
    let plane = grid(
        IdentityId::LimitQTo1Plane,
        ctx,
        &[("j", range(0, 3)), ("lambda", vals(&["0.5", "1"])), ("r", vals(&["0.5", "1"]))],
    );
    let sigma = grid(
        IdentityId::LimitSigmaTo0,
        ctx,
        &[("j", range(0, 2)), ("lambda", vals(&["0.5"])), ("x", vals(&["0.3", "1"])), ("q", vals(&["0.5", "0.7"]))],
    );
    let k_ok = count(&kummer, |r| r.status == Status::PASS);
    let p_ok = count(&plane, |r| r.status == Status::PASS);
    let s_ok = count(&sigma, |r| r.status == Status::PASS);
    let verdict = |rs: &[IdentityReport]| -> String {
        let mut v: Vec<String> = rs
            .iter()
            .map(|r| r.discrepancy_note.split(';').next().unwrap_or("").trim().to_string())
            .collect();
        v.sort();
        v.dedup();
        v.join(" | ")
    };
    let mut notes = failing_notes(&kummer, |r| r.status == Status::PASS, 6);
    notes.push(format!("plane: {}", verdict(&plane)));
    notes.push(format!("sigma: {}", verdict(&sigma)));
    if let Some(r) = plane.iter().find(|r| r.params.get("j").map(|s| s.as_str()) == Some("1")) {
        notes.push(format!("plane curve {}", r.discrepancy_note));
    }
    if let Some(r) = sigma.iter().find(|r| r.params.get("j").map(|s| s.as_str()) == Some("1")) {
        notes.push(format!("sigma curve {}", r.discrepancy_note));
    }
    Outcome {
        pass: k_ok == kummer.len() && p_ok == plane.len() && s_ok == sigma.len(),
        detail: format!(
            "q->1 Kummer {k_ok}/{} below 1e-3 and monotone; plane verdict definitive {p_ok}/{}; sigma->0 verdict definitive {s_ok}/{}",
            kummer.len(),
            plane.len(),
            sigma.len()
        ),
        notes,
    }
}

fn c10() -> Outcome {
    let q = QParam::parse("1/2").unwrap();
    let checks = check_closing_identities::<Surd>(&basis(), &q, 4).unwrap();
    let exact = checks.iter().filter(|c| c.exact).count();
    Outcome {
        pass: exact == checks.len(),
        detail: format!("{exact}/{} closing identities exact for k <= 4", checks.len()),
        notes: checks.iter().filter(|c| !c.exact).map(|c| c.name.clone()).collect(),
    }
}

fn main() {
    let ctx = PrecisionCtx::default();
    let started = Instant::now();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("algebra exactness", Box::new(c1)),
        ("constructive U vs closed form", Box::new(|| c2(&ctx))),
        ("covariance", Box::new(c3)),
        ("sandwich identities", Box::new(|| c4(&ctx))),
        ("example C", Box::new(|| c5(&ctx))),
        ("example A", Box::new(|| c6(&ctx))),
        ("classical generating function", Box::new(c7)),
        ("example B", Box::new(|| c8(&ctx))),
        ("limits", Box::new(|| c9(&ctx))),
        ("closing operator identities", Box::new(c10)),
    ];
    let mut passed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if o.pass {
            passed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        for n in &o.notes {
            println!("    {n}");
        }
    }
    println!("acceptance: {passed}/{} criteria pass in {}", criteria.len(), secs(started.elapsed()));
    if passed < criteria.len() && std::env::var("QE2_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
