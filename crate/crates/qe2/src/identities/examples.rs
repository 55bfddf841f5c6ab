//! The worked examples: each is evaluated verbatim as displayed
//! (`printed_form_status`) and in the form implied by the operator identities
//! (`status`).

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::{q_exp, q_exp_invbase, q_factorial, Cx, CxExt, PrecisionCtx, QParam, Real};
use crate::qspecial::{bessel_j, kummer_1f1, q_bessel, q_kummer, q_laguerre, q_laguerre_continued, QKummerArgs};

use super::sums::{eval_sum_three, eval_sum_two, judge, ORACLE_N_DEFAULT};
use super::{errs, fmt_cx, fmt_e, sum_s, IdentityId, IdentityReport, Params, PrintedStatus, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleId {
    A,
    AClassical,
    B,
    C,
}

pub fn verify_example(id: ExampleId, p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let _g = ctx.enter();
    match id {
        ExampleId::A => example_a(p, ctx),
        ExampleId::AClassical => example_a_classical(p, ctx),
        ExampleId::B => example_b(p, ctx),
        ExampleId::C => example_c(p, ctx),
    }
}

fn positive_x(p: &Params) -> Result<Real> {
    let x = p.real("x")?;
    if x.is_negative() {
        return Err(Error::InvalidParam("x must be nonnegative".into()));
    }
    Ok(x)
}

/// Printed verdict of `lhs = rhs`, with a note; a divergent LHS is a FAIL.
fn printed_verdict(lhs: &Result<(Cx, bool)>, rhs: &Cx, ctx: &PrecisionCtx, label: &str) -> (bool, String) {
    match lhs {
        Ok((l, true)) => {
            let v = Verdict::new(ctx);
            let ok = v.passes(l, rhs);
            let (_, rel) = errs(l, rhs);
            let mut note = format!("{label}: lhs={} rhs={} rel={}", fmt_cx(l), fmt_cx(rhs), fmt_e(rel.to_f64()));
            if !ok && !rhs.is_zero() && !l.is_zero() {
                note.push_str(&format!(" ratio={}", fmt_cx(&(l.clone() / rhs.clone()))));
            }
            (ok, note)
        }
        Ok((_, false)) => (false, format!("{label}: lhs series does not converge")),
        Err(e) => (false, format!("{label}: lhs not evaluable ({e})")),
    }
}

fn status_of(ok: bool) -> PrintedStatus {
    if ok {
        PrintedStatus::PASS
    } else {
        PrintedStatus::FAIL
    }
}

fn oracle_n(p: &Params) -> Result<u32> {
    Ok(p.u64_or("N", Some(ORACLE_N_DEFAULT as u64))? as u32)
}

// A: m = n = 0 specialisation of the two-product sum.
fn example_a(p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let j = p.u64_or("j", None)?;
    let w = p.weight()?;
    let x = positive_x(p)?;
    let q = p.q()?;
    let n_max = oracle_n(p)?;
    let e = eval_sum_two(&x, j as i64, 0, 0, &w, &q, n_max, ctx)?;
    let (v, canon_note) = judge(&e, ctx);

    let lam = w.real();
    let eta = x.sqrt();
    let y = &lam * &eta;
    // (iλη)^{-j} (j)! / sqrt(e_q^{-x} e_q^{-q^j x}) J^q_j(λη)
    let e1 = q_exp(&Cx::real(-x.clone()), &q, ctx)?.value.re;
    let e2 = q_exp(&Cx::real(-(q.pow(j as i64) * &x)), &q, ctx)?.value.re;
    let jq = q_bessel(j as i64, &Cx::real(y.clone()), &q, ctx)?.value;
    let rhs_printed = if y.is_zero() && j > 0 {
        Cx::zero()
    } else {
        Cx::i_pow(-(j as i64)).scale_by(&(y.powi(-(j as i64)) * q_factorial(j, &q) / (e1 * e2).sqrt())) * jq
    };
    let lhs_with = |sign: i64| -> Result<(Cx, bool)> {
        let r = sum_s(ctx, 2, |s| {
            let s = s as u64;
            // sign = -1: q^{s(1-s)/2} as displayed; +1: q^{s(s-1)/2}
            let qe = sign * (s * s.saturating_sub(1) / 2) as i64;
            let phi = q_kummer(
                &QKummerArgs::terminating(s, Cx::real(q.pow(1 + j as i64)), Cx::real(q.pow((1 + j + s) as i64) * &lam * &lam)),
                &q,
                ctx,
            )?;
            let c = q.pow(qe) * x.powi(s as i64) / q_factorial(s, &q);
            Ok((phi.value.scale_by(&c), phi.converged))
        })?;
        Ok((r.value, r.converged))
    };
    let (ok_printed, n1) = printed_verdict(&lhs_with(-1), &rhs_printed, ctx, "printed q^{s(1-s)/2}");
    let (_, n2) = printed_verdict(&lhs_with(1), &rhs_printed, ctx, "variant q^{s(s-1)/2}");
    let note = format!("canonical: {canon_note}; {n1}; {n2}");
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.label());
    params.insert("lambda".into(), w.exact().to_string());
    params.insert("x".into(), p.raw("x").unwrap_or_default().to_string());
    params.insert("j".into(), j.to_string());
    params.insert("N".into(), n_max.to_string());
    Ok(v.report(IdentityId::ExampleA, params, e.lhs, e.rhs, e.terms, status_of(ok_printed), note))
}

// A_classical: Σ_s x^s/s! 1F1(−s; 1+j; λ²) against j! (λ√x)^{−j} e^x J_j(c λ√x),
// c = 1 as displayed and c = 2 from the generating function of the Laguerre polynomials.
fn example_a_classical(p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let j = p.u64_or("j", None)?;
    let lam = p.real("lambda")?;
    let x = positive_x(p)?;
    let lam2 = Cx::real(&lam * &lam);
    let d = Real::from_u64(j + 1);
    let mut fact = Real::one();
    let lhs = sum_s(ctx, 2, |s| {
        if s > 0 {
            fact = &fact * Real::from_u64(s as u64);
        }
        let f = kummer_1f1(&Real::from_i64(-(s as i64)), &d, &lam2, ctx)?;
        Ok((f.value.scale_by(&(x.powi(s as i64) / &fact)), f.converged))
    })?;
    let y = &lam * x.sqrt();
    let jfact = (1..=j).fold(Real::one(), |a, k| a * Real::from_u64(k));
    let rhs_with = |c: f64| -> Result<Cx> {
        let arg = Cx::real(&y * Real::from_f64(c));
        let b = bessel_j(j as i64, &arg, ctx)?.value;
        if y.is_zero() {
            // (λ√x)^{-j} J_j(cλ√x) → c^j / (2^j j!)
            let lim = Real::from_f64(c / 2.0).powi(j as i64) / &jfact;
            return Ok(Cx::real(&jfact * x.exp() * lim));
        }
        Ok(b.scale_by(&(&jfact * y.powi(-(j as i64)) * x.exp())))
    };
    let rhs_printed = rhs_with(1.0)?;
    let rhs_canon = rhs_with(2.0)?;
    let mut v = Verdict::new(ctx);
    v.converged(lhs.converged);
    v.compare(&lhs.value, &rhs_canon);
    let (ok_printed, n1) = printed_verdict(&Ok((lhs.value.clone(), lhs.converged)), &rhs_printed, ctx, "printed J_j(λ√x)");
    let (_, n2) = printed_verdict(&Ok((lhs.value.clone(), lhs.converged)), &rhs_canon, ctx, "J_j(2λ√x)");
    let mut params = BTreeMap::new();
    params.insert("lambda".into(), p.raw("lambda").unwrap_or_default().to_string());
    params.insert("x".into(), p.raw("x").unwrap_or_default().to_string());
    params.insert("j".into(), j.to_string());
    Ok(v.report(
        IdentityId::ExampleAClassical,
        params,
        lhs.value,
        rhs_canon,
        lhs.terms,
        status_of(ok_printed),
        format!("{n1}; {n2}"),
    ))
}

// B: n = 0, j = −k specialisation of the three-factor sum.
fn example_b(p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let k = p.u64_or("k", None)?;
    let m = p.u64_or("m", Some(0))?;
    if k < m {
        return Err(Error::InvalidParam(format!("example B needs k >= m, got k={k} m={m}")));
    }
    let w = p.weight()?;
    let q = p.q()?;
    let lam = w.real();
    let x = match p.raw("y") {
        Some(_) if p.raw("x").is_none() => {
            if w.is_trivial() {
                return Err(Error::InvalidParam("y needs a nonzero lambda".into()));
            }
            let y = p.real("y")?;
            let r = &y / &lam;
            &r * &r
        }
        _ => positive_x(p)?,
    };
    let n_max = oracle_n(p)?;
    let e = eval_sum_three(&x, -(k as i64), m, 0, &w, &q, n_max, ctx)?;
    let (v, canon_note) = judge(&e, ctx);
    let eta = x.sqrt();
    let y = &lam * &eta;

    let (ok_printed, printed_note) = if m == 0 {
        // Σ q^{s²/2 + c s k} y^s/(s)! J^q_{s+k}(q^{(s+k)/2} y) = q^{k²/2} y^k/(k)!
        let rhs = Cx::real(q.pow_quarter(2 * (k * k) as i64) * y.powi(k as i64) / q_factorial(k, &q));
        let lhs_c = |c: i64| -> Result<(Cx, bool)> {
            let r = sum_s(ctx, 2, |s| {
                let s = s as i64;
                let arg = q.pow_quarter(2 * (s + k as i64)) * &y;
                let jq = q_bessel(s + k as i64, &Cx::real(arg), &q, ctx)?;
                let f = q.pow_quarter(2 * s * s + 4 * c * s * k as i64) * y.powi(s) / q_factorial(s as u64, &q);
                Ok((jq.value.scale_by(&f), jq.converged))
            })?;
            Ok((r.value, r.converged))
        };
        let (ok, n1) = printed_verdict(&lhs_c(1), &rhs, ctx, "printed m=0 q^{s²/2+sk}");
        let (_, n2) = printed_verdict(&lhs_c(-1), &rhs, ctx, "general display at m=0 q^{s²/2-sk}");
        let (_, n3) = printed_verdict(&lhs_c(0), &rhs, ctx, "variant q^{s²/2}");
        (ok, format!("{n1}; {n2}; {n3}"))
    } else {
        let (lhs, rhs) = example_b_general(k, m, &lam, &eta, &q, ctx)?;
        printed_verdict(&Ok(lhs), &rhs, ctx, "printed general-m display")
    };
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.label());
    params.insert("lambda".into(), w.exact().to_string());
    params.insert("x".into(), x.to_sci(17));
    params.insert("y".into(), y.to_sci(17));
    params.insert("k".into(), k.to_string());
    params.insert("m".into(), m.to_string());
    params.insert("N".into(), n_max.to_string());
    Ok(v.report(
        IdentityId::ExampleB,
        params,
        e.lhs,
        e.rhs,
        e.terms,
        status_of(ok_printed),
        format!("canonical: {canon_note}; {printed_note}"),
    ))
}

/// C_{sm} as displayed, with m and s exchanged on the right for s ≥ m.
fn c_sm(s: u64, m: u64, lam: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<Cx> {
    let (a, b) = if m >= s { (s, m) } else { (m, s) };
    let sign = if a % 2 == 1 { -Real::one() } else { Real::one() };
    let phi = q_kummer(
        &QKummerArgs::terminating(a, Cx::real(q.pow((1 + b - a) as i64)), Cx::real(q.pow(1 + b as i64) * lam * lam)),
        q,
        ctx,
    )?;
    let f = sign * lam.powi((b - a) as i64) / (q_factorial(a, q) * q_factorial(b - a, q));
    Ok(phi.value.scale_by(&f))
}

fn example_b_general(k: u64, m: u64, lam: &Real, eta: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<((Cx, bool), Cx)> {
    let y = lam * eta;
    let lhs = sum_s(ctx, (m + 2) as usize, |s| {
        let s = s as u64;
        let qe = (s * (s + m)) as i64 - 2 * (s * k) as i64;
        let jq = q_bessel((s + k - m) as i64, &Cx::real(q.pow_quarter(2 * (s + k) as i64) * &y), q, ctx)?;
        let c = c_sm(s, m, lam, q, ctx)?;
        Ok((c * jq.value.scale_by(&(q.pow_quarter(2 * qe) * eta.powi(s as i64))), jq.converged))
    })?;
    let phi = q_kummer(
        &QKummerArgs::terminating(m, Cx::real(q.pow((1 + k - m) as i64)), Cx::real(q.pow(1 + k as i64) * eta * eta)),
        q,
        ctx,
    )?;
    let f = q.pow_quarter(2 * (k * (k - m)) as i64) * lam.powi(k as i64) * eta.powi((k - m) as i64)
        / (q_factorial(m, q) * q_factorial(k - m, q));
    Ok(((lhs.value, lhs.converged), phi.value.scale_by(&f)))
}

// C: column norms of U times e_{1/q}^x.
fn example_c(p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let n = p.u64_or("n", None)?;
    let x = positive_x(p)?;
    let q = p.q()?;
    let n_max = oracle_n(p)?;
    let xc = Cx::real(x.clone());
    let rhs = q_exp_invbase(&xc, &q, ctx)?;
    let fact = |k: u64| q_factorial(k, &q);

    let mut partial = Real::zero();
    let mut monotone = true;
    let mut partial_to_cutoff = Real::zero();
    let lhs = sum_s(ctx, n as usize + 2, |s| {
        let s = s as u64;
        let (term, ok) = if s < n {
            let k = n - s;
            let l = q_laguerre(s, k as i64, &xc, &q, ctx)?;
            let c = q.pow((k * (k + 1) / 2) as i64) * x.powi(k as i64) * fact(s) / fact(n);
            let lv = l.value.re.clone();
            (c * &lv * &lv, l.converged)
        } else {
            let k = s - n;
            let l = q_laguerre(n, k as i64, &xc, &q, ctx)?;
            let c = q.pow((k * k.saturating_sub(1) / 2) as i64) * x.powi(k as i64) * fact(n) / fact(s);
            let lv = l.value.re.clone();
            (c * &lv * &lv, l.converged)
        };
        if term.is_negative() {
            monotone = false;
        }
        partial = &partial + &term;
        if s <= n_max as u64 {
            partial_to_cutoff = partial.clone();
        }
        Ok((Cx::real(term), ok))
    })?;

    // oracle: Σ_{s≤N} |U_{sn}|² from the constructive column, divided by e_q^{-x}
    let oracle = crate::qalgebra::ShiftOracle::new(n_max, x.clone(), &q, ctx);
    let col = oracle.column(n as u32, 0)?;
    let eq = q_exp(&Cx::real(-x.clone()), &q, ctx)?.value.re;
    let norm = crate::qalgebra::oracle::svec_norm2(&col) / &eq;

    let mut v = Verdict::new(ctx);
    v.converged(lhs.converged && rhs.converged);
    let r_main = v.compare(&lhs.value, &rhs.value);
    let r_or = v.compare(&Cx::real(partial_to_cutoff), &Cx::real(norm));

    // printed: q^{(n−s)(n−s+1)/2} with the factorial ratios and α as displayed
    let printed = sum_s(ctx, n as usize + 2, |s| {
        let s = s as u64;
        let d = n as i64 - s as i64;
        let qe = q.pow(d * (d + 1) / 2);
        let (c, l) = if s < n {
            (qe * fact(n) * x.powi(d) / fact(s), q_laguerre_continued(s, s as i64 - n as i64, &xc, &q, ctx)?)
        } else {
            (qe * fact(s) * x.powi(-d) / fact(n), q_laguerre_continued(n, d, &xc, &q, ctx)?)
        };
        Ok((l.value.clone() * l.value.scale_by(&c), l.converged))
    });
    let printed = printed.map(|r| (r.value, r.converged));
    let (ok_printed, n1) = printed_verdict(&printed, &rhs.value, ctx, "printed");
    let note = format!(
        "rel(lhs,rhs)={} rel(partial s<=N, oracle column norm)={}; partial sums {}; {n1}",
        fmt_e(r_main),
        fmt_e(r_or),
        if monotone { "monotone" } else { "NOT monotone" }
    );
    let mut params = BTreeMap::new();
    params.insert("q".into(), q.label());
    params.insert("x".into(), p.raw("x").unwrap_or_default().to_string());
    params.insert("n".into(), n.to_string());
    params.insert("N".into(), n_max.to_string());
    Ok(v.report(IdentityId::ExampleC, params, lhs.value, rhs.value, lhs.terms, status_of(ok_printed), note))
}
