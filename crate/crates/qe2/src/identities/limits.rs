//! The q → 1 and σ → 0 limit statements, measured along a sequence.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::{Cx, CxExt, PrecisionCtx, QParam, Real};
use crate::qspecial::{bessel_j, kummer_1f1, q_bessel, q_kummer, QKummerArgs};
use crate::repmatrix::{f_weight_real, t_elem, ZetaPoint};

use super::{errs, fmt_e, IdentityId, IdentityReport, Params, PrintedStatus, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    QTo1Kummer,
    QTo1Plane,
    SigmaTo0,
}

/// Errors along the sequence for one candidate limit.
struct Curve {
    label: String,
    errors: Vec<f64>,
    last_value: Cx,
    target: Cx,
}

impl Curve {
    fn monotone(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] <= w[0])
    }

    fn holds(&self, threshold: f64) -> bool {
        self.monotone() && self.errors.last().is_some_and(|e| *e < threshold)
    }

    fn describe(&self, ts: &[u32]) -> String {
        let pts: Vec<String> = ts.iter().zip(&self.errors).map(|(t, e)| format!("{t}:{}", fmt_e(*e))).collect();
        format!(
            "{} [{}]{}",
            self.label,
            pts.join(" "),
            if self.monotone() { "" } else { " non-monotone" }
        )
    }
}

fn rel(a: &Cx, b: &Cx) -> f64 {
    let (d, r) = errs(a, b);
    if b.is_zero() {
        d.to_f64()
    } else {
        r.to_f64()
    }
}

fn t_range(p: &Params) -> Result<Vec<u32>> {
    let lo = p.u64_or("t_min", Some(3))? as u32;
    let hi = p.u64_or("t_max", Some(10))? as u32;
    if lo < 1 || hi < lo || hi > 60 {
        return Err(Error::InvalidParam(format!("bad sequence range t={lo}..{hi}")));
    }
    Ok((lo..=hi).collect())
}

pub fn verify_limit(kind: LimitKind, p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let _g = ctx.enter();
    let ts = t_range(p)?;
    let mut params = BTreeMap::new();
    params.insert("t_min".into(), ts[0].to_string());
    params.insert("t_max".into(), ts[ts.len() - 1].to_string());
    let mut keep = |k: &str| {
        if let Some(v) = p.raw(k) {
            params.insert(k.to_string(), v.to_string());
        }
    };
    for k in ["m", "j", "lambda", "r", "x", "q", "threshold"] {
        keep(k);
    }
    match kind {
        LimitKind::QTo1Kummer => kummer_limit(p, &ts, params, ctx),
        LimitKind::QTo1Plane => plane_limit(p, &ts, params, ctx),
        LimitKind::SigmaTo0 => sigma_limit(p, &ts, params, ctx),
    }
}

fn finish(
    id: IdentityId,
    curves: &[Curve],
    ts: &[u32],
    threshold: f64,
    params: BTreeMap<String, String>,
    terms: usize,
    ctx: &PrecisionCtx,
) -> IdentityReport {
    let holding: Vec<&Curve> = curves.iter().filter(|c| c.holds(threshold)).collect();
    let chosen = if holding.len() == 1 { holding[0] } else { &curves[0] };
    let mut v = Verdict::new(ctx);
    let final_err = chosen.errors.last().copied().unwrap_or(f64::NAN);
    v.compare(&chosen.last_value, &chosen.target);
    let mut status_ok = holding.len() == 1;
    if curves.len() == 1 {
        status_ok = chosen.holds(threshold);
    }
    let verdict = match holding.len() {
        0 => "verdict: no candidate converges below the threshold".to_string(),
        1 => format!("verdict: {} holds", holding[0].label),
        _ => "verdict: ambiguous, several candidates converge".to_string(),
    };
    let curves_txt: Vec<String> = curves.iter().map(|c| c.describe(ts)).collect();
    let note = format!("{verdict}; threshold={}; final error {}; {}", fmt_e(threshold), fmt_e(final_err), curves_txt.join("; "));
    let mut r = v.report(id, params, chosen.last_value.clone(), chosen.target.clone(), terms, PrintedStatus::NOT_APPLICABLE, note);
    r.status = if status_ok { super::Status::PASS } else { super::Status::FAIL };
    r
}

fn kummer_limit(p: &Params, ts: &[u32], params: BTreeMap<String, String>, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let m = p.u64_or("m", None)?;
    let j = p.u64_or("j", None)?;
    let lam = p.real_or("lambda", 1.0)?;
    let threshold = p.real_or("threshold", 1e-3)?.to_f64();
    let lam2 = &lam * &lam;
    let target = kummer_1f1(&Real::from_i64(-(m as i64)), &Real::from_u64(1 + j), &Cx::real(lam2.clone()), ctx)?.value;
    let mut errors = Vec::new();
    let mut last = Cx::zero();
    let mut terms = 0;
    for &t in ts {
        let q = QParam::one_minus_pow2(t);
        let v = q_kummer(
            &QKummerArgs::terminating(m, Cx::real(q.pow(1 + j as i64)), Cx::real(q.pow((1 + j + m) as i64) * &lam2)),
            &q,
            ctx,
        )?;
        terms += v.terms_used;
        errors.push(rel(&v.value, &target));
        last = v.value;
    }
    let curve = Curve { label: "1F1(-m;1+j;λ²)".into(), errors, last_value: last, target };
    Ok(finish(IdentityId::LimitQTo1Kummer, &[curve], ts, threshold, params, terms, ctx))
}

fn plane_limit(p: &Params, ts: &[u32], params: BTreeMap<String, String>, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let j = p.i64_or("j", None)?;
    let lam = p.real_or("lambda", 1.0)?;
    let r = p.real_or("r", 1.0)?;
    let threshold = p.real_or("threshold", 1e-2)?.to_f64();
    let arg = &lam * &r;
    let t1 = bessel_j(j, &Cx::real(arg.clone()), ctx)?.value;
    let t2 = bessel_j(j, &Cx::real(&arg * Real::from_i64(2)), ctx)?.value;
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    let mut last = Cx::zero();
    let mut terms = 0;
    for &t in ts {
        let q = QParam::one_minus_pow2(t);
        let v = q_bessel(j, &Cx::real(arg.clone()), &q, ctx)?;
        terms += v.terms_used;
        e1.push(rel(&v.value, &t1));
        e2.push(rel(&v.value, &t2));
        last = v.value;
    }
    let curves = [
        Curve { label: "J_j(λr)".into(), errors: e1, last_value: last.clone(), target: t1 },
        Curve { label: "J_j(2λr)".into(), errors: e2, last_value: last, target: t2 },
    ];
    Ok(finish(IdentityId::LimitQTo1Plane, &curves, ts, threshold, params, terms, ctx))
}

/// σ^{−j/2} f^{√σ λ}_j(ζ) x^{j/2} q^{−j(j−1)/4} for ζ = 1 − (1−q) s x / σ.
fn sigma_value(j: u64, lam: &Real, x: &Real, sigma: &Real, scale: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<(Cx, usize)> {
    let zeta = Real::one() - (Real::one() - q.real()) * scale * x / sigma;
    let f = f_weight_real(j, &(lam * sigma.sqrt()), &ZetaPoint::value(zeta)?, q, ctx)?;
    let ji = j as i64;
    let c = sigma.sqrt().powi(-ji) * x.sqrt().powi(ji) * q.pow_quarter(-ji * (ji - 1));
    Ok((f.value.scale_by(&c), f.terms_used))
}

fn sigma_limit(p: &Params, ts: &[u32], params: BTreeMap<String, String>, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let j = p.u64_or("j", None)?;
    let w = p.weight()?;
    let x = p.real("x")?;
    let q = p.q()?;
    let threshold = p.real_or("threshold", 1e-2)?.to_f64();
    let lam = w.real();
    let target = t_elem(j as i64, 0, &w, &x, &q, ctx)?;
    let consistent = q.pow(-(j as i64));
    let naive = Real::one();
    let mut curves = Vec::new();
    let mut terms = 0;
    let mut candidates = vec![("ζ = 1 − (1−q) q^{-j} x/σ", &consistent)];
    // at j = 0 the two evaluation points coincide
    if j > 0 {
        candidates.push(("ζ = 1 − (1−q) x/σ", &naive));
    }
    for (label, scale) in candidates {
        let mut errors = Vec::new();
        let mut last = Cx::zero();
        for &t in ts {
            let sigma = Real::from_f64(2f64.powi(-(t as i32)));
            let (v, n) = sigma_value(j, &lam, &x, &sigma, scale, &q, ctx)?;
            terms += n;
            errors.push(rel(&v, &target));
            last = v;
        }
        curves.push(Curve { label: label.into(), errors, last_value: last, target: target.clone() });
    }
    Ok(finish(IdentityId::LimitSigmaTo0, &curves, ts, threshold, params, terms, ctx))
}

