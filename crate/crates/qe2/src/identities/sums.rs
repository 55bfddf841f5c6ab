//! The sandwich identities between U, D^λ and t^λ, evaluated as scalar
//! coefficients on a charge state |x⟩ and cross-checked by the oracle.
//!
//! As operators they read
//! `U D_j U† = δ(D_j)`, `δ(D_j) U = U D_j` and `U† δ(D_j) U = D_j`,
//! where δ(D_j) = Σ_k t_{jk} D_k.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::Result;
use crate::qalgebra::nopoly::{expand_d_poly, DNormalization, DPoly};
use crate::qalgebra::oracle::{oracle_degree_cutoff, svec_dot, unit, ShiftOracle};
use crate::qcore::{Cx, PrecisionCtx, QParam, Real};
use crate::repmatrix::{d_elem, ChargeFrame, RepWeight, TForm};

use super::{fmt_cx, fmt_e, sum_s, IdentityId, IdentityReport, PrintedStatus, Verdict};

/// Fock cutoff of the oracle unless a caller asks otherwise.
pub const ORACLE_N_DEFAULT: u32 = 24;

/// Both sides of an identity from the closed forms and from the oracle, as
/// coefficients of |x q^shift⟩ in the image of |n, x⟩.
pub(crate) struct SumEval {
    pub lhs: Cx,
    pub rhs: Cx,
    pub lhs_oracle: Cx,
    pub rhs_oracle: Cx,
    pub shift: i64,
    pub terms: usize,
    pub converged: bool,
}

fn d_poly(j: i64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<DPoly> {
    let cutoff = oracle_degree_cutoff(j, q, ctx).max(2 * n_max + j.unsigned_abs() as u32);
    expand_d_poly(j, w, cutoff, q, DNormalization::Printed)
}

fn pick(v: &crate::qalgebra::SVec, m: u64, c: i64) -> Cx {
    v.get(&(m as u32, c)).cloned().unwrap_or_else(Cx::zero)
}

/// `Σ_{b−a=j} (D_j)_{ab} U_{ma} U*_{bn}` against `(D_{n−m})_{mn} t_{j,n−m}`.
pub(crate) fn eval_sum_two(x0: &Real, j: i64, m: u64, n: u64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<SumEval> {
    let _g = ctx.enter();
    let fr = ChargeFrame::new(x0.clone(), q, ctx);
    let ja = j.unsigned_abs();
    let lhs = sum_s(ctx, (m + n + ja) as usize + 2, |s| {
        let s = s as u64;
        let (a, b) = if j >= 0 { (s, s + ja) } else { (s + ja, s) };
        let d = d_elem(j, w, a, b, q, ctx)?;
        if d.value.is_zero() {
            return Ok((Cx::zero(), d.converged));
        }
        let ud = fr.u_dag(0, b, n)?;
        let u = fr.u(ud.shift, m, a)?;
        Ok((d.value * u.coeff * ud.coeff, d.converged && u.converged && ud.converged))
    })?;
    let k = n as i64 - m as i64;
    let d = d_elem(k, w, m, n, q, ctx)?;
    let t = fr.t(0, j, k, w, TForm::Bessel)?;
    let rhs = d.value.clone() * t.coeff;
    let shift = m as i64 - n as i64 - j;

    let oracle = ShiftOracle::new(n_max, x0.clone(), q, ctx);
    let dp = d_poly(j, w, q, n_max, ctx)?.terms_cx(q);
    let v = oracle.apply_u_dag(&unit(n as u32, 0))?;
    let lhs_oracle = pick(&oracle.apply_u(&oracle.apply_fock_terms(&dp, &v))?, m, shift);
    let rhs_oracle = pick(&oracle.apply_delta_terms(&dp, &unit(n as u32, 0)), m, shift);
    Ok(SumEval {
        lhs: lhs.value,
        rhs,
        lhs_oracle,
        rhs_oracle,
        shift,
        terms: lhs.terms,
        converged: lhs.converged && d.converged && t.converged,
    })
}

/// `Σ_s t_{j,s−m} (D_{s−m})_{ms} U_{sn}` against `(D_j)_{n−j,n} U_{m,n−j}` (zero for n < j).
pub(crate) fn eval_sum_three(x0: &Real, j: i64, m: u64, n: u64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<SumEval> {
    let _g = ctx.enter();
    let fr = ChargeFrame::new(x0.clone(), q, ctx);
    let lhs = sum_s(ctx, (m + n + j.unsigned_abs()) as usize + 2, |s| {
        let s = s as u64;
        let k = s as i64 - m as i64;
        let d = d_elem(k, w, m, s, q, ctx)?;
        if d.value.is_zero() {
            return Ok((Cx::zero(), d.converged));
        }
        let u = fr.u(0, s, n)?;
        let t = fr.t(u.shift, j, k, w, TForm::Bessel)?;
        Ok((t.coeff * d.value * u.coeff, d.converged && u.converged && t.converged))
    })?;
    let mut converged = lhs.converged;
    let rhs = if n as i64 >= j {
        let a = (n as i64 - j) as u64;
        let d = d_elem(j, w, a, n, q, ctx)?;
        let u = fr.u(0, m, a)?;
        converged &= d.converged && u.converged;
        d.value * u.coeff
    } else {
        Cx::zero()
    };
    let shift = (m + n) as i64 - j;

    let oracle = ShiftOracle::new(n_max, x0.clone(), q, ctx);
    let dp = d_poly(j, w, q, n_max, ctx)?.terms_cx(q);
    let col = oracle.column(n as u32, 0)?;
    let lhs_oracle = pick(&oracle.apply_delta_terms(&dp, &col), m, shift);
    let rhs_oracle = pick(&oracle.apply_u(&oracle.apply_fock_terms(&dp, &unit(n as u32, 0)))?, m, shift);
    Ok(SumEval { lhs: lhs.value, rhs, lhs_oracle, rhs_oracle, shift, terms: lhs.terms, converged })
}

/// `Σ_{s,l} t_{j,l−s} (D_{l−s})_{sl} U*_{ms} U_{ln}` against `(D_j)_{mn} δ_{j,n−m}`.
pub(crate) fn eval_sum_four(x0: &Real, j: i64, m: u64, n: u64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<SumEval> {
    let _g = ctx.enter();
    let fr = ChargeFrame::new(x0.clone(), q, ctx);
    let min = (m + n + j.unsigned_abs()) as usize + 2;
    let mut total = 0usize;
    let lhs = sum_s(ctx, min, |s| {
        let s = s as u64;
        // l runs s, s+1, s−1, s+2, ... so the band |l − s| small comes first
        let inner = sum_s(ctx, min, |i| {
            let (i, s) = (i as u64, s);
            let l = if i > 2 * s {
                i
            } else if i % 2 == 0 {
                s + i / 2
            } else {
                s - (i + 1) / 2
            };
            let k = l as i64 - s as i64;
            let d = d_elem(k, w, s, l, q, ctx)?;
            if d.value.is_zero() {
                return Ok((Cx::zero(), d.converged));
            }
            let u = fr.u(0, l, n)?;
            let t = fr.t(u.shift, j, k, w, TForm::Bessel)?;
            let ud = fr.u_dag(u.shift + t.shift, m, s)?;
            Ok((t.coeff * d.value * ud.coeff * u.coeff, d.converged && u.converged && ud.converged && t.converged))
        })?;
        total += inner.terms;
        Ok((inner.value, inner.converged))
    })?;
    let shift = n as i64 - m as i64 - j;
    let mut converged = lhs.converged;
    let rhs = if shift == 0 {
        let d = d_elem(j, w, m, n, q, ctx)?;
        converged &= d.converged;
        d.value
    } else {
        Cx::zero()
    };

    let oracle = ShiftOracle::new(n_max, x0.clone(), q, ctx);
    let dpoly = d_poly(j, w, q, n_max, ctx)?;
    let dp = dpoly.terms_cx(q);
    let col = oracle.column(n as u32, 0)?;
    let image = oracle.apply_delta_terms(&dp, &col);
    let col_m = oracle.column(m as u32, shift)?;
    let lhs_oracle = svec_dot(&col_m, &image);
    let rhs_oracle = if shift == 0 { dpoly.matrix_element(m, n, q) } else { Cx::zero() };
    Ok(SumEval { lhs: lhs.value, rhs, lhs_oracle, rhs_oracle, shift, terms: total, converged })
}

/// Judges an evaluation: closed LHS vs closed RHS, and each closed side
/// against its oracle counterpart.
pub(crate) fn judge(e: &SumEval, ctx: &PrecisionCtx) -> (Verdict, String) {
    let mut v = Verdict::new(ctx);
    v.converged(e.converged);
    let r_main = v.compare(&e.lhs, &e.rhs);
    let r_lo = v.compare(&e.lhs, &e.lhs_oracle);
    let r_ro = v.compare(&e.rhs, &e.rhs_oracle);
    let (_, r_oo) = super::errs(&e.lhs_oracle, &e.rhs_oracle);
    let mut note = format!(
        "charge shift {}; rel(lhs,rhs)={} rel(lhs,oracle)={} rel(rhs,oracle)={} rel(oracle lhs,oracle rhs)={}",
        e.shift,
        fmt_e(r_main),
        fmt_e(r_lo),
        fmt_e(r_ro),
        fmt_e(r_oo.to_f64())
    );
    if !v.passes(&e.lhs, &e.rhs) {
        note.push_str(&format!("; lhs={} rhs={}", fmt_cx(&e.lhs), fmt_cx(&e.rhs)));
        if !e.lhs.is_zero() && !e.rhs.is_zero() {
            let ratio = e.lhs.clone() / e.rhs.clone();
            note.push_str(&format!(" ratio={}", fmt_cx(&ratio)));
        }
    }
    if !e.converged {
        note.push_str("; a constituent series did not converge");
    }
    (v, note)
}

fn base_params(j: i64, m: u64, n: u64, jw: i64, w: &RepWeight, q: &QParam, n_max: u32) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("q".into(), q.label());
    p.insert("lambda".into(), w.exact().to_string());
    p.insert("j".into(), j.to_string());
    p.insert("m".into(), m.to_string());
    p.insert("n".into(), n.to_string());
    p.insert("jw".into(), jw.to_string());
    p.insert("N".into(), n_max.to_string());
    p
}

fn report(id: IdentityId, e: &SumEval, params: BTreeMap<String, String>, ctx: &PrecisionCtx) -> IdentityReport {
    let (v, note) = judge(e, ctx);
    v.report(id, params, e.lhs.clone(), e.rhs.clone(), e.terms, PrintedStatus::NOT_APPLICABLE, note)
}

/// ⟨(m, i)| Σ_s (D_j)_{s,s+j} U_{ms} U*_{s+j,n} |(n, jw)⟩ and its RHS. Without
/// `i` the row charge allowed by the selection rule is used.
#[allow(clippy::too_many_arguments)]
pub fn verify_sum_two(
    j: i64,
    m: u64,
    n: u64,
    i: Option<i64>,
    jw: i64,
    w: &RepWeight,
    q: &QParam,
    n_max: u32,
    ctx: &PrecisionCtx,
) -> Result<IdentityReport> {
    let _g = ctx.enter();
    let mut params = base_params(j, m, n, jw, w, q, n_max);
    let row = jw + m as i64 - n as i64 - j;
    params.insert("i".into(), i.unwrap_or(row).to_string());
    if let Some(i) = i {
        if i != row {
            let v = Verdict::new(ctx);
            return Ok(v.report(
                IdentityId::SumTwo,
                params,
                Cx::zero(),
                Cx::zero(),
                0,
                PrintedStatus::NOT_APPLICABLE,
                format!("charge selection rule: both sides vanish unless i = {row}"),
            ));
        }
    }
    let e = eval_sum_two(&q.pow(jw), j, m, n, w, q, n_max, ctx)?;
    Ok(report(IdentityId::SumTwo, &e, params, ctx))
}

#[allow(clippy::too_many_arguments)]
pub fn verify_sum_three(j: i64, m: u64, n: u64, jw: i64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let _g = ctx.enter();
    let e = eval_sum_three(&q.pow(jw), j, m, n, w, q, n_max, ctx)?;
    Ok(report(IdentityId::SumThree, &e, base_params(j, m, n, jw, w, q, n_max), ctx))
}

#[allow(clippy::too_many_arguments)]
pub fn verify_sum_four(j: i64, m: u64, n: u64, jw: i64, w: &RepWeight, q: &QParam, n_max: u32, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    let _g = ctx.enter();
    let e = eval_sum_four(&q.pow(jw), j, m, n, w, q, n_max, ctx)?;
    Ok(report(IdentityId::SumFour, &e, base_params(j, m, n, jw, w, q, n_max), ctx))
}
