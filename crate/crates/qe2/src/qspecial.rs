//! q-Kummer, Hahn-Exton q-Bessel and Moak q-Laguerre functions, with the
//! classical Kummer 1F1 and Bessel J used as limit targets.
//!
//! `Phi^q(a,b;x) = sum_k q^{k(k-1)/2} (a;q)_k / ((q;q)_k (b;q)_k) ((1-q)x)^k`
//! `J^q_k(x) = x^k/(k)_q! Phi^q(0, q^{1+k}; (q-1) q x^2)`
//! `L^{q(a)}_n(x) = (q^{1+a};q)_n/(q;q)_n Phi^q(q^{-n}, q^{1+a}; q^{1+a+n} x)`

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::exact::{grat, rat_pow, GaussRat};
use crate::qcore::{as_q_power, sum_series, Cx, CxExt, PrecisionCtx, QParam, Real, SeriesResult};

/// First parameter of `Phi^q`. `QPowNeg(s)` is `q^{-s}` held exactly, which
/// makes the series terminate after `s + 1` terms.
#[derive(Clone, Debug)]
pub enum KummerA {
    QPowNeg(u64),
    Value(Cx),
}

#[derive(Clone, Debug)]
pub struct QKummerArgs {
    pub a: KummerA,
    pub b: Cx,
    pub x: Cx,
}

impl QKummerArgs {
    pub fn new(a: Cx, b: Cx, x: Cx) -> Self {
        QKummerArgs { a: KummerA::Value(a), b, x }
    }

    pub fn terminating(s: u64, b: Cx, x: Cx) -> Self {
        QKummerArgs { a: KummerA::QPowNeg(s), b, x }
    }
}

/// `Some(s)` when `a = q^{-s}` for an integer `s >= 0`.
fn terminating_index(a: &KummerA, q: &QParam, ctx: &PrecisionCtx) -> Option<u64> {
    match a {
        KummerA::QPowNeg(s) => Some(*s),
        KummerA::Value(v) => match as_q_power(v, q, ctx) {
            Some(n) if n <= 0 => Some((-n) as u64),
            _ => None,
        },
    }
}

fn check_pole(b: &Cx, q: &QParam, ctx: &PrecisionCtx, summed: Option<u64>) -> Result<()> {
    if let Some(n) = as_q_power(b, q, ctx) {
        if n <= 0 {
            let i = (-n) as u64;
            // (b;q)_k vanishes for k > i
            if summed.map_or(true, |s| i < s) {
                return Err(Error::DenominatorPole(format!("b = q^{n} zeroes (b;q)_k for k > {i}")));
            }
        }
    }
    Ok(())
}

pub fn q_kummer(args: &QKummerArgs, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let a = match &args.a {
        KummerA::QPowNeg(s) => Cx::real(q.pow(-(*s as i64))),
        KummerA::Value(v) => v.clone(),
    };
    let term_count = terminating_index(&args.a, q, ctx);
    check_pole(&args.b, q, ctx, term_count)?;
    let y = args.x.scale_by(&(Real::one() - &qr));
    let mut t = Cx::one();
    let mut qk = Real::one();
    let terminal = term_count.map(|s| s as usize);
    sum_series(ctx, terminal, |k| {
        if k > 0 {
            // t_k / t_{k-1} = q^{k-1} (1 - a q^{k-1}) / ((1 - q^k)(1 - b q^{k-1})) (1-q) x
            let num = Cx::one() - a.scale_by(&qk);
            let den = (Cx::one() - args.b.scale_by(&qk)).scale_by(&(Real::one() - &qk * &qr));
            t = t.clone() * num * y.clone() / den;
            t = t.scale_by(&qk);
            qk = &qk * &qr;
        }
        Ok(t.clone())
    })
}

/// Terminating `Phi^q(q^{-s}, b; x)` in exact Gaussian-rational arithmetic.
pub fn q_kummer_exact(s: u64, b: &GaussRat, x: &GaussRat, q: &QParam) -> Result<GaussRat> {
    let qq = q.rational().clone();
    let one = GaussRat::one();
    let mut acc = GaussRat::zero();
    let mut t = GaussRat::one();
    for k in 0..=s {
        if k > 0 {
            let qk1 = grat(rat_pow(&qq, k as i64 - 1));
            let a_term = one.clone() - grat(rat_pow(&qq, -(s as i64))) * qk1.clone();
            let b_term = one.clone() - b.clone() * qk1.clone();
            if b_term.is_zero() {
                return Err(Error::DenominatorPole(format!("(b;q)_{k} = 0")));
            }
            let qq_k = one.clone() - grat(rat_pow(&qq, k as i64));
            t = t * qk1 * a_term * grat(one.re.clone() - qq.clone()) * x.clone() / (qq_k * b_term);
        }
        acc = acc + t.clone();
    }
    Ok(acc)
}

/// Hahn-Exton `J^q_k(x)`, `k >= 0`.
pub fn q_bessel(k: i64, x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    if k < 0 {
        return Err(Error::InvalidParam(format!("q_bessel order must be >= 0, got {k}")));
    }
    let _g = ctx.enter();
    let qr = q.real();
    // direct series sum_m (-1)^m q^{m(m+1)/2} x^{2m+k} / ((q;q)_m (q;q)_{m+k}) (1-q)^{2m+k}
    let fact = crate::qcore::q_factorial(k as u64, q);
    let lead = x.ipow(k) / Cx::real(fact);
    let x2 = x.clone() * x.clone();
    let w = x2.scale_by(&((Real::one() - &qr) * (Real::one() - &qr)));
    let mut t = lead;
    let mut qm = Real::one();
    sum_series(ctx, None, |m| {
        if m > 0 {
            qm = &qm * &qr;
            let den = (Real::one() - &qm) * (Real::one() - &qm * qr.powi(k));
            t = -(t.clone() * w.clone()).scale_by(&(qm.clone() / den));
        }
        Ok(t.clone())
    })
}

/// `J^q_k` through its `Phi^q` composition; an independent path for tests.
pub fn q_bessel_via_kummer(k: i64, x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let b = Cx::real(qr.powi(1 + k));
    let arg = (x.clone() * x.clone()).scale_by(&((&qr - Real::one()) * &qr));
    let phi = q_kummer(&QKummerArgs::new(Cx::zero(), b, arg), q, ctx)?;
    let pre = x.ipow(k) / Cx::real(crate::qcore::q_factorial(k as u64, q));
    Ok(phi.map(|v| v * pre))
}

/// Moak `L^{q(alpha)}_n(x)`. Errors on a denominator pole of the defining
/// `Phi^q` (alpha in -n..=-1); see [`q_laguerre_continued`].
pub fn q_laguerre(n: u64, alpha: i64, x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let b = qr.powi(1 + alpha);
    let pre = crate::qcore::q_pochhammer(&Cx::real(b.clone()), q, n)
        / Cx::real(crate::qcore::q_pochhammer_t(&qr, &qr, n));
    let arg = x.scale_by(&qr.powi(1 + alpha + n as i64));
    let phi = q_kummer(&QKummerArgs::terminating(n, Cx::real(b), arg), q, ctx)?;
    Ok(phi.map(|v| v * pre))
}

/// The polynomial continuation of `L^{q(alpha)}_n` in `q^alpha`, free of
/// poles: `sum_k q^{k(k-1)/2} (q^{-n};q)_k (q^{1+a+k};q)_{n-k} / ((q;q)_n (q;q)_k) ((1-q) q^{1+a+n} x)^k`.
pub fn q_laguerre_continued(n: u64, alpha: i64, x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let y = x.scale_by(&((Real::one() - &qr) * qr.powi(1 + alpha + n as i64)));
    let qqn = crate::qcore::q_pochhammer_t(&qr, &qr, n);
    let mut yk = Cx::one();
    sum_series(ctx, Some(n as usize), |k| {
        let k = k as u64;
        if k > 0 {
            yk = yk.clone() * y.clone();
        }
        let c = qr.powi((k * k.saturating_sub(1) / 2) as i64)
            * crate::qcore::q_pochhammer_t(&qr.powi(-(n as i64)), &qr, k)
            * crate::qcore::q_pochhammer_t(&qr.powi(1 + alpha + k as i64), &qr, n - k)
            / (qqn.clone() * crate::qcore::q_pochhammer_t(&qr, &qr, k));
        Ok(yk.scale_by(&c))
    })
}

/// Classical `1F1(c; d; x)`. Terminates when `c` is a nonpositive integer.
pub fn kummer_1f1(c: &Real, d: &Real, x: &Cx, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let term_count = c.round_i64().filter(|n| *n <= 0 && (Real::from_i64(*n) - c).is_zero());
    if let Some(dn) = d.round_i64() {
        if dn <= 0 && (Real::from_i64(dn) - d).is_zero() {
            let summed = term_count.map(|n| (-n) as i64);
            if summed.map_or(true, |s| -dn < s) {
                return Err(Error::DenominatorPole(format!("d = {dn}")));
            }
        }
    }
    // alternating sums lose about 0.44|x| digits; widen the working precision
    let extra = (x.abs().to_f64() * 0.45).ceil() as u32 + 5;
    let wide = PrecisionCtx { digits: ctx.digits + extra, ..ctx.clone() };
    let _w = wide.enter();
    let mut t = Cx::one();
    let r = sum_series(&wide, term_count.map(|n| (-n) as usize), |k| {
        if k > 0 {
            let km = Real::from_i64(k as i64 - 1);
            let f = (c + &km) / ((d + &km) * Real::from_i64(k as i64));
            t = (t.clone() * x.clone()).scale_by(&f);
        }
        Ok(t.clone())
    })?;
    Ok(r)
}

/// Classical `J_j(x)` for integer `j` (negative orders by `J_{-j} = (-1)^j J_j`).
pub fn bessel_j(j: i64, x: &Cx, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let n = j.unsigned_abs() as i64;
    let extra = (x.abs().to_f64() * 0.45).ceil() as u32 + 5;
    let wide = PrecisionCtx { digits: ctx.digits + extra, ..ctx.clone() };
    let _w = wide.enter();
    let half = x.scale_by(&Real::from_f64(0.5));
    let mut nfact = Real::one();
    for i in 1..=n {
        nfact = nfact * Real::from_i64(i);
    }
    let h2 = half.clone() * half.clone();
    let mut t = half.ipow(n) / Cx::real(nfact);
    let r = sum_series(&wide, None, |k| {
        if k > 0 {
            let k = k as i64;
            t = -(t.clone() * h2.clone()).scale_by(&(Real::one() / Real::from_i64(k * (k + n))));
        }
        Ok(t.clone())
    })?;
    let sign = if j < 0 && n % 2 == 1 { -Real::one() } else { Real::one() };
    Ok(r.map(|v| v.scale_by(&sign)))
}
