//! q-numbers, q-factorials, q-Pochhammer symbols and the two q-exponentials,
//! plus the precision context and the adaptive series engine everything else
//! is summed with.
//!
//! Conventions: `(n)_q = (1-q^n)/(1-q)`, `(n)_q! = (1)_q (2)_q ... (n)_q`,
//! `(a;q)_k = (1-a)(1-aq)...(1-aq^{k-1})`,
//! `e_q^x = sum x^k/(k)_q! = 1/((1-q)x;q)_inf` and
//! `e_{1/q}^x = sum q^{k(k-1)/2} x^k/(k)_q! = (-(1-q)x;q)_inf`.

pub mod exact;
pub mod real;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
pub use exact::{parse_rational, GaussRat, QMono, Surd};
pub use real::{Cx, CxExt, PrecisionGuard, Real};

pub const DEFAULT_DIGITS: u32 = 50;
pub const MIN_DIGITS: u32 = 30;
pub const DEFAULT_MAX_TERMS: usize = 500;
pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_ATOL: f64 = 1e-30;

/// Working precision and convergence policy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrecisionCtx {
    pub digits: u32,
    pub max_terms: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx {
            digits: DEFAULT_DIGITS,
            max_terms: DEFAULT_MAX_TERMS,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

impl PrecisionCtx {
    pub fn new(digits: u32, max_terms: usize, rtol: f64, atol: f64) -> Result<Self> {
        let ctx = PrecisionCtx { digits, max_terms, rtol, atol };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_digits(digits: u32) -> Result<Self> {
        PrecisionCtx::new(digits, DEFAULT_MAX_TERMS, DEFAULT_RTOL, DEFAULT_ATOL)
    }

    /// Default context, with `QE2_DIGITS` overriding the digit count.
    pub fn from_env() -> Result<Self> {
        match std::env::var("QE2_DIGITS") {
            Ok(v) => {
                let d = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("QE2_DIGITS={v}")))?;
                PrecisionCtx::with_digits(d)
            }
            Err(_) => Ok(PrecisionCtx::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.digits < MIN_DIGITS {
            return Err(Error::InvalidParam(format!(
                "digits must be >= {MIN_DIGITS}, got {}",
                self.digits
            )));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidParam("max_terms must be positive".into()));
        }
        // ten guard digits are reserved below the tolerance
        let floor = 10f64.powi(-(self.digits as i32) + 10);
        if !(self.rtol >= floor * (1.0 - 1e-9)) || !(self.rtol < 1.0) {
            return Err(Error::InvalidParam(format!(
                "rtol {} outside [{floor:e}, 1)",
                self.rtol
            )));
        }
        if !(self.atol >= 0.0) {
            return Err(Error::InvalidParam("atol must be nonnegative".into()));
        }
        Ok(())
    }

    /// Sets the thread's working precision for the guard's lifetime.
    pub fn enter(&self) -> PrecisionGuard {
        real::set_working_bits(real::bits_for_digits(self.digits))
    }

    /// Relative cutoff used inside series summation.
    pub fn series_eps(&self) -> Real {
        Real::from_i64(10).powi(-(self.digits as i64 - 10))
    }

    /// Absolute cutoff used inside series summation, scaled like `series_eps`.
    pub fn series_abs(&self) -> Real {
        self.series_eps() * Real::from_f64(self.atol / self.rtol)
    }

    pub fn rtol_real(&self) -> Real {
        Real::from_f64(self.rtol)
    }

    pub fn atol_real(&self) -> Real {
        Real::from_f64(self.atol)
    }
}

/// The deformation parameter, kept exactly as a rational in (0, 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QParam {
    exact: BigRational,
}

impl QParam {
    pub fn new(q: BigRational) -> Result<Self> {
        if !(q.is_positive() && q < BigRational::one()) {
            return Err(Error::InvalidParam(format!("q must lie in (0,1), got {q}")));
        }
        Ok(QParam { exact: q })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let r = parse_rational(s).ok_or_else(|| Error::InvalidParam(format!("bad q: {s}")))?;
        QParam::new(r)
    }

    pub fn from_f64(q: f64) -> Result<Self> {
        let r = BigRational::from_float(q).ok_or_else(|| Error::InvalidParam(format!("bad q: {q}")))?;
        QParam::new(r)
    }

    /// `1 - 2^-t`.
    pub fn one_minus_pow2(t: u32) -> Self {
        let d = num_bigint::BigInt::one() << t;
        QParam {
            exact: BigRational::new(&d - 1, d),
        }
    }

    pub fn rational(&self) -> &BigRational {
        &self.exact
    }

    pub fn real(&self) -> Real {
        Real::from_ratio(&self.exact)
    }

    pub fn to_f64(&self) -> f64 {
        exact::rat_to_f64(&self.exact)
    }

    /// `q^n` at working precision, any integer `n`.
    pub fn pow(&self, n: i64) -> Real {
        self.real().powi(n)
    }

    /// `q^(n/4)`.
    pub fn pow_quarter(&self, n: i64) -> Real {
        match n.rem_euclid(4) {
            0 => self.pow(n / 4),
            2 => self.pow(n.div_euclid(4)) * self.real().sqrt(),
            _ => self.real().powf(&(Real::from_i64(n) / Real::from_i64(4))),
        }
    }

    pub fn label(&self) -> String {
        if self.exact.denom() == &num_bigint::BigInt::one() {
            self.exact.numer().to_string()
        } else {
            format!("{}/{}", self.exact.numer(), self.exact.denom())
        }
    }
}

/// Outcome of an adaptive sum.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: Cx,
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub converged: bool,
}

impl SeriesResult {
    pub fn exact(value: Cx, terms_used: usize) -> Self {
        SeriesResult { value, terms_used, tail_estimate: 0.0, converged: true }
    }

    /// Combines the bookkeeping of two results that feed one value.
    pub fn merge_meta(&self, other: &SeriesResult, value: Cx) -> SeriesResult {
        SeriesResult {
            value,
            terms_used: self.terms_used + other.terms_used,
            tail_estimate: self.tail_estimate.max(other.tail_estimate),
            converged: self.converged && other.converged,
        }
    }

    pub fn map(self, f: impl FnOnce(Cx) -> Cx) -> SeriesResult {
        SeriesResult { value: f(self.value), ..self }
    }
}

/// Sums `term(0) + term(1) + ...` with the standard stopping rule.
///
/// `term` is called with consecutive indices. With `terminating = Some(n)` the
/// sum runs over `0..=n` exactly. Otherwise it stops once the largest of the
/// last three term magnitudes is below `eps |partial| + abs` and the ratio of
/// the last two nonzero terms is below one.
pub fn sum_series<F>(ctx: &PrecisionCtx, terminating: Option<usize>, mut term: F) -> Result<SeriesResult>
where
    F: FnMut(usize) -> Result<Cx>,
{
    if let Some(n) = terminating {
        let mut acc = Cx::zero();
        for k in 0..=n {
            acc = acc + term(k)?;
        }
        return Ok(SeriesResult::exact(acc, n + 1));
    }
    let eps = ctx.series_eps();
    let abs_floor = ctx.series_abs();
    let mut acc = Cx::zero();
    let mut mags: Vec<Real> = Vec::new();
    for k in 0..ctx.max_terms {
        let t = term(k)?;
        let m = t.abs();
        if !m.is_finite() {
            return Err(Error::NonConvergent(format!("non-finite term at k={k}")));
        }
        acc = acc + t;
        mags.push(m);
        if k < 2 {
            continue;
        }
        let n = mags.len();
        let last3 = mags[n - 3..].iter().cloned().fold(Real::zero(), Real::max);
        let bound = &eps * acc.abs() + &abs_floor;
        if last3 >= bound {
            continue;
        }
        let nz: Vec<&Real> = mags.iter().rev().take(6).filter(|m| !m.is_zero()).collect();
        let ratio = if nz.len() >= 2 { Some(nz[0].clone() / nz[1].clone()) } else { None };
        let tail = match &ratio {
            None => Real::zero(),
            Some(r) if *r < Real::one() => nz[0].clone() * r / (Real::one() - r),
            Some(_) => continue,
        };
        if tail > bound {
            continue;
        }
        return Ok(SeriesResult {
            value: acc,
            terms_used: k + 1,
            tail_estimate: tail.to_f64(),
            converged: true,
        });
    }
    let n = mags.len();
    let tail = mags[n.saturating_sub(3)..].iter().cloned().fold(Real::zero(), Real::max);
    Ok(SeriesResult {
        value: acc,
        terms_used: n,
        tail_estimate: tail.to_f64(),
        converged: false,
    })
}

// ---------------------------------------------------------------------------
// generic q-arithmetic over any field (exact rationals or extended floats)

fn powi_t<T: Clone + num_traits::Num>(q: &T, n: i64) -> T {
    let p = num_traits::pow(q.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        T::one() / p
    } else {
        p
    }
}

pub fn q_number_t<T: Clone + num_traits::Num>(n: i64, q: &T) -> T {
    (T::one() - powi_t(q, n)) / (T::one() - q.clone())
}

pub fn q_factorial_t<T: Clone + num_traits::Num>(n: u64, q: &T) -> T {
    (1..=n as i64).fold(T::one(), |acc, k| acc * q_number_t(k, q))
}

pub fn q_pochhammer_t<T: Clone + num_traits::Num>(a: &T, q: &T, k: u64) -> T {
    let mut acc = T::one();
    let mut qi = T::one();
    for _ in 0..k {
        acc = acc * (T::one() - a.clone() * qi.clone());
        qi = qi * q.clone();
    }
    acc
}

// ---------------------------------------------------------------------------
// public float and exact entry points

pub fn q_number(n: i64, q: &QParam) -> Real {
    q_number_t(n, &q.real())
}

pub fn q_number_exact(n: i64, q: &QParam) -> BigRational {
    q_number_t(n, q.rational())
}

pub fn q_factorial(n: u64, q: &QParam) -> Real {
    q_factorial_t(n, &q.real())
}

pub fn q_factorial_exact(n: u64, q: &QParam) -> BigRational {
    q_factorial_t(n, q.rational())
}

pub fn q_pochhammer(a: &Cx, q: &QParam, k: u64) -> Cx {
    q_pochhammer_t(a, &Cx::real(q.real()), k)
}

pub fn q_pochhammer_exact(a: &GaussRat, q: &QParam, k: u64) -> GaussRat {
    q_pochhammer_t(a, &exact::grat(q.rational().clone()), k)
}

/// `(a;q)_inf`, truncated once `|a q^i|` drops below the series cutoff.
pub fn q_pochhammer_inf(a: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let eps = ctx.series_eps() * Real::from_f64(1e-3);
    let mut acc = Cx::one();
    let mut aqi = a.clone();
    let limit = ctx.max_terms.max(20_000);
    for i in 0..limit {
        let m = aqi.abs();
        if m < eps {
            return Ok(SeriesResult {
                value: acc,
                terms_used: i,
                tail_estimate: (m * Real::from_i64(2)).to_f64(),
                converged: true,
            });
        }
        acc = acc * (Cx::one() - aqi.clone());
        aqi = aqi.scale_by(&qr);
    }
    Err(Error::NonConvergent(format!("(a;q)_inf did not settle in {limit} factors")))
}

/// Detects `x = q^n` for some integer `n` within the series tolerance.
pub fn as_q_power(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Option<i64> {
    if !x.im.abs().is_zero() && x.im.abs() > ctx.series_eps() * x.re.abs() {
        return None;
    }
    if !(x.re > Real::zero()) {
        return None;
    }
    let n = (x.re.ln() / q.real().ln()).round_i64()?;
    let rel = (x.re.clone() / q.pow(n) - Real::one()).abs();
    (rel < ctx.series_eps() * Real::from_i64(1000)).then_some(n)
}

/// `e_q^x`: the power series inside `|(1-q)x| <= 1/2`, the reciprocal product
/// `1/((1-q)x;q)_inf` elsewhere (its analytic continuation).
pub fn q_exp(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let a = x.scale_by(&(Real::one() - q.real()));
    if a.abs() <= Real::from_f64(0.5) {
        q_exp_series(x, q, ctx)
    } else {
        q_exp_product(x, q, ctx)
    }
}

pub fn q_exp_series(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let mut t = Cx::one();
    sum_series(ctx, None, |k| {
        if k > 0 {
            t = (t.clone() * x.clone()).scale_by(&(Real::one() / q_number_t(k as i64, &qr)));
        }
        Ok(t.clone())
    })
}

pub fn q_exp_product(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let a = x.scale_by(&(Real::one() - q.real()));
    // (1-q)x = q^{-i}, i >= 0, is a pole of e_q
    if let Some(n) = as_q_power(&a, q, ctx) {
        if n <= 0 {
            return Err(Error::SingularPoint(format!(
                "e_q^x has a pole at (1-q)x = q^{n}"
            )));
        }
    }
    let p = q_pochhammer_inf(&a, q, ctx)?;
    Ok(p.map(|v| Cx::one() / v))
}

/// `e_{1/q}^x`: series for `Re x >= 0`, product `(-(1-q)x;q)_inf` otherwise.
pub fn q_exp_invbase(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    if x.re.is_negative() {
        q_exp_invbase_product(x, q, ctx)
    } else {
        q_exp_invbase_series(x, q, ctx)
    }
}

pub fn q_exp_invbase_series(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let qr = q.real();
    let mut t = Cx::one();
    let mut qk = Real::one();
    sum_series(ctx, None, |k| {
        if k > 0 {
            // ratio q^{k-1} x / (k)_q
            t = (t.clone() * x.clone()).scale_by(&(qk.clone() / q_number_t(k as i64, &qr)));
            qk = &qk * &qr;
        }
        Ok(t.clone())
    })
}

pub fn q_exp_invbase_product(x: &Cx, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let a = -x.scale_by(&(Real::one() - q.real()));
    q_pochhammer_inf(&a, q, ctx)
}
