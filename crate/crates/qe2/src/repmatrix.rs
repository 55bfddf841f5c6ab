//! Closed-form representation data: the weight function f^λ_j, Φ_mn, and the
//! matrix elements of D^λ_j, U and t^λ_ij.
//!
//! Operators in the charge factor are evaluated on states |x⟩ with η² = x.
//! `B|x⟩ = √x |x/q⟩`, `B*|x⟩ = √(qx) |qx⟩` and `A`, `V` shift with unit
//! coefficient, so a word in these operators maps |x⟩ to a multiple of
//! |x q^shift⟩. [`ChargeTerm`] carries that multiple and the shift.
//! On the lattice η² = q^j the shift is the change of the charge index j.

use std::cell::RefCell;
use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::exact::{parse_rational, rat_to_f64};
use crate::qcore::{
    q_exp, q_factorial, Cx, CxExt, PrecisionCtx, QParam, Real, SeriesResult,
};
use crate::qspecial::{q_bessel, q_kummer, q_laguerre, QKummerArgs};

/// Representation weight λ. Zero is the trivial representation and must be
/// requested explicitly through [`RepWeight::trivial`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepWeight {
    lambda: BigRational,
}

impl RepWeight {
    pub fn new(lambda: BigRational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::InvalidParam(
                "lambda = 0 is the trivial representation; use RepWeight::trivial".into(),
            ));
        }
        Ok(RepWeight { lambda })
    }

    pub fn trivial() -> Self {
        RepWeight { lambda: BigRational::zero() }
    }

    /// Parses λ; `0` is accepted here and yields the trivial weight.
    pub fn parse(s: &str) -> Result<Self> {
        let r = parse_rational(s).ok_or_else(|| Error::InvalidParam(format!("bad lambda: {s}")))?;
        if r.is_zero() {
            Ok(RepWeight::trivial())
        } else {
            RepWeight::new(r)
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.lambda.is_zero()
    }

    pub fn exact(&self) -> &BigRational {
        &self.lambda
    }

    pub fn real(&self) -> Real {
        Real::from_ratio(&self.lambda)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.lambda)
    }
}

/// Argument of f^λ_j. `Fock(m)` is the eigenvalue q^m of ζ on |m⟩, which
/// makes the defining series terminate.
#[derive(Clone, Debug)]
pub enum ZetaPoint {
    Fock(u64),
    Value(Real),
}

impl ZetaPoint {
    pub fn value(z: Real) -> Result<Self> {
        if z.is_zero() {
            return Err(Error::InvalidParam("zeta must be nonzero".into()));
        }
        Ok(ZetaPoint::Value(z))
    }

    pub fn real(&self, q: &QParam) -> Real {
        match self {
            ZetaPoint::Fock(m) => q.pow(*m as i64),
            ZetaPoint::Value(z) => z.clone(),
        }
    }
}

/// Which of the equivalent printed forms of t^λ_ij to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TForm {
    /// q-Bessel form with the prefactor (i q^{1/4})^{|i-j|} in both branches.
    Bessel,
    /// The q-Kummer form of the matrix elements.
    Kummer,
    /// q-Bessel form exactly as displayed: (i q^{-1/4})^{j-i} when j > i.
    PrintedBessel,
}

/// `|x⟩ ↦ coeff |x q^shift⟩`.
#[derive(Clone, Debug)]
pub struct ChargeTerm {
    pub shift: i64,
    pub coeff: Cx,
    pub terms_used: usize,
    pub converged: bool,
}

impl ChargeTerm {
    fn from_series(shift: i64, s: SeriesResult, factor: Cx) -> Self {
        ChargeTerm {
            shift,
            coeff: s.value * factor,
            terms_used: s.terms_used,
            converged: s.converged,
        }
    }
}

pub fn f_weight(j: u64, w: &RepWeight, zeta: &ZetaPoint, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    f_weight_real(j, &w.real(), zeta, q, ctx)
}

/// f^λ_j for a real weight that need not be rational.
pub fn f_weight_real(j: u64, lam: &Real, zeta: &ZetaPoint, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let lam = lam.clone();
    let pre = Cx::i_pow(j as i64).scale_by(
        &(q.pow_quarter((j * j) as i64) * lam.powi(j as i64) / q_factorial(j, q)),
    );
    if lam.is_zero() && j > 0 {
        return Ok(SeriesResult::exact(Cx::zero(), 0));
    }
    let z = zeta.real(q);
    if z.is_zero() {
        return Err(Error::InvalidParam("zeta must be nonzero".into()));
    }
    let b = Cx::real(q.pow(j as i64 + 1));
    let x = Cx::real(q.pow(j as i64 + 1) * &lam * &lam * &z);
    let args = match zeta {
        ZetaPoint::Fock(m) => QKummerArgs::terminating(*m, b, x),
        ZetaPoint::Value(_) => QKummerArgs::new(Cx::real(Real::one() / &z), b, x),
    };
    Ok(q_kummer(&args, q, ctx)?.map(|v| v * pre))
}

/// Φ_mn(η) at η² = x through the q-Kummer series.
pub fn phi_mn(m: u64, n: u64, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    if n < m {
        return Err(Error::InvalidParam(format!("phi_mn needs n >= m, got m={m} n={n}")));
    }
    let _g = ctx.enter();
    let e = q_exp(&Cx::real(-x), q, ctx)?;
    phi_mn_with(m, n, x, &e.value.re.sqrt(), q, ctx).map(|r| e.merge_meta(&r, r.value.clone()))
}

fn phi_mn_with(m: u64, n: u64, x: &Real, sqrt_e: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let pre = (q_factorial(n, q) / q_factorial(m, q)).sqrt() * sqrt_e / q_factorial(n - m, q);
    let args = QKummerArgs::terminating(
        m,
        Cx::real(q.pow((1 + n - m) as i64)),
        Cx::real(q.pow(n as i64 + 1) * x),
    );
    Ok(q_kummer(&args, q, ctx)?.map(|v| v.scale_by(&pre)))
}

/// Φ_mn through the Moak q-Laguerre form `√(e_q^{-x} (m)!/(n)!) L^{q(n-m)}_m(x)`.
pub fn phi_mn_laguerre(m: u64, n: u64, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    if n < m {
        return Err(Error::InvalidParam(format!("phi_mn needs n >= m, got m={m} n={n}")));
    }
    let _g = ctx.enter();
    let e = q_exp(&Cx::real(-x), q, ctx)?;
    let pre = (e.value.re.clone() * q_factorial(m, q) / q_factorial(n, q)).sqrt();
    let l = q_laguerre(m, (n - m) as i64, &Cx::real(x.clone()), q, ctx)?;
    Ok(e.merge_meta(&l, l.value.scale_by(&pre)))
}

/// (D^λ_j)_{mn} = √((n)!/(m)!) f^λ_j(q^m) δ_{j,n-m} for j ≥ 0, and
/// (D^λ_{-j})_{mn} = (D^λ_j)_{nm}.
pub fn d_elem(j: i64, w: &RepWeight, m: u64, n: u64, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    if j < 0 {
        return d_elem(-j, w, n, m, q, ctx);
    }
    if n as i64 - m as i64 != j {
        return Ok(SeriesResult::exact(Cx::zero(), 0));
    }
    let _g = ctx.enter();
    let f = f_weight(j as u64, w, &ZetaPoint::Fock(m), q, ctx)?;
    let r = (q_factorial(n, q) / q_factorial(m, q)).sqrt();
    Ok(f.map(|v| v.scale_by(&r)))
}

/// f^λ_j at the continuous point ζ = 1 − (1−q)x.
pub fn d_scalar(j: u64, w: &RepWeight, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let _g = ctx.enter();
    let zeta = Real::one() - (Real::one() - q.real()) * x;
    f_weight(j, w, &ZetaPoint::value(zeta)?, q, ctx)
}

/// Evaluates charge-operator words on states |x0 q^k⟩, caching the
/// expensive pieces by lattice offset `k`.
pub struct ChargeFrame<'a> {
    q: &'a QParam,
    ctx: &'a PrecisionCtx,
    x0: Real,
    qr: Real,
    sqrt_e: RefCell<HashMap<i64, Real>>,
    u_cache: RefCell<HashMap<(i64, u64, u64), ChargeTerm>>,
    t_cache: RefCell<HashMap<(i64, i64, i64, TForm), ChargeTerm>>,
}

impl<'a> ChargeFrame<'a> {
    pub fn new(x0: Real, q: &'a QParam, ctx: &'a PrecisionCtx) -> Self {
        ChargeFrame {
            q,
            ctx,
            x0,
            qr: q.real(),
            sqrt_e: RefCell::new(HashMap::new()),
            u_cache: RefCell::new(HashMap::new()),
            t_cache: RefCell::new(HashMap::new()),
        }
    }

    /// Frame on the lattice η² = q^j, offset 0 being j = 0.
    pub fn lattice(q: &'a QParam, ctx: &'a PrecisionCtx) -> Self {
        ChargeFrame::new(Real::one(), q, ctx)
    }

    pub fn x(&self, k: i64) -> Real {
        &self.x0 * self.qr.powi(k)
    }

    fn sqrt_eq(&self, k: i64) -> Result<Real> {
        if let Some(v) = self.sqrt_e.borrow().get(&k) {
            return Ok(v.clone());
        }
        let e = q_exp(&Cx::real(-self.x(k)), self.q, self.ctx)?;
        let v = e.value.re.sqrt();
        self.sqrt_e.borrow_mut().insert(k, v.clone());
        Ok(v)
    }

    /// U_mn applied to the state at offset `k`.
    pub fn u(&self, k: i64, m: u64, n: u64) -> Result<ChargeTerm> {
        if let Some(t) = self.u_cache.borrow().get(&(k, m, n)) {
            return Ok(t.clone());
        }
        let _g = self.ctx.enter();
        let x = self.x(k);
        let se = self.sqrt_eq(k)?;
        let shift = (m + n) as i64;
        let t = if n >= m {
            // A^{-m} B*^{n-m} Φ_mn(η): B*^d on |x⟩ gives x^{d/2} q^{d(d+1)/4}
            let d = (n - m) as i64;
            let phi = phi_mn_with(m, n, &x, &se, self.q, self.ctx)?;
            let c = x.sqrt().powi(d) * self.q.pow_quarter(d * (d + 1));
            ChargeTerm::from_series(shift, phi, Cx::real(c))
        } else {
            // q^{d(d-1)/2} A^{-m} (-B)^d Φ_nm(η): B^d on |x⟩ gives x^{d/2} q^{-d(d-1)/4}
            let d = (m - n) as i64;
            let phi = phi_mn_with(n, m, &x, &se, self.q, self.ctx)?;
            let sign = if d % 2 == 1 { -Real::one() } else { Real::one() };
            let c = sign * self.q.pow_quarter(2 * d * (d - 1) - d * (d - 1)) * x.sqrt().powi(d);
            ChargeTerm::from_series(shift, phi, Cx::real(c))
        };
        self.u_cache.borrow_mut().insert((k, m, n), t.clone());
        Ok(t)
    }

    /// (U*)_mn = (U_nm)† applied to the state at offset `k`.
    pub fn u_dag(&self, k: i64, m: u64, n: u64) -> Result<ChargeTerm> {
        let shift = (m + n) as i64;
        let mut t = self.u(k - shift, n, m)?;
        t.coeff = t.coeff.conj();
        t.shift = -shift;
        Ok(t)
    }

    /// t^λ_{rc} applied to the state at offset `k`.
    pub fn t(&self, k: i64, r: i64, c: i64, w: &RepWeight, form: TForm) -> Result<ChargeTerm> {
        let key = (k, r, c, form);
        if let Some(t) = self.t_cache.borrow().get(&key) {
            return Ok(t.clone());
        }
        let _g = self.ctx.enter();
        let x = self.x(k);
        let t = t_radial(r, c, w, &x, self.q, self.ctx, form)?;
        self.t_cache.borrow_mut().insert(key, t.clone());
        Ok(t)
    }
}

fn t_radial(r: i64, c: i64, w: &RepWeight, x: &Real, q: &QParam, ctx: &PrecisionCtx, form: TForm) -> Result<ChargeTerm> {
    let shift = -(r + c);
    let d = (r - c).abs();
    let lam = w.real();
    let eta = x.sqrt();
    match form {
        TForm::Bessel | TForm::PrintedBessel => {
            // J^q_d(q^{-min(r,c)/2} λ η)
            let low = r.min(c);
            let arg = q.pow_quarter(-2 * low) * &lam * &eta;
            let quarter = if form == TForm::PrintedBessel && c > r { -d } else { d };
            let pre = Cx::i_pow(d).scale_by(&q.pow_quarter(quarter));
            let j = q_bessel(d, &Cx::real(arg), q, ctx)?;
            Ok(ChargeTerm::from_series(shift, j, pre))
        }
        TForm::Kummer => {
            let low = r.min(c);
            let phi_x = (q.real() - Real::one()) * q.pow(1 - low) * &lam * &lam * x;
            let args = QKummerArgs::new(Cx::zero(), Cx::real(q.pow(1 + d)), Cx::real(phi_x));
            let phi = q_kummer(&args, q, ctx)?;
            // quarter-power exponent of q collected from the prefactor and the shifts
            let quarter = if r >= c {
                // (iλB)^d A^c: B^d acts on x q^{-2c}
                r * r - c * c - 4 * c * d - d * (d - 1)
            } else {
                // A^c (iλB*)^d: B*^d acts on x
                r * r - c * c + d * (d + 1)
            };
            let mag = q.pow_quarter(quarter) * lam.powi(d) * eta.powi(d) / q_factorial(d as u64, q);
            Ok(ChargeTerm::from_series(shift, phi, Cx::i_pow(d).scale_by(&mag)))
        }
    }
}

/// ⟨(m,i)| U |(n,jw)⟩ on the charge lattice η² = q^{jw}.
pub fn u_elem(m: u64, i: i64, n: u64, jw: i64, q: &QParam, ctx: &PrecisionCtx) -> Result<Cx> {
    let _g = ctx.enter();
    if i != jw + (m + n) as i64 {
        return Ok(Cx::zero());
    }
    let frame = ChargeFrame::lattice(q, ctx);
    Ok(frame.u(jw, m, n)?.coeff)
}

/// Radial part of t^λ_{i,jcol} at η² = x (q-Bessel form); the V and A
/// factors are unit charge shifts and are left to the caller.
pub fn t_elem(i: i64, jcol: i64, w: &RepWeight, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<Cx> {
    let _g = ctx.enter();
    Ok(t_radial(i, jcol, w, x, q, ctx, TForm::Bessel)?.coeff)
}

/// The same element through the q-Kummer form.
pub fn t_elem_kummer(i: i64, jcol: i64, w: &RepWeight, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<Cx> {
    let _g = ctx.enter();
    Ok(t_radial(i, jcol, w, x, q, ctx, TForm::Kummer)?.coeff)
}

/// The q-Bessel form with the displayed prefactor (i q^{-1/4})^{jcol-i} for jcol > i.
pub fn t_elem_printed_bessel(i: i64, jcol: i64, w: &RepWeight, x: &Real, q: &QParam, ctx: &PrecisionCtx) -> Result<Cx> {
    let _g = ctx.enter();
    Ok(t_radial(i, jcol, w, x, q, ctx, TForm::PrintedBessel)?.coeff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn close(a: &Cx, b: &Cx, tol: f64) -> bool {
        (a.clone() - b.clone()).abs() <= Real::from_f64(tol) * (Real::one() + b.abs())
    }

    #[test]
    fn weight_trivial_values() {
        let _g = ctx().enter();
        let q = QParam::parse("0.5").unwrap();
        let w = RepWeight::parse("0.7").unwrap();
        let f = f_weight(0, &w, &ZetaPoint::Fock(0), &q, &ctx()).unwrap();
        assert!(close(&f.value, &Cx::one(), 1e-45));
        let f = f_weight(2, &RepWeight::trivial(), &ZetaPoint::Fock(1), &q, &ctx()).unwrap();
        assert!(f.value.abs().is_zero());
        assert!(RepWeight::new(BigRational::zero()).is_err());
    }

    #[test]
    fn phi_mn_special_values() {
        let _g = ctx().enter();
        let q = QParam::parse("0.5").unwrap();
        let p = phi_mn(1, 3, &Real::zero(), &q, &ctx()).unwrap();
        let want = (q_factorial(3, &q) / q_factorial(1, &q)).sqrt() / q_factorial(2, &q);
        assert!(close(&p.value, &Cx::real(want), 1e-45));
        let x = Real::from_f64(0.4);
        let a = phi_mn(2, 2, &x, &q, &ctx()).unwrap();
        let b = phi_mn_laguerre(2, 2, &x, &q, &ctx()).unwrap();
        assert!(close(&a.value, &b.value, 1e-40));
    }

    #[test]
    fn d_elem_selection_and_transpose() {
        let _g = ctx().enter();
        let q = QParam::parse("0.5").unwrap();
        let w = RepWeight::parse("0.5").unwrap();
        assert!(d_elem(1, &w, 0, 0, &q, &ctx()).unwrap().value.abs().is_zero());
        assert!(close(&d_elem(0, &w, 0, 0, &q, &ctx()).unwrap().value, &Cx::one(), 1e-45));
        let a = d_elem(-2, &w, 3, 1, &q, &ctx()).unwrap().value;
        let b = d_elem(2, &w, 1, 3, &q, &ctx()).unwrap().value;
        assert!(close(&a, &b, 1e-45) && !a.abs().is_zero());
    }

    #[test]
    fn u_elem_ground_entry() {
        let _g = ctx().enter();
        let q = QParam::parse("0.5").unwrap();
        for jw in [-2i64, 0, 3] {
            let v = u_elem(0, jw, 0, jw, &q, &ctx()).unwrap();
            let e = q_exp(&Cx::real(-q.pow(jw)), &q, &ctx()).unwrap().value.re.sqrt();
            assert!(close(&v, &Cx::real(e), 1e-45));
        }
        assert!(u_elem(0, 5, 1, 3, &q, &ctx()).unwrap().abs().is_zero());
        assert!(!u_elem(0, 4, 1, 3, &q, &ctx()).unwrap().abs().is_zero());
    }

    #[test]
    fn t_forms_agree() {
        let _g = ctx().enter();
        let q = QParam::parse("0.5").unwrap();
        let w = RepWeight::parse("0.5").unwrap();
        let x = Real::from_f64(0.3);
        for (i, j) in [(1i64, 0i64), (0, 1), (3, -1), (-2, 2), (2, 2)] {
            let a = t_elem(i, j, &w, &x, &q, &ctx()).unwrap();
            let b = t_elem_kummer(i, j, &w, &x, &q, &ctx()).unwrap();
            assert!(close(&a, &b, 1e-40), "i={i} j={j}");
        }
    }
}
