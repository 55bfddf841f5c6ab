//! Exact scalars: rationals, Gaussian rationals, surds and q-power monomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use super::real::{Cx, Real};
use crate::error::{Error, Result};

/// Elements of Q(i).
pub type GaussRat = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn grat(re: BigRational) -> GaussRat {
    Complex::new(re, BigRational::zero())
}

pub fn gi() -> GaussRat {
    Complex::new(BigRational::zero(), BigRational::one())
}

/// `r^n` for any integer `n`.
pub fn rat_pow(r: &BigRational, n: i64) -> BigRational {
    let p = Pow::pow(r, n.unsigned_abs() as u32);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn gauss_pow(z: &GaussRat, n: u32) -> GaussRat {
    let mut acc = GaussRat::one();
    for _ in 0..n {
        acc = acc * z.clone();
    }
    acc
}

pub fn gauss_to_cx(z: &GaussRat) -> Cx {
    Complex::new(Real::from_ratio(&z.re), Real::from_ratio(&z.im))
}

/// Parses `p/r`, an integer, or a decimal literal with optional exponent.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut v = BigRational::from_integer(digits) * rat_pow(&ten, scale);
    if neg {
        v = -v;
    }
    Some(v)
}

/// Exact `k`-th root of a nonnegative rational, if it exists.
pub fn rational_root(r: &BigRational, k: u32) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().to_biguint()?;
    let d = r.denom().to_biguint()?;
    let rn = n.nth_root(k);
    let rd = d.nth_root(k);
    if Pow::pow(&rn, k) == n && Pow::pow(&rd, k) == d {
        Some(BigRational::new(rn.into(), rd.into()))
    } else {
        None
    }
}

const TRIAL_LIMIT: u64 = 1 << 20;

/// Splits `n = a^2 b` with `b` squarefree.
fn square_split(n: &BigUint) -> Result<(BigUint, BigUint)> {
    let mut rest = n.clone();
    let mut a = BigUint::one();
    let mut b = BigUint::one();
    let mut p = 2u64;
    while p < TRIAL_LIMIT {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            a *= Pow::pow(&pb, e / 2);
            if e % 2 == 1 {
                b *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > BigUint::one() {
        let s = rest.sqrt();
        if &s * &s == rest {
            a *= s;
        } else if rest >= BigUint::from(TRIAL_LIMIT) * BigUint::from(TRIAL_LIMIT) {
            return Err(Error::ExactModeUnsupported(format!(
                "cannot certify squarefree part of {n}"
            )));
        } else {
            b *= rest;
        }
    }
    Ok((a, b))
}

/// A Q(i)-linear combination of square roots of distinct squarefree integers.
///
/// Canonical: no zero coefficients, keys squarefree. Structural equality is
/// therefore value equality.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<BigUint, GaussRat>,
}

impl Surd {
    pub fn from_gauss(c: GaussRat) -> Self {
        let mut s = Surd::default();
        s.push(BigUint::one(), c);
        s
    }

    pub fn from_rational(r: BigRational) -> Self {
        Surd::from_gauss(grat(r))
    }

    /// `sqrt(r)` for a nonnegative rational `r`.
    pub fn sqrt_of(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::InvalidParam(format!("sqrt of negative rational {r}")));
        }
        if r.is_zero() {
            return Ok(Surd::default());
        }
        // sqrt(n/d) = sqrt(n d) / d
        let n = r.numer().to_biguint().unwrap();
        let d = r.denom().to_biguint().unwrap();
        let (a, b) = square_split(&(&n * &d))?;
        let coeff = BigRational::new(BigInt::from(a), BigInt::from(d));
        let mut s = Surd::default();
        s.push(b, grat(coeff));
        Ok(s)
    }

    fn push(&mut self, radicand: BigUint, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(radicand.clone()).or_insert_with(GaussRat::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn conj(&self) -> Self {
        Surd {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v.conj())).collect(),
        }
    }

    /// The rational part if the value is in Q(i).
    pub fn as_gauss(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn to_cx(&self) -> Cx {
        let mut acc = Cx::zero();
        for (r, c) in &self.terms {
            let root = Real::from_bigint(&BigInt::from(r.clone())).sqrt();
            let v = gauss_to_cx(c);
            acc = acc + Complex::new(v.re * &root, v.im * &root);
        }
        acc
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(r, c)| format!("({}+{}i)*sqrt({r})", c.re, c.im))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (r, c) in rhs.terms {
            self.push(r, c);
        }
        self
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(k, v)| (k, -v)).collect(),
        }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let mut out = Surd::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                // sqrt(a) sqrt(b) = g sqrt((a/g)(b/g)), g = gcd(a, b)
                let g = a.gcd(b);
                let rad = (a / &g) * (b / &g);
                let c = ca.clone() * cb.clone() * grat(BigRational::from_integer(BigInt::from(g)));
                out.push(rad, c);
            }
        }
        out
    }
}

impl Zero for Surd {
    fn zero() -> Self {
        Surd::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Surd {
    fn one() -> Self {
        Surd::from_gauss(GaussRat::one())
    }
}

/// `coeff * q^(quarter_exp / 4)`: the exact form of the D prefactors.
#[derive(Clone, Debug, PartialEq)]
pub struct QMono {
    pub coeff: GaussRat,
    pub quarter_exp: i64,
}

impl QMono {
    pub fn new(coeff: GaussRat, quarter_exp: i64) -> Self {
        QMono { coeff, quarter_exp }
    }

    pub fn mul(&self, o: &QMono) -> QMono {
        QMono::new(self.coeff.clone() * o.coeff.clone(), self.quarter_exp + o.quarter_exp)
    }

    pub fn inv(&self) -> Option<QMono> {
        if self.coeff.is_zero() {
            return None;
        }
        Some(QMono::new(GaussRat::one() / self.coeff.clone(), -self.quarter_exp))
    }

    /// Exact value in Q(i) when `q^(e/4)` is rational.
    pub fn to_exact(&self, q: &BigRational) -> Option<GaussRat> {
        if self.coeff.is_zero() {
            return Some(GaussRat::zero());
        }
        let e = self.quarter_exp;
        let g = e.gcd(&4).max(1);
        let root = rational_root(q, (4 / g) as u32)?;
        Some(self.coeff.clone() * grat(rat_pow(&root, e / g)))
    }

    pub fn to_cx(&self, q: &Real) -> Cx {
        let qe = q.powf(&(Real::from_i64(self.quarter_exp) / Real::from_i64(4)));
        let c = gauss_to_cx(&self.coeff);
        Complex::new(c.re * &qe, c.im * &qe)
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
