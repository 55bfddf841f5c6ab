//! Extended-precision real scalar.
//!
//! `Real` wraps an astro-float `BigFloat`. Every operation rounds to the
//! thread's working precision, which callers set through
//! [`PrecisionCtx::enter`](super::PrecisionCtx::enter). Values created
//! outside any scope use 50 significant digits.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as BigSign};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};

const RM: RoundingMode = RoundingMode::ToEven;
const GUARD_BITS: usize = 64;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

thread_local! {
    static WORK_BITS: Cell<usize> = Cell::new(bits_for_digits(50));
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

/// Mantissa bits needed for `digits` significant decimal digits plus guard bits,
/// rounded up to whole 64-bit words.
pub fn bits_for_digits(digits: u32) -> usize {
    let raw = (digits as f64 * LOG2_10).ceil() as usize + GUARD_BITS;
    raw.div_ceil(64) * 64
}

pub fn working_bits() -> usize {
    WORK_BITS.with(|w| w.get())
}

/// Restores the previous working precision on drop.
#[must_use]
pub struct PrecisionGuard {
    prev: usize,
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        WORK_BITS.with(|w| w.set(self.prev));
    }
}

pub fn set_working_bits(bits: usize) -> PrecisionGuard {
    let prev = WORK_BITS.with(|w| w.replace(bits.max(64)));
    PrecisionGuard { prev }
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real(BigFloat);

pub type Cx = Complex<Real>;

impl Real {
    fn p() -> usize {
        working_bits()
    }

    pub fn from_f64(v: f64) -> Self {
        Real(BigFloat::from_f64(v, Self::p()))
    }

    pub fn from_i64(v: i64) -> Self {
        Real(BigFloat::from_i64(v, Self::p()))
    }

    pub fn from_u64(v: u64) -> Self {
        Real(BigFloat::from_u64(v, Self::p()))
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        let (sign, words) = v.to_u64_digits();
        let p = Self::p().max(words.len() * 64 + 64);
        let base = BigFloat::from_u64(1 << 32, p).mul(&BigFloat::from_u64(1 << 32, p), p, RM);
        let mut acc = BigFloat::from_u64(0, p);
        for w in words.iter().rev() {
            acc = acc.mul(&base, p, RM).add(&BigFloat::from_u64(*w, p), p, RM);
        }
        if sign == BigSign::Minus {
            acc = acc.neg();
        }
        Real(acc)
    }

    pub fn from_ratio(v: &BigRational) -> Self {
        Real::from_bigint(v.numer()) / Real::from_bigint(v.denom())
    }

    /// Parses a decimal literal (`0.25`, `-3e-2`) or a ratio `p/r`.
    pub fn parse(s: &str) -> Option<Self> {
        super::exact::parse_rational(s).map(|r| Real::from_ratio(&r))
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        match self.0.as_raw_parts() {
            Some((m, _, sign, e, _)) => {
                let top = *m.last().unwrap_or(&0) as f64;
                let next = if m.len() > 1 { m[m.len() - 2] as f64 } else { 0.0 };
                let mant = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
                let e = e as i32;
                let v = if e > 1000 {
                    f64::INFINITY
                } else if e < -1100 {
                    0.0
                } else {
                    mant * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
                };
                if sign == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => f64::NAN,
        }
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(Self::p(), RM))
    }

    pub fn exp(&self) -> Self {
        let p = Self::p();
        with_consts(|cc| Real(self.0.exp(p, RM, cc)))
    }

    pub fn ln(&self) -> Self {
        let p = Self::p();
        with_consts(|cc| Real(self.0.ln(p, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        let p = Self::p();
        with_consts(|cc| Real(self.0.sin(p, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        let p = Self::p();
        with_consts(|cc| Real(self.0.cos(p, RM, cc)))
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, n: i64) -> Self {
        let p = Self::p();
        let pos = Real(self.0.powi(n.unsigned_abs() as usize, p, RM));
        if n < 0 {
            Real::one() / pos
        } else {
            pos
        }
    }

    /// Real power `self^e` for positive `self`.
    pub fn powf(&self, e: &Real) -> Self {
        let p = Self::p();
        with_consts(|cc| Real(self.0.pow(&e.0, p, RM, cc)))
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Nearest integer, if representable.
    pub fn round_i64(&self) -> Option<i64> {
        let v = self.to_f64();
        if v.is_finite() && v.abs() < 9.0e15 {
            Some(v.round() as i64)
        } else {
            None
        }
    }

    /// Scientific notation rounded to `digits` significant digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        if self.0.is_nan() {
            return "NaN".to_string();
        }
        let raw = with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| self.0.to_string());
        round_sci(&raw, digits.max(1))
    }
}

/// Rounds a `[-]d.ddd…e±x` string to `digits` significant digits.
fn round_sci(raw: &str, digits: usize) -> String {
    let (neg, body) = match raw.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, raw),
    };
    let (mant, exp) = body.split_once('e').unwrap_or((body, "0"));
    let mut exp: i64 = exp.trim_start_matches('+').parse().unwrap_or(0);
    let mut ds: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    while ds.len() <= digits {
        ds.push(0);
    }
    let round_up = ds[digits] >= 5;
    ds.truncate(digits);
    if round_up {
        let mut i = digits;
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.truncate(digits);
                exp += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 {
        ds.pop();
    }
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        s.push('.');
        s.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
    }
    s.push_str(&format!("e{exp}"));
    s
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(24))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(f.precision().unwrap_or(20)))
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident, $f:ident) => {
        impl $tr for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0.$f(&rhs.0, Real::p(), RM))
            }
        }
        impl<'a> $tr<&'a Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                Real(self.0.$f(&rhs.0, Real::p(), RM))
            }
        }
        impl<'a> $tr<&'a Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: &'a Real) -> Real {
                Real(self.0.$f(&rhs.0, Real::p(), RM))
            }
        }
        impl<'a> $tr<Real> for &'a Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real(self.0.$f(&rhs.0, Real::p(), RM))
            }
        }
        impl $atr for Real {
            fn $am(&mut self, rhs: Real) {
                self.0 = self.0.$f(&rhs.0, Real::p(), RM);
            }
        }
        impl<'a> $atr<&'a Real> for Real {
            fn $am(&mut self, rhs: &'a Real) {
                self.0 = self.0.$f(&rhs.0, Real::p(), RM);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add);
binop!(Sub, sub, SubAssign, sub_assign, sub);
binop!(Mul, mul, MulAssign, mul_assign, mul);
binop!(Div, div, DivAssign, div_assign, div);

impl Rem for Real {
    type Output = Real;
    fn rem(self, rhs: Real) -> Real {
        Real(self.0.rem(&rhs.0))
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

impl<'a> Neg for &'a Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.clone().neg())
    }
}

impl Zero for Real {
    fn zero() -> Self {
        Real(BigFloat::from_u64(0, Real::p()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Real {
    fn one() -> Self {
        Real(BigFloat::from_u64(1, Real::p()))
    }
}

impl Num for Real {
    type FromStrRadixErr = String;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, String> {
        if radix != 10 {
            return Err(format!("unsupported radix {radix}"));
        }
        Real::parse(s).ok_or_else(|| format!("not a number: {s}"))
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real::from_f64(v)
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::from_i64(v)
    }
}

/// Complex helpers that `num_complex` only offers for `Float` types.
pub trait CxExt {
    fn real(v: Real) -> Self;
    fn from_f64(re: f64, im: f64) -> Self;
    fn abs(&self) -> Real;
    fn scale_by(&self, s: &Real) -> Self;
    fn ipow(&self, n: i64) -> Self;
    /// `i^k`.
    fn i_pow(k: i64) -> Self;
    fn approx_f64(&self) -> (f64, f64);
}

impl CxExt for Cx {
    fn real(v: Real) -> Self {
        Complex::new(v, Real::zero())
    }

    fn from_f64(re: f64, im: f64) -> Self {
        Complex::new(Real::from_f64(re), Real::from_f64(im))
    }

    fn abs(&self) -> Real {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        (&self.re * &self.re + &self.im * &self.im).sqrt()
    }

    fn scale_by(&self, s: &Real) -> Self {
        Complex::new(&self.re * s, &self.im * s)
    }

    fn ipow(&self, n: i64) -> Self {
        let mut base = self.clone();
        let mut e = n.unsigned_abs();
        let mut acc = Cx::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        if n < 0 {
            Cx::one() / acc
        } else {
            acc
        }
    }

    fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Complex::new(Real::one(), Real::zero()),
            1 => Complex::new(Real::zero(), Real::one()),
            2 => Complex::new(-Real::one(), Real::zero()),
            _ => Complex::new(Real::zero(), -Real::one()),
        }
    }

    fn approx_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
