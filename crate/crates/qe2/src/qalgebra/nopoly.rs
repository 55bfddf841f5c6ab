//! Normal-ordered polynomials in z, z* subject to z z* − q z* z = 1.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::exact::{gi, grat, rat_pow, GaussRat, QMono, Surd};
use crate::qcore::{q_factorial_exact, q_number_exact, q_pochhammer_exact, Cx, QParam};
use crate::repmatrix::RepWeight;

/// `Σ c_{nm} z*^n z^m` with every stored monomial of degree `n + m` at most
/// `max_degree`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct NOPoly {
    terms: BTreeMap<(u32, u32), GaussRat>,
    max_degree: u32,
}

impl NOPoly {
    pub fn zero(max_degree: u32) -> Self {
        NOPoly { terms: BTreeMap::new(), max_degree }
    }

    pub fn one(max_degree: u32) -> Self {
        NOPoly::constant(GaussRat::one(), max_degree)
    }

    pub fn constant(c: GaussRat, max_degree: u32) -> Self {
        let mut p = NOPoly::zero(max_degree);
        p.push(0, 0, c);
        p
    }

    pub fn monomial(n: u32, m: u32, c: GaussRat, max_degree: u32) -> Result<Self> {
        if n + m > max_degree {
            return Err(Error::DegreeOverflow(format!(
                "monomial z*^{n} z^{m} exceeds degree bound {max_degree}"
            )));
        }
        let mut p = NOPoly::zero(max_degree);
        p.push(n, m, c);
        Ok(p)
    }

    pub fn z(max_degree: u32) -> Result<Self> {
        NOPoly::monomial(0, 1, GaussRat::one(), max_degree)
    }

    pub fn zstar(max_degree: u32) -> Result<Self> {
        NOPoly::monomial(1, 0, GaussRat::one(), max_degree)
    }

    fn push(&mut self, n: u32, m: u32, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((n, m)).or_insert_with(GaussRat::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&(n, m));
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), GaussRat> {
        &self.terms
    }

    pub fn coeff(&self, n: u32, m: u32) -> GaussRat {
        self.terms.get(&(n, m)).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Highest degree actually present; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(n, m)| n + m).max()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn with_max_degree(&self, max_degree: u32) -> Result<Self> {
        if self.degree().unwrap_or(0) > max_degree {
            return Err(Error::DegreeOverflow(format!("degree exceeds new bound {max_degree}")));
        }
        Ok(NOPoly { terms: self.terms.clone(), max_degree })
    }

    /// Drops every monomial of degree above `deg`.
    pub fn truncate(&self, deg: u32) -> Self {
        NOPoly {
            terms: self.terms.iter().filter(|((n, m), _)| n + m <= deg).map(|(k, v)| (*k, v.clone())).collect(),
            max_degree: self.max_degree,
        }
    }

    pub fn add(&self, o: &NOPoly) -> Self {
        let mut p = NOPoly::zero(self.max_degree.max(o.max_degree));
        for ((n, m), c) in self.terms.iter().chain(o.terms.iter()) {
            p.push(*n, *m, c.clone());
        }
        p
    }

    pub fn sub(&self, o: &NOPoly) -> Self {
        self.add(&o.scale(&-GaussRat::one()))
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        let mut p = NOPoly::zero(self.max_degree);
        for ((n, m), v) in &self.terms {
            p.push(*n, *m, v.clone() * c.clone());
        }
        p
    }

    /// ⟨a| p |b⟩ in the Fock basis, exact.
    pub fn matrix_element_exact(&self, a: u64, b: u64, q: &QParam) -> Result<Surd> {
        let mut acc = Surd::zero();
        for ((n, m), c) in &self.terms {
            if let Some(r) = monomial_element_sq(*n as u64, *m as u64, a, b, q) {
                acc = acc + Surd::from_gauss(c.clone()) * Surd::sqrt_of(&r)?;
            }
        }
        Ok(acc)
    }

    /// ⟨a| p |b⟩ at working precision.
    pub fn matrix_element(&self, a: u64, b: u64, q: &QParam) -> Cx {
        let mut acc = Cx::zero();
        for ((n, m), c) in &self.terms {
            if let Some(r) = monomial_element_sq(*n as u64, *m as u64, a, b, q) {
                let v = crate::qcore::Real::from_ratio(&r).sqrt();
                let cc = crate::qcore::exact::gauss_to_cx(c);
                acc = acc + Cx::new(cc.re * &v, cc.im * &v);
            }
        }
        acc
    }
}

/// Square of ⟨a| z*^n z^m |b⟩, or `None` when the element vanishes.
fn monomial_element_sq(n: u64, m: u64, a: u64, b: u64, q: &QParam) -> Option<BigRational> {
    if m > b || n > a || a - n != b - m {
        return None;
    }
    let mid = b - m;
    let f = |k: u64| q_factorial_exact(k, q);
    Some(f(b) * f(a) / (f(mid) * f(mid)))
}

/// `z · z*^a z^d = q^a z*^a z^{d+1} + (a)_q z*^{a−1} z^d`.
fn left_mul_z(p: &BTreeMap<(u32, u32), GaussRat>, q: &QParam) -> BTreeMap<(u32, u32), GaussRat> {
    let mut out = NOPoly::zero(u32::MAX);
    for ((a, d), c) in p {
        out.push(*a, d + 1, c.clone() * grat(rat_pow(q.rational(), *a as i64)));
        if *a > 0 {
            out.push(a - 1, *d, c.clone() * grat(q_number_exact(*a as i64, q)));
        }
    }
    out.terms
}

/// Exact normal-ordered product.
pub fn nopoly_normal_product(p1: &NOPoly, p2: &NOPoly, q: &QParam) -> Result<NOPoly> {
    let bound = p1.max_degree.max(p2.max_degree);
    let (Some(d1), Some(d2)) = (p1.degree(), p2.degree()) else {
        return Ok(NOPoly::zero(bound));
    };
    if d1 + d2 > bound {
        return Err(Error::DegreeOverflow(format!("product degree {} exceeds bound {bound}", d1 + d2)));
    }
    // z^b z*^c normal-ordered, memoised by (b, c)
    let mut cache: BTreeMap<(u32, u32), BTreeMap<(u32, u32), GaussRat>> = BTreeMap::new();
    let mut out = NOPoly::zero(bound);
    for ((a, b), c1) in &p1.terms {
        for ((c, d), c2) in &p2.terms {
            let key = (*b, *c);
            if !cache.contains_key(&key) {
                let mut cur: BTreeMap<(u32, u32), GaussRat> = BTreeMap::new();
                cur.insert((*c, 0), GaussRat::one());
                for _ in 0..*b {
                    cur = left_mul_z(&cur, q);
                }
                cache.insert(key, cur);
            }
            let coeff = c1.clone() * c2.clone();
            for ((x, y), v) in &cache[&key] {
                out.push(a + x, y + d, coeff.clone() * v.clone());
            }
        }
    }
    Ok(out)
}

/// `(c z*^n z^m)* = c̄ z*^m z^n`.
pub fn nopoly_adjoint(p: &NOPoly) -> NOPoly {
    let mut out = NOPoly::zero(p.max_degree);
    for ((n, m), c) in &p.terms {
        out.push(*m, *n, c.conj());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    K,
    P,
    PStar,
}

/// Right action of the generators of U_q(e(2)) on monomials, extended linearly.
pub fn r_action(gen: Generator, p: &NOPoly, q: &QParam) -> NOPoly {
    let qr = q.rational();
    let mut out = NOPoly::zero(p.max_degree);
    for ((n, m), c) in &p.terms {
        let (n, m) = (*n, *m);
        match gen {
            Generator::K => out.push(n, m, c.clone() * grat(rat_pow(qr, m as i64 - n as i64))),
            Generator::P => {
                if m > 0 {
                    let f = rat_pow(qr, -(n as i64)) * q_number_exact(m as i64, q);
                    out.push(n, m - 1, c.clone() * gi() * grat(f));
                }
            }
            Generator::PStar => {
                if n > 0 {
                    let f = rat_pow(qr, 1 - n as i64) * q_number_exact(n as i64, q);
                    out.push(n - 1, m, c.clone() * gi() * grat(f));
                }
            }
        }
    }
    out
}

/// `ζ = 1 − (1−q) z* z`.
pub fn zeta_poly(max_degree: u32, q: &QParam) -> Result<NOPoly> {
    let one_m_q = BigRational::one() - q.rational();
    Ok(NOPoly::one(max_degree).add(&NOPoly::monomial(1, 1, grat(-one_m_q), max_degree)?))
}

/// `∏_{i<n} (ζ − q^i)`, normal-ordered.
pub fn zeta_shifted_product(n: u32, q: &QParam) -> Result<NOPoly> {
    let md = (2 * n).max(2);
    let zeta = zeta_poly(md, q)?;
    let mut acc = NOPoly::one(md);
    for i in 0..n {
        let f = zeta.sub(&NOPoly::constant(grat(rat_pow(q.rational(), i as i64)), md));
        acc = nopoly_normal_product(&acc, &f, q)?;
    }
    Ok(acc)
}

/// The truncated series `e_q^{x z*} = Σ_k x^k z*^k / (k)_q!` up to degree `deg`.
pub fn q_exp_zstar(x: &BigRational, deg: u32, max_degree: u32, q: &QParam) -> Result<NOPoly> {
    let mut p = NOPoly::zero(max_degree);
    for k in 0..=deg {
        let c = rat_pow(x, k as i64) / q_factorial_exact(k as u64, q);
        p = p.add(&NOPoly::monomial(k, 0, grat(c), max_degree)?);
    }
    Ok(p)
}

/// Normalisation of the weight-function prefactor of D^λ_j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DNormalization {
    /// `q^{j²/4} (iλ)^j / (j)_q!` as displayed with the weight function.
    Printed,
    /// `(−1)^j q^{j/4}` times the printed one; satisfies R(P)D_j = λ q^{j/2} D_{j−1}.
    Covariant,
}

/// `prefactor · body`, where `body = Σ_k c_k z*^k z^{k+j}` has exact rational
/// coefficients and every monomial of degree above `cutoff` was dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DPoly {
    pub j: i64,
    pub prefactor: QMono,
    pub body: NOPoly,
    pub cutoff: u32,
}

impl DPoly {
    /// Exact comparison of `self` and `other` up to degree `deg`; `None` when
    /// the ratio of prefactors is not rational in q.
    pub fn equal_up_to(&self, other: &DPoly, deg: u32, q: &QParam) -> Option<bool> {
        let a = self.body.truncate(deg);
        let b = other.body.truncate(deg);
        if a.is_zero() || b.is_zero() {
            return Some(a.is_zero() && b.is_zero());
        }
        let ratio = self.prefactor.mul(&other.prefactor.inv()?).to_exact(q.rational())?;
        Some(a.scale(&ratio) == b)
    }

    pub fn scaled(&self, m: &QMono) -> DPoly {
        DPoly { prefactor: self.prefactor.mul(m), ..self.clone() }
    }

    /// Applies a right action generator to the body.
    pub fn r_action(&self, gen: Generator, q: &QParam) -> DPoly {
        DPoly { body: r_action(gen, &self.body, q), ..self.clone() }
    }

    /// Monomials with complex coefficients `(n, m, prefactor · c_{nm})`.
    pub fn terms_cx(&self, q: &QParam) -> Vec<(u32, u32, Cx)> {
        let pre = self.prefactor.to_cx(&q.real());
        self.body
            .terms()
            .iter()
            .map(|((n, m), c)| (*n, *m, pre.clone() * crate::qcore::exact::gauss_to_cx(c)))
            .collect()
    }

    pub fn matrix_element(&self, a: u64, b: u64, q: &QParam) -> Cx {
        self.prefactor.to_cx(&q.real()) * self.body.matrix_element(a, b, q)
    }
}

/// Normal-ordered expansion of D^λ_j = f^λ_j(ζ) z^j (and its transpose for
/// j < 0), truncated at total degree `cutoff`.
///
/// Each ζ-power of the weight series enters through
/// `∏_{i<k}(ζ − q^i) = (−1)^k q^{k(k−1)/2} (1−q)^k z*^k z^k`.
pub fn expand_d_poly(j: i64, w: &RepWeight, cutoff: u32, q: &QParam, norm: DNormalization) -> Result<DPoly> {
    let ja = j.unsigned_abs();
    if (cutoff as u64) < ja {
        return Err(Error::DegreeOverflow(format!("cutoff {cutoff} below |j| = {ja}")));
    }
    let qr = q.rational();
    let lam = w.exact();
    let one_m_q = BigRational::one() - qr;
    let qj1 = rat_pow(qr, ja as i64 + 1);
    let mut body = NOPoly::zero(cutoff);
    let mut k = 0u64;
    while 2 * k + ja <= cutoff as u64 {
        let sign = if k % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        let num = sign
            * rat_pow(qr, (k * (k.saturating_sub(1))) as i64)
            * rat_pow(&one_m_q, 2 * k as i64)
            * rat_pow(&qj1, k as i64)
            * rat_pow(lam, 2 * k as i64);
        let den = q_pochhammer_exact(&grat(qr.clone()), q, k) * q_pochhammer_exact(&grat(qj1.clone()), q, k);
        let c = grat(num) / den;
        let (n, m) = if j >= 0 { (k, k + ja) } else { (k + ja, k) };
        body = body.add(&NOPoly::monomial(n as u32, m as u32, c, cutoff)?);
        if lam.is_zero() {
            break;
        }
        k += 1;
    }
    let i_pow = match ja % 4 {
        0 => GaussRat::one(),
        1 => gi(),
        2 => -GaussRat::one(),
        _ => -gi(),
    };
    let coeff = i_pow * grat(rat_pow(lam, ja as i64) / q_factorial_exact(ja, q));
    let mut quarter = (ja * ja) as i64;
    let coeff = match norm {
        DNormalization::Printed => coeff,
        DNormalization::Covariant => {
            quarter += ja as i64;
            if ja % 2 == 1 {
                -coeff
            } else {
                coeff
            }
        }
    };
    Ok(DPoly { j, prefactor: QMono::new(coeff, quarter), body, cutoff })
}

/// Covariance checks of the expanded D polynomials.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CovarianceCheck {
    pub j: i64,
    pub cutoff: u32,
    /// R(P) D_j = λ q^{j/2} D_{j−1} up to degree `cutoff − 1`.
    pub p_relation: bool,
    /// R(K) D_j = q^j D_j per monomial.
    pub k_relation: bool,
}

pub fn covariance_check(j: i64, w: &RepWeight, cutoff: u32, q: &QParam, norm: DNormalization) -> Result<CovarianceCheck> {
    if j < 1 {
        return Err(Error::InvalidParam("covariance check needs j >= 1".into()));
    }
    let dj = expand_d_poly(j, w, cutoff, q, norm)?;
    let dj1 = expand_d_poly(j - 1, w, cutoff, q, norm)?;
    let lhs = dj.r_action(Generator::P, q);
    let rhs = dj1.scaled(&QMono::new(grat(w.exact().clone()), 2 * j));
    let p_relation = lhs.equal_up_to(&rhs, cutoff - 1, q).unwrap_or(false);
    let k_lhs = dj.r_action(Generator::K, q);
    let k_rhs = dj.scaled(&QMono::new(GaussRat::one(), 4 * j));
    let k_relation = k_lhs.equal_up_to(&k_rhs, cutoff, q).unwrap_or(false);
    Ok(CovarianceCheck { j, cutoff, p_relation, k_relation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::exact::rat;

    fn half() -> QParam {
        QParam::parse("1/2").unwrap()
    }

    #[test]
    fn defining_relation() {
        let q = half();
        let z = NOPoly::z(6).unwrap();
        let zs = NOPoly::zstar(6).unwrap();
        let p = nopoly_normal_product(&z, &zs, &q).unwrap();
        assert_eq!(p.coeff(1, 1), grat(rat(1, 2)));
        assert_eq!(p.coeff(0, 0), GaussRat::one());
        assert_eq!(nopoly_normal_product(&zs, &z, &q).unwrap().terms().len(), 1);
        let zs2 = NOPoly::monomial(2, 0, GaussRat::one(), 6).unwrap();
        let p = nopoly_normal_product(&z, &zs2, &q).unwrap();
        assert_eq!(p.coeff(2, 1), grat(rat(1, 4)));
        assert_eq!(p.coeff(1, 0), grat(rat(3, 2)));
    }

    #[test]
    fn degree_overflow() {
        let q = half();
        let a = NOPoly::monomial(2, 1, GaussRat::one(), 4).unwrap();
        assert!(matches!(nopoly_normal_product(&a, &a, &q), Err(Error::DegreeOverflow(_))));
    }

    #[test]
    fn r_action_rules() {
        let q = half();
        let p = NOPoly::monomial(1, 2, GaussRat::one(), 6).unwrap();
        assert_eq!(r_action(Generator::K, &p, &q).coeff(1, 2), grat(rat(1, 2)));
        assert!(r_action(Generator::P, &NOPoly::one(4), &q).is_zero());
        let p = NOPoly::monomial(2, 0, GaussRat::one(), 6).unwrap();
        // i q^{-1} (2)_q
        assert_eq!(r_action(Generator::PStar, &p, &q).coeff(1, 0), gi() * grat(rat(3, 1)));
    }

    #[test]
    fn d_poly_leading_terms() {
        let q = half();
        let d = expand_d_poly(0, &RepWeight::trivial(), 6, &q, DNormalization::Printed).unwrap();
        assert_eq!(d.body, NOPoly::one(6));
        assert_eq!(d.prefactor, QMono::new(GaussRat::one(), 0));
        let w = RepWeight::parse("1/2").unwrap();
        let d = expand_d_poly(1, &w, 1, &q, DNormalization::Printed).unwrap();
        assert_eq!(d.body.terms().len(), 1);
        assert_eq!(d.body.coeff(0, 1), GaussRat::one());
        assert_eq!(d.prefactor, QMono::new(gi() * grat(rat(1, 2)), 1));
    }
}
