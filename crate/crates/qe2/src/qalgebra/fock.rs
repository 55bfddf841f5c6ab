//! Truncated Fock × charge matrices for z, z†, B, B†, A, V.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::exact::{rat_pow, Surd};
use crate::qcore::{q_number_exact, Cx, CxExt, QParam, Real};

/// Scalars a Fock matrix can carry: exact surds or working-precision complex.
pub trait FockScalar:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_rat(r: &BigRational) -> Self;
    fn sqrt_rat(r: &BigRational) -> Result<Self>;
    fn conj(&self) -> Self;
    fn to_cx(&self) -> Cx;
}

impl FockScalar for Surd {
    fn from_rat(r: &BigRational) -> Self {
        Surd::from_rational(r.clone())
    }
    fn sqrt_rat(r: &BigRational) -> Result<Self> {
        Surd::sqrt_of(r)
    }
    fn conj(&self) -> Self {
        Surd::conj(self)
    }
    fn to_cx(&self) -> Cx {
        Surd::to_cx(self)
    }
}

impl FockScalar for Cx {
    fn from_rat(r: &BigRational) -> Self {
        Cx::real(Real::from_ratio(r))
    }
    fn sqrt_rat(r: &BigRational) -> Result<Self> {
        Ok(Cx::real(Real::from_ratio(r).sqrt()))
    }
    fn conj(&self) -> Self {
        num_complex::Complex::conj(self)
    }
    fn to_cx(&self) -> Cx {
        self.clone()
    }
}

/// Basis |n, j⟩ with 0 ≤ n ≤ n_max and j_min ≤ j ≤ j_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FockBasis {
    pub n_max: u32,
    pub j_min: i64,
    pub j_max: i64,
}

/// Indices kept away from a truncation edge by the interior masks.
pub const INTERIOR_MARGIN: u32 = 2;

impl FockBasis {
    pub fn new(n_max: u32, j_min: i64, j_max: i64) -> Result<Self> {
        if n_max < 4 || j_max - j_min < 8 {
            return Err(Error::InvalidParam(format!(
                "basis too small: N={n_max}, J={j_min}..{j_max} (need N >= 4, J range >= 8)"
            )));
        }
        Ok(FockBasis { n_max, j_min, j_max })
    }

    fn width(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn dim(&self) -> usize {
        (self.n_max as usize + 1) * self.width()
    }

    pub fn index(&self, n: u32, j: i64) -> Option<usize> {
        if n > self.n_max || j < self.j_min || j > self.j_max {
            return None;
        }
        Some(n as usize * self.width() + (j - self.j_min) as usize)
    }

    pub fn state(&self, idx: usize) -> (u32, i64) {
        ((idx / self.width()) as u32, self.j_min + (idx % self.width()) as i64)
    }

    /// Whether |n, j⟩ is at least `margin` steps from the truncated edges.
    /// n = 0 is a genuine edge of the Fock space, so only the cutoff side counts.
    pub fn is_interior_with(&self, n: u32, j: i64, margin: u32) -> bool {
        let m = margin as i64;
        n + margin <= self.n_max && j >= self.j_min + m && j + m <= self.j_max
    }

    pub fn is_interior(&self, n: u32, j: i64) -> bool {
        self.is_interior_with(n, j, INTERIOR_MARGIN)
    }
}

/// Operator matrix over a [`FockBasis`], stored sparsely; absent entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix<S> {
    pub basis: FockBasis,
    pub label: String,
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: FockScalar> OpMatrix<S> {
    pub fn zero(basis: FockBasis, label: &str) -> Self {
        OpMatrix { basis, label: label.to_string(), entries: BTreeMap::new() }
    }

    pub fn identity(basis: FockBasis) -> Self {
        let mut m = OpMatrix::zero(basis, "1");
        for i in 0..basis.dim() {
            m.set(i, i, S::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn get(&self, r: usize, c: usize) -> S {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    /// ⟨(m,i)| M |(n,j)⟩; zero outside the basis.
    pub fn elem(&self, m: u32, i: i64, n: u32, j: i64) -> S {
        match (self.basis.index(m, i), self.basis.index(n, j)) {
            (Some(r), Some(c)) => self.get(r, c),
            _ => S::zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &S)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn mul(&self, o: &OpMatrix<S>) -> OpMatrix<S> {
        let mut rows: BTreeMap<usize, Vec<(usize, &S)>> = BTreeMap::new();
        for ((r, c), v) in &o.entries {
            rows.entry(*r).or_default().push((*c, v));
        }
        let mut acc: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for ((r, k), a) in &self.entries {
            if let Some(row) = rows.get(k) {
                for (c, b) in row {
                    let e = acc.entry((*r, *c)).or_insert_with(S::zero);
                    *e = e.clone() + a.clone() * (*b).clone();
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        OpMatrix { basis: self.basis, label: format!("{}·{}", self.label, o.label), entries: acc }
    }

    pub fn pow(&self, k: u32) -> OpMatrix<S> {
        let mut acc = OpMatrix::identity(self.basis);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc.with_label(&format!("{}^{k}", self.label))
    }

    pub fn add(&self, o: &OpMatrix<S>) -> OpMatrix<S> {
        let mut out = self.clone();
        for ((r, c), v) in &o.entries {
            let cur = out.get(*r, *c);
            out.set(*r, *c, cur + v.clone());
        }
        out.with_label(&format!("({}+{})", self.label, o.label))
    }

    pub fn sub(&self, o: &OpMatrix<S>) -> OpMatrix<S> {
        self.add(&o.scale(&-S::one())).with_label(&format!("({}-{})", self.label, o.label))
    }

    pub fn scale(&self, s: &S) -> OpMatrix<S> {
        let mut out = OpMatrix::zero(self.basis, &self.label);
        for ((r, c), v) in &self.entries {
            out.set(*r, *c, v.clone() * s.clone());
        }
        out
    }

    pub fn adjoint(&self) -> OpMatrix<S> {
        let mut out = OpMatrix::zero(self.basis, &format!("{}†", self.label));
        for ((r, c), v) in &self.entries {
            out.set(*c, *r, v.conj());
        }
        out
    }

    pub fn to_cx(&self) -> OpMatrix<Cx> {
        let mut out = OpMatrix::zero(self.basis, &self.label);
        for ((r, c), v) in &self.entries {
            out.set(*r, *c, v.to_cx());
        }
        out
    }

    /// Writes `row col re im` lines for the nonzero entries, rows and columns
    /// given as flat basis indices.
    pub fn dump_text<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# {} dim={} N={} J={}..{}", self.label, self.dim(), self.basis.n_max, self.basis.j_min, self.basis.j_max)?;
        for ((r, c), v) in &self.entries {
            let (re, im) = v.to_cx().approx_f64();
            writeln!(w, "{r} {c} {re:e} {im:e}")?;
        }
        Ok(())
    }
}

/// The basic operators on a truncated basis.
#[derive(Clone, Debug)]
pub struct FockOps<S> {
    pub z: OpMatrix<S>,
    pub zd: OpMatrix<S>,
    pub b: OpMatrix<S>,
    pub bd: OpMatrix<S>,
    pub a: OpMatrix<S>,
    pub ad: OpMatrix<S>,
    pub v: OpMatrix<S>,
    /// η² = B†B, diagonal q^j.
    pub eta2: OpMatrix<S>,
}

pub fn build_fock_ops<S: FockScalar>(basis: &FockBasis, q: &QParam) -> Result<FockOps<S>> {
    let qr = q.rational();
    let mut z = OpMatrix::zero(*basis, "z");
    let mut zd = OpMatrix::zero(*basis, "z†");
    let mut b = OpMatrix::zero(*basis, "B");
    let mut bd = OpMatrix::zero(*basis, "B†");
    let mut a = OpMatrix::zero(*basis, "A");
    let mut ad = OpMatrix::zero(*basis, "A†");
    let mut v = OpMatrix::zero(*basis, "V");
    let mut eta2 = OpMatrix::zero(*basis, "η²");
    let mut sqrt_num = BTreeMap::new();
    let mut sqrt_charge = BTreeMap::new();
    for n in 1..=basis.n_max + 1 {
        sqrt_num.insert(n, S::sqrt_rat(&q_number_exact(n as i64, q))?);
    }
    for j in basis.j_min..=basis.j_max + 1 {
        sqrt_charge.insert(j, S::sqrt_rat(&rat_pow(qr, j))?);
    }
    for n in 0..=basis.n_max {
        for j in basis.j_min..=basis.j_max {
            let col = basis.index(n, j).unwrap();
            let put = |m: &mut OpMatrix<S>, tn: i64, tj: i64, val: S| {
                if tn >= 0 {
                    if let Some(r) = basis.index(tn as u32, tj) {
                        m.set(r, col, val);
                    }
                }
            };
            if n > 0 {
                put(&mut z, n as i64 - 1, j, sqrt_num[&n].clone());
            }
            put(&mut zd, n as i64 + 1, j, sqrt_num[&(n + 1)].clone());
            // B|n,j⟩ = q^{j/2}|n,j−1⟩, B†|n,j⟩ = q^{(j+1)/2}|n,j+1⟩
            put(&mut b, n as i64, j - 1, sqrt_charge[&j].clone());
            put(&mut bd, n as i64, j + 1, sqrt_charge[&(j + 1)].clone());
            put(&mut a, n as i64, j - 2, S::one());
            put(&mut ad, n as i64, j + 2, S::one());
            put(&mut v, n as i64, j - 1, S::one());
            put(&mut eta2, n as i64, j, S::from_rat(&rat_pow(qr, j)));
        }
    }
    Ok(FockOps { z, zd, b, bd, a, ad, v, eta2 })
}

/// Outcome of comparing two matrices on an interior block.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RelationCheck {
    pub name: String,
    /// Every compared entry agrees exactly (structural equality of scalars).
    pub exact: bool,
    pub max_violation: f64,
    pub entries_checked: usize,
}

/// Compares `lhs` and `rhs` on entries whose row and column are interior
/// with the given margin.
pub fn compare_interior<S: FockScalar>(name: &str, lhs: &OpMatrix<S>, rhs: &OpMatrix<S>, margin: u32) -> RelationCheck {
    let basis = lhs.basis;
    let mut exact = true;
    let mut max_violation = 0.0f64;
    let mut entries_checked = 0;
    let inside = |i: usize| {
        let (n, j) = basis.state(i);
        basis.is_interior_with(n, j, margin)
    };
    let mut keys: Vec<(usize, usize)> = lhs.entries.keys().chain(rhs.entries.keys()).cloned().collect();
    keys.sort_unstable();
    keys.dedup();
    for (r, c) in keys {
        if !inside(r) || !inside(c) {
            continue;
        }
        entries_checked += 1;
        let d = lhs.get(r, c) - rhs.get(r, c);
        if !d.is_zero() {
            exact = false;
            max_violation = max_violation.max(d.to_cx().abs().to_f64());
        }
    }
    RelationCheck { name: name.to_string(), exact, max_violation, entries_checked }
}

/// The defining relations of the plane and of E_q(2) on the truncated basis,
/// plus the coaction relation δ(z)δ(z)† − q δ(z)†δ(z) = 1.
pub fn check_relations<S: FockScalar>(basis: &FockBasis, q: &QParam) -> Result<Vec<RelationCheck>> {
    let o = build_fock_ops::<S>(basis, q)?;
    let qs = S::from_rat(q.rational());
    let id = OpMatrix::<S>::identity(*basis);
    let m = INTERIOR_MARGIN;
    let mut out = vec![
        compare_interior("z z† − q z† z = 1", &o.z.mul(&o.zd).sub(&o.zd.mul(&o.z).scale(&qs)), &id, m),
        compare_interior("B B† = q B† B", &o.b.mul(&o.bd), &o.bd.mul(&o.b).scale(&qs), m),
        compare_interior("A B = q B A", &o.a.mul(&o.b), &o.b.mul(&o.a).scale(&qs), m),
        compare_interior("A B† = q B† A", &o.a.mul(&o.bd), &o.bd.mul(&o.a).scale(&qs), m),
        compare_interior("A A† = 1", &o.a.mul(&o.ad), &id, m),
        compare_interior("A† A = 1", &o.ad.mul(&o.a), &id, m),
        compare_interior("A = V²", &o.a, &o.v.mul(&o.v), m),
        compare_interior("z B = B z", &o.z.mul(&o.b), &o.b.mul(&o.z), m),
        compare_interior("z A = A z", &o.z.mul(&o.a), &o.a.mul(&o.z), m),
        compare_interior("z B† = B† z", &o.z.mul(&o.bd), &o.bd.mul(&o.z), m),
        compare_interior("η² = B† B", &o.eta2, &o.bd.mul(&o.b), m),
    ];
    let dz = o.b.add(&o.a.mul(&o.z));
    let dzd = o.bd.add(&o.zd.mul(&o.ad));
    out.push(compare_interior(
        "δ(z) δ(z)† − q δ(z)† δ(z) = 1",
        &dz.mul(&dzd).sub(&dzd.mul(&dz).scale(&qs)),
        &id,
        m,
    ));
    out.push(compare_interior("δ(z)† = B† + A† z†", &dz.adjoint(), &dzd, m));
    Ok(out)
}

/// B^k B†^k = q^{k(k+1)/2} η^{2k} and B†^k B^k = q^{k(1−k)/2} η^{2k} for k = 1..=k_max.
pub fn check_closing_identities<S: FockScalar>(basis: &FockBasis, q: &QParam, k_max: u32) -> Result<Vec<RelationCheck>> {
    let o = build_fock_ops::<S>(basis, q)?;
    let mut out = Vec::new();
    for k in 1..=k_max {
        let ki = k as i64;
        let margin = k.max(INTERIOR_MARGIN);
        let eta = o.eta2.pow(k);
        let c1 = S::from_rat(&rat_pow(q.rational(), ki * (ki + 1) / 2));
        let c2 = S::from_rat(&rat_pow(q.rational(), ki * (1 - ki) / 2));
        out.push(compare_interior(
            &format!("B^{k} B†^{k} = q^{{{}}} η^{{{}}}", ki * (ki + 1) / 2, 2 * k),
            &o.b.pow(k).mul(&o.bd.pow(k)),
            &eta.scale(&c1),
            margin,
        ));
        out.push(compare_interior(
            &format!("B†^{k} B^{k} = q^{{{}}} η^{{{}}}", ki * (1 - ki) / 2, 2 * k),
            &o.bd.pow(k).mul(&o.b.pow(k)),
            &eta.scale(&c2),
            margin,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_indexing() {
        let b = FockBasis::new(4, -4, 4).unwrap();
        assert_eq!(b.dim(), 45);
        let i = b.index(3, -1).unwrap();
        assert_eq!(b.state(i), (3, -1));
        assert!(b.index(5, 0).is_none());
        assert!(FockBasis::new(3, -4, 4).is_err());
        assert!(b.is_interior(0, 0) && !b.is_interior(3, 0) && !b.is_interior(0, 3));
    }

    #[test]
    fn fock_entries() {
        let basis = FockBasis::new(6, -4, 4).unwrap();
        let q = QParam::parse("1/2").unwrap();
        let o = build_fock_ops::<Surd>(&basis, &q).unwrap();
        assert_eq!(o.z.elem(0, 0, 1, 0), Surd::one());
        assert_eq!(o.b.elem(0, 1, 0, 2), Surd::from_rational(BigRational::new(1.into(), 2.into())));
        assert!(o.zd.adjoint().entries().eq(o.z.entries()));
    }

    #[test]
    fn relations_exact_small() {
        let basis = FockBasis::new(5, -5, 5).unwrap();
        let q = QParam::parse("1/3").unwrap();
        for r in check_relations::<Surd>(&basis, &q).unwrap() {
            assert!(r.exact && r.entries_checked > 0, "{}", r.name);
        }
    }
}
