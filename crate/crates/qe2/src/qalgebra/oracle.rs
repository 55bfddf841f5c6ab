//! Constructive oracle: states are sparse vectors over |n, c⟩ with Fock
//! cutoff `n_max` and an unbounded charge index, η² = x0 q^c on charge c.
//! Operators act by exact shift rules, so every entry with Fock index ≤ n_max
//! of a vector built only from raising operators is computed without truncation.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qcore::{q_exp, q_number, Cx, CxExt, PrecisionCtx, QParam, Real};
use crate::repmatrix::ChargeFrame;

use super::fock::{FockBasis, OpMatrix};

pub type SVec = BTreeMap<(u32, i64), Cx>;

pub fn svec_add_into(acc: &mut SVec, v: &SVec, s: &Cx) {
    for (k, c) in v {
        let e = acc.entry(*k).or_insert_with(Cx::zero);
        *e = e.clone() + c.clone() * s.clone();
    }
}

pub fn svec_norm2(v: &SVec) -> Real {
    v.values().fold(Real::zero(), |a, c| {
        let m = c.abs();
        a + &m * &m
    })
}

/// ⟨u|v⟩, antilinear in `u`.
pub fn svec_dot(u: &SVec, v: &SVec) -> Cx {
    let mut acc = Cx::zero();
    for (k, a) in u {
        if let Some(b) = v.get(k) {
            acc = acc + a.conj() * b.clone();
        }
    }
    acc
}

pub fn unit(n: u32, c: i64) -> SVec {
    let mut v = SVec::new();
    v.insert((n, c), Cx::one());
    v
}

pub struct ShiftOracle<'a> {
    q: &'a QParam,
    ctx: &'a PrecisionCtx,
    pub n_max: u32,
    x0: Real,
    qr: Real,
    sqrt_num: Vec<Real>,
    sqrt_charge: RefCell<HashMap<i64, Real>>,
    cols: RefCell<HashMap<(u32, i64), Rc<SVec>>>,
}

impl<'a> ShiftOracle<'a> {
    /// Oracle with η² = x0 q^c on charge c.
    pub fn new(n_max: u32, x0: Real, q: &'a QParam, ctx: &'a PrecisionCtx) -> Self {
        let _g = ctx.enter();
        let sqrt_num = (0..=n_max + 1).map(|n| q_number(n as i64, q).sqrt()).collect();
        ShiftOracle {
            q,
            ctx,
            n_max,
            x0,
            qr: q.real(),
            sqrt_num,
            sqrt_charge: RefCell::new(HashMap::new()),
            cols: RefCell::new(HashMap::new()),
        }
    }

    /// Charge lattice η² = q^c.
    pub fn lattice(n_max: u32, q: &'a QParam, ctx: &'a PrecisionCtx) -> Self {
        ShiftOracle::new(n_max, Real::one(), q, ctx)
    }

    pub fn ctx(&self) -> &PrecisionCtx {
        self.ctx
    }

    /// `√(x0 q^c)`.
    fn sc(&self, c: i64) -> Real {
        if let Some(v) = self.sqrt_charge.borrow().get(&c) {
            return v.clone();
        }
        let v = (&self.x0 * self.qr.powi(c)).sqrt();
        self.sqrt_charge.borrow_mut().insert(c, v.clone());
        v
    }

    fn map(&self, v: &SVec, f: impl Fn(u32, i64) -> Option<(u32, i64, Real)>) -> SVec {
        let mut out = SVec::new();
        for ((n, c), a) in v {
            if let Some((n2, c2, s)) = f(*n, *c) {
                let e = out.entry((n2, c2)).or_insert_with(Cx::zero);
                *e = e.clone() + a.scale_by(&s);
            }
        }
        out
    }

    pub fn z(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| (n > 0).then(|| (n - 1, c, self.sqrt_num[n as usize].clone())))
    }

    pub fn zd(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| (n < self.n_max).then(|| (n + 1, c, self.sqrt_num[n as usize + 1].clone())))
    }

    pub fn b(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| Some((n, c - 1, self.sc(c))))
    }

    pub fn bd(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| Some((n, c + 1, self.sc(c + 1))))
    }

    pub fn a(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| Some((n, c - 2, Real::one())))
    }

    pub fn ad(&self, v: &SVec) -> SVec {
        self.map(v, |n, c| Some((n, c + 2, Real::one())))
    }

    /// δ(z) = B + A z.
    pub fn delta_z(&self, v: &SVec) -> SVec {
        let mut out = self.b(v);
        svec_add_into(&mut out, &self.a(&self.z(v)), &Cx::one());
        out
    }

    /// δ(z*) = B† + A† z†.
    pub fn delta_zd(&self, v: &SVec) -> SVec {
        let mut out = self.bd(v);
        svec_add_into(&mut out, &self.ad(&self.zd(v)), &Cx::one());
        out
    }

    /// |0, c⟩′ = e_q^{−A*B z*} √(e_q^{−B*B}) |0, c⟩, the operator series
    /// summed up to the Fock cutoff.
    pub fn ground(&self, c: i64) -> Result<SVec> {
        let _g = self.ctx.enter();
        let x = &self.x0 * self.qr.powi(c);
        let e = q_exp(&Cx::real(-x), self.q, self.ctx)?;
        let mut term = SVec::new();
        term.insert((0, c), Cx::real(e.value.re.sqrt()));
        let mut acc = term.clone();
        for k in 1..=self.n_max {
            // (−X)^k/(k)_q! from (−X)^{k−1}/(k−1)_q!, X = A* B z*
            let next = self.ad(&self.b(&self.zd(&term)));
            let s = Cx::real(-Real::one() / q_number(k as i64, self.q));
            term = next.into_iter().map(|(key, v)| (key, v * s.clone())).collect();
            svec_add_into(&mut acc, &term, &Cx::one());
        }
        Ok(acc)
    }

    /// Column U|n, c⟩ = δ(z*)^n |0, c⟩′ / √((n)_q!).
    pub fn column(&self, n: u32, c: i64) -> Result<Rc<SVec>> {
        if let Some(v) = self.cols.borrow().get(&(n, c)) {
            return Ok(v.clone());
        }
        let _g = self.ctx.enter();
        let v = if n == 0 {
            self.ground(c)?
        } else {
            let prev = self.column(n - 1, c)?;
            let s = Cx::real(Real::one() / &self.sqrt_num[n as usize]);
            self.delta_zd(&prev).into_iter().map(|(k, v)| (k, v * s.clone())).collect()
        };
        let v = Rc::new(v);
        self.cols.borrow_mut().insert((n, c), v.clone());
        Ok(v)
    }

    /// ⟨(m, a)| U |(n, c)⟩.
    pub fn u_entry(&self, m: u32, a: i64, n: u32, c: i64) -> Result<Cx> {
        Ok(self.column(n, c)?.get(&(m, a)).cloned().unwrap_or_else(Cx::zero))
    }

    pub fn apply_u(&self, v: &SVec) -> Result<SVec> {
        let mut out = SVec::new();
        for ((n, c), a) in v {
            let col = self.column(*n, *c)?;
            svec_add_into(&mut out, &col, a);
        }
        Ok(out)
    }

    /// U† restricted to the columns with Fock index ≤ n_max.
    pub fn apply_u_dag(&self, v: &SVec) -> Result<SVec> {
        let mut out = SVec::new();
        for ((m, a), coeff) in v {
            for n in 0..=self.n_max {
                // U maps charge c to c + m + n
                let c = a - *m as i64 - n as i64;
                let u = self.u_entry(*m, *a, n, c)?;
                if !u.is_zero() {
                    let e = out.entry((n, c)).or_insert_with(Cx::zero);
                    *e = e.clone() + u.conj() * coeff.clone();
                }
            }
        }
        Ok(out)
    }

    /// Σ c z*^n z^m acting on the Fock factor.
    pub fn apply_fock_terms(&self, terms: &[(u32, u32, Cx)], v: &SVec) -> SVec {
        let mut out = SVec::new();
        for (n, m, c) in terms {
            let mut w = v.clone();
            for _ in 0..*m {
                w = self.z(&w);
            }
            for _ in 0..*n {
                w = self.zd(&w);
            }
            svec_add_into(&mut out, &w, c);
        }
        out
    }

    /// Σ c δ(z*)^n δ(z)^m: the coaction image of a normal-ordered polynomial.
    pub fn apply_delta_terms(&self, terms: &[(u32, u32, Cx)], v: &SVec) -> SVec {
        let max_m = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let mut lowered = vec![v.clone()];
        for _ in 0..max_m {
            let next = self.delta_z(lowered.last().unwrap());
            lowered.push(next);
        }
        let mut out = SVec::new();
        for (n, m, c) in terms {
            let mut w = lowered[*m as usize].clone();
            for _ in 0..*n {
                w = self.delta_zd(&w);
            }
            svec_add_into(&mut out, &w, c);
        }
        out
    }

    /// ‖δ(z)|0, c⟩′‖ over rows with Fock index < n_max.
    pub fn ground_annihilation_residual(&self, c: i64) -> Result<Real> {
        let _g = self.ctx.enter();
        let g = self.column(0, c)?;
        let mut r = self.delta_z(&g);
        r.retain(|(n, _), _| *n < self.n_max);
        Ok(svec_norm2(&r).sqrt())
    }
}

/// Degree cutoff for the δ-substitution oracle: the terms of D_j decay like
/// q^{k²/2} once the charge growth of δ(z)^k is accounted for.
pub fn oracle_degree_cutoff(j: i64, q: &QParam, ctx: &PrecisionCtx) -> u32 {
    let ln10 = std::f64::consts::LN_10;
    let k = (2.0 * (ctx.digits as f64) * ln10 / -q.to_f64().ln()).sqrt().ceil() as u32 + 4;
    2 * k + j.unsigned_abs() as u32
}

/// U as a matrix over `basis`: columns in the charge window, rows kept when
/// they fall inside the window.
pub fn build_u_constructive(basis: &FockBasis, q: &QParam, ctx: &PrecisionCtx) -> Result<OpMatrix<Cx>> {
    let _g = ctx.enter();
    let oracle = ShiftOracle::lattice(basis.n_max, q, ctx);
    check_ground_tail(&oracle, basis)?;
    let mut u = OpMatrix::zero(*basis, "U");
    for n in 0..=basis.n_max {
        for c in basis.j_min..=basis.j_max {
            let col = basis.index(n, c).unwrap();
            for ((m, a), v) in oracle.column(n, c)?.iter() {
                if let Some(r) = basis.index(*m, *a) {
                    u.set(r, col, v.clone());
                }
            }
        }
    }
    Ok(u)
}

/// The e_q series of the ground state is cut at the Fock cutoff; its last
/// applied term must already be negligible on interior columns.
fn check_ground_tail(oracle: &ShiftOracle, basis: &FockBasis) -> Result<()> {
    let eps = oracle.ctx.rtol_real();
    for c in basis.j_min..=basis.j_max {
        if !basis.is_interior(0, c) {
            continue;
        }
        let g = oracle.ground(c)?;
        let top: Real = g
            .iter()
            .filter(|((n, _), _)| *n == oracle.n_max)
            .fold(Real::zero(), |a, (_, v)| a.max(v.abs()));
        if top > eps {
            return Err(Error::TruncationError(format!(
                "ground state at charge {c} still has weight {} at Fock level {}",
                top.to_sci(3),
                oracle.n_max
            )));
        }
    }
    Ok(())
}

/// Constructive U against the closed form, and U†U against 1.
#[derive(Clone, Debug, serde::Serialize)]
pub struct UMatch {
    pub n_max: u32,
    pub block: u32,
    pub charges: Vec<i64>,
    pub entries_compared: usize,
    pub max_abs_err: f64,
    pub max_unitarity_err: f64,
    /// Largest 1 − ‖U|n,c⟩‖² over the block: column weight beyond the Fock cutoff.
    pub max_norm_deficit: f64,
}

/// Compares on columns (n, c) with n ≤ block and c in `charges`.
pub fn u_match(n_max: u32, block: u32, charges: &[i64], q: &QParam, ctx: &PrecisionCtx) -> Result<UMatch> {
    let _g = ctx.enter();
    let oracle = ShiftOracle::lattice(n_max, q, ctx);
    let frame = ChargeFrame::lattice(q, ctx);
    let mut max_abs = Real::zero();
    let mut max_unit = Real::zero();
    let mut max_def = Real::zero();
    let mut count = 0;
    for &c in charges {
        for n in 0..=block {
            let col = oracle.column(n, c)?;
            for m in 0..=block {
                let closed = frame.u(c, m as u64, n as u64)?.coeff;
                let got = col.get(&(m, c + (m + n) as i64)).cloned().unwrap_or_else(Cx::zero);
                max_abs = max_abs.max((got - closed).abs());
                count += 1;
            }
            max_def = max_def.max((Real::one() - svec_norm2(&col)).abs());
            // U†U between (n, c) and every block column (m, a) with a + m = c + n
            for m in 0..=block {
                let a = c + n as i64 - m as i64;
                let other = oracle.column(m, a)?;
                let want = if m == n { Cx::one() } else { Cx::zero() };
                max_unit = max_unit.max((svec_dot(&other, &col) - want).abs());
            }
        }
    }
    Ok(UMatch {
        n_max,
        block,
        charges: charges.to_vec(),
        entries_compared: count,
        max_abs_err: max_abs.to_f64(),
        max_unitarity_err: max_unit.to_f64(),
        max_norm_deficit: max_def.to_f64(),
    })
}
