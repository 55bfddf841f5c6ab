//! Verification of the summation formulas, the worked examples and the limit
//! statements, each against closed forms and the constructive oracle.

mod examples;
mod grid;
mod limits;
mod sums;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::{Cx, CxExt, PrecisionCtx, QParam, Real};
use crate::repmatrix::RepWeight;

pub use examples::{verify_example, ExampleId};
pub use grid::{expand_values, parse_grid, run_grid, write_csv, write_jsonl, GridParseError, GridSpec, GridSummary, CSV_HEADER, DEFAULT_BUDGET};
pub use limits::{verify_limit, LimitKind};
pub use sums::{verify_sum_four, verify_sum_three, verify_sum_two, ORACLE_N_DEFAULT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum IdentityId {
    #[serde(rename = "sum_two")]
    SumTwo,
    #[serde(rename = "sum_three")]
    SumThree,
    #[serde(rename = "sum_four")]
    SumFour,
    #[serde(rename = "example_A")]
    ExampleA,
    #[serde(rename = "example_A_classical")]
    ExampleAClassical,
    #[serde(rename = "example_B")]
    ExampleB,
    #[serde(rename = "example_C")]
    ExampleC,
    #[serde(rename = "limit_q_to_1_kummer")]
    LimitQTo1Kummer,
    #[serde(rename = "limit_q_to_1_plane")]
    LimitQTo1Plane,
    #[serde(rename = "limit_sigma_to_0")]
    LimitSigmaTo0,
}

impl IdentityId {
    pub const ALL: [IdentityId; 10] = [
        IdentityId::SumTwo,
        IdentityId::SumThree,
        IdentityId::SumFour,
        IdentityId::ExampleA,
        IdentityId::ExampleAClassical,
        IdentityId::ExampleB,
        IdentityId::ExampleC,
        IdentityId::LimitQTo1Kummer,
        IdentityId::LimitQTo1Plane,
        IdentityId::LimitSigmaTo0,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityId::SumTwo => "sum_two",
            IdentityId::SumThree => "sum_three",
            IdentityId::SumFour => "sum_four",
            IdentityId::ExampleA => "example_A",
            IdentityId::ExampleAClassical => "example_A_classical",
            IdentityId::ExampleB => "example_B",
            IdentityId::ExampleC => "example_C",
            IdentityId::LimitQTo1Kummer => "limit_q_to_1_kummer",
            IdentityId::LimitQTo1Plane => "limit_q_to_1_plane",
            IdentityId::LimitSigmaTo0 => "limit_sigma_to_0",
        }
    }

    /// Accepts `sum-two`, `sum_two`, `example-A`, `example-a-classical`, ...
    pub fn parse(s: &str) -> Option<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        IdentityId::ALL.iter().copied().find(|id| id.as_str().to_ascii_lowercase() == key)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    PASS,
    FAIL,
    INCONCLUSIVE,
}

#[allow(clippy::upper_case_acronyms, non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrintedStatus {
    PASS,
    FAIL,
    NOT_APPLICABLE,
}

/// Complex value serialised as `{"re": .., "im": ..}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexValue(pub Cx);

impl Serialize for ComplexValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (re, im) = self.0.approx_f64();
        let mut st = s.serialize_struct("ComplexValue", 2)?;
        st.serialize_field("re", &re)?;
        st.serialize_field("im", &im)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub params: BTreeMap<String, String>,
    pub lhs: ComplexValue,
    pub rhs: ComplexValue,
    pub abs_err: f64,
    pub rel_err: f64,
    pub terms_used: usize,
    pub status: Status,
    pub printed_form_status: PrintedStatus,
    pub discrepancy_note: String,
}

/// Parameter assignments of one grid point, kept as the strings given so that
/// rationals stay exact.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn with(mut self, k: &str, v: impl ToString) -> Self {
        self.0.insert(k.to_string(), v.to_string());
        self
    }

    pub fn raw(&self, k: &str) -> Option<&str> {
        self.0.get(k).map(|s| s.as_str())
    }

    fn missing(k: &str) -> Error {
        Error::InvalidParam(format!("missing parameter '{k}'"))
    }

    pub fn i64_or(&self, k: &str, default: Option<i64>) -> Result<i64> {
        match self.raw(k) {
            Some(s) => s.trim().parse().map_err(|_| Error::InvalidParam(format!("{k} must be an integer, got '{s}'"))),
            None => default.ok_or_else(|| Params::missing(k)),
        }
    }

    pub fn u64_or(&self, k: &str, default: Option<u64>) -> Result<u64> {
        let v = self.i64_or(k, default.map(|d| d as i64))?;
        u64::try_from(v).map_err(|_| Error::InvalidParam(format!("{k} must be nonnegative, got {v}")))
    }

    pub fn q(&self) -> Result<QParam> {
        QParam::parse(self.raw("q").ok_or_else(|| Params::missing("q"))?)
    }

    pub fn weight(&self) -> Result<RepWeight> {
        RepWeight::parse(self.raw("lambda").ok_or_else(|| Params::missing("lambda"))?)
    }

    pub fn real(&self, k: &str) -> Result<Real> {
        let s = self.raw(k).ok_or_else(|| Params::missing(k))?;
        Real::parse(s).ok_or_else(|| Error::InvalidParam(format!("{k} must be a number, got '{s}'")))
    }

    pub fn real_or(&self, k: &str, default: f64) -> Result<Real> {
        if self.raw(k).is_some() {
            self.real(k)
        } else {
            Ok(Real::from_f64(default))
        }
    }
}

/// `(|a − b|, |a − b| / max(|a|, |b|))`, the relative error being 0 when both vanish.
pub(crate) fn errs(a: &Cx, b: &Cx) -> (Real, Real) {
    let d = (a.clone() - b.clone()).abs();
    let s = a.abs().max(b.abs());
    let rel = if s.is_zero() { Real::zero() } else { &d / &s };
    (d, rel)
}

/// Running collection of the comparisons that decide a report.
pub(crate) struct Verdict {
    abs: Real,
    rel: Real,
    pass: bool,
    converged: bool,
    rtol: Real,
    atol: Real,
}

impl Verdict {
    pub(crate) fn new(ctx: &PrecisionCtx) -> Self {
        Verdict {
            abs: Real::zero(),
            rel: Real::zero(),
            pass: true,
            converged: true,
            rtol: ctx.rtol_real(),
            atol: ctx.atol_real(),
        }
    }

    /// Records one comparison; returns its relative error for notes.
    pub(crate) fn compare(&mut self, a: &Cx, b: &Cx) -> f64 {
        let (d, r) = errs(a, b);
        if !(r <= self.rtol || d <= self.atol) {
            self.pass = false;
        }
        let out = r.to_f64();
        self.abs = self.abs.clone().max(d);
        self.rel = self.rel.clone().max(r);
        out
    }

    pub(crate) fn converged(&mut self, c: bool) {
        self.converged &= c;
    }

    pub(crate) fn status(&self) -> Status {
        if !self.converged {
            Status::INCONCLUSIVE
        } else if self.pass {
            Status::PASS
        } else {
            Status::FAIL
        }
    }

    pub(crate) fn passes(&self, a: &Cx, b: &Cx) -> bool {
        let (d, r) = errs(a, b);
        r <= self.rtol || d <= self.atol
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn report(
        &self,
        id: IdentityId,
        params: BTreeMap<String, String>,
        lhs: Cx,
        rhs: Cx,
        terms_used: usize,
        printed: PrintedStatus,
        note: String,
    ) -> IdentityReport {
        IdentityReport {
            identity_id: id,
            params,
            lhs: ComplexValue(lhs),
            rhs: ComplexValue(rhs),
            abs_err: self.abs.to_f64(),
            rel_err: self.rel.to_f64(),
            terms_used,
            status: self.status(),
            printed_form_status: printed,
            discrepancy_note: note,
        }
    }
}

pub(crate) fn fmt_e(v: f64) -> String {
    format!("{v:.3e}")
}

pub(crate) fn fmt_cx(c: &Cx) -> String {
    let (re, im) = c.approx_f64();
    if im == 0.0 {
        format!("{re:.15e}")
    } else {
        format!("{re:.15e}{im:+.15e}i")
    }
}

/// Sum over s = 0, 1, ... stopping after 5 consecutive terms below
/// `eps |partial| + abs`, once `min_terms` terms have been taken.
pub(crate) struct SumOut {
    pub value: Cx,
    pub terms: usize,
    pub converged: bool,
}

pub(crate) fn sum_s<F>(ctx: &PrecisionCtx, min_terms: usize, mut term: F) -> Result<SumOut>
where
    F: FnMut(usize) -> Result<(Cx, bool)>,
{
    let eps = ctx.series_eps();
    let abs = ctx.series_abs();
    let mut acc = Cx::zero();
    let mut small = 0;
    let mut converged = true;
    for s in 0..ctx.max_terms {
        let (t, ok) = term(s)?;
        converged &= ok;
        let mag = t.abs();
        acc = acc + t;
        if mag <= &eps * acc.abs() + &abs {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 5 && s + 1 >= min_terms {
            return Ok(SumOut { value: acc, terms: s + 1, converged });
        }
    }
    Ok(SumOut { value: acc, terms: ctx.max_terms, converged: false })
}

/// Dispatches one identity evaluation from string parameters.
pub fn verify(id: IdentityId, p: &Params, ctx: &PrecisionCtx) -> Result<IdentityReport> {
    match id {
        IdentityId::SumTwo => {
            let i = match p.raw("i") {
                Some(_) => Some(p.i64_or("i", None)?),
                None => None,
            };
            verify_sum_two(
                p.i64_or("j", None)?,
                p.u64_or("m", None)?,
                p.u64_or("n", None)?,
                i,
                p.i64_or("jw", Some(0))?,
                &p.weight()?,
                &p.q()?,
                p.u64_or("N", Some(ORACLE_N_DEFAULT as u64))? as u32,
                ctx,
            )
        }
        IdentityId::SumThree => verify_sum_three(
            p.i64_or("j", None)?,
            p.u64_or("m", None)?,
            p.u64_or("n", None)?,
            p.i64_or("jw", Some(0))?,
            &p.weight()?,
            &p.q()?,
            p.u64_or("N", Some(ORACLE_N_DEFAULT as u64))? as u32,
            ctx,
        ),
        IdentityId::SumFour => verify_sum_four(
            p.i64_or("j", None)?,
            p.u64_or("m", None)?,
            p.u64_or("n", None)?,
            p.i64_or("jw", Some(0))?,
            &p.weight()?,
            &p.q()?,
            p.u64_or("N", Some(ORACLE_N_DEFAULT as u64))? as u32,
            ctx,
        ),
        IdentityId::ExampleA => verify_example(ExampleId::A, p, ctx),
        IdentityId::ExampleAClassical => verify_example(ExampleId::AClassical, p, ctx),
        IdentityId::ExampleB => verify_example(ExampleId::B, p, ctx),
        IdentityId::ExampleC => verify_example(ExampleId::C, p, ctx),
        IdentityId::LimitQTo1Kummer => verify_limit(LimitKind::QTo1Kummer, p, ctx),
        IdentityId::LimitQTo1Plane => verify_limit(LimitKind::QTo1Plane, p, ctx),
        IdentityId::LimitSigmaTo0 => verify_limit(LimitKind::SigmaTo0, p, ctx),
    }
}
