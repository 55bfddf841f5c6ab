//! Parameter grids: a flat text format, Cartesian expansion and report output.
//!
//! ```text
//! # comment
//! identity = example_C
//! q = 0.3, 1/2, 0.8
//! n = 0..3
//! digits = 60
//! ```

use std::fmt;
use std::io::Write;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{Cx, CxExt, PrecisionCtx};

use super::{verify, ComplexValue, IdentityId, IdentityReport, Params, PrintedStatus, Status};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub identity: IdentityId,
    /// Parameter value lists in file order; the last key varies fastest.
    pub values: Vec<(String, Vec<String>)>,
    pub ctx: PrecisionCtx,
    pub budget: usize,
}

impl GridSpec {
    pub fn new(identity: IdentityId, ctx: PrecisionCtx) -> Self {
        GridSpec { identity, values: Vec::new(), ctx, budget: DEFAULT_BUDGET }
    }

    /// Sets (or replaces) the value list of one parameter.
    pub fn set(mut self, key: &str, vals: Vec<String>) -> Self {
        match self.values.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = vals,
            None => self.values.push((key.to_string(), vals)),
        }
        self
    }

    /// Number of grid points; a grid with no parameters is empty.
    pub fn size(&self) -> usize {
        if self.values.is_empty() {
            return 0;
        }
        self.values.iter().fold(1usize, |acc, (_, v)| acc.saturating_mul(v.len()))
    }

    pub fn points(&self) -> Result<Vec<Params>> {
        let n = self.size();
        if n > self.budget {
            return Err(Error::InvalidParam(format!("grid has {n} points, budget is {}", self.budget)));
        }
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        let mut idx = vec![0usize; self.values.len()];
        loop {
            let mut p = Params::new();
            for ((k, vals), &i) in self.values.iter().zip(&idx) {
                p = p.with(k, &vals[i]);
            }
            out.push(p);
            let mut d = idx.len();
            loop {
                if d == 0 {
                    return Ok(out);
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < self.values[d].1.len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
}

/// Line diagnostics collected while parsing a grid file.
#[derive(Clone, Debug, PartialEq)]
pub struct GridParseError {
    pub diagnostics: Vec<(usize, String)>,
}

impl fmt::Display for GridParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (line, msg)) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "line {line}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for GridParseError {}

/// Expands `a, b, lo..hi` into its values; ranges are inclusive integer ranges.
pub fn expand_values(s: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            if s.trim().is_empty() {
                continue;
            }
            return Err("empty list item".into());
        }
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| format!("range bound '{lo}' is not an integer"))?;
            let hi: i64 = hi.trim().parse().map_err(|_| format!("range bound '{hi}' is not an integer"))?;
            if hi < lo {
                return Err(format!("empty range {lo}..{hi}"));
            }
            if hi - lo > DEFAULT_BUDGET as i64 {
                return Err(format!("range {lo}..{hi} too long"));
            }
            out.extend((lo..=hi).map(|v| v.to_string()));
        } else {
            if item.contains(char::is_whitespace) {
                return Err(format!("value '{item}' contains whitespace"));
            }
            out.push(item.to_string());
        }
    }
    Ok(out)
}

const CTX_KEYS: [&str; 5] = ["identity", "digits", "max_terms", "rtol", "budget"];

/// Parses a grid file. `identity` is the target unless the file names one, in
/// which case both must agree.
pub fn parse_grid(text: &str, identity: Option<IdentityId>, ctx: &PrecisionCtx) -> std::result::Result<GridSpec, GridParseError> {
    let mut diags = Vec::new();
    let mut file_id = None;
    let mut ctx = ctx.clone();
    let mut budget = DEFAULT_BUDGET;
    let mut values: Vec<(String, Vec<String>)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, val)) = line.split_once('=') else {
            diags.push((line_no, format!("expected 'key = values', got '{line}'")));
            continue;
        };
        let key = key.trim();
        let val = val.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            diags.push((line_no, format!("bad key '{key}'")));
            continue;
        }
        if CTX_KEYS.contains(&key) {
            let r: std::result::Result<(), String> = match key {
                "identity" => IdentityId::parse(val).map(|id| file_id = Some(id)).ok_or(format!("unknown identity '{val}'")),
                "digits" => val.parse().map(|d| ctx.digits = d).map_err(|_| format!("digits must be an integer, got '{val}'")),
                "max_terms" => val.parse().map(|d| ctx.max_terms = d).map_err(|_| format!("max_terms must be an integer, got '{val}'")),
                "rtol" => val.parse().map(|d| ctx.rtol = d).map_err(|_| format!("rtol must be a number, got '{val}'")),
                _ => val.parse().map(|d| budget = d).map_err(|_| format!("budget must be an integer, got '{val}'")),
            };
            if let Err(e) = r {
                diags.push((line_no, e));
            }
            continue;
        }
        if values.iter().any(|(k, _)| k == key) {
            diags.push((line_no, format!("duplicate key '{key}'")));
            continue;
        }
        match expand_values(val) {
            Ok(v) => values.push((key.to_string(), v)),
            Err(e) => diags.push((line_no, e)),
        }
    }
    if let Err(e) = ctx.validate() {
        diags.push((0, e.to_string()));
    }
    let id = match (identity, file_id) {
        (Some(a), Some(b)) if a != b => {
            diags.push((0, format!("grid names identity {b} but {a} was requested")));
            a
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            diags.push((0, "no identity given".into()));
            IdentityId::SumTwo
        }
    };
    let spec = GridSpec { identity: id, values, ctx, budget };
    if spec.size() > budget {
        diags.push((0, format!("grid has {} points, budget is {budget}", spec.size())));
    }
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(GridParseError { diagnostics: diags })
    }
}

/// Report standing in for a grid point whose evaluation raised an error.
fn error_report(id: IdentityId, p: &Params, e: &Error) -> IdentityReport {
    let status = match e {
        Error::NonConvergent(_) | Error::TruncationError(_) => Status::INCONCLUSIVE,
        _ => Status::FAIL,
    };
    IdentityReport {
        identity_id: id,
        params: p.0.clone(),
        lhs: ComplexValue(Cx::zero()),
        rhs: ComplexValue(Cx::zero()),
        abs_err: f64::NAN,
        rel_err: f64::NAN,
        terms_used: 0,
        status,
        printed_form_status: PrintedStatus::NOT_APPLICABLE,
        discrepancy_note: format!("error: {e}"),
    }
}

/// Evaluates every grid point, in parallel, returning reports in grid order.
pub fn run_grid(spec: &GridSpec) -> Result<Vec<IdentityReport>> {
    spec.ctx.validate()?;
    let points = spec.points()?;
    Ok(points
        .par_iter()
        .map(|p| verify(spec.identity, p, &spec.ctx).unwrap_or_else(|e| error_report(spec.identity, p, &e)))
        .collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GridSummary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl GridSummary {
    pub fn of(reports: &[IdentityReport]) -> Self {
        let mut s = GridSummary { total: reports.len(), ..Default::default() };
        for r in reports {
            match r.status {
                Status::PASS => s.pass += 1,
                Status::FAIL => s.fail += 1,
                Status::INCONCLUSIVE => s.inconclusive += 1,
            }
        }
        s
    }

    /// 0 when everything passed, 1 on any failure, else 2 on any inconclusive point.
    pub fn exit_code(&self) -> i32 {
        if self.fail > 0 {
            1
        } else if self.inconclusive > 0 {
            2
        } else {
            0
        }
    }
}

pub fn write_jsonl<W: Write>(reports: &[IdentityReport], mut w: W) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 13] = [
    "identity_id",
    "params",
    "lhs_re",
    "lhs_im",
    "rhs_re",
    "rhs_im",
    "abs_err",
    "rel_err",
    "terms_used",
    "status",
    "printed_form_status",
    "discrepancy_note",
    "",
];

/// CSV with complex fields split into `_re`/`_im` columns and params as `k=v;k=v`.
pub fn write_csv<W: Write>(reports: &[IdentityReport], w: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&CSV_HEADER[..12])?;
    for r in reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let (lr, li) = r.lhs.0.approx_f64();
        let (rr, ri) = r.rhs.0.approx_f64();
        let status = serde_json::to_value(r.status).map_err(std::io::Error::other)?;
        let printed = serde_json::to_value(r.printed_form_status).map_err(std::io::Error::other)?;
        out.write_record([
            r.identity_id.as_str().to_string(),
            params.join(";"),
            lr.to_string(),
            li.to_string(),
            rr.to_string(),
            ri.to_string(),
            r.abs_err.to_string(),
            r.rel_err.to_string(),
            r.terms_used.to_string(),
            status.as_str().unwrap_or_default().to_string(),
            printed.as_str().unwrap_or_default().to_string(),
            r.discrepancy_note.clone(),
        ])?;
    }
    out.flush()
}
