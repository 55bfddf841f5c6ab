//! `qe2`: evaluate q-special functions and matrix elements, run identity
//! grids and oracle audits.

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qe2::identities::{expand_values, parse_grid, run_grid, write_csv, write_jsonl, GridSpec, GridSummary, IdentityId};
use qe2::qalgebra::{check_closing_identities, check_relations, covariance_check, u_match, DNormalization, FockBasis};
use qe2::qcore::{
    q_exp, q_exp_invbase, q_pochhammer, Cx, CxExt, PrecisionCtx, QParam, Real, SeriesResult, Surd, DEFAULT_ATOL,
};
use qe2::qspecial::{bessel_j, kummer_1f1, q_bessel, q_kummer, q_laguerre, q_laguerre_continued, QKummerArgs};
use qe2::repmatrix::{d_elem, d_scalar, f_weight, phi_mn, t_elem, u_elem, RepWeight, ZetaPoint};
use qe2::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_ORACLE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "qe2", version, about = "q-deformed E(2): special functions, matrix elements and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one function at one point.
    Eval {
        function: String,
        #[command(flatten)]
        common: Common,
    },
    /// Verify an identity over a parameter grid (flags accept lists and lo..hi ranges).
    Verify {
        identity: String,
        #[command(flatten)]
        common: Common,
        /// Grid file with `key = values` lines.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Audit the operator oracle: relations, closing, u-match, covariance.
    Oracle {
        check: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    i: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    jw: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    jcol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<String>,
    /// Fock cutoff of the oracle basis.
    #[arg(long = "N")]
    n_max: Option<String>,
    /// Charge range of the oracle basis, e.g. -8..8.
    #[arg(long = "J", allow_hyphen_values = true)]
    j_range: Option<String>,
    /// Block size for u-match.
    #[arg(long)]
    block: Option<u32>,
    /// NOPoly degree cutoff for covariance.
    #[arg(long)]
    cutoff: Option<u32>,
    /// D normalization for covariance: covariant or printed.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long, env = "QE2_DIGITS", default_value_t = 50)]
    digits: u32,
    #[arg(long = "max-terms", default_value_t = 500)]
    max_terms: usize,
    #[arg(long, default_value_t = 1e-12)]
    rtol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn ctx(&self) -> Result<PrecisionCtx, Failure> {
        PrecisionCtx::new(self.digits, self.max_terms, self.rtol, DEFAULT_ATOL).map_err(Failure::usage)
    }

    /// Assigned flags in a fixed order, as raw strings.
    fn assignments(&self) -> Vec<(&'static str, &str)> {
        let all: [(&'static str, &Option<String>); 20] = [
            ("q", &self.q),
            ("lambda", &self.lambda),
            ("x", &self.x),
            ("y", &self.y),
            ("r", &self.r),
            ("j", &self.j),
            ("k", &self.k),
            ("m", &self.m),
            ("n", &self.n),
            ("i", &self.i),
            ("jw", &self.jw),
            ("jcol", &self.jcol),
            ("a", &self.a),
            ("b", &self.b),
            ("c", &self.c),
            ("d", &self.d),
            ("alpha", &self.alpha),
            ("zeta", &self.zeta),
            ("N", &self.n_max),
            ("J", &self.j_range),
        ];
        all.into_iter().filter_map(|(k, v)| v.as_deref().map(|s| (k, s))).collect()
    }
}

/// A terminal condition with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, msg: e.to_string() }
    }

    fn input(e: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, msg: e.to_string() }
    }

    /// Library errors during evaluation.
    fn lib(e: Error) -> Self {
        let code = match e {
            Error::NonConvergent(_) | Error::TruncationError(_) => EXIT_INCONCLUSIVE,
            Error::OracleFailure(_) | Error::DegreeOverflow(_) => EXIT_ORACLE,
            _ => EXIT_INPUT,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("qe2: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Eval { function, common } => cmd_eval(&function, &common),
        Command::Verify { identity, common, grid, format } => cmd_verify(&identity, &common, grid.as_deref(), format),
        Command::Oracle { check, common } => cmd_oracle(&check, &common),
    }
}

fn emit(out: &Option<String>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| Failure::input(format!("{path}: {e}"))),
        None => io::stdout().write_all(bytes).map_err(|e| Failure::input(e.to_string())),
    }
}

/// Single-valued flag lookup for `eval` and `oracle`.
struct Point<'a> {
    flags: Vec<(&'static str, &'a str)>,
}

impl<'a> Point<'a> {
    fn raw(&self, k: &str) -> Result<&'a str, Failure> {
        self.flags
            .iter()
            .find(|(n, _)| *n == k)
            .map(|(_, v)| *v)
            .ok_or_else(|| Failure::usage(format!("missing --{k}")))
    }

    fn real(&self, k: &str) -> Result<Real, Failure> {
        let s = self.raw(k)?;
        Real::parse(s).ok_or_else(|| Failure::usage(format!("--{k} expects a number or p/r, got '{s}'")))
    }

    fn cx(&self, k: &str) -> Result<Cx, Failure> {
        self.real(k).map(Cx::real)
    }

    fn int(&self, k: &str) -> Result<i64, Failure> {
        let s = self.raw(k)?;
        s.trim().parse().map_err(|_| Failure::usage(format!("--{k} expects an integer, got '{s}'")))
    }

    fn uint(&self, k: &str) -> Result<u64, Failure> {
        let v = self.int(k)?;
        u64::try_from(v).map_err(|_| Failure::usage(format!("--{k} must be nonnegative, got {v}")))
    }

    fn int_or(&self, k: &str, d: i64) -> Result<i64, Failure> {
        if self.flags.iter().any(|(n, _)| *n == k) {
            self.int(k)
        } else {
            Ok(d)
        }
    }

    fn q(&self) -> Result<QParam, Failure> {
        QParam::parse(self.raw("q")?).map_err(Failure::usage)
    }

    fn weight(&self) -> Result<RepWeight, Failure> {
        RepWeight::parse(self.raw("lambda")?).map_err(Failure::usage)
    }
}

fn cx_json(c: &Cx, digits: usize) -> Value {
    let (re, im) = c.approx_f64();
    json!({ "re": re, "im": im, "re_str": c.re.to_sci(digits), "im_str": c.im.to_sci(digits) })
}

/// Value record of `eval`: the library result, unchanged.
pub fn eval_record(function: &str, params: &[(&str, &str)], value: &Cx, series: Option<&SeriesResult>, digits: usize) -> Value {
    let p: serde_json::Map<String, Value> = params.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect();
    json!({
        "function": function,
        "params": p,
        "value": cx_json(value, digits),
        "terms_used": series.map(|s| s.terms_used),
        "tail_estimate": series.map(|s| s.tail_estimate),
        "converged": series.map_or(true, |s| s.converged),
    })
}

fn cmd_eval(function: &str, common: &Common) -> Result<u8, Failure> {
    let ctx = common.ctx()?;
    let _g = ctx.enter();
    let pt = Point { flags: common.assignments() };
    for (k, v) in &pt.flags {
        if v.contains("..") || v.contains(',') {
            return Err(Failure::usage(format!("eval takes single values, got --{k} {v}")));
        }
    }
    let series = |r: qe2::Result<SeriesResult>| r.map_err(Failure::lib);
    let plain = |r: qe2::Result<Cx>| r.map_err(Failure::lib);
    let (value, sr): (Cx, Option<SeriesResult>) = match function.replace('-', "_").as_str() {
        "q_exp" => {
            let s = series(q_exp(&pt.cx("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "q_exp_invbase" => {
            let s = series(q_exp_invbase(&pt.cx("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "q_pochhammer" => (q_pochhammer(&pt.cx("a")?, &pt.q()?, pt.uint("k")?), None),
        "q_kummer" => {
            let args = QKummerArgs::new(pt.cx("a")?, pt.cx("b")?, pt.cx("x")?);
            let s = series(q_kummer(&args, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "q_bessel" => {
            let s = series(q_bessel(pt.int("k")?, &pt.cx("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "q_laguerre" => {
            let s = series(q_laguerre(pt.uint("n")?, pt.int("alpha")?, &pt.cx("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "q_laguerre_continued" => {
            let s = series(q_laguerre_continued(pt.uint("n")?, pt.int("alpha")?, &pt.cx("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "kummer_1f1" => {
            let s = series(kummer_1f1(&pt.real("c")?, &pt.real("d")?, &pt.cx("x")?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "bessel_j" => {
            let s = series(bessel_j(pt.int("k")?, &pt.cx("x")?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "phi_mn" => {
            let s = series(phi_mn(pt.uint("m")?, pt.uint("n")?, &pt.real("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "f_weight" => {
            let zeta = ZetaPoint::value(pt.real("zeta")?).map_err(Failure::usage)?;
            let s = series(f_weight(pt.uint("j")?, &pt.weight()?, &zeta, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "d_scalar" => {
            let s = series(d_scalar(pt.uint("j")?, &pt.weight()?, &pt.real("x")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "d_elem" => {
            let s = series(d_elem(pt.int("j")?, &pt.weight()?, pt.uint("m")?, pt.uint("n")?, &pt.q()?, &ctx))?;
            (s.value.clone(), Some(s))
        }
        "u_elem" => (plain(u_elem(pt.uint("m")?, pt.int("i")?, pt.uint("n")?, pt.int_or("jw", 0)?, &pt.q()?, &ctx))?, None),
        "t_elem" => (plain(t_elem(pt.int("i")?, pt.int("jcol")?, &pt.weight()?, &pt.real("x")?, &pt.q()?, &ctx))?, None),
        other => return Err(Failure::usage(format!("unknown function '{other}'"))),
    };
    let rec = eval_record(function, &pt.flags, &value, sr.as_ref(), ctx.digits as usize);
    emit(&common.out, format!("{rec}\n").as_bytes())?;
    Ok(if sr.is_some_and(|s| !s.converged) { EXIT_INCONCLUSIVE } else { 0 })
}

fn cmd_verify(identity: &str, common: &Common, grid: Option<&str>, format: Format) -> Result<u8, Failure> {
    let id = IdentityId::parse(identity).ok_or_else(|| Failure::usage(format!("unknown identity '{identity}'")))?;
    let ctx = common.ctx()?;
    let mut spec = match grid {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))?;
            parse_grid(&text, Some(id), &ctx).map_err(|e| Failure::input(format!("{path}:\n{e}")))?
        }
        None => GridSpec::new(id, ctx),
    };
    for (k, v) in common.assignments() {
        let vals = expand_values(v).map_err(|e| Failure::usage(format!("--{k}: {e}")))?;
        spec = spec.set(k, vals);
    }
    let reports = run_grid(&spec).map_err(Failure::input)?;
    let mut buf = Vec::new();
    match format {
        Format::Json => write_jsonl(&reports, &mut buf),
        Format::Csv => write_csv(&reports, &mut buf),
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    emit(&common.out, &buf)?;
    let s = GridSummary::of(&reports);
    eprintln!("{}: {} points, {} pass, {} fail, {} inconclusive", id, s.total, s.pass, s.fail, s.inconclusive);
    Ok(s.exit_code() as u8)
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let v = expand_values(s).map_err(|e| Failure::usage(format!("--J: {e}")))?;
    let ints: Vec<i64> = v.iter().filter_map(|x| x.parse().ok()).collect();
    match (ints.first(), ints.last()) {
        (Some(a), Some(b)) if ints.len() == v.len() => Ok((*a, *b)),
        _ => Err(Failure::usage(format!("--J expects an integer range lo..hi, got '{s}'"))),
    }
}

fn cmd_oracle(check: &str, common: &Common) -> Result<u8, Failure> {
    let ctx = common.ctx()?;
    let _g = ctx.enter();
    let pt = Point { flags: common.assignments() };
    let q = pt.q()?;
    let oracle_err = |name: &str, e: Error| Failure { code: EXIT_ORACLE, msg: format!("{name}: {e}") };
    let mut lines = Vec::new();
    let ok = match check.replace('_', "-").as_str() {
        "relations" | "closing" => {
            let n = pt.int_or("N", 10)? as u32;
            let (lo, hi) = match pt.raw("J") {
                Ok(s) => parse_range(s)?,
                Err(_) => (-8, 8),
            };
            let basis = FockBasis::new(n, lo, hi).map_err(Failure::usage)?;
            let checks = if check.starts_with('r') {
                check_relations::<Surd>(&basis, &q)
            } else {
                check_closing_identities::<Surd>(&basis, &q, pt.int_or("k", 4)? as u32)
            }
            .map_err(|e| oracle_err(check, e))?;
            for c in &checks {
                lines.push(serde_json::to_value(c).expect("serialisable"));
            }
            checks.iter().all(|c| c.exact)
        }
        "u-match" => {
            let n = pt.int_or("N", 20)? as u32;
            let block = common.block.unwrap_or((n / 2).min(10));
            let charges: Vec<i64> = match pt.raw("J") {
                Ok(s) => expand_values(s)
                    .map_err(|e| Failure::usage(format!("--J: {e}")))?
                    .iter()
                    .map(|v| v.parse().map_err(|_| Failure::usage(format!("--J: bad charge '{v}'"))))
                    .collect::<Result<_, _>>()?,
                Err(_) => vec![-2, 0, 2],
            };
            let m = u_match(n, block, &charges, &q, &ctx).map_err(|e| oracle_err("u-match", e))?;
            let pass = m.max_abs_err <= ctx.rtol;
            lines.push(serde_json::to_value(&m).expect("serialisable"));
            pass
        }
        "covariance" => {
            let w = pt.weight()?;
            let norm = match common.norm.as_deref().unwrap_or("covariant") {
                "covariant" => DNormalization::Covariant,
                "printed" => DNormalization::Printed,
                o => return Err(Failure::usage(format!("--norm expects covariant or printed, got '{o}'"))),
            };
            let c = covariance_check(pt.int("j")?, &w, common.cutoff.unwrap_or(8), &q, norm)
                .map_err(|e| oracle_err("covariance", e))?;
            lines.push(serde_json::to_value(&c).expect("serialisable"));
            c.p_relation && c.k_relation
        }
        other => return Err(Failure::usage(format!("unknown oracle check '{other}'"))),
    };
    let mut buf = String::new();
    for l in &lines {
        buf.push_str(&format!("{}\n", json!({ "check": check, "q": q.label(), "result": l })));
    }
    emit(&common.out, buf.as_bytes())?;
    Ok(if ok { 0 } else { EXIT_FAIL })
}
