//! Batch front door: one JSON input document in, one JSON report out.

use std::collections::BTreeMap;

use num_traits::One;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::closure::{self, ClosureProvider, Cr, Mlr, Sr};
use crate::coder::{self, DyadicFunction, Machine};
use crate::covers::{self, TestFamily};
use crate::diagonal::{self, DiagonalTrace, TraceReport};
use crate::error::{Error, Result};
use crate::martingale::{self, MartingaleTable, Strategy};
use crate::series;
use crate::space::rational::{decimal, format, parse, pow, Rational};
use crate::space::{BitString, Clopen, PeriodicPoint, PrefixFreeSet, StagedOpenSet};

pub const SUBCOMMANDS: &[&str] = &[
    "measure",
    "reduce",
    "condition",
    "power",
    "covers",
    "fairness",
    "winning-set",
    "vk-verify",
    "translate",
    "average",
    "reset",
    "mixture",
    "p1",
    "p2",
    "p3",
    "main-lemma",
    "verify-trace",
    "schnorr-merge",
    "power-test",
    "tails-to-power",
    "kc-build",
    "complexity",
    "g-to-machine",
    "flatten",
    "normalize",
    "b-set",
    "series-to-open",
    "open-to-series",
    "vn-from-g",
    "f-from-test",
    "encode-series",
    "extract-series",
    "tree-embed",
];

const DECIMAL_DIGITS: usize = 12;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, clap::Args)]
pub struct Params {
    /// Closure case for p1/p2/p3, main-lemma and verify-trace: mlr, cr or sr.
    #[arg(long)]
    pub case: Option<String>,
    /// Search or tabulation depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Diagonalization stages.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Threshold, as an exact rational such as 3/2.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    /// Bound on linear searches.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Add decimal approximations next to exact values in checks.
    #[arg(long)]
    pub decimal: bool,
}

const DEFAULT_DEPTH: usize = 6;
const DEFAULT_STAGES: usize = 3;
const DEFAULT_K: usize = 1;
const DEFAULT_C: usize = 0;
const DEFAULT_CAP: usize = 16;

impl Params {
    pub fn depth(&self) -> usize {
        self.depth.unwrap_or(DEFAULT_DEPTH)
    }

    pub fn stages(&self) -> usize {
        self.stages.unwrap_or(DEFAULT_STAGES)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    pub fn c(&self) -> usize {
        self.c.unwrap_or(DEFAULT_C)
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    /// Effective values, defaults filled in.
    fn echo(&self) -> Value {
        json!({
            "case": self.case,
            "depth": self.depth(),
            "stages": self.stages(),
            "q": self.q,
            "k": self.k(),
            "c": self.c(),
            "cap": self.cap(),
            "decimal": self.decimal,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub subcommand: String,
    pub input: Value,
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub document: Value,
    pub pass: bool,
}

impl Report {
    pub fn render(&self) -> String {
        render(&self.document)
    }
}

pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("values always serialize");
    s.push('\n');
    s
}

/// A structured error report, certificate included for `NoEscape`.
pub fn error_document(job: &Job, err: &Error) -> Value {
    let mut e = json!({ "name": err.name(), "message": err.to_string() });
    if let Error::NoEscape { certificate, .. } = err {
        e["certificate"] = to_value(certificate.as_ref());
    }
    json!({
        "subcommand": job.subcommand,
        "parameters": job.params.echo(),
        "input": job.input,
        "error": e,
        "verdict": "ERROR",
    })
}

/// Splits `p2-mlr` into `p2` and `mlr`.
fn split_case(name: &str) -> Option<(&str, &str)> {
    let (p, case) = name.split_once('-')?;
    (matches!(p, "p1" | "p2" | "p3") && matches!(case, "mlr" | "cr" | "sr")).then_some((p, case))
}

pub fn is_known(subcommand: &str) -> bool {
    SUBCOMMANDS.contains(&subcommand) || split_case(subcommand).is_some()
}

pub fn dispatch(job: &Job) -> Result<Report> {
    let mut params = job.params.clone();
    let mut name = job.subcommand.as_str();
    if let Some((p, case)) = split_case(name) {
        name = p;
        params.case = Some(case.to_string());
    }
    if !SUBCOMMANDS.contains(&name) {
        return Err(Error::UnknownSubcommand(job.subcommand.clone()));
    }
    let mut ctx = Ctx { doc: &job.input, params: &params, checks: Vec::new() };
    let output = run(name, &mut ctx)?;
    let pass = ctx.checks.iter().all(|c| c["pass"] == "PASS");
    let document = json!({
        "subcommand": job.subcommand,
        "parameters": params.echo(),
        "input": job.input,
        "output": output,
        "checks": ctx.checks,
        "verdict": if pass { "PASS" } else { "FAIL" },
    });
    Ok(Report { document, pass })
}

fn to_value<T: Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

struct Ctx<'a> {
    doc: &'a Value,
    params: &'a Params,
    checks: Vec<Value>,
}

impl Ctx<'_> {
    fn raw(&self, name: &str) -> Option<&Value> {
        self.doc.get(name).filter(|v| !v.is_null())
    }

    fn field<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let v = self.raw(name).ok_or_else(|| Error::Parse(format!("missing field `{name}`")))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("field `{name}`: {e}")))
    }

    fn field_or<T: DeserializeOwned>(&self, name: &str, default: T) -> Result<T> {
        if self.raw(name).is_some() {
            self.field(name)
        } else {
            Ok(default)
        }
    }

    fn sigma(&self) -> Result<BitString> {
        self.field_or("sigma", BitString::empty())
    }

    fn usize_param(&self, name: &str, flag: Option<usize>) -> Result<usize> {
        match flag {
            Some(v) => Ok(v),
            None => self.field(name),
        }
    }

    fn rational(&self, name: &str) -> Result<Rational> {
        let v = self.raw(name).ok_or_else(|| Error::Parse(format!("missing field `{name}`")))?;
        rational_value(v)
    }

    fn q(&self) -> Result<Rational> {
        match &self.params.q {
            Some(q) => parse(q),
            None => self.rational("q").map_err(|_| Error::Parse("missing threshold: pass --q".into())),
        }
    }

    fn set(&self, name: &str) -> Result<PrefixFreeSet> {
        let v = self.raw(name).ok_or_else(|| Error::Parse(format!("missing field `{name}`")))?;
        set_value(v)
    }

    /// The whole document, or its `set` field.
    fn main_set(&self) -> Result<PrefixFreeSet> {
        if self.doc.is_array() {
            set_value(self.doc)
        } else if self.raw("elements").is_some() {
            set_value(self.doc)
        } else {
            self.set("set")
        }
    }

    fn strategy(&self, name: &str) -> Result<Strategy> {
        if name == "strategy" && self.raw("strategy").is_none() {
            if let Some(t) = self.raw("table") {
                let table: MartingaleTable =
                    serde_json::from_value(t.clone()).map_err(|e| Error::Parse(format!("field `table`: {e}")))?;
                return Ok(Strategy::tabulated(table));
            }
        }
        self.field(name)
    }

    fn open(&self) -> Result<Clopen> {
        match self.raw("open") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("field `open`: {e}"))),
            None => Ok(Clopen::from_prefix_free(&self.set("set")?)),
        }
    }

    fn series<K: DeserializeOwned + Ord + Clone>(&self, name: &str) -> Result<DyadicFunction<K>> {
        let v = self.raw(name).ok_or_else(|| Error::Parse(format!("missing field `{name}`")))?;
        let inner = v.get("values").unwrap_or(v);
        let map: BTreeMap<K, Value> =
            serde_json::from_value(inner.clone()).map_err(|e| Error::Parse(format!("field `{name}`: {e}")))?;
        let values = map.into_iter().map(|(k, v)| Ok((k, rational_value(&v)?))).collect::<Result<_>>()?;
        DyadicFunction::new(values)
    }

    fn case(&self) -> Result<&str> {
        match self.params.case.as_deref() {
            Some(c @ ("mlr" | "cr" | "sr")) => Ok(c),
            Some(other) => Err(Error::Parse(format!("unknown case {other:?}: expected mlr, cr or sr"))),
            None => Err(Error::Parse("missing --case".into())),
        }
    }

    fn push(&mut self, name: impl Into<String>, lhs: &Rational, relation: &str, rhs: &Rational) {
        let pass = match relation {
            "<=" => lhs <= rhs,
            "<" => lhs < rhs,
            "=" => lhs == rhs,
            ">=" => lhs >= rhs,
            _ => unreachable!("relation {relation}"),
        };
        let mut c = json!({
            "name": name.into(),
            "lhs": format(lhs),
            "relation": relation,
            "rhs": format(rhs),
            "pass": verdict(pass),
        });
        if self.params.decimal {
            c["lhsDecimal"] = json!(decimal(lhs, DECIMAL_DIGITS));
            c["rhsDecimal"] = json!(decimal(rhs, DECIMAL_DIGITS));
        }
        self.checks.push(c);
    }

    fn holds(&mut self, name: impl Into<String>, pass: bool) {
        self.checks.push(json!({ "name": name.into(), "pass": verdict(pass) }));
    }

    fn fairness(&mut self, d: &Strategy) -> Result<()> {
        let depth = self.params.depth();
        let unfair = d.first_unfair(depth)?;
        self.checks.push(json!({
            "name": format!("fair to depth {depth}"),
            "firstUnfair": unfair,
            "pass": verdict(unfair.is_none()),
        }));
        Ok(())
    }

    fn exact(&self, r: &Rational) -> Value {
        if self.params.decimal {
            json!({ "exact": format(r), "decimal": decimal(r, DECIMAL_DIGITS) })
        } else {
            json!(format(r))
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rational_value(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Rational::from_integer(i.into())),
            None => Err(Error::InvalidRational(n.to_string())),
        },
        other => Err(Error::InvalidRational(other.to_string())),
    }
}

/// A prefix-free set given as `["0", "10"]` or `{"elements": [...]}`.
fn set_value(v: &Value) -> Result<PrefixFreeSet> {
    let elements = v.get("elements").unwrap_or(v);
    let strings: Vec<BitString> =
        serde_json::from_value(elements.clone()).map_err(|e| Error::Parse(format!("prefix-free set: {e}")))?;
    PrefixFreeSet::new(strings)
}

fn tests_value<T: DeserializeOwned>(ctx: &Ctx) -> Result<Vec<T>> {
    ctx.field_or("tests", Vec::new())
}

fn run(name: &str, ctx: &mut Ctx) -> Result<Value> {
    match name {
        "measure" => {
            let u = ctx.main_set()?;
            Ok(json!({ "set": u, "measure": ctx.exact(&u.measure()) }))
        }
        "reduce" => {
            let strings: Vec<BitString> = if ctx.doc.is_array() {
                serde_json::from_value(ctx.doc.clone())?
            } else {
                ctx.field("strings")?
            };
            let u = PrefixFreeSet::reduce(strings);
            Ok(json!({ "set": u, "measure": ctx.exact(&u.measure()) }))
        }
        "condition" => {
            let u = ctx.main_set()?;
            let sigma = ctx.sigma()?;
            let c = u.condition(&sigma);
            let cm = u.conditional_measure(&sigma);
            ctx.push("measure of conditioned set equals conditional measure", &c.measure(), "=", &cm);
            Ok(json!({ "conditioned": c, "conditionalMeasure": format(&cm) }))
        }
        "power" => {
            let u = ctx.main_set()?;
            let n = ctx.usize_param("n", None)?;
            let p = u.power(n)?;
            ctx.push(format!("mu(U^{n}) = mu(U)^{n}"), &p.measure(), "=", &pow(&u.measure(), n));
            Ok(json!({ "power": p, "measure": format(&p.measure()) }))
        }
        "covers" => {
            let u = ctx.set("set")?;
            let v = ctx.set("other")?;
            Ok(json!({ "covers": u.covers(&v) }))
        }
        "fairness" => {
            let d = ctx.strategy("strategy")?;
            ctx.fairness(&d)?;
            Ok(json!({ "normed": d.is_normed()?, "root": format(&d.value(&BitString::empty())?) }))
        }
        "winning-set" => {
            let d = ctx.strategy("strategy")?;
            let q = ctx.q()?;
            let w = martingale::winning_set(&d, &q, ctx.params.depth())?;
            let root = d.value(&BitString::empty())?;
            ctx.push("mu(winning set) <= d(empty)/q", &w.generators.measure(), "<=", &(root / &q));
            Ok(to_value(&w))
        }
        "vk-verify" => {
            let table: MartingaleTable = match ctx.raw("table") {
                Some(_) => ctx.field("table")?,
                None => ctx.strategy("strategy")?.tabulate(ctx.params.depth())?,
            };
            let q = ctx.q()?;
            let r = martingale::verify_ville_kolmogorov(&table, &ctx.sigma()?, &q)?;
            if r.degenerate {
                ctx.holds("zero capital at sigma: vacuous", true);
            } else {
                ctx.push("mu(U_{d,sigma,q} | sigma) <= 1/q", &r.measured, "<=", &r.bound);
            }
            Ok(to_value(&r))
        }
        "translate" => {
            let d = ctx.strategy("strategy")?;
            let sigma = ctx.sigma()?;
            let normalized: bool = ctx.field_or("normalized", false)?;
            let t = if normalized { martingale::normalized_translate(&d, &sigma)? } else { martingale::translate(&d, &sigma) };
            ctx.push("translate(empty) = d(sigma)", &t.value(&BitString::empty())?, "=", &{
                let v = d.value(&sigma)?;
                if normalized {
                    Rational::one()
                } else {
                    v
                }
            });
            ctx.fairness(&t)?;
            Ok(json!({ "strategy": t }))
        }
        "average" => {
            let d = ctx.strategy("strategy")?;
            let levels = ctx.usize_param("levels", ctx.params.k)?;
            let shift: bool = ctx.field_or("shift", true)?;
            let a = martingale::average_truncated(&d, levels, shift);
            if d.is_normed()? {
                ctx.push("averaged strategy is normed", &a.value(&BitString::empty())?, "=", &Rational::one());
            }
            ctx.fairness(&a)?;
            Ok(json!({ "strategy": a }))
        }
        "reset" => {
            let d = ctx.strategy("strategy")?;
            let q = ctx.q()?;
            let u = ctx.set("blocks")?;
            let r = martingale::reset(&d, &q, &u)?;
            for k in 1..=ctx.params.k() {
                let target = pow(&q, k);
                for w in u.power(k)?.iter() {
                    ctx.push(format!("D({w}) >= q^{k}"), &r.value(w)?, ">=", &target);
                }
            }
            ctx.fairness(&r)?;
            Ok(json!({ "strategy": r }))
        }
        "mixture" => {
            let d = ctx.strategy("strategy")?;
            let e = ctx.strategy("extra")?;
            let n = ctx.usize_param("n", None)?;
            let m = martingale::mixture(&d, &e, n)?;
            ctx.push("mixture is normed", &m.value(&BitString::empty())?, "=", &Rational::one());
            ctx.fairness(&m)?;
            Ok(json!({ "strategy": m }))
        }
        "p1" | "p2" | "p3" => closure_op(name, ctx),
        "main-lemma" => main_lemma(ctx),
        "verify-trace" => verify_trace(ctx),
        "schnorr-merge" => {
            let t: TestFamily = ctx.field("test")?;
            let k = ctx.usize_param("K", ctx.params.k)?;
            let point: Option<PeriodicPoint> = ctx.field_or("point", None)?;
            let r = covers::schnorr_merge(&t, k, point.as_ref())?;
            for l in &r.per_k {
                ctx.push(format!("mu(V_{}|sigma) for k = {}", l.level, l.k), &l.measure, "<=", &l.bound);
            }
            ctx.push("merged measure <= sum of level bounds", &r.measure, "<=", &r.bound);
            ctx.push("sum of level bounds <= 1/2", &r.bound, "<=", &r.cap);
            if let Some(pc) = &r.point_check {
                ctx.holds(format!("every tail of {} is merged", pc.point), pc.pass);
            }
            Ok(to_value(&r))
        }
        "power-test" => {
            let u = ctx.main_set()?;
            let n = ctx.usize_param("n", None)?;
            let t = covers::power_test(&u, n)?;
            let mu = u.measure();
            for (i, level) in t.levels().iter().enumerate() {
                ctx.push(format!("mu(level {i}) = mu(U)^{i}"), &level.measure(), "=", &pow(&mu, i));
            }
            Ok(to_value(&t))
        }
        "tails-to-power" => {
            let u = ctx.main_set()?;
            let x: PeriodicPoint = ctx.field("point")?;
            let n = ctx.usize_param("n", None)?;
            let cert = covers::tails_to_power(&u, &x, n)?;
            ctx.holds(format!("{x} has a prefix in U^{n}"), cert.check(&u, &x));
            Ok(to_value(&cert))
        }
        "kc-build" => {
            let requests: Vec<(usize, String)> = ctx.field("requests")?;
            let m = coder::kc_build(&requests)?;
            let w = coder::kc_weight(&requests);
            ctx.push("Kraft sum <= 1", &w, "<=", &Rational::one());
            ctx.push("domain measure equals request weight", &m.domain_measure(), "=", &w);
            let mut want: Vec<usize> = requests.iter().map(|r| r.0).collect();
            let mut got: Vec<usize> = m.table().keys().map(BitString::len).collect();
            want.sort_unstable();
            got.sort_unstable();
            ctx.holds("code lengths match requests", want == got);
            Ok(json!({ "machine": m, "weight": format(&w) }))
        }
        "complexity" => {
            let m: Machine<String> = ctx.field("machine")?;
            let target: String = ctx.field("target")?;
            Ok(json!({ "complexity": m.complexity(&target), "domainMeasure": format(&m.domain_measure()) }))
        }
        "g-to-machine" => {
            let g: DyadicFunction<BitString> = ctx.series("g")?;
            let r = coder::g_to_machine(&g, ctx.usize_param("c", ctx.params.c.or(Some(DEFAULT_C)))?)?;
            ctx.push("Kraft sum <= 1", &r.weight, "<=", &Rational::one());
            for b in &r.bounds {
                ctx.push(
                    format!("K({}) <= ceil(-log2 g) + c + 1", b.target),
                    &Rational::from_integer(b.complexity.into()),
                    "<=",
                    &Rational::from_integer(b.bound.into()),
                );
            }
            Ok(to_value(&r))
        }
        "flatten" => {
            let raw: Vec<Value> = ctx.field("stages")?;
            let stages = raw
                .iter()
                .map(|s| {
                    let m: BTreeMap<usize, Value> = serde_json::from_value(s.clone())?;
                    m.into_iter().map(|(i, v)| Ok((i, rational_value(&v)?))).collect::<Result<BTreeMap<_, _>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let h = coder::flatten_leftce(&stages)?;
            let g = coder::aggregate(&h);
            if let Some(last) = stages.last() {
                for (i, v) in last {
                    ctx.push(format!("increments of {i} sum to its final value"), &g.get(i), "=", v);
                }
            }
            Ok(json!({ "h": h, "aggregate": g }))
        }
        "normalize" => {
            let f: DyadicFunction<usize> = ctx.series("f")?;
            let n = ctx.rational("n")?;
            let out = coder::normalize_sum(&f, &n)?;
            ctx.push("normalized sum", &out.sum(), "=", &n);
            Ok(json!({ "f": out }))
        }
        "b-set" => {
            let n = ctx.usize_param("n", None)?;
            let alpha = ctx.rational("alpha")?;
            let b = series::b_set(n, &alpha)?;
            ctx.push(format!("mu(B_{{{n},alpha}}) = alpha"), &b.measure(), "=", &alpha);
            Ok(json!({ "open": b, "generators": b.to_prefix_free(1 << 12).ok() }))
        }
        "series-to-open" => {
            let f: DyadicFunction<usize> = ctx.series("f")?;
            let r = series::series_to_open(&f)?;
            ctx.push("mu(U) = 1 - prod(1 - f(n))", &r.measure, "=", &r.product_measure);
            Ok(to_value(&r))
        }
        "open-to-series" => {
            let n = ctx.usize_param("n", None)?;
            if ctx.raw("staged").is_some() {
                let v: StagedOpenSet = ctx.field("staged")?;
                let r = series::open_to_series_approx(&v, n, ctx.params.c())?;
                ctx.push("mu(B_{n,alpha} minus V[n]) <= 2^(-n-c)", &r.leak, "<=", &r.allowance);
                Ok(to_value(&r))
            } else {
                let v = ctx.open()?;
                let alpha = series::open_to_series_sup(&v, n);
                ctx.holds("B_{n,alpha} within V", v.covers(&series::b_set(n, &alpha)?));
                Ok(json!({ "n": n, "alpha": format(&alpha) }))
            }
        }
        "vn-from-g" => {
            let g: DyadicFunction<BitString> = ctx.series("g")?;
            let r = series::vn_from_g(&g, ctx.usize_param("n", None)?)?;
            ctx.push("mu(V_n) <= 2S/n", &r.measure, "<=", &r.bound);
            Ok(to_value(&r))
        }
        "f-from-test" => {
            let t: TestFamily = ctx.field("test")?;
            let r = series::f_from_test(&t)?;
            ctx.push("sum f <= sum n mu(U_n)", &r.f.sum(), "<=", &r.bound);
            Ok(to_value(&r))
        }
        "encode-series" => {
            let a: Vec<usize> = ctx.field("exponents")?;
            let r = series::encode_series(&a, &ctx.q()?)?;
            ctx.push("sum 2^-a_i < 1/q", &r.weight, "<", &r.q.recip());
            ctx.push("mu(U) = 1 - prod(1 - 2^-a_i)", &r.measure, "=", &r.product_measure);
            for w in &r.wins {
                ctx.push(format!("capital after block I_{{{},{}}}", w.index, w.exponent), &w.capital, ">=", &r.q);
            }
            Ok(to_value(&r))
        }
        "extract-series" => {
            let w = ctx.open()?;
            let n = ctx.usize_param("n", None)?;
            let lmax = ctx.usize_param("lmax", ctx.params.depth)?;
            let r = series::extract_series(&w, n, lmax);
            ctx.push("1 - prod(1 - 2^-b_i) <= mu(W)", &r.product_measure, "<=", &r.measure);
            Ok(to_value(&r))
        }
        "tree-embed" => {
            let d = ctx.strategy("strategy")?;
            let r = series::tree_embed(&d, ctx.params.depth(), ctx.params.cap())?;
            ctx.holds("incomparable strings keep incomparable images", r.incomparable);
            ctx.holds("prefix order is preserved", r.monotone);
            ctx.holds("image prefixes stay below 2 - 2^-|sigma|", r.level_bounds);
            ctx.push("largest capital <= 2", &r.max_capital, "<=", &Rational::from_integer(2.into()));
            Ok(to_value(&r))
        }
        _ => unreachable!("checked against SUBCOMMANDS"),
    }
}

fn closure_op(name: &str, ctx: &mut Ctx) -> Result<Value> {
    let sigma = ctx.sigma()?;
    match (name, ctx.case()?) {
        ("p1", "mlr") => {
            let v = closure::p1_mlr(&ctx.main_set()?, &sigma)?;
            ctx.push("mu(conditioned) < 1", &v.measure(), "<", &Rational::one());
            Ok(json!({ "conditioned": v, "measure": format(&v.measure()) }))
        }
        ("p2", "mlr") => {
            let r = closure::p2_mlr(&ctx.main_set()?, &ctx.q()?)?;
            ctx.push("mu(V) <= mu(U)/q", &r.measure, "<=", &r.bound);
            ctx.push("mu(U)/q < 1", &r.bound, "<", &Rational::one());
            ctx.holds("V covers U", r.covers_u);
            ctx.holds("V covers every full cylinder", r.covers_full_cylinders);
            Ok(to_value(&r))
        }
        ("p3", "mlr") => {
            let t: TestFamily = ctx.field("test")?;
            let r = closure::p3_mlr(&ctx.main_set()?, &sigma, ctx.params.k(), &t)?;
            ctx.push("mu(V|sigma) < 1", &r.cond_after, "<", &Rational::one());
            ctx.holds("V covers U", r.covers_u);
            ctx.holds(format!("V covers T_{}", r.n_e), r.covers_level);
            Ok(to_value(&r))
        }
        ("p1", "cr") => {
            let d = ctx.strategy("strategy")?;
            match closure::p1_cr(&d, &ctx.q()?, &sigma, false)? {
                Some((t, q)) => {
                    ctx.push("conditioned strategy is normed", &t.value(&BitString::empty())?, "=", &Rational::one());
                    ctx.push("conditioned threshold > 1", &q, ">=", &Rational::one());
                    Ok(json!({ "strategy": t, "threshold": format(&q) }))
                }
                None => unreachable!("dead capital is an error here"),
            }
        }
        ("p2", "cr") => {
            let d = ctx.strategy("strategy")?;
            let r = closure::p2_cr_check(&d, &ctx.q()?, &sigma, ctx.params.depth())?;
            if r.applies {
                ctx.push("full conditional forces d(sigma) >= q", &r.capital, ">=", &r.q);
            } else {
                ctx.holds("conditional measure below 1: nothing to add", true);
            }
            Ok(to_value(&r))
        }
        ("p3", "cr") => {
            let d = ctx.strategy("strategy")?;
            let e = ctx.strategy("extra")?;
            let p = ctx.params;
            let r = closure::p3_cr(&d, &ctx.q()?, &sigma, &e, p.depth(), p.cap())?;
            ctx.push("mu(V|sigma) < 1", &r.cond_after, "<", &Rational::one());
            ctx.holds("V covers U", r.covers_u);
            ctx.holds(format!("V covers T_{}", r.n_e), r.covers_level);
            Ok(to_value(&r))
        }
        ("p1", "sr") => {
            let u: StagedOpenSet = ctx.field("staged")?;
            let c = closure::p1_sr(&u, &sigma);
            ctx.push("mu(conditioned) = mu(U|sigma)", &c.final_measure(), "=", &u.final_set().conditional_measure(&sigma));
            Ok(json!({ "conditioned": c }))
        }
        ("p2", "sr") => {
            let u: StagedOpenSet = ctx.field("staged")?;
            let r = closure::p2_sr(&u, ctx.params.k(), ctx.params.depth())?;
            ctx.push("mu([V] minus [U]) < 2^-k", &r.excess, "<", &r.excess_bound);
            ctx.holds("V covers every full cylinder to depth", r.covers_full_cylinders);
            ctx.push("mu([V] union [U]) < 1", &r.union_measure, "<", &Rational::one());
            Ok(to_value(&r))
        }
        ("p3", "sr") => {
            let u: StagedOpenSet = ctx.field("staged")?;
            let t: TestFamily = ctx.field("test")?;
            let r = closure::p3_sr_test(&u, &sigma, ctx.params.k(), &t)?;
            ctx.push("mu(V|sigma) < 1", &r.cond_after, "<", &Rational::one());
            ctx.holds("V covers U", r.covers_u);
            ctx.holds(format!("V covers T_{}", r.n_e), r.covers_level);
            Ok(to_value(&r))
        }
        _ => unreachable!("case validated"),
    }
}

fn mlr_provider(ctx: &Ctx) -> Result<Mlr> {
    let q = match &ctx.params.q {
        Some(q) => parse(q)?,
        None => Rational::new(3.into(), 4.into()),
    };
    Ok(Mlr { q, k: ctx.params.k() })
}

fn record_trace(ctx: &mut Ctx, report: &TraceReport) {
    for c in &report.checks {
        let name = match c.stage {
            Some(e) => format!("{} (stage {e})", c.name),
            None => c.name.to_string(),
        };
        ctx.checks.push(json!({ "name": name, "detail": c.detail, "pass": verdict(c.pass) }));
    }
}

fn diagonalize<P: ClosureProvider>(ctx: &mut Ctx, provider: &P, tests: &[P::Test]) -> Result<Value> {
    let w = ctx.set("w")?;
    let trace = diagonal::run(&w, provider, tests, ctx.params.stages())?;
    let report = diagonal::verify_trace(&trace, &w, provider, tests)?;
    record_trace(ctx, &report);
    Ok(json!({ "trace": trace, "violations": report.violations }))
}

fn main_lemma(ctx: &mut Ctx) -> Result<Value> {
    match ctx.case()? {
        "mlr" => {
            let p = mlr_provider(ctx)?;
            let tests: Vec<TestFamily> = tests_value(ctx)?;
            diagonalize(ctx, &p, &tests)
        }
        "cr" => {
            let p = Cr { depth: ctx.params.depth(), cap: ctx.params.cap() };
            let tests: Vec<Strategy> = tests_value(ctx)?;
            diagonalize(ctx, &p, &tests)
        }
        _ => {
            let p = Sr { k: ctx.params.k(), depth: ctx.params.depth() };
            let tests: Vec<TestFamily> = tests_value(ctx)?;
            diagonalize(ctx, &p, &tests)
        }
    }
}

fn check_trace<P: ClosureProvider>(ctx: &mut Ctx, provider: &P, tests: &[P::Test]) -> Result<Value> {
    let w = ctx.set("w")?;
    let trace: DiagonalTrace = ctx.field("trace")?;
    let report = diagonal::verify_trace(&trace, &w, provider, tests)?;
    record_trace(ctx, &report);
    Ok(json!({ "violations": report.violations }))
}

fn verify_trace(ctx: &mut Ctx) -> Result<Value> {
    match ctx.case()? {
        "mlr" => {
            let p = mlr_provider(ctx)?;
            let tests: Vec<TestFamily> = tests_value(ctx)?;
            check_trace(ctx, &p, &tests)
        }
        "cr" => {
            let p = Cr { depth: ctx.params.depth(), cap: ctx.params.cap() };
            let tests: Vec<Strategy> = tests_value(ctx)?;
            check_trace(ctx, &p, &tests)
        }
        _ => {
            let p = Sr { k: ctx.params.k(), depth: ctx.params.depth() };
            let tests: Vec<TestFamily> = tests_value(ctx)?;
            check_trace(ctx, &p, &tests)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(sub: &str, input: Value, params: Params) -> Job {
        Job { subcommand: sub.into(), input, params }
    }

    #[test]
    fn measure_report() {
        let r = dispatch(&job("measure", json!(["0", "10"]), Params::default())).unwrap();
        assert_eq!(r.document["output"]["measure"], "3/4");
        assert!(r.pass);
    }

    #[test]
    fn merge_report() {
        let levels: Vec<Vec<String>> = (0..=6).map(|n| vec!["0".repeat(n)]).collect();
        let input = json!({ "test": { "kind": "ML", "levels": levels } });
        let err = dispatch(&job("schnorr-merge", input, Params { k: Some(1), ..Params::default() })).unwrap_err();
        assert_eq!(err.name(), "InvalidTest");

        let levels: Vec<Vec<String>> = (0..=6).map(|n| vec!["0".repeat(n)]).collect();
        let input = json!({ "test": { "kind": "Schnorr", "levels": levels } });
        let r = dispatch(&job("schnorr-merge", input, Params { k: Some(1), ..Params::default() })).unwrap();
        assert_eq!(r.document["output"]["measure"], "1/4");
        assert_eq!(r.document["output"]["cap"], "1/2");
        assert!(r.pass);
    }

    #[test]
    fn unknown_subcommand() {
        let err = dispatch(&job("frobnicate", json!({}), Params::default())).unwrap_err();
        assert_eq!(err.name(), "UnknownSubcommand");
        assert!(is_known("p2-mlr") && !is_known("p4-mlr"));
    }

    #[test]
    fn decimal_only_alongside_exact() {
        let p = Params { decimal: true, ..Params::default() };
        let r = dispatch(&job("power", json!({ "set": ["0"], "n": 2 }), p)).unwrap();
        let c = &r.document["checks"][0];
        assert_eq!(c["lhs"], "1/4");
        assert_eq!(c["lhsDecimal"], "0.250000000000");
    }
}
