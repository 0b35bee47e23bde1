//! Command-line front end. Documents are JSON objects read from a file or
//! stdin; several documents may be given as an array or as a stream.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::arith::{self, Rational};
use crate::error::Error;
use crate::oracle::{self, SearchBudget};
use crate::places::{self, DiagonalForm, Place};
use crate::quadfield::QuadField;
use crate::solver::{Solver, SolverConfig, MAX_PRIMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ANISOTROPIC: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "isovec", version, about = "Isotropic vectors of diagonal quadratic forms over the rationals")]
pub struct Cli {
    /// Seed for randomized prime search (default: deterministic ascending search).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on primes appended by the search loops.
    #[arg(long, global = true, default_value_t = MAX_PRIMES)]
    pub max_primes: usize,
    /// Height bound for the brute-force oracle.
    #[arg(long, global = true, default_value_t = 50)]
    pub height: u64,
    /// Emit JSON (default).
    #[arg(long, global = true, conflicts_with = "plain")]
    pub json: bool,
    /// Emit plain text.
    #[arg(long, global = true)]
    pub plain: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find an isotropic vector.
    Solve(Input),
    /// Check a vector against a form.
    Verify(Input),
    /// Per-place local invariants.
    Local(Input),
    /// Compare the library against the brute-force oracles.
    Selftest {
        #[arg(long, value_enum, default_value_t = Scale::Default)]
        scale: Scale,
        /// Negative control: flip one Hilbert symbol before comparing.
        #[arg(long)]
        fault: bool,
    },
}

#[derive(Debug, clap::Args)]
pub struct Input {
    /// JSON document(s); stdin when absent.
    pub file: Option<PathBuf>,
    /// Coefficients given inline, e.g. "1,1,-2".
    #[arg(long, allow_hyphen_values = true)]
    pub form: Option<String>,
    /// Vector given inline for `verify`, e.g. "1,1,1".
    #[arg(long, allow_hyphen_values = true)]
    pub vector: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Tiny,
    Default,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct FormDocument {
    pub coefficients: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSummary {
    pub route: String,
    pub routes: Vec<String>,
    pub primes_appended: Vec<String>,
    pub c: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub isotropic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_place: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSummary>,
    pub exact_check: bool,
}

pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let t = s.trim();
    let q: Rational = t
        .parse()
        .map_err(|_| Error::Parse(format!("not a rational number: {s:?}")))?;
    Ok(q)
}

fn parse_list(s: &str) -> Result<Vec<String>, Error> {
    let v: Vec<String> = s
        .split([',', ' '])
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect();
    if v.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    Ok(v)
}

pub fn parse_form(doc: &FormDocument) -> Result<DiagonalForm, Error> {
    let coeffs = doc
        .coefficients
        .iter()
        .map(|c| parse_rational(c))
        .collect::<Result<Vec<_>, _>>()?;
    DiagonalForm::new(coeffs).map_err(|e| Error::Parse(e.to_string()))
}

/// Documents from a JSON object, an array of objects or a whitespace
/// separated stream of them.
pub fn parse_documents(text: &str) -> Result<Vec<FormDocument>, Error> {
    let mut out = Vec::new();
    for item in serde_json::Deserializer::from_str(text).into_iter::<Value>() {
        let v = item.map_err(|e| Error::Parse(e.to_string()))?;
        match v {
            Value::Array(items) => {
                for it in items {
                    out.push(serde_json::from_value(it).map_err(|e| Error::Parse(e.to_string()))?);
                }
            }
            other => out.push(serde_json::from_value(other).map_err(|e| Error::Parse(e.to_string()))?),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no documents in input".into()));
    }
    Ok(out)
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Anisotropic(_) | Error::Unary => EXIT_ANISOTROPIC,
        Error::Parse(_) | Error::Degenerate(_) | Error::DimensionMismatch(_) | Error::Invalid(_) | Error::ZeroInput => {
            EXIT_PARSE
        }
        Error::Resource(_) | Error::FactorBound { .. } => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

fn error_document(e: &Error, label: Option<String>) -> Value {
    let kind = match exit_code(e) {
        EXIT_PARSE => "parse",
        EXIT_RESOURCE => "resource",
        _ => "internal",
    };
    let mut m = Map::new();
    if let Some(l) = label {
        m.insert("label".into(), Value::String(l));
    }
    m.insert("error".into(), Value::String(kind.into()));
    m.insert("message".into(), Value::String(e.to_string()));
    Value::Object(m)
}

/// Solve one document. `Err` only for failures without a result document.
pub fn cmd_solve(doc: &FormDocument, cfg: &SolverConfig) -> Result<ResultDocument, Error> {
    let f = parse_form(doc)?;
    match Solver::new(cfg.clone()).dispatch(&f) {
        Ok((v, trace)) => {
            let exact = crate::solver::verify(&f, &v.coords)?;
            let c = trace.nodes().iter().filter_map(|n| n.c.clone()).collect();
            Ok(ResultDocument {
                label: doc.label.clone(),
                isotropic: true,
                vector: Some(v.coords.iter().map(|x| x.to_string()).collect()),
                witness_place: None,
                trace: Some(TraceSummary {
                    route: trace.route.clone(),
                    routes: trace.routes(),
                    primes_appended: trace.all_primes_appended(),
                    c,
                }),
                exact_check: exact,
            })
        }
        Err(Error::Anisotropic(p)) => Ok(anisotropic_doc(doc, &p)),
        Err(Error::Unary) => Ok(anisotropic_doc(doc, &Place::Infinity)),
        Err(e) => Err(e),
    }
}

fn anisotropic_doc(doc: &FormDocument, p: &Place) -> ResultDocument {
    ResultDocument {
        label: doc.label.clone(),
        isotropic: false,
        vector: None,
        witness_place: Some(p.to_string()),
        trace: None,
        exact_check: false,
    }
}

pub fn cmd_verify(doc: &FormDocument) -> Result<bool, Error> {
    let f = parse_form(doc)?;
    let v = doc
        .vector
        .as_ref()
        .ok_or_else(|| Error::Parse("document has no vector".into()))?
        .iter()
        .map(|x| parse_rational(x))
        .collect::<Result<Vec<_>, _>>()?;
    crate::solver::verify(&f, &v).map_err(|e| Error::Parse(e.to_string()))
}

pub fn cmd_local(doc: &FormDocument) -> Result<Value, Error> {
    let f = parse_form(doc)?;
    let mut m = Map::new();
    let det = arith::square_class_int(&f.det());
    for p in places::support_set(&f).places_with_infinity() {
        let det_class = match &p {
            Place::Infinity => if det.is_negative() { "-1" } else { "1" }.to_string(),
            Place::Finite(_) => det.to_string(),
        };
        m.insert(
            p.to_string(),
            json!({
                "isotropic": places::local_isotropy(&f, &p),
                "hasse_invariant": places::hasse_invariant(&f, &p),
                "determinant_class": det_class,
            }),
        );
    }
    Ok(Value::Object(m))
}

/// One line of the self-test report.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

fn class_reps(p: u64) -> Vec<i64> {
    let units: Vec<i64> = if p == 2 {
        vec![1, -1, 5, -5]
    } else {
        let n = (2..p as i64)
            .find(|x| (1..p as i64).all(|y| (y * y - x).rem_euclid(p as i64) != 0))
            .unwrap_or(2);
        vec![1, n]
    };
    units.iter().flat_map(|u| [*u, u * p as i64]).collect()
}

fn is_fundamental(d: i64) -> bool {
    let sf = |n: i64| arith::is_squarefree(&BigInt::from(n)).unwrap_or(false);
    match d.rem_euclid(4) {
        1 => sf(d),
        0 => matches!((d / 4).rem_euclid(4), 2 | 3) && sf(d / 4),
        _ => false,
    }
}

/// Runs the oracle comparisons; `fault` flips the first Hilbert symbol.
pub fn run_selftest(scale: Scale, fault: bool, cfg: &SolverConfig, height: u64) -> Vec<SuiteResult> {
    let tiny = scale == Scale::Tiny;
    let mut out = Vec::new();

    let t0 = Instant::now();
    let primes: &[u64] = if tiny {
        &[2, 3, 5, 7]
    } else {
        &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut flipped = !fault;
    for &p in primes {
        let k = if p == 2 { 5 } else { 3 };
        for a in class_reps(p) {
            for b in class_reps(p) {
                let mut h = places::hilbert_symbol(&Rational::from_integer(a.into()), &Rational::from_integer(b.into()), &Place::prime(p));
                if !flipped {
                    h = -h;
                    flipped = true;
                }
                match oracle::local_solubility_scan(&BigInt::from(a), &BigInt::from(b), p, k) {
                    Ok(s) if s == h => {}
                    Ok(s) => failures.push(format!("({a},{b})_{p}: symbol {h}, scan {s}")),
                    Err(e) => failures.push(format!("({a},{b})_{p}: {e}")),
                }
                checked += 1;
            }
        }
    }
    out.push(SuiteResult {
        name: "hilbert symbol vs local scan".into(),
        passed: failures.is_empty(),
        checked,
        failures,
        seconds: t0.elapsed().as_secs_f64(),
    });

    let t0 = Instant::now();
    let lo = if tiny { -100 } else { -500 };
    let mut failures = Vec::new();
    let mut checked = 0;
    for d in lo..=-3 {
        if !is_fundamental(d) {
            continue;
        }
        let field_d = if d.rem_euclid(4) == 1 { d } else { d / 4 };
        let ours = QuadField::new(&BigInt::from(field_d)).and_then(|q| q.class_number());
        match (ours, oracle::bqf_class_group_oracle(d)) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => failures.push(format!("D={d}: {a:?} vs {b:?}")),
        }
        checked += 1;
    }
    out.push(SuiteResult {
        name: "class numbers vs reduced forms".into(),
        passed: failures.is_empty(),
        checked,
        failures,
        seconds: t0.elapsed().as_secs_f64(),
    });

    let t0 = Instant::now();
    let (bound, h) = if tiny { (3i64, height.min(10)) } else { (6, height) };
    let vals: Vec<i64> = (-bound..=bound).filter(|&x| x != 0).collect();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut forms: Vec<Vec<i64>> = Vec::new();
    for &a in &vals {
        for &b in &vals {
            forms.push(vec![a, b]);
            forms.push(vec![1, a, b]);
            forms.push(vec![1, 1, a, b]);
            if !tiny {
                forms.push(vec![3, a, b, 1, 2]);
                forms.push(vec![3, a, b, 1, 2, a * b]);
            }
        }
    }
    for c in forms {
        let Ok(f) = DiagonalForm::from_ints(&c) else {
            continue;
        };
        let solved = Solver::new(cfg.clone()).dispatch(&f);
        let iso = places::is_globally_isotropic(&f);
        let brute = oracle::brute_search(&f, &SearchBudget::new(h)).is_some();
        let ok = match &solved {
            Ok((v, _)) => iso && crate::solver::verify(&f, &v.coords).unwrap_or(false),
            Err(Error::Anisotropic(_)) => !iso && !brute,
            Err(_) => false,
        };
        if !ok {
            failures.push(format!("{f}: solver {:?}, local {iso}, brute {brute}", solved.map(|r| r.0)));
        }
        checked += 1;
    }
    out.push(SuiteResult {
        name: "solver vs brute force and local criteria".into(),
        passed: failures.is_empty(),
        checked,
        failures,
        seconds: t0.elapsed().as_secs_f64(),
    });
    out
}

fn read_input(input: &Input, stdin: &mut dyn Read) -> Result<Vec<FormDocument>, Error> {
    if let Some(f) = &input.form {
        return Ok(vec![FormDocument {
            coefficients: parse_list(f)?,
            label: None,
            vector: input.vector.as_deref().map(parse_list).transpose()?,
        }]);
    }
    let text = match &input.file {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            stdin
                .read_to_string(&mut s)
                .map_err(|e| Error::Parse(e.to_string()))?;
            s
        }
    };
    let mut docs = parse_documents(&text)?;
    if let Some(v) = &input.vector {
        let v = parse_list(v)?;
        for d in docs.iter_mut() {
            d.vector = Some(v.clone());
        }
    }
    Ok(docs)
}

fn emit(out: &mut dyn Write, plain: bool, value: &Value, text: &str) {
    let s = if plain {
        text.to_string()
    } else {
        serde_json::to_string(value).unwrap_or_default()
    };
    let _ = writeln!(out, "{s}");
}

fn plain_result(r: &ResultDocument) -> String {
    let label = r.label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default();
    match (&r.vector, &r.witness_place) {
        (Some(v), _) => format!("{label}isotropic ({}) exact_check={}", v.join(", "), r.exact_check),
        (None, Some(p)) => format!("{label}anisotropic at {p}"),
        _ => format!("{label}no result"),
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = write!(stdout, "{e}");
            return code;
        }
    };
    let plain = cli.plain;
    let cfg = SolverConfig {
        max_primes: cli.max_primes,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Solve(input) => {
            let docs = match read_input(input, stdin) {
                Ok(d) => d,
                Err(e) => {
                    emit(stdout, plain, &error_document(&e, None), &e.to_string());
                    return exit_code(&e);
                }
            };
            let mut code = EXIT_OK;
            for doc in &docs {
                let c = match cmd_solve(doc, &cfg) {
                    Ok(r) => {
                        let v = serde_json::to_value(&r).unwrap_or(Value::Null);
                        emit(stdout, plain, &v, &plain_result(&r));
                        if r.isotropic {
                            EXIT_OK
                        } else {
                            EXIT_ANISOTROPIC
                        }
                    }
                    Err(e) => {
                        emit(stdout, plain, &error_document(&e, doc.label.clone()), &e.to_string());
                        exit_code(&e)
                    }
                };
                code = worst(code, c);
            }
            code
        }
        Command::Verify(input) => {
            let docs = match read_input(input, stdin) {
                Ok(d) => d,
                Err(e) => {
                    emit(stdout, plain, &error_document(&e, None), &e.to_string());
                    return exit_code(&e);
                }
            };
            let mut code = EXIT_OK;
            for doc in &docs {
                match cmd_verify(doc) {
                    Ok(b) => emit(stdout, plain, &json!({ "isotropic_vector": b }), &b.to_string()),
                    Err(e) => {
                        emit(stdout, plain, &error_document(&e, doc.label.clone()), &e.to_string());
                        code = worst(code, EXIT_PARSE);
                    }
                }
            }
            code
        }
        Command::Local(input) => {
            let docs = match read_input(input, stdin) {
                Ok(d) => d,
                Err(e) => {
                    emit(stdout, plain, &error_document(&e, None), &e.to_string());
                    return exit_code(&e);
                }
            };
            let mut code = EXIT_OK;
            for doc in &docs {
                match cmd_local(doc) {
                    Ok(v) => {
                        let text = v
                            .as_object()
                            .map(|m| {
                                m.iter()
                                    .map(|(k, r)| {
                                        format!(
                                            "{k}: isotropic={} hasse={} det={}",
                                            r["isotropic"], r["hasse_invariant"], r["determinant_class"]
                                        )
                                    })
                                    .collect::<Vec<_>>()
                                    .join("\n")
                            })
                            .unwrap_or_default();
                        emit(stdout, plain, &v, &text);
                    }
                    Err(e) => {
                        emit(stdout, plain, &error_document(&e, doc.label.clone()), &e.to_string());
                        code = worst(code, EXIT_PARSE);
                    }
                }
            }
            code
        }
        Command::Selftest { scale, fault } => {
            let results = run_selftest(*scale, *fault, &cfg, cli.height);
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                let v = serde_json::to_value(r).unwrap_or(Value::Null);
                let text = format!(
                    "{} {} ({} checked, {:.1}s){}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.checked,
                    r.seconds,
                    r.failures.first().map(|f| format!(": {f}")).unwrap_or_default()
                );
                emit(stdout, plain, &v, &text);
            }
            if ok {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
    }
}

/// Batch exit code: parse errors dominate, then resource, internal and
/// anisotropic outcomes.
fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_PARSE => 4,
        EXIT_RESOURCE => 3,
        EXIT_FAILURE => 2,
        EXIT_ANISOTROPIC => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}
