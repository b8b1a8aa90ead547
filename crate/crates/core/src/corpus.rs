//! Integrand fixtures with declared, machine-validated convexity
//! certificates, plus the text format used to load user corpora.
//!
//! ```text
//! [function]
//! name = quad
//! f = x^2
//! a = 0
//! b = 1
//! antiderivative = x^3/3
//! cert = SELF c=1 M=2
//! cert = ABS_DERIV_POW c=4 M=2 q=2
//! nonneg = true
//! endpoint_sup = true
//!
//! [pair]
//! f = quad
//! g = quad
//! ```
//!
//! `fprime` may be given explicitly; otherwise it is derived symbolically.
//! Lines starting with `#` are comments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::oracle::{self, OracleError, SLACK_TOL};

/// Points used for the antiderivative check.
pub const ANTIDERIVATIVE_GRID: usize = 257;
/// Largest accepted `|F'(x) - f(x)|`.
pub const ANTIDERIVATIVE_TOL: f64 = 1e-9;
/// Points used for the non-negativity check.
pub const NONNEG_GRID: usize = 1025;
/// Smallest accepted grid value of a function declared non-negative.
pub const NONNEG_TOL: f64 = -1e-12;
/// Relative slack allowed when comparing a declared `M` with the grid sup,
/// so that an analytic `M` is not rejected over last-bit rounding of `f'`.
const SUP_REL_TOL: f64 = 1e-12;

/// Which function a certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CertTarget {
    /// `f` itself.
    #[serde(rename = "SELF")]
    Function,
    /// `|f'|`.
    #[serde(rename = "ABS_DERIV")]
    AbsDerivative,
    /// `|f'|^q`.
    #[serde(rename = "ABS_DERIV_POW")]
    AbsDerivativePow,
}

impl CertTarget {
    pub fn name(self) -> &'static str {
        match self {
            CertTarget::Function => "SELF",
            CertTarget::AbsDerivative => "ABS_DERIV",
            CertTarget::AbsDerivativePow => "ABS_DERIV_POW",
        }
    }
}

impl fmt::Display for CertTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CertTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SELF" => Ok(CertTarget::Function),
            "ABS_DERIV" => Ok(CertTarget::AbsDerivative),
            "ABS_DERIV_POW" => Ok(CertTarget::AbsDerivativePow),
            other => Err(format!("unknown certificate target {other:?}")),
        }
    }
}

/// Declares that the target function is strongly convex with modulus `c` on
/// the instance interval and that `|f'| <= m` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub target: CertTarget,
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Exponent for [`CertTarget::AbsDerivativePow`]; `None` means 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl ConvexityCertificate {
    pub fn new(target: CertTarget, c: f64, m: f64) -> Self {
        ConvexityCertificate { target, c, m, q: None }
    }

    pub fn power(c: f64, m: f64, q: f64) -> Self {
        ConvexityCertificate { target: CertTarget::AbsDerivativePow, c, m, q: Some(q) }
    }

    pub fn exponent(&self) -> f64 {
        self.q.unwrap_or(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionInstance {
    pub name: String,
    pub f: Expr,
    pub fprime: Expr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antiderivative: Option<Expr>,
    pub a: f64,
    pub b: f64,
    pub certificates: Vec<ConvexityCertificate>,
    pub nonneg: bool,
    /// `sup |f'|` over any subinterval is attained at one of its endpoints
    /// (true when `|f'|` is monotone or convex).
    pub endpoint_sup: bool,
}

impl FunctionInstance {
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// First certificate with the given target.
    pub fn certificate(&self, target: CertTarget) -> Option<&ConvexityCertificate> {
        self.certificates.iter().find(|c| c.target == target)
    }

    /// Declared bound on `|f'|`: taken from the `ABS_DERIV` certificate when
    /// present, else from the first certificate.
    pub fn derivative_bound(&self) -> Option<f64> {
        self.certificate(CertTarget::AbsDerivative)
            .or_else(|| self.certificates.first())
            .map(|c| c.m)
    }
}

/// Two instances used together by the product inequalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductPair {
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Corpus {
    pub instances: Vec<FunctionInstance>,
    pub pairs: Vec<ProductPair>,
}

impl Corpus {
    pub fn builtin() -> Self {
        Corpus { instances: builtin_corpus(), pairs: builtin_pairs() }
    }

    pub fn instance(&self, name: &str) -> Option<&FunctionInstance> {
        self.instances.iter().find(|i| i.name == name)
    }

    /// Pairs resolved to their instances, in declaration order.
    pub fn resolved_pairs(&self) -> Vec<(&FunctionInstance, &FunctionInstance)> {
        self.pairs
            .iter()
            .filter_map(|p| Some((self.instance(&p.f)?, self.instance(&p.g)?)))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instance {instance:?}, {target}: {reason}")]
    Validation { instance: String, target: String, reason: String },
    #[error("instance {instance:?}: {source}")]
    Oracle { instance: String, source: OracleError },
    #[error("cannot read corpus file: {0}")]
    Io(#[from] std::io::Error),
}

fn expr(s: &str) -> Expr {
    parse(s).expect("builtin expression parses")
}

fn instance(
    name: &str,
    f: &str,
    antiderivative: &str,
    (a, b): (f64, f64),
    certificates: Vec<ConvexityCertificate>,
) -> FunctionInstance {
    let f = expr(f);
    let fprime = f.derive().expect("builtin expression is differentiable");
    FunctionInstance {
        name: name.to_string(),
        f,
        fprime,
        antiderivative: Some(expr(antiderivative)),
        a,
        b,
        certificates,
        nonneg: true,
        endpoint_sup: true,
    }
}

/// The builtin fixtures. Every one is non-negative on its interval, has an
/// exact antiderivative, and has a convex `|f'|`.
pub fn builtin_corpus() -> Vec<FunctionInstance> {
    use CertTarget::*;
    let e2 = std::f64::consts::E + 2.0;
    let sinh1 = 1f64.sinh();
    vec![
        instance("quad", "x^2", "x^3/3", (0.0, 1.0), vec![
            ConvexityCertificate::new(Function, 1.0, 2.0),
            ConvexityCertificate::new(AbsDerivative, 0.0, 2.0),
            ConvexityCertificate::power(4.0, 2.0, 2.0),
        ]),
        instance("cubic", "x^3/3", "x^4/12", (0.0, 1.0), vec![
            ConvexityCertificate::new(AbsDerivative, 1.0, 1.0),
            ConvexityCertificate::new(Function, 0.0, 1.0),
            ConvexityCertificate::power(0.0, 1.0, 2.0),
        ]),
        instance("expq", "exp(x) + x^2", "exp(x) + x^3/3", (0.0, 1.0), vec![
            ConvexityCertificate::new(Function, 1.5, e2),
            ConvexityCertificate::new(AbsDerivative, 0.5, e2),
            ConvexityCertificate::power(10.0, e2, 2.0),
        ]),
        instance("cosh", "cosh(x)", "sinh(x)", (-1.0, 1.0), vec![
            ConvexityCertificate::new(Function, 0.5, sinh1),
            ConvexityCertificate::new(AbsDerivative, 0.0, sinh1),
            ConvexityCertificate::power(1.0, sinh1, 2.0),
        ]),
        instance("aquad", "0.5*x^2 - x + 2", "x^3/6 - x^2/2 + 2*x", (0.0, 2.0), vec![
            ConvexityCertificate::new(Function, 0.5, 1.0),
            ConvexityCertificate::new(AbsDerivative, 0.0, 1.0),
            ConvexityCertificate::power(1.0, 1.0, 2.0),
        ]),
        instance("pf", "x^2 + 1", "x^3/3 + x", (0.0, 1.0), vec![
            ConvexityCertificate::new(Function, 1.0, 2.0),
            ConvexityCertificate::new(AbsDerivative, 0.0, 2.0),
            ConvexityCertificate::power(4.0, 2.0, 2.0),
        ]),
        instance("pg", "2*x^2 - x + 1", "2*x^3/3 - x^2/2 + x", (0.0, 1.0), vec![
            ConvexityCertificate::new(Function, 2.0, 3.0),
            ConvexityCertificate::new(AbsDerivative, 0.0, 3.0),
            ConvexityCertificate::power(16.0, 3.0, 2.0),
        ]),
        instance("affine", "2*x + 3", "x^2 + 3*x", (0.0, 1.0), vec![
            ConvexityCertificate::new(Function, 0.0, 2.0),
            ConvexityCertificate::new(AbsDerivative, 0.0, 2.0),
        ]),
    ]
}

/// Product pairs over the builtin corpus. All live on `[0, 1]`.
pub fn builtin_pairs() -> Vec<ProductPair> {
    [("quad", "quad"), ("pf", "pg"), ("pg", "pf"), ("quad", "pf"), ("affine", "quad")]
        .into_iter()
        .map(|(f, g)| ProductPair { f: f.into(), g: g.into() })
        .collect()
}

#[derive(Default)]
struct FunctionBlock {
    start: usize,
    name: Option<String>,
    f: Option<Expr>,
    fprime: Option<Expr>,
    antiderivative: Option<Expr>,
    a: Option<f64>,
    b: Option<f64>,
    certificates: Vec<ConvexityCertificate>,
    nonneg: bool,
    endpoint_sup: bool,
}

#[derive(Default)]
struct PairBlock {
    start: usize,
    f: Option<String>,
    g: Option<String>,
}

enum Block {
    Function(FunctionBlock),
    Pair(PairBlock),
}

fn parse_err(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse { line, message: message.into() }
}

fn parse_number(line: usize, key: &str, v: &str) -> Result<f64, CorpusError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(line, format!("{key}: expected a finite number, got {v:?}")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool, CorpusError> {
    v.parse::<bool>().map_err(|_| parse_err(line, format!("{key}: expected true or false, got {v:?}")))
}

fn parse_expr(line: usize, key: &str, v: &str) -> Result<Expr, CorpusError> {
    parse(v).map_err(|e| parse_err(line, format!("{key}: {e}")))
}

fn parse_cert(line: usize, v: &str) -> Result<ConvexityCertificate, CorpusError> {
    let mut words = v.split_whitespace();
    let target: CertTarget = words
        .next()
        .ok_or_else(|| parse_err(line, "cert: missing target"))?
        .parse()
        .map_err(|e: String| parse_err(line, e))?;
    let (mut c, mut m, mut q) = (None, None, None);
    for word in words {
        let (k, val) = word
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("cert: expected key=value, got {word:?}")))?;
        let slot = match k {
            "c" => &mut c,
            "M" => &mut m,
            "q" => &mut q,
            other => return Err(parse_err(line, format!("cert: unknown parameter {other:?}"))),
        };
        *slot = Some(parse_number(line, k, val)?);
    }
    let c = c.ok_or_else(|| parse_err(line, "cert: missing c"))?;
    let m = m.ok_or_else(|| parse_err(line, "cert: missing M"))?;
    match (target, q) {
        (CertTarget::AbsDerivativePow, None) => Err(parse_err(line, "cert: ABS_DERIV_POW needs q")),
        (CertTarget::AbsDerivativePow, Some(q)) => Ok(ConvexityCertificate::power(c, m, q)),
        (_, Some(_)) => Err(parse_err(line, "cert: q only applies to ABS_DERIV_POW".to_string())),
        (_, None) => Ok(ConvexityCertificate::new(target, c, m)),
    }
}

fn finish_function(block: FunctionBlock) -> Result<FunctionInstance, CorpusError> {
    let line = block.start;
    let missing = |k: &str| parse_err(line, format!("[function] block is missing {k}"));
    let name = block.name.ok_or_else(|| missing("name"))?;
    let f = block.f.ok_or_else(|| missing("f"))?;
    let (a, b) = (block.a.ok_or_else(|| missing("a"))?, block.b.ok_or_else(|| missing("b"))?);
    if a >= b {
        return Err(parse_err(line, format!("{name}: need a < b, got [{a}, {b}]")));
    }
    let fprime = match block.fprime {
        Some(e) => e,
        None => f.derive().map_err(|e| parse_err(line, format!("{name}: {e}; give fprime explicitly")))?,
    };
    Ok(FunctionInstance {
        name,
        f,
        fprime,
        antiderivative: block.antiderivative,
        a,
        b,
        certificates: block.certificates,
        nonneg: block.nonneg,
        endpoint_sup: block.endpoint_sup,
    })
}

/// Parses the corpus text format without validating certificates.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut current: Option<Block> = None;

    fn close(corpus: &mut Corpus, block: Option<Block>) -> Result<(), CorpusError> {
        match block {
            None => Ok(()),
            Some(Block::Function(fb)) => {
                let inst = finish_function(fb)?;
                if corpus.instance(&inst.name).is_some() {
                    return Err(parse_err(0, format!("duplicate instance name {:?}", inst.name)));
                }
                corpus.instances.push(inst);
                Ok(())
            }
            Some(Block::Pair(pb)) => {
                let line = pb.start;
                let f = pb.f.ok_or_else(|| parse_err(line, "[pair] block is missing f"))?;
                let g = pb.g.ok_or_else(|| parse_err(line, "[pair] block is missing g"))?;
                corpus.pairs.push(ProductPair { f, g });
                Ok(())
            }
        }
    }

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed {
            "[function]" => {
                close(&mut corpus, current.take())?;
                current = Some(Block::Function(FunctionBlock { start: line, ..Default::default() }));
                continue;
            }
            "[pair]" => {
                close(&mut corpus, current.take())?;
                current = Some(Block::Pair(PairBlock { start: line, ..Default::default() }));
                continue;
            }
            s if s.starts_with('[') => return Err(parse_err(line, format!("unknown section {s}"))),
            _ => {}
        }
        let (key, value) = trimmed
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| parse_err(line, format!("expected key = value, got {trimmed:?}")))?;
        match current.as_mut() {
            None => return Err(parse_err(line, "key outside of a [function] or [pair] block")),
            Some(Block::Function(fb)) => match key {
                "name" => fb.name = Some(value.to_string()),
                "f" => fb.f = Some(parse_expr(line, key, value)?),
                "fprime" => fb.fprime = Some(parse_expr(line, key, value)?),
                "antiderivative" => fb.antiderivative = Some(parse_expr(line, key, value)?),
                "a" => fb.a = Some(parse_number(line, key, value)?),
                "b" => fb.b = Some(parse_number(line, key, value)?),
                "cert" => fb.certificates.push(parse_cert(line, value)?),
                "nonneg" => fb.nonneg = parse_bool(line, key, value)?,
                "endpoint_sup" => fb.endpoint_sup = parse_bool(line, key, value)?,
                other => return Err(parse_err(line, format!("unknown key {other:?}"))),
            },
            Some(Block::Pair(pb)) => match key {
                "f" => pb.f = Some(value.to_string()),
                "g" => pb.g = Some(value.to_string()),
                other => return Err(parse_err(line, format!("unknown key {other:?} in [pair]"))),
            },
        }
    }
    close(&mut corpus, current)?;

    for p in &corpus.pairs {
        for name in [&p.f, &p.g] {
            if corpus.instance(name).is_none() {
                return Err(parse_err(0, format!("pair refers to unknown instance {name:?}")));
            }
        }
    }
    Ok(corpus)
}

/// Outcome of validating one certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub target: CertTarget,
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Minimum slack of the strong-convexity falsifier.
    pub slack: f64,
    /// Raw 1025-point grid maximum of `|f'|`.
    pub grid_sup: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceValidation {
    pub instance: String,
    pub certificates: Vec<CertificateCheck>,
    /// Largest `|F' - f|` on the antiderivative grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antiderivative_residual: Option<f64>,
    /// Smallest grid value of `f` when declared non-negative.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonneg_min: Option<f64>,
    pub passed: bool,
}

impl InstanceValidation {
    /// The first failure as an error, if any.
    pub fn into_result(self) -> Result<Self, CorpusError> {
        let fail = |target: &str, reason: String| CorpusError::Validation {
            instance: self.instance.clone(),
            target: target.to_string(),
            reason,
        };
        if let Some(r) = self.antiderivative_residual.filter(|r| r.is_nan() || *r > ANTIDERIVATIVE_TOL) {
            return Err(fail("antiderivative", format!("max |F' - f| = {r:e} exceeds {ANTIDERIVATIVE_TOL:e}")));
        }
        if let Some(m) = self.nonneg_min.filter(|m| m.is_nan() || *m < NONNEG_TOL) {
            return Err(fail("nonneg", format!("grid minimum {m:e} is negative")));
        }
        if let Some(c) = self.certificates.iter().find(|c| !c.passed) {
            return Err(fail(c.target.name(), c.reason.clone().unwrap_or_default()));
        }
        Ok(self)
    }
}

fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { b } else { a + (b - a) * (i as f64 / (n - 1) as f64) })
}

fn check_certificate(
    inst: &FunctionInstance,
    cert: &ConvexityCertificate,
    grid_sup: f64,
) -> Result<CertificateCheck, OracleError> {
    let (a, b) = inst.interval();
    let q = cert.exponent();
    let mut reason = None;
    if !(cert.c.is_finite() && cert.c >= 0.0) {
        reason = Some(format!("modulus c = {} must be non-negative", cert.c));
    } else if !(cert.m.is_finite() && cert.m > 0.0) {
        reason = Some(format!("M = {} must be positive", cert.m));
    } else if !(q.is_finite() && q >= 1.0) {
        reason = Some(format!("q = {q} must be at least 1"));
    }
    let slack = if reason.is_none() {
        let h = oracle::target_fn(&inst.f, &inst.fprime, cert.target, q);
        oracle::check_strong_convexity(h, a, b, cert.c)?
    } else {
        f64::NAN
    };
    if reason.is_none() {
        if slack.is_nan() || slack < -SLACK_TOL {
            reason = Some(format!("not strongly convex with c = {}: grid slack {slack:e}", cert.c));
        } else if cert.m < grid_sup * (1.0 - SUP_REL_TOL) {
            reason = Some(format!("M = {} is below the grid sup of |f'| = {grid_sup}", cert.m));
        }
    }
    Ok(CertificateCheck {
        target: cert.target,
        c: cert.c,
        m: cert.m,
        q: cert.q,
        slack,
        grid_sup,
        passed: reason.is_none(),
        reason,
    })
}

/// Re-derives every declared property of `inst` with the oracle.
pub fn validate_instance(inst: &FunctionInstance) -> Result<InstanceValidation, CorpusError> {
    let wrap = |source| CorpusError::Oracle { instance: inst.name.clone(), source };
    let (a, b) = inst.interval();
    let grid_sup = oracle::grid_max_abs(|x| inst.fprime.eval(x), a, b).map_err(wrap)?;
    let certificates = inst
        .certificates
        .iter()
        .map(|c| check_certificate(inst, c, grid_sup))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap)?;

    let antiderivative_residual = match &inst.antiderivative {
        None => None,
        Some(anti) => {
            let dfa = anti.derive().map_err(|e| CorpusError::Validation {
                instance: inst.name.clone(),
                target: "antiderivative".into(),
                reason: e.to_string(),
            })?;
            let mut worst = 0.0f64;
            for x in grid(a, b, ANTIDERIVATIVE_GRID) {
                let r = oracle::eval_at(&dfa, x).map_err(wrap)? - oracle::eval_at(&inst.f, x).map_err(wrap)?;
                worst = worst.max(r.abs());
            }
            Some(worst)
        }
    };

    let nonneg_min = if inst.nonneg {
        let mut min = f64::INFINITY;
        for x in grid(a, b, NONNEG_GRID) {
            min = min.min(oracle::eval_at(&inst.f, x).map_err(wrap)?);
        }
        Some(min)
    } else {
        None
    };

    let passed = certificates.iter().all(|c| c.passed)
        && antiderivative_residual.is_none_or(|r| r <= ANTIDERIVATIVE_TOL)
        && nonneg_min.is_none_or(|m| m >= NONNEG_TOL);
    Ok(InstanceValidation { instance: inst.name.clone(), certificates, antiderivative_residual, nonneg_min, passed })
}

/// Validates every instance, failing on the first rejected one.
pub fn validate_corpus(corpus: &Corpus) -> Result<Vec<InstanceValidation>, CorpusError> {
    corpus.instances.iter().map(|i| validate_instance(i)?.into_result()).collect()
}

/// Reads, parses and validates a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let corpus = parse_corpus(&text)?;
    validate_corpus(&corpus)?;
    Ok(corpus)
}
