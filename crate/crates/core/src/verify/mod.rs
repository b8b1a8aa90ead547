//! Verification harness: every inequality is instantiated over the corpus,
//! its left-hand side computed by the oracle and its right-hand side by the
//! closed forms in [`crate::bounds`].

mod report;
mod suite;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundParams, BoundsError};
use crate::corpus::{CertTarget, FunctionInstance};
use crate::oracle::{self, OracleError};

pub use report::{write_csv, Severity, Skip, TheoremSummary, Totals, VerificationReport};
pub use suite::{run_suite, SuiteConfig};

/// Violations below `-MATHEMATICAL_MARGIN` are classed as mathematical,
/// anything between that and `-tol_verify` as numerical noise.
pub const MATHEMATICAL_MARGIN: f64 = 1e-6;

/// Identifiers of the checked inequalities, in report order.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    /// Classical Ostrowski bound.
    H11,
    /// Hölder-type bound with `|f'|^q` convex.
    C1_12,
    /// `|f'|` strongly convex.
    T1_AA,
    /// `|f'|^q` strongly convex, Hölder form.
    T2_A,
    /// `|f'|^q` strongly convex, power-mean form.
    T3_K,
    COR2,
    COR3,
    COR4,
    /// Product of two strongly convex functions.
    T4_Z1,
    /// Weighted product inequality, both strongly convex.
    T5_Z2,
    /// Convex times strongly convex.
    T6_Z3,
    /// Weighted product inequality, convex times strongly convex.
    T7,
    /// `T4_Z1` with `g = 1` substituted.
    COR5,
    /// `T6_Z3` with `g = 1` substituted.
    COR6,
    /// The Montgomery-type identity behind the single-function bounds.
    LEMMA1,
}

impl TheoremId {
    pub const ALL: [TheoremId; 15] = [
        TheoremId::H11,
        TheoremId::C1_12,
        TheoremId::T1_AA,
        TheoremId::T2_A,
        TheoremId::T3_K,
        TheoremId::COR2,
        TheoremId::COR3,
        TheoremId::COR4,
        TheoremId::T4_Z1,
        TheoremId::T5_Z2,
        TheoremId::T6_Z3,
        TheoremId::T7,
        TheoremId::COR5,
        TheoremId::COR6,
        TheoremId::LEMMA1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::H11 => "H11",
            TheoremId::C1_12 => "C1_12",
            TheoremId::T1_AA => "T1_AA",
            TheoremId::T2_A => "T2_A",
            TheoremId::T3_K => "T3_K",
            TheoremId::COR2 => "COR2",
            TheoremId::COR3 => "COR3",
            TheoremId::COR4 => "COR4",
            TheoremId::T4_Z1 => "T4_Z1",
            TheoremId::T5_Z2 => "T5_Z2",
            TheoremId::T6_Z3 => "T6_Z3",
            TheoremId::T7 => "T7",
            TheoremId::COR5 => "COR5",
            TheoremId::COR6 => "COR6",
            TheoremId::LEMMA1 => "LEMMA1",
        }
    }

    /// Corollaries obtained by substituting `g = 1`, which is not strongly
    /// convex; they are checked but expected to fail.
    pub fn is_suspect(self) -> bool {
        matches!(self, TheoremId::COR5 | TheoremId::COR6)
    }

    /// Takes a pair of functions rather than one.
    pub fn is_product(self) -> bool {
        matches!(self, TheoremId::T4_Z1 | TheoremId::T5_Z2 | TheoremId::T6_Z3 | TheoremId::T7)
    }

    /// Evaluated at a point `x` of the interval.
    pub fn uses_point(self) -> bool {
        matches!(
            self,
            TheoremId::H11 | TheoremId::C1_12 | TheoremId::T1_AA | TheoremId::T2_A | TheoremId::T3_K | TheoremId::LEMMA1
        )
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown theorem id {s:?}"))
    }
}

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub theorem: TheoremId,
    pub instance: String,
    pub draw: usize,
    pub params: BoundParams,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub suspect: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
}

impl BoundResult {
    fn new(theorem: TheoremId, instance: String, params: BoundParams, lhs: f64, rhs: f64, tol_verify: f64) -> Self {
        let margin = rhs - lhs;
        let holds = margin >= -tol_verify;
        let severity = match holds {
            true => None,
            false if margin < -MATHEMATICAL_MARGIN => Some(Severity::Mathematical),
            false => Some(Severity::NumericalSuspect),
        };
        BoundResult {
            theorem,
            instance,
            draw: 0,
            params,
            lhs,
            rhs,
            margin,
            holds,
            suspect: theorem.is_suspect(),
            severity,
        }
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    /// The instance does not satisfy the theorem's premises; the check is
    /// skipped and the reason recorded.
    #[error("premise not met: {0}")]
    Premise(String),
    #[error(transparent)]
    Hypothesis(#[from] BoundsError),
    #[error("{theorem} on {instance}: {source}")]
    Oracle { theorem: TheoremId, instance: String, source: OracleError },
}

/// What a theorem is applied to.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Single(&'a FunctionInstance),
    Pair(&'a FunctionInstance, &'a FunctionInstance),
}

impl Subject<'_> {
    pub fn name(&self) -> String {
        match self {
            Subject::Single(f) => f.name.clone(),
            Subject::Pair(f, g) => format!("{}*{}", f.name, g.name),
        }
    }
}

/// Tolerances shared by the individual checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `holds` iff `margin >= -tol_verify`.
    pub tol_verify: f64,
    /// Absolute tolerance for adaptive quadrature.
    pub quad_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol_verify: 1e-9, quad_tol: 1e-12 }
    }
}

fn premise(msg: impl Into<String>) -> VerifyError {
    VerifyError::Premise(msg.into())
}

fn require<T: Copy>(v: Option<T>, what: &str) -> Result<T, VerifyError> {
    v.ok_or_else(|| premise(format!("parameter {what} is required")))
}

/// Finds a certificate with `target` (and exponent `q`) that covers the
/// requested modulus and derivative bound.
fn covering_cert(
    inst: &FunctionInstance,
    target: CertTarget,
    q: Option<f64>,
    c: f64,
    m: Option<f64>,
) -> Result<(), VerifyError> {
    let ok = inst.certificates.iter().any(|cert| {
        cert.target == target
            && q.is_none_or(|q| cert.exponent() == q)
            && cert.c >= c
            && m.is_none_or(|m| m >= cert.m)
    });
    if ok {
        Ok(())
    } else {
        let q = q.map(|q| format!(" with q = {q}")).unwrap_or_default();
        Err(premise(format!(
            "{} has no {target} certificate{q} covering c = {c} and M = {}",
            inst.name,
            m.map_or("-".to_string(), |m| m.to_string())
        )))
    }
}

/// Certificate needed by the single-function strongly convex bounds for a
/// given exponent: `ABS_DERIV` when `q = 1`, `ABS_DERIV_POW` otherwise.
fn derivative_cert(inst: &FunctionInstance, q: f64, c: f64, m: f64) -> Result<(), VerifyError> {
    if q == 1.0 {
        covering_cert(inst, CertTarget::AbsDerivative, None, c, Some(m))
            .or_else(|_| covering_cert(inst, CertTarget::AbsDerivativePow, Some(1.0), c, Some(m)))
    } else {
        covering_cert(inst, CertTarget::AbsDerivativePow, Some(q), c, Some(m))
    }
}

fn nonneg(inst: &FunctionInstance) -> Result<(), VerifyError> {
    if inst.nonneg {
        Ok(())
    } else {
        Err(premise(format!("{} is not declared non-negative", inst.name)))
    }
}

fn same_interval(f: &FunctionInstance, g: &FunctionInstance) -> Result<(f64, f64), VerifyError> {
    if f.interval() == g.interval() {
        Ok(f.interval())
    } else {
        Err(premise(format!("{} and {} live on different intervals", f.name, g.name)))
    }
}

struct OracleCtx<'a> {
    theorem: TheoremId,
    instance: &'a str,
    quad_tol: f64,
}

impl OracleCtx<'_> {
    fn wrap(&self, source: OracleError) -> VerifyError {
        VerifyError::Oracle { theorem: self.theorem, instance: self.instance.to_string(), source }
    }

    fn eval(&self, inst: &FunctionInstance, x: f64) -> Result<f64, VerifyError> {
        oracle::eval_at(&inst.f, x).map_err(|e| self.wrap(e))
    }

    fn mean(&self, inst: &FunctionInstance) -> Result<f64, VerifyError> {
        oracle::mean_value(inst, self.quad_tol).map_err(|e| self.wrap(e))
    }

    /// `∫_a^b w(x)·f(x)` for a polynomial weight.
    fn weighted(&self, inst: &FunctionInstance, w: impl Fn(f64) -> f64) -> Result<f64, VerifyError> {
        let (a, b) = inst.interval();
        oracle::integrate(|x| Ok(w(x) * inst.f.eval(x)?), a, b, self.quad_tol)
            .map(|r| r.value)
            .map_err(|e| self.wrap(e))
    }

    fn product(&self, f: &FunctionInstance, g: &FunctionInstance) -> Result<f64, VerifyError> {
        let (a, b) = f.interval();
        oracle::integrate(|x| Ok(f.f.eval(x)? * g.f.eval(x)?), a, b, self.quad_tol)
            .map(|r| r.value)
            .map_err(|e| self.wrap(e))
    }
}

/// `|L - R|` where `L = f(x) - (1/(b-a))∫f` and
/// `R = (x-a)²/(b-a)·∫₀¹ t f'(tx+(1-t)a) dt - (b-x)²/(b-a)·∫₀¹ t f'(tx+(1-t)b) dt`,
/// every integral from the oracle.
pub fn verify_lemma1_identity(inst: &FunctionInstance, x: f64, tol: f64) -> Result<f64, OracleError> {
    let (a, b) = inst.interval();
    let w = b - a;
    let mean = oracle::mean_value(inst, tol)?;
    let left = oracle::eval_at(&inst.f, x)? - mean;
    let moment = |end: f64| {
        oracle::integrate(|t| Ok(t * inst.fprime.eval(t * x + (1.0 - t) * end)?), 0.0, 1.0, tol).map(|r| r.value)
    };
    let (dl, dr) = (x - a, b - x);
    let right = dl * dl / w * moment(a)? - dr * dr / w * moment(b)?;
    Ok((left - right).abs())
}

/// Weighted product inequality for two strongly convex, non-negative
/// functions, in the stated arrangement: the boundary-weighted moments less
/// `c/(b-a)³·∫(x-a)(b-x)(f+g)` on the left, `(1/(b-a))∫fg` plus the product
/// bound on the right.
pub fn product_check_z2(
    f: &FunctionInstance,
    g: &FunctionInstance,
    c: f64,
    tol: Tolerances,
) -> Result<BoundResult, VerifyError> {
    let theorem = TheoremId::T5_Z2;
    nonneg(f)?;
    nonneg(g)?;
    covering_cert(f, CertTarget::Function, None, c, None)?;
    covering_cert(g, CertTarget::Function, None, c, None)?;
    let (a, b) = same_interval(f, g)?;
    let name = Subject::Pair(f, g).name();
    let ctx = OracleCtx { theorem, instance: &name, quad_tol: tol.quad_tol };
    let w = b - a;
    let (w2, w3) = (w * w, w * w * w);
    let (fa, fb, ga, gb) = (ctx.eval(f, a)?, ctx.eval(f, b)?, ctx.eval(g, a)?, ctx.eval(g, b)?);
    let rise = |x: f64| x - a;
    let fall = |x: f64| b - x;
    let bump = |x: f64| (x - a) * (b - x);
    let lhs = gb / w2 * ctx.weighted(f, rise)? + ga / w2 * ctx.weighted(f, fall)? + fb / w2 * ctx.weighted(g, rise)?
        + fa / w2 * ctx.weighted(g, fall)?
        - c / w3 * ctx.weighted(f, bump)?
        - c / w3 * ctx.weighted(g, bump)?;
    let rhs = ctx.product(f, g)? / w + bounds::product_rhs_z1(fa, fb, ga, gb, a, b, c)?;
    Ok(BoundResult::new(theorem, name, BoundParams::interval(a, b).with_c(c), lhs, rhs, tol.tol_verify))
}

/// Weighted product inequality for convex `f` and strongly convex `g`, in the
/// stated arrangement.
pub fn product_check_t7(
    f: &FunctionInstance,
    g: &FunctionInstance,
    c: f64,
    tol: Tolerances,
) -> Result<BoundResult, VerifyError> {
    let theorem = TheoremId::T7;
    nonneg(f)?;
    nonneg(g)?;
    covering_cert(f, CertTarget::Function, None, 0.0, None)?;
    covering_cert(g, CertTarget::Function, None, c, None)?;
    let (a, b) = same_interval(f, g)?;
    let name = Subject::Pair(f, g).name();
    let ctx = OracleCtx { theorem, instance: &name, quad_tol: tol.quad_tol };
    let w = b - a;
    let (w2, w3) = (w * w, w * w * w);
    let (fa, fb, ga, gb) = (ctx.eval(f, a)?, ctx.eval(f, b)?, ctx.eval(g, a)?, ctx.eval(g, b)?);
    let rise = |x: f64| x - a;
    let fall = |x: f64| b - x;
    let lhs = gb / w2 * ctx.weighted(f, rise)? + ga / w2 * ctx.weighted(f, fall)? + fb / w2 * ctx.weighted(g, rise)?
        + fa / w2 * ctx.weighted(g, fall)?
        - c / w3 * ctx.weighted(f, |x| (x - a) * (b - x))?;
    let rhs = ctx.product(f, g)? / w + bounds::mixed_rhs_z3(fa, fb, ga, gb)?
        - bounds::mixed_lhs_extra_z3(fa, fb, a, b, c)?;
    Ok(BoundResult::new(theorem, name, BoundParams::interval(a, b).with_c(c), lhs, rhs, tol.tol_verify))
}

/// Checks one theorem for one subject at the given parameters.
///
/// The left-hand side always comes from the oracle and the right-hand side
/// from [`crate::bounds`]. Premise failures (missing certificate, failed
/// hypothesis) are returned as [`VerifyError::Premise`] or
/// [`VerifyError::Hypothesis`] so callers can record a skip.
pub fn check_theorem(
    subject: Subject<'_>,
    theorem: TheoremId,
    params: &BoundParams,
    tol: Tolerances,
) -> Result<BoundResult, VerifyError> {
    params.validate()?;
    let name = subject.name();
    let ctx = OracleCtx { theorem, instance: &name, quad_tol: tol.quad_tol };
    let result = |lhs: f64, rhs: f64| BoundResult::new(theorem, name.clone(), *params, lhs, rhs, tol.tol_verify);

    match (theorem.is_product(), subject) {
        (true, Subject::Single(_)) => return Err(premise(format!("{theorem} needs a pair of functions"))),
        (false, Subject::Pair(..)) => return Err(premise(format!("{theorem} takes a single function"))),
        _ => {}
    }

    if let Subject::Pair(f, g) = subject {
        let (a, b) = same_interval(f, g)?;
        if (params.a, params.b) != (a, b) {
            return Err(premise(format!("parameters [{}, {}] differ from the pair interval", params.a, params.b)));
        }
        let c = require(params.c, "c")?;
        return match theorem {
            TheoremId::T4_Z1 => {
                nonneg(f)?;
                nonneg(g)?;
                covering_cert(f, CertTarget::Function, None, c, None)?;
                covering_cert(g, CertTarget::Function, None, c, None)?;
                let (fa, fb, ga, gb) = (ctx.eval(f, a)?, ctx.eval(f, b)?, ctx.eval(g, a)?, ctx.eval(g, b)?);
                let lhs = ctx.product(f, g)? / (b - a);
                Ok(result(lhs, bounds::product_rhs_z1(fa, fb, ga, gb, a, b, c)?))
            }
            TheoremId::T6_Z3 => {
                nonneg(f)?;
                nonneg(g)?;
                covering_cert(f, CertTarget::Function, None, 0.0, None)?;
                covering_cert(g, CertTarget::Function, None, c, None)?;
                let (fa, fb, ga, gb) = (ctx.eval(f, a)?, ctx.eval(f, b)?, ctx.eval(g, a)?, ctx.eval(g, b)?);
                let w = b - a;
                let extra = c * (w * w) / 6.0 * ((fa + fb) / 2.0);
                let lhs = ctx.product(f, g)? / w + extra;
                Ok(result(lhs, bounds::mixed_rhs_z3(fa, fb, ga, gb)?))
            }
            TheoremId::T5_Z2 => product_check_z2(f, g, c, tol).map(|r| BoundResult { params: *params, ..r }),
            TheoremId::T7 => product_check_t7(f, g, c, tol).map(|r| BoundResult { params: *params, ..r }),
            _ => unreachable!("product theorems handled above"),
        };
    }

    let Subject::Single(inst) = subject else { unreachable!() };
    let (a, b) = inst.interval();
    if (params.a, params.b) != (a, b) {
        return Err(premise(format!("parameters [{}, {}] differ from the interval of {}", params.a, params.b, inst.name)));
    }
    let deviation = |x: f64| -> Result<f64, VerifyError> { Ok((ctx.eval(inst, x)? - ctx.mean(inst)?).abs()) };
    let mid = 0.5 * (a + b);

    match theorem {
        TheoremId::H11 => {
            let (x, m) = (require(params.x, "x")?, require(params.m, "M")?);
            let declared = inst.derivative_bound().ok_or_else(|| premise(format!("{} declares no M", inst.name)))?;
            if m < declared {
                return Err(premise(format!("M = {m} is below the declared bound {declared}")));
            }
            Ok(result(deviation(x)?, bounds::classic_ostrowski_rhs(x, a, b, m)?))
        }
        TheoremId::C1_12 => {
            let (x, m, p, q) = (require(params.x, "x")?, require(params.m, "M")?, require(params.p, "p")?, require(params.q, "q")?);
            if q <= 1.0 {
                return Err(premise("the Hölder bound needs q > 1"));
            }
            covering_cert(inst, CertTarget::AbsDerivativePow, Some(q), 0.0, Some(m))?;
            Ok(result(deviation(x)?, bounds::alomari_rhs(x, a, b, m, p)?))
        }
        TheoremId::T1_AA => {
            let (x, m, c) = (require(params.x, "x")?, require(params.m, "M")?, require(params.c, "c")?);
            derivative_cert(inst, 1.0, c, m)?;
            let rhs = bounds::sc_rhs_t1(x, a, b, m, c)?;
            Ok(result(deviation(x)?, rhs))
        }
        TheoremId::T2_A => {
            let (x, m, c) = (require(params.x, "x")?, require(params.m, "M")?, require(params.c, "c")?);
            let (p, q) = (require(params.p, "p")?, require(params.q, "q")?);
            derivative_cert(inst, q, c, m)?;
            let rhs = bounds::sc_rhs_t2(x, a, b, m, c, p, q)?;
            Ok(result(deviation(x)?, rhs))
        }
        TheoremId::T3_K => {
            let (x, m, c, q) = (require(params.x, "x")?, require(params.m, "M")?, require(params.c, "c")?, require(params.q, "q")?);
            derivative_cert(inst, q, c, m)?;
            let rhs = bounds::sc_rhs_t3(x, a, b, m, c, q)?;
            Ok(result(deviation(x)?, rhs))
        }
        TheoremId::COR2 => {
            let (m, c) = (require(params.m, "M")?, require(params.c, "c")?);
            derivative_cert(inst, 1.0, c, m)?;
            let rhs = bounds::midpoint_rhs_t1(a, b, m, c)?;
            Ok(result(deviation(mid)?, rhs))
        }
        TheoremId::COR3 => {
            let (m, c) = (require(params.m, "M")?, require(params.c, "c")?);
            let (p, q) = (require(params.p, "p")?, require(params.q, "q")?);
            derivative_cert(inst, q, c, m)?;
            let rhs = bounds::midpoint_rhs_t2(a, b, m, c, p, q)?;
            Ok(result(deviation(mid)?, rhs))
        }
        TheoremId::COR4 => {
            let (m, c, q) = (require(params.m, "M")?, require(params.c, "c")?, require(params.q, "q")?);
            derivative_cert(inst, q, c, m)?;
            let rhs = bounds::midpoint_rhs_t3(a, b, m, c, q)?;
            Ok(result(deviation(mid)?, rhs))
        }
        TheoremId::COR5 => {
            let c = require(params.c, "c")?;
            nonneg(inst)?;
            covering_cert(inst, CertTarget::Function, None, c, None)?;
            let (fa, fb) = (ctx.eval(inst, a)?, ctx.eval(inst, b)?);
            Ok(result(ctx.mean(inst)?, bounds::cor5_rhs(fa, fb, a, b, c)?))
        }
        TheoremId::COR6 => {
            let c = require(params.c, "c")?;
            nonneg(inst)?;
            covering_cert(inst, CertTarget::Function, None, 0.0, None)?;
            let (fa, fb) = (ctx.eval(inst, a)?, ctx.eval(inst, b)?);
            Ok(result(ctx.mean(inst)?, bounds::cor6_rhs(fa, fb, a, b, c)?))
        }
        TheoremId::LEMMA1 => {
            let x = require(params.x, "x")?;
            let residual = verify_lemma1_identity(inst, x, tol.quad_tol).map_err(|e| ctx.wrap(e))?;
            Ok(result(residual, 0.0))
        }
        _ => unreachable!("product theorems handled above"),
    }
}
