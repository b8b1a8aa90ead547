//! Composite midpoint rule with a priori error certificates.
//!
//! On a panel `[u, v]` with `|f'| <= M` and `|f'|` strongly convex with
//! modulus `c`, the midpoint corollary scaled by the panel width gives
//!
//! ```text
//! |∫_u^v f - (v-u) f((u+v)/2)| <= (v-u)·(M(v-u)/4 - c(v-u)³/96)
//! ```
//!
//! whenever `M >= c(v-u)²/24`; otherwise the classical bound `M(v-u)²/4` is
//! used. Strong convexity restricts to subintervals with the same `c`, so the
//! modulus is never rescaled.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::bounds;
use crate::corpus::{CertTarget, FunctionInstance};
use crate::expr::{EvalError, Expr};
use crate::sum::{neumaier, NeumaierSum};

/// Default panel budget, 2¹⁶.
pub const DEFAULT_MAX_PANELS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleUsed {
    #[serde(rename = "STRONG_CONVEX")]
    StrongConvex,
    #[serde(rename = "CLASSICAL")]
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Bisect the panel with the largest certificate.
    #[default]
    Greedy,
    /// Double the number of equal panels.
    Uniform,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "uniform" => Ok(Strategy::Uniform),
            other => Err(format!("unknown strategy {other:?}, expected greedy or uniform")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Uniform => "uniform",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("no derivative bound M is available")]
    MissingBound,
    #[error("M must be positive and finite, got {0}")]
    InvalidBound(f64),
    #[error("modulus c must be non-negative and finite, got {0}")]
    InvalidModulus(f64),
    #[error("target certificate must be positive, got {0}")]
    InvalidTarget(f64),
    #[error("panel [{u}, {v}] is not inside [{a}, {b}]")]
    PanelOutside { u: f64, v: f64, a: f64, b: f64 },
    #[error("interval requires finite a < b, got [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("max_panels must be at least 1")]
    NoPanels,
    #[error("evaluation failed at x = {x}: {source}")]
    Evaluation { x: f64, source: EvalError },
}

/// A function together with the premises the certificates rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    pub f: Expr,
    pub fprime: Option<Expr>,
    /// Global bound with `|f'| <= m` on `[a, b]`.
    pub m: f64,
    /// Strong-convexity modulus of `|f'|` on `[a, b]`.
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// `sup |f'|` on any subinterval is attained at an endpoint, so the local
    /// bound on `[u, v]` is `max(|f'(u)|, |f'(v)|)`.
    pub endpoint_sup: bool,
}

impl Integrand {
    /// Uses the instance's `ABS_DERIV` certificate, or any declared `M` with
    /// `c = 0` when there is none.
    pub fn from_instance(inst: &FunctionInstance) -> Result<Self, IntegrateError> {
        let (m, c) = match inst.certificate(CertTarget::AbsDerivative) {
            Some(cert) => (cert.m, cert.c),
            None => (inst.derivative_bound().ok_or(IntegrateError::MissingBound)?, 0.0),
        };
        Integrand::new(inst.f.clone(), Some(inst.fprime.clone()), inst.a, inst.b, m, c, inst.endpoint_sup)
    }

    pub fn new(
        f: Expr,
        fprime: Option<Expr>,
        a: f64,
        b: f64,
        m: f64,
        c: f64,
        endpoint_sup: bool,
    ) -> Result<Self, IntegrateError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(IntegrateError::InvalidInterval { a, b });
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(IntegrateError::InvalidBound(m));
        }
        if !(c.is_finite() && c >= 0.0) {
            return Err(IntegrateError::InvalidModulus(c));
        }
        let endpoint_sup = endpoint_sup && fprime.is_some();
        Ok(Integrand { f, fprime, m, c, a, b, endpoint_sup })
    }

    fn eval(e: &Expr, x: f64) -> Result<f64, IntegrateError> {
        e.eval(x).map_err(|source| IntegrateError::Evaluation { x, source })
    }

    /// Bound on `|f'|` over `[u, v]`, and the number of evaluations spent.
    fn local_bound(&self, u: f64, v: f64) -> Result<(f64, usize), IntegrateError> {
        match (&self.fprime, self.endpoint_sup) {
            (Some(fp), true) => {
                let end = Self::eval(fp, u)?.abs().max(Self::eval(fp, v)?.abs());
                // a few ulps of headroom for the rounding of f' itself
                Ok(((end * (1.0 + 4.0 * f64::EPSILON)).min(self.m), 2))
            }
            _ => Ok((self.m, 0)),
        }
    }
}

/// One panel of a certified integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Panel {
    pub left: f64,
    pub right: f64,
    /// `(right - left) · f(midpoint)`.
    pub contribution: f64,
    pub local_m: f64,
    pub local_c: f64,
    pub local_certificate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule_used: Option<RuleUsed>,
}

impl Eq for Panel {}

impl Ord for Panel {
    // largest certificate first; ties go to the leftmost panel
    fn cmp(&self, other: &Self) -> Ordering {
        self.local_certificate
            .total_cmp(&other.local_certificate)
            .then_with(|| other.left.total_cmp(&self.left))
    }
}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Certifies a single panel. Returns the panel and the evaluations spent.
pub fn certify_panel(integrand: &Integrand, u: f64, v: f64) -> Result<(Panel, usize), IntegrateError> {
    let (a, b) = (integrand.a, integrand.b);
    if !(a <= u && u <= v && v <= b) {
        return Err(IntegrateError::PanelOutside { u, v, a, b });
    }
    let w = v - u;
    if w == 0.0 {
        let panel = Panel {
            left: u,
            right: v,
            contribution: 0.0,
            local_m: 0.0,
            local_c: integrand.c,
            local_certificate: 0.0,
            rule_used: None,
        };
        return Ok((panel, 0));
    }
    let contribution = w * Integrand::eval(&integrand.f, 0.5 * (u + v))?;
    let (local_m, evals) = integrand.local_bound(u, v)?;
    let c = integrand.c;
    let (local_certificate, rule) = if local_m == 0.0 {
        // f' vanishes on the panel, so the midpoint rule is exact there
        (0.0, RuleUsed::Classical)
    } else {
        match bounds::midpoint_rhs_t1(u, v, local_m, c) {
            Ok(r) if c > 0.0 => (w * r, RuleUsed::StrongConvex),
            _ => (w * bounds::midpoint_rhs_t1(u, v, local_m, 0.0).expect("valid classical inputs"), RuleUsed::Classical),
        }
    };
    let panel = Panel { left: u, right: v, contribution, local_m, local_c: c, local_certificate, rule_used: Some(rule) };
    Ok((panel, evals + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedIntegral {
    /// Composite midpoint sum.
    pub value: f64,
    /// Sum of the local certificates; bounds `|∫f - value|` under the premises.
    pub certificate: f64,
    /// Panels sorted by left endpoint; they partition `[a, b]`.
    pub panels: Vec<Panel>,
    pub evaluations: usize,
    pub converged: bool,
    pub target: f64,
    pub strategy: Strategy,
}

fn finish(mut panels: Vec<Panel>, evaluations: usize, target: f64, strategy: Strategy) -> CertifiedIntegral {
    panels.sort_by(|p, q| p.left.total_cmp(&q.left));
    let value = neumaier(panels.iter().map(|p| p.contribution));
    let certificate = neumaier(panels.iter().map(|p| p.local_certificate));
    CertifiedIntegral { value, certificate, panels, evaluations, converged: certificate <= target, target, strategy }
}

fn greedy(integrand: &Integrand, target: f64, max_panels: usize) -> Result<CertifiedIntegral, IntegrateError> {
    let (first, mut evaluations) = certify_panel(integrand, integrand.a, integrand.b)?;
    let mut total = NeumaierSum::new();
    total += first.local_certificate;
    let mut heap = BinaryHeap::from([first]);
    while heap.len() < max_panels {
        if total.value() <= target {
            // the running sum has absorbed many cancellations; confirm it
            let exact = neumaier(heap.iter().map(|p| p.local_certificate));
            if exact <= target {
                break;
            }
            total = NeumaierSum::new();
            total += exact;
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.left + worst.right);
        if !(worst.left < mid && mid < worst.right) {
            heap.push(worst);
            break;
        }
        let (l, el) = certify_panel(integrand, worst.left, mid)?;
        let (r, er) = certify_panel(integrand, mid, worst.right)?;
        evaluations += el + er;
        total += l.local_certificate;
        total += r.local_certificate;
        total += -worst.local_certificate;
        heap.push(l);
        heap.push(r);
    }
    Ok(finish(heap.into_vec(), evaluations, target, Strategy::Greedy))
}

fn uniform(integrand: &Integrand, target: f64, max_panels: usize) -> Result<CertifiedIntegral, IntegrateError> {
    let (a, b) = (integrand.a, integrand.b);
    let mut n = 1usize;
    let mut evaluations = 0;
    loop {
        let edge = |i: usize| if i == n { b } else { a + (b - a) * (i as f64 / n as f64) };
        let mut panels = Vec::with_capacity(n);
        for i in 0..n {
            let (p, e) = certify_panel(integrand, edge(i), edge(i + 1))?;
            evaluations += e;
            panels.push(p);
        }
        let result = finish(panels, evaluations, target, Strategy::Uniform);
        if result.converged || n * 2 > max_panels {
            return Ok(result);
        }
        n *= 2;
    }
}

/// Refines until the total certificate is at most `target` or the panel
/// budget is spent; in the latter case the best result so far is returned
/// with `converged = false`.
pub fn integrate_certified(
    integrand: &Integrand,
    target: f64,
    max_panels: usize,
    strategy: Strategy,
) -> Result<CertifiedIntegral, IntegrateError> {
    if target.is_nan() || target <= 0.0 {
        return Err(IntegrateError::InvalidTarget(target));
    }
    if max_panels == 0 {
        return Err(IntegrateError::NoPanels);
    }
    match strategy {
        Strategy::Greedy => greedy(integrand, target, max_panels),
        Strategy::Uniform => uniform(integrand, target, max_panels),
    }
}

/// `n` equal panels, without refinement.
pub fn integrate_fixed(integrand: &Integrand, n: usize) -> Result<CertifiedIntegral, IntegrateError> {
    if n == 0 {
        return Err(IntegrateError::NoPanels);
    }
    let (a, b) = (integrand.a, integrand.b);
    let edge = |i: usize| if i == n { b } else { a + (b - a) * (i as f64 / n as f64) };
    let mut panels = Vec::with_capacity(n);
    let mut evaluations = 0;
    for i in 0..n {
        let (p, e) = certify_panel(integrand, edge(i), edge(i + 1))?;
        evaluations += e;
        panels.push(p);
    }
    Ok(finish(panels, evaluations, f64::INFINITY, Strategy::Uniform))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::builtin_corpus;
    use crate::oracle::integrate_exact;

    fn integrand(name: &str) -> (Integrand, f64) {
        let inst = builtin_corpus().into_iter().find(|i| i.name == name).unwrap();
        let exact = integrate_exact(inst.antiderivative.as_ref().unwrap(), inst.a, inst.b).unwrap().value;
        (Integrand::from_instance(&inst).unwrap(), exact)
    }

    #[test]
    fn quad_panel_is_classical() {
        let (quad, _) = integrand("quad");
        let (p, _) = certify_panel(&quad, 0.75, 1.0).unwrap();
        assert_eq!(p.local_m, 2.0);
        assert_eq!(p.local_certificate, 0.03125);
        assert_eq!(p.rule_used, Some(RuleUsed::Classical));
    }

    #[test]
    fn cubic_panel_is_strongly_convex() {
        let (cubic, _) = integrand("cubic");
        let (p, _) = certify_panel(&cubic, 0.75, 1.0).unwrap();
        assert_eq!(p.local_m, 1.0);
        let want = 0.25 * (0.25 / 4.0 - 0.25f64.powi(3) / 96.0);
        assert!((p.local_certificate - want).abs() < 1e-17);
        assert!((p.local_certificate - 0.015584).abs() < 1e-6);
        assert_eq!(p.rule_used, Some(RuleUsed::StrongConvex));
        let true_err = ((1.0f64 - 0.75f64.powi(4)) / 12.0 - p.contribution).abs();
        assert!(true_err <= p.local_certificate);
    }

    #[test]
    fn zero_width_panel() {
        let (quad, _) = integrand("quad");
        let (p, e) = certify_panel(&quad, 0.5, 0.5).unwrap();
        assert_eq!((p.contribution, p.local_certificate, p.rule_used, e), (0.0, 0.0, None, 0));
    }

    #[test]
    fn strong_convex_never_exceeds_classical() {
        let (cubic, _) = integrand("cubic");
        let classical = Integrand { c: 0.0, ..cubic.clone() };
        for (u, v) in [(0.0, 1.0), (0.0, 0.5), (0.3, 0.4), (0.9, 1.0)] {
            let s = certify_panel(&cubic, u, v).unwrap().0.local_certificate;
            let c = certify_panel(&classical, u, v).unwrap().0.local_certificate;
            assert!(s <= c);
        }
    }

    #[test]
    fn cubic_four_uniform_panels() {
        let (cubic, exact) = integrand("cubic");
        let r = integrate_fixed(&cubic, 4).unwrap();
        assert_eq!(r.panels.len(), 4);
        assert!((exact - r.value).abs() <= r.certificate);
    }

    #[test]
    fn sound_for_every_instance_and_budget() {
        for inst in builtin_corpus() {
            let integrand = Integrand::from_instance(&inst).unwrap();
            let exact = integrate_exact(inst.antiderivative.as_ref().unwrap(), inst.a, inst.b).unwrap().value;
            for strategy in [Strategy::Greedy, Strategy::Uniform] {
                for budget in [1, 2, 3, 7, 64, 1000] {
                    let r = integrate_certified(&integrand, 1e-6, budget, strategy).unwrap();
                    assert!(r.panels.len() <= budget);
                    assert!((exact - r.value).abs() <= r.certificate, "{} {strategy} {budget}", inst.name);
                }
            }
        }
    }

    #[test]
    fn panels_partition_interval() {
        let (expq, _) = integrand("expq");
        let r = integrate_certified(&expq, 1e-3, 1000, Strategy::Greedy).unwrap();
        assert_eq!(r.panels.first().unwrap().left, 0.0);
        assert_eq!(r.panels.last().unwrap().right, 1.0);
        for w in r.panels.windows(2) {
            assert_eq!(w[0].right, w[1].left);
        }
        assert!(r.panels.iter().all(|p| p.local_certificate >= 0.0));
        let sum = neumaier(r.panels.iter().map(|p| p.local_certificate));
        assert_eq!(sum, r.certificate);
    }

    #[test]
    fn bisection_never_increases_certificate() {
        for name in ["quad", "cubic", "expq", "cosh", "aquad"] {
            let (f, _) = integrand(name);
            let mut last = f64::INFINITY;
            for budget in 1..200 {
                let r = integrate_certified(&f, 1e-12, budget, Strategy::Greedy).unwrap();
                assert!(r.certificate <= last * (1.0 + 1e-12), "{name} at {budget}");
                last = r.certificate;
            }
        }
    }

    #[test]
    fn quad_reaches_target() {
        let (quad, exact) = integrand("quad");
        let r = integrate_certified(&quad, 1e-3, DEFAULT_MAX_PANELS, Strategy::Greedy).unwrap();
        assert!(r.converged && r.certificate <= 1e-3);
        assert!((exact - r.value).abs() <= r.certificate);
    }

    #[test]
    fn affine_is_exact_but_certificate_positive() {
        let (affine, exact) = integrand("affine");
        let r = integrate_certified(&affine, 1e-2, 1024, Strategy::Greedy).unwrap();
        assert_eq!(r.value, exact);
        assert!(r.certificate > 0.0);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let (quad, _) = integrand("quad");
        let r = integrate_certified(&quad, 1e-15, 4, Strategy::Greedy).unwrap();
        assert!(!r.converged);
        assert_eq!(r.panels.len(), 4);
    }

    #[test]
    fn deterministic_tree() {
        let (cosh, _) = integrand("cosh");
        let a = integrate_certified(&cosh, 1e-4, 10_000, Strategy::Greedy).unwrap();
        let b = integrate_certified(&cosh, 1e-4, 10_000, Strategy::Greedy).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let (quad, _) = integrand("quad");
        assert_eq!(integrate_certified(&quad, 0.0, 10, Strategy::Greedy), Err(IntegrateError::InvalidTarget(0.0)));
        assert_eq!(integrate_certified(&quad, 1.0, 0, Strategy::Greedy), Err(IntegrateError::NoPanels));
        assert!(matches!(certify_panel(&quad, -1.0, 0.5), Err(IntegrateError::PanelOutside { .. })));
        assert!(Integrand::new(Expr::var(), None, 0.0, 1.0, 0.0, 0.0, false).is_err());
    }
}
