//! Closed-form right-hand sides of the Ostrowski-type inequalities.
//!
//! Notation shared by every evaluator: `[a, b]` is the interval, `x` the
//! evaluation point, `m` a bound with `|f'| <= m`, `c >= 0` the strong
//! convexity modulus of `|f'|` (or `|f'|^q`), and `(p, q)` a Hölder pair.
//! Every function validates its preconditions and reports hypothesis
//! failures as errors; nothing is clamped.
//!
//! The general forms are written so that the degenerate parameter choices
//! reduce bit-for-bit: `c = 0` in [`sc_rhs_t1`] reproduces
//! [`classic_ostrowski_rhs`], `c = 0` in [`sc_rhs_t2`] reproduces
//! [`alomari_rhs`], and `q = 1` in [`sc_rhs_t3`] reproduces [`sc_rhs_t1`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on `|1/p + 1/q - 1|` for a Hölder pair.
pub const HOLDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("interval requires finite a < b, got [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("x = {x} lies outside [{a}, {b}]")]
    PointOutside { x: f64, a: f64, b: f64 },
    #[error("M must be positive and finite, got {0}")]
    InvalidDerivativeBound(f64),
    #[error("modulus c must be non-negative and finite, got {0}")]
    InvalidModulus(f64),
    #[error("p must exceed 1, got {0}")]
    InvalidP(f64),
    #[error("q must be at least 1, got {0}")]
    InvalidQ(f64),
    #[error("(p, q) = ({p}, {q}) is not a Hölder pair: 1/p + 1/q != 1")]
    NotHolderPair { p: f64, q: f64 },
    #[error("boundary value {0} must be non-negative and finite")]
    InvalidBoundaryValue(f64),
    #[error("hypothesis fails on the {side} side: need M^q >= {required}, have {available}")]
    Hypothesis { side: Side, required: f64, available: f64 },
}

/// Snapshot of the parameters an inequality was evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub a: f64,
    pub b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl BoundParams {
    pub fn interval(a: f64, b: f64) -> Self {
        BoundParams { a, b, x: None, m: None, c: None, p: None, q: None }
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    /// Validates the structural invariants: a < b, a <= x <= b, and the
    /// Hölder relation when both exponents are present.
    pub fn validate(&self) -> Result<(), BoundsError> {
        check_interval(self.a, self.b)?;
        if let Some(x) = self.x {
            check_point(x, self.a, self.b)?;
        }
        if let (Some(p), Some(q)) = (self.p, self.q) {
            check_holder(p, q)?;
        }
        Ok(())
    }
}

fn check_interval(a: f64, b: f64) -> Result<(), BoundsError> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(BoundsError::InvalidInterval { a, b })
    }
}

fn check_point(x: f64, a: f64, b: f64) -> Result<(), BoundsError> {
    if (a..=b).contains(&x) {
        Ok(())
    } else {
        Err(BoundsError::PointOutside { x, a, b })
    }
}

fn check_m(m: f64) -> Result<(), BoundsError> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidDerivativeBound(m))
    }
}

fn check_c(c: f64) -> Result<(), BoundsError> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidModulus(c))
    }
}

fn check_p(p: f64) -> Result<(), BoundsError> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidP(p))
    }
}

fn check_q(q: f64) -> Result<(), BoundsError> {
    if q.is_finite() && q >= 1.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidQ(q))
    }
}

fn check_holder(p: f64, q: f64) -> Result<(), BoundsError> {
    check_p(p)?;
    if !(q.is_finite() && q > 1.0) || (p.recip() + q.recip() - 1.0).abs() > HOLDER_TOL {
        return Err(BoundsError::NotHolderPair { p, q });
    }
    Ok(())
}

fn check_value(v: f64) -> Result<(), BoundsError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidBoundaryValue(v))
    }
}

/// `c d² / 6`, what strong convexity removes from the segment bound.
fn deduction(c: f64, d: f64) -> f64 {
    c * (d * d) / 6.0
}

fn m_pow(m: f64, q: f64) -> f64 {
    if q == 1.0 {
        m
    } else {
        m.powf(q)
    }
}

/// `(M^q - deduction)^(1/q)`.
fn reduced_bound(m: f64, q: f64, deduction: f64) -> f64 {
    if q == 1.0 {
        m - deduction
    } else if deduction == 0.0 {
        m
    } else {
        let radicand = m.powf(q) - deduction;
        assert!(radicand >= 0.0, "negative radicand {radicand} under a satisfied hypothesis");
        radicand.powf(q.recip())
    }
}

fn hypothesis(mq: f64, left: f64, right: f64) -> Result<(), BoundsError> {
    for (side, required) in [(Side::Left, left), (Side::Right, right)] {
        if mq < required {
            return Err(BoundsError::Hypothesis { side, required, available: mq });
        }
    }
    Ok(())
}

/// `(1/(p+1))^(1/p)`, the Hölder factor `(∫ t^p dt)^(1/p)`.
fn holder_factor(p: f64) -> f64 {
    (1.0 / (p + 1.0)).powf(p.recip())
}

/// Classical Ostrowski bound `M/(b-a) · ((x-a)² + (b-x)²)/2`.
pub fn classic_ostrowski_rhs(x: f64, a: f64, b: f64, m: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_point(x, a, b)?;
    check_m(m)?;
    let w = b - a;
    let (dl, dr) = (x - a, b - x);
    Ok(dl * dl / (2.0 * w) * m + dr * dr / (2.0 * w) * m)
}

/// Hölder-type bound `M/(b-a) · ((x-a)² + (b-x)²) / (p+1)^(1/p)`.
pub fn alomari_rhs(x: f64, a: f64, b: f64, m: f64, p: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_point(x, a, b)?;
    check_m(m)?;
    check_p(p)?;
    let w = b - a;
    let k = holder_factor(p);
    let (dl, dr) = (x - a, b - x);
    Ok(dl * dl / w * k * m + dr * dr / w * k * m)
}

/// True iff `M` (or `M^q`) dominates `max{c(x-a)²/6, c(b-x)²/6}`.
pub fn hypothesis_ok(x: f64, a: f64, b: f64, m: f64, c: f64, power_q: Option<f64>) -> bool {
    let mq = power_q.map_or(m, |q| m_pow(m, q));
    mq >= deduction(c, x - a).max(deduction(c, b - x))
}

/// Bound when `|f'|` is strongly convex with modulus `c`:
/// `Σ d²/(2(b-a)) · (M - c d²/6)` over `d ∈ {x-a, b-x}`.
pub fn sc_rhs_t1(x: f64, a: f64, b: f64, m: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_point(x, a, b)?;
    check_m(m)?;
    check_c(c)?;
    let w = b - a;
    let (dl, dr) = (x - a, b - x);
    let (el, er) = (deduction(c, dl), deduction(c, dr));
    hypothesis(m, el, er)?;
    Ok(dl * dl / (2.0 * w) * (m - el) + dr * dr / (2.0 * w) * (m - er))
}

/// Hölder bound when `|f'|^q` is strongly convex with modulus `c`:
/// `Σ d²/(b-a) · (1/(p+1))^(1/p) · (M^q - c d²/6)^(1/q)`.
pub fn sc_rhs_t2(x: f64, a: f64, b: f64, m: f64, c: f64, p: f64, q: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_point(x, a, b)?;
    check_m(m)?;
    check_c(c)?;
    check_holder(p, q)?;
    let w = b - a;
    let (dl, dr) = (x - a, b - x);
    let (el, er) = (deduction(c, dl), deduction(c, dr));
    hypothesis(m_pow(m, q), el, er)?;
    let k = holder_factor(p);
    Ok(dl * dl / w * k * reduced_bound(m, q, el) + dr * dr / w * k * reduced_bound(m, q, er))
}

/// Power-mean bound when `|f'|^q` (q >= 1) is strongly convex:
/// `Σ d²/(2(b-a)) · (M^q - c d²/6)^(1/q)`.
pub fn sc_rhs_t3(x: f64, a: f64, b: f64, m: f64, c: f64, q: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_point(x, a, b)?;
    check_m(m)?;
    check_c(c)?;
    check_q(q)?;
    let w = b - a;
    let (dl, dr) = (x - a, b - x);
    let (el, er) = (deduction(c, dl), deduction(c, dr));
    hypothesis(m_pow(m, q), el, er)?;
    Ok(dl * dl / (2.0 * w) * reduced_bound(m, q, el)
        + dr * dr / (2.0 * w) * reduced_bound(m, q, er))
}

/// [`sc_rhs_t1`] at the midpoint: `(b-a)/4 · (M - c(b-a)²/24)`, i.e.
/// `M(b-a)/4 - c(b-a)³/96`.
///
/// Evaluated through the general form so the two agree bit for bit; near
/// the hypothesis boundary any other arrangement differs by amplified
/// rounding.
pub fn midpoint_rhs_t1(a: f64, b: f64, m: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    sc_rhs_t1(midpoint(a, b), a, b, m, c)
}

/// [`sc_rhs_t2`] at the midpoint:
/// `(b-a)/2 · (1/(p+1))^(1/p) · (M^q - c(b-a)²/24)^(1/q)`.
pub fn midpoint_rhs_t2(a: f64, b: f64, m: f64, c: f64, p: f64, q: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    sc_rhs_t2(midpoint(a, b), a, b, m, c, p, q)
}

/// [`sc_rhs_t3`] at the midpoint: `(b-a)/4 · (M^q - c(b-a)²/24)^(1/q)`.
pub fn midpoint_rhs_t3(a: f64, b: f64, m: f64, c: f64, q: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    sc_rhs_t3(midpoint(a, b), a, b, m, c, q)
}

fn midpoint(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Bound on the segment moments used inside the proofs, for a segment of
/// length `d`:
///
/// * weighted: `∫₀¹ t·|f'|^q dt <= M^q/2 - c d²/12`
/// * unweighted: `∫₀¹ |f'|^q dt <= M^q - c d²/6`
pub fn segment_moment_bound(
    d: f64,
    m: f64,
    c: f64,
    weighted: bool,
    power_q: Option<f64>,
) -> Result<f64, BoundsError> {
    check_m(m)?;
    check_c(c)?;
    if let Some(q) = power_q {
        check_q(q)?;
    }
    let mq = m_pow(m, power_q.unwrap_or(1.0));
    let e = deduction(c, d);
    hypothesis(mq, e, e)?;
    Ok(if weighted { mq / 2.0 - c * (d * d) / 12.0 } else { mq - e })
}

fn check_boundary(values: &[f64]) -> Result<(), BoundsError> {
    values.iter().try_for_each(|&v| check_value(v))
}

/// Right-hand side of the product inequality for two non-negative functions
/// sharing the modulus `c`, as stated:
/// `(1/3)[fa·ga + fb·gb] + (1/6)[fa·gb + fb·ga] - c(b-a)²/12·[fa+fb+ga+gb] + c(b-a)⁴/30`.
///
/// Integrating the product of the two strong-convexity bounds yields
/// `c²(b-a)⁴/30` for the last term; the two agree at `c = 1` and the stated
/// form is the larger one for `c <= 1`.
pub fn product_rhs_z1(fa: f64, fb: f64, ga: f64, gb: f64, a: f64, b: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_c(c)?;
    check_boundary(&[fa, fb, ga, gb])?;
    let w2 = (b - a) * (b - a);
    Ok((fa * ga + fb * gb) / 3.0 + (fa * gb + fb * ga) / 6.0 - c * w2 / 12.0 * (fa + fb + ga + gb)
        + c * w2 * w2 / 30.0)
}

/// Right-hand side for a convex `f` times a strongly convex `g`:
/// `(1/3)[fa·ga + fb·gb] + (1/6)[fa·gb + fb·ga]`.
pub fn mixed_rhs_z3(fa: f64, fb: f64, ga: f64, gb: f64) -> Result<f64, BoundsError> {
    check_boundary(&[fa, fb, ga, gb])?;
    Ok((fa * ga + fb * gb) / 3.0 + (fa * gb + fb * ga) / 6.0)
}

/// Extra left-hand term of the convex × strongly-convex inequality:
/// `c(b-a)²/6 · (fa + fb)/2`.
pub fn mixed_lhs_extra_z3(fa: f64, fb: f64, a: f64, b: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_c(c)?;
    check_boundary(&[fa, fb])?;
    Ok(c * ((b - a) * (b - a)) / 6.0 * ((fa + fb) / 2.0))
}

/// The product bound with `g = 1` substituted, as stated:
/// `(fa+fb)/2 - c(b-a)²/12·[fa + fb + 2] + c(b-a)⁴/30`.
///
/// `g = 1` is not strongly convex for any `c > 0`, so this is not implied by
/// [`product_rhs_z1`]; callers treat it as suspect.
pub fn cor5_rhs(fa: f64, fb: f64, a: f64, b: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_c(c)?;
    check_boundary(&[fa, fb])?;
    let w2 = (b - a) * (b - a);
    Ok((fa + fb) / 2.0 - c * w2 / 12.0 * (fa + fb + 2.0) + c * w2 * w2 / 30.0)
}

/// The mixed bound with `g = 1` substituted, as stated:
/// `[1 - c(b-a)²/6] · (fa+fb)/2`. Suspect for the same reason as [`cor5_rhs`].
pub fn cor6_rhs(fa: f64, fb: f64, a: f64, b: f64, c: f64) -> Result<f64, BoundsError> {
    check_interval(a, b)?;
    check_c(c)?;
    check_boundary(&[fa, fb])?;
    Ok((1.0 - c * ((b - a) * (b - a)) / 6.0) * ((fa + fb) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn classic_examples() {
        assert_eq!(classic_ostrowski_rhs(0.0, 0.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(classic_ostrowski_rhs(0.5, 0.0, 1.0, 2.0).unwrap(), 0.5);
        // f = x² at x = 0.25: LHS |1/16 - 1/3| sits below the bound
        let rhs = classic_ostrowski_rhs(0.25, 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(rhs, 0.625, max_relative = 1e-15);
        assert!((1.0f64 / 16.0 - 1.0 / 3.0).abs() <= rhs);
    }

    #[test]
    fn classic_rejects_bad_input() {
        assert!(matches!(classic_ostrowski_rhs(0.5, 1.0, 0.0, 1.0), Err(BoundsError::InvalidInterval { .. })));
        assert!(matches!(classic_ostrowski_rhs(2.0, 0.0, 1.0, 1.0), Err(BoundsError::PointOutside { .. })));
        assert!(matches!(classic_ostrowski_rhs(0.5, 0.0, 1.0, 0.0), Err(BoundsError::InvalidDerivativeBound(_))));
    }

    #[test]
    fn alomari_examples() {
        assert_relative_eq!(alomari_rhs(0.5, 0.0, 1.0, 2.0, 2.0).unwrap(), 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        // x = a: one term vanishes, M(b-a)/(p+1)^(1/p)
        let p: f64 = 3.0;
        assert_relative_eq!(
            alomari_rhs(0.0, 0.0, 2.0, 1.5, p).unwrap(),
            1.5 * 2.0 / (p + 1.0).powf(1.0 / p),
            max_relative = 1e-14
        );
        // large p: divisor tends to 1
        let lim = 2.0 * ((0.3f64).powi(2) + (0.7f64).powi(2));
        assert!((alomari_rhs(0.3, 0.0, 1.0, 2.0, 1e6).unwrap() - lim).abs() < 1e-4);
        assert!(matches!(alomari_rhs(0.5, 0.0, 1.0, 1.0, 1.0), Err(BoundsError::InvalidP(_))));
    }

    #[test]
    fn hypothesis_examples() {
        assert!(hypothesis_ok(0.5, 0.0, 1.0, 2.0, 1.0, None));
        assert!(!hypothesis_ok(1.0, 0.0, 1.0, 0.1, 1.0, None));
        assert!(hypothesis_ok(1.0, 0.0, 1.0, 1.0, 1.0, Some(2.0)));
    }

    #[test]
    fn t1_examples() {
        let v = sc_rhs_t1(0.5, 0.0, 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(v, 47.0 / 96.0, max_relative = 1e-15);
        // f = x² at x = 0.25
        let v = sc_rhs_t1(0.25, 0.0, 1.0, 2.0, 1.0).unwrap();
        let expected = 0.0625 / 2.0 * (2.0 - 0.0625 / 6.0) + 0.5625 / 2.0 * (2.0 - 0.5625 / 6.0);
        assert_relative_eq!(v, expected, max_relative = 1e-15);
        assert_relative_eq!(v, 0.598_307_291_666_666_7, max_relative = 1e-15);
        assert!(v >= (1.0f64 / 16.0 - 1.0 / 3.0).abs());
    }

    #[test]
    fn t1_reports_failing_side() {
        match sc_rhs_t1(1.0, 0.0, 1.0, 0.1, 1.0) {
            Err(BoundsError::Hypothesis { side: Side::Left, required, .. }) => {
                assert_relative_eq!(required, 1.0 / 6.0)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            sc_rhs_t1(0.0, 0.0, 1.0, 0.1, 1.0),
            Err(BoundsError::Hypothesis { side: Side::Right, .. })
        ));
    }

    #[test]
    fn t2_examples() {
        let v = sc_rhs_t2(0.5, 0.0, 1.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        let expected = 2.0 * 0.25 * (1.0f64 / 3.0).sqrt() * (4.0f64 - 1.0 / 24.0).sqrt();
        assert_relative_eq!(v, expected, max_relative = 1e-14);
        assert!((v - 0.57434).abs() < 1e-5);
        assert!(matches!(
            sc_rhs_t2(0.5, 0.0, 1.0, 2.0, 1.0, 2.0, 3.0),
            Err(BoundsError::NotHolderPair { .. })
        ));
    }

    #[test]
    fn t3_examples() {
        let v = sc_rhs_t3(0.5, 0.0, 1.0, 2.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(v, 0.25 * (4.0f64 - 1.0 / 24.0).sqrt(), max_relative = 1e-14);
        assert!((v - 0.49739).abs() < 1e-5);
        assert!(matches!(sc_rhs_t3(0.5, 0.0, 1.0, 2.0, 1.0, 0.5), Err(BoundsError::InvalidQ(_))));
    }

    #[test]
    fn midpoint_examples() {
        assert_relative_eq!(midpoint_rhs_t1(0.0, 1.0, 2.0, 1.0).unwrap(), 0.5 - 1.0 / 96.0, max_relative = 1e-15);
        assert_eq!(midpoint_rhs_t1(0.0, 1.0, 2.0, 1.0).unwrap(), sc_rhs_t1(0.5, 0.0, 1.0, 2.0, 1.0).unwrap());
        assert_eq!(
            midpoint_rhs_t2(0.0, 1.0, 2.0, 1.0, 2.0, 2.0).unwrap(),
            sc_rhs_t2(0.5, 0.0, 1.0, 2.0, 1.0, 2.0, 2.0).unwrap()
        );
        // boundary of the hypothesis gives a zero bound
        let (a, b, c) = (0.0, 3.0, 2.0);
        let m = c * ((b - a) * (b - a)) / 24.0;
        assert_eq!(midpoint_rhs_t1(a, b, m, c).unwrap(), 0.0);
        assert!(matches!(midpoint_rhs_t1(a, b, m * 0.99, c), Err(BoundsError::Hypothesis { .. })));
    }

    #[test]
    fn segment_moment_examples() {
        assert_eq!(segment_moment_bound(0.0, 2.0, 1.0, true, None).unwrap(), 1.0);
        assert_eq!(segment_moment_bound(0.0, 2.0, 1.0, false, Some(3.0)).unwrap(), 8.0);
        assert_relative_eq!(segment_moment_bound(1.0, 2.0, 1.0, true, None).unwrap(), 11.0 / 12.0);
        // ∫₀¹ t·|f'(t)| dt for f = x² is ∫ 2t² = 2/3
        assert!(2.0 / 3.0 <= segment_moment_bound(1.0, 2.0, 1.0, true, None).unwrap());
        assert!(segment_moment_bound(3.0, 1.0, 1.0, true, None).is_err());
    }

    #[test]
    fn z1_examples() {
        // f = g = x² on [0, 1], c = 1: equality case
        let v = product_rhs_z1(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 0.2, max_relative = 1e-15);
        assert_relative_eq!(product_rhs_z1(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(product_rhs_z1(-1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn stated_z1_fails_for_modulus_above_one() {
        // f = g = 2x² - x + 1 is the equality case for c = 2; ∫₀¹ (fg) = 22/15
        let exact = 22.0 / 15.0;
        let stated = product_rhs_z1(1.0, 2.0, 1.0, 2.0, 0.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(exact - stated, 1.0 / 15.0, max_relative = 1e-12);
    }

    #[test]
    fn z3_examples() {
        // f convex x², g = x² strongly convex with c = 1 on [0, 1]
        let lhs = 0.2 + mixed_lhs_extra_z3(0.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let rhs = mixed_rhs_z3(0.0, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(lhs, 0.2 + 1.0 / 12.0, max_relative = 1e-15);
        assert_relative_eq!(rhs, 1.0 / 3.0, max_relative = 1e-15);
        assert!(lhs <= rhs);
        assert_eq!(mixed_lhs_extra_z3(0.0, 0.0, 0.0, 1.0, 5.0).unwrap(), 0.0);
        assert_eq!(mixed_lhs_extra_z3(1.0, 2.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn suspect_corollaries() {
        assert_relative_eq!(cor5_rhs(0.0, 1.0, 0.0, 1.0, 1.0).unwrap(), 17.0 / 60.0, max_relative = 1e-15);
        assert_relative_eq!(cor6_rhs(0.0, 1.0, 0.0, 1.0, 1.0).unwrap(), 5.0 / 12.0, max_relative = 1e-15);
    }

    fn valid_point() -> impl Strategy<Value = (f64, f64, f64)> {
        (-5.0f64..5.0, 0.01f64..4.0, 0.0f64..=1.0).prop_map(|(a, w, s)| (a, a + w, a + s * w))
    }

    proptest! {
        #[test]
        fn reductions_are_exact((a, b, x) in valid_point(), m in 0.01f64..10.0, p in 1.01f64..20.0) {
            let q = p / (p - 1.0);
            prop_assert_eq!(sc_rhs_t1(x, a, b, m, 0.0).unwrap(), classic_ostrowski_rhs(x, a, b, m).unwrap());
            prop_assert_eq!(sc_rhs_t3(x, a, b, m, 0.0, 2.5).unwrap(), classic_ostrowski_rhs(x, a, b, m).unwrap());
            prop_assert_eq!(sc_rhs_t2(x, a, b, m, 0.0, p, q).unwrap(), alomari_rhs(x, a, b, m, p).unwrap());
        }

        #[test]
        fn t3_with_unit_power_is_t1((a, b, x) in valid_point(), m in 0.01f64..10.0, c in 0.0f64..2.0) {
            prop_assume!(hypothesis_ok(x, a, b, m, c, None));
            prop_assert_eq!(sc_rhs_t3(x, a, b, m, c, 1.0).unwrap(), sc_rhs_t1(x, a, b, m, c).unwrap());
            prop_assert_eq!(midpoint_rhs_t3(a, b, m, c, 1.0).unwrap(), midpoint_rhs_t1(a, b, m, c).unwrap());
        }

        #[test]
        fn bounds_are_symmetric_in_x(
            (a, b, x) in valid_point(), m in 0.01f64..10.0, c in 0.0f64..2.0, p in 1.1f64..8.0,
        ) {
            let q = p / (p - 1.0);
            let xr = a + b - x;
            prop_assume!((a..=b).contains(&xr));
            prop_assume!(hypothesis_ok(x, a, b, m, c, Some(q)) && hypothesis_ok(x, a, b, m, c, None));
            let close = |u: f64, v: f64| (u - v).abs() <= 1e-12 * (1.0 + u.abs());
            prop_assert!(close(classic_ostrowski_rhs(x, a, b, m).unwrap(), classic_ostrowski_rhs(xr, a, b, m).unwrap()));
            prop_assert!(close(sc_rhs_t1(x, a, b, m, c).unwrap(), sc_rhs_t1(xr, a, b, m, c).unwrap()));
            prop_assert!(close(sc_rhs_t2(x, a, b, m, c, p, q).unwrap(), sc_rhs_t2(xr, a, b, m, c, p, q).unwrap()));
            prop_assert!(close(sc_rhs_t3(x, a, b, m, c, q).unwrap(), sc_rhs_t3(xr, a, b, m, c, q).unwrap()));
        }

        #[test]
        fn monotone_in_m_and_c(
            (a, b, x) in valid_point(), m in 0.01f64..10.0, dm in 0.0f64..5.0,
            c in 0.0f64..2.0, dc in 0.0f64..2.0, q in 1.0f64..4.0,
        ) {
            prop_assume!(hypothesis_ok(x, a, b, m, c + dc, Some(q)) && hypothesis_ok(x, a, b, m, c + dc, None));
            let slack = 1e-12;
            let t1 = |m, c| sc_rhs_t1(x, a, b, m, c).unwrap();
            let t3 = |m, c| sc_rhs_t3(x, a, b, m, c, q).unwrap();
            prop_assert!(t1(m + dm, c) >= t1(m, c) * (1.0 - slack));
            prop_assert!(t1(m, c + dc) <= t1(m, c) * (1.0 + slack));
            prop_assert!(t3(m + dm, c) >= t3(m, c) * (1.0 - slack));
            prop_assert!(t3(m, c + dc) <= t3(m, c) * (1.0 + slack));
            if q > 1.0 + 1e-9 {
                let p = q / (q - 1.0);
                let t2 = |m, c| sc_rhs_t2(x, a, b, m, c, p, q).unwrap();
                prop_assert!(t2(m + dm, c) >= t2(m, c) * (1.0 - slack));
                prop_assert!(t2(m, c + dc) <= t2(m, c) * (1.0 + slack));
            }
        }

        #[test]
        fn nonnegative_and_tighter_than_classic(
            (a, b, x) in valid_point(), m in 0.01f64..10.0, c in 0.0f64..5.0, q in 1.0f64..4.0,
        ) {
            prop_assume!(hypothesis_ok(x, a, b, m, c, Some(q)) && hypothesis_ok(x, a, b, m, c, None));
            let t1 = sc_rhs_t1(x, a, b, m, c).unwrap();
            prop_assert!(t1 >= 0.0);
            prop_assert!(t1 <= classic_ostrowski_rhs(x, a, b, m).unwrap());
            prop_assert!(sc_rhs_t3(x, a, b, m, c, q).unwrap() >= 0.0);
        }

        #[test]
        fn z1_equality_witness_on_any_interval(a in -3.0f64..3.0, w in 0.1f64..3.0) {
            // f = g = x² is the c = 1 equality case; (1/(b-a))∫x⁴ = (b⁵-a⁵)/(5(b-a))
            let b = a + w;
            let lhs = (b.powi(5) - a.powi(5)) / (5.0 * w);
            let rhs = product_rhs_z1(a * a, b * b, a * a, b * b, a, b, 1.0).unwrap();
            prop_assert!((rhs - lhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
