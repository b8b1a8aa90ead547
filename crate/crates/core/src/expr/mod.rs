//! Univariate real expressions: parsing, evaluation and symbolic
//! differentiation.
//!
//! The accepted grammar is
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' factor)?
//! base   := number | 'x' | func '(' expr ')' | '(' expr ')' | '-' base
//! func   := exp | log | cosh | sinh | abs
//! ```
//!
//! Exponents must fold to a constant. Because unary minus binds inside
//! `base`, `-x^2` reads as `(-x)^2`; write `-(x^2)` for the negated square.

mod derive;
mod parse;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

pub use parse::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Cosh,
    Sinh,
    Abs,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        match name {
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "cosh" => Some(UnaryOp::Cosh),
            "sinh" => Some(UnaryOp::Sinh),
            "abs" => Some(UnaryOp::Abs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Abstract syntax tree of a function of the single variable `x`.
///
/// Values are immutable once built; every operation on them is pure.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Power with a constant real exponent.
    Pow(Box<Expr>, f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{base}^{exponent} is undefined over the reals")]
    PowDomain { base: f64, exponent: f64 },
    #[error("non-finite value while evaluating {op}")]
    NonFinite { op: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("`{0}` is not differentiable")]
    NonDifferentiable(&'static str),
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var() -> Self {
        Expr::Var
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn pow(base: Expr, exponent: f64) -> Self {
        Expr::Pow(Box::new(base), exponent)
    }

    /// Evaluates the tree at `x` in binary64.
    ///
    /// Domain violations (log of a non-positive number, division by zero,
    /// fractional power of a negative number, overflow) are errors rather
    /// than NaN or infinity.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => x,
            Expr::Unary(op, e) => {
                let u = e.eval(x)?;
                match op {
                    UnaryOp::Neg => -u,
                    UnaryOp::Exp => u.exp(),
                    UnaryOp::Log => {
                        if u <= 0.0 {
                            return Err(EvalError::LogDomain(u));
                        }
                        u.ln()
                    }
                    UnaryOp::Cosh => u.cosh(),
                    UnaryOp::Sinh => u.sinh(),
                    UnaryOp::Abs => u.abs(),
                }
            }
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(x)?, r.eval(x)?);
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                }
            }
            Expr::Pow(base, n) => power(base.eval(x)?, *n)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { op: self.op_name() })
        }
    }

    /// Symbolic derivative with respect to `x`, constant-folded.
    pub fn derive(&self) -> Result<Expr, DeriveError> {
        derive::derive(self)
    }

    /// True when the tree mentions `x`.
    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.depends_on_x(),
            Expr::Binary(_, l, r) => l.depends_on_x() || r.depends_on_x(),
        }
    }

    fn op_name(&self) -> &'static str {
        match self {
            Expr::Const(_) => "constant",
            Expr::Var => "x",
            Expr::Unary(op, _) => op.name(),
            Expr::Binary(BinaryOp::Add, ..) => "+",
            Expr::Binary(BinaryOp::Sub, ..) => "-",
            Expr::Binary(BinaryOp::Mul, ..) => "*",
            Expr::Binary(BinaryOp::Div, ..) => "/",
            Expr::Pow(..) => "^",
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var | Expr::Unary(..) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_bare(f)?;
            f.write_str(")")
        } else {
            self.fmt_bare(f)
        }
    }

    fn fmt_bare(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => fmt_number(f, *c),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                match **e {
                    Expr::Unary(UnaryOp::Neg, _) => e.fmt_bare(f),
                    _ => e.fmt_at(f, 5),
                }
            }
            Expr::Unary(op, e) => {
                write!(f, "{}(", op.name())?;
                e.fmt_bare(f)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => (" + ", 1),
                    BinaryOp::Sub => (" - ", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                };
                l.fmt_at(f, prec)?;
                f.write_str(sym)?;
                r.fmt_at(f, prec + 1)
            }
            Expr::Pow(base, n) => {
                base.fmt_at(f, 5)?;
                f.write_str("^")?;
                fmt_number(f, *n)
            }
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `base^n`, using repeated multiplication for small integer exponents so
/// that e.g. `x^2` is bit-identical to `x*x`.
fn power(base: f64, n: f64) -> Result<f64, EvalError> {
    if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
        if base == 0.0 && n < 0.0 {
            return Err(EvalError::PowDomain { base, exponent: n });
        }
        return Ok(base.powi(n as i32));
    }
    if base < 0.0 || (base == 0.0 && n < 0.0) {
        return Err(EvalError::PowDomain { base, exponent: n });
    }
    Ok(base.powf(n))
}

fn fmt_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v < 0.0 {
        write!(f, "(-{})", -v)
    } else {
        // `{}` on f64 prints the shortest string that round-trips.
        write!(f, "{}", v.abs())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_bare(f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> Result<f64, EvalError> {
        parse(s).unwrap().eval(x)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ev("x^2", 0.5).unwrap(), 0.25);
        assert_eq!(ev("exp(x)", 0.0).unwrap(), 1.0);
        assert_eq!(ev("x^3/3", 1.0).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn integer_power_matches_multiplication() {
        for &x in &[0.1, 0.3, 1.7, -2.25, 1e-3] {
            assert_eq!(ev("x^2", x).unwrap(), x * x);
        }
    }

    #[test]
    fn domain_errors() {
        assert_eq!(ev("log(x)", 0.0), Err(EvalError::LogDomain(0.0)));
        assert!(matches!(ev("log(x)", -1.0), Err(EvalError::LogDomain(_))));
        assert_eq!(ev("1/x", 0.0), Err(EvalError::DivisionByZero));
        assert!(matches!(ev("x^0.5", -1.0), Err(EvalError::PowDomain { .. })));
        assert!(matches!(ev("x^(-1)", 0.0), Err(EvalError::PowDomain { .. })));
        assert!(matches!(ev("exp(x)", 1000.0), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn eval_is_deterministic() {
        let e = parse("cosh(x)*exp(x)/(1 + x^2) - log(2 + sinh(x))").unwrap();
        for i in 0..50 {
            let x = -1.0 + i as f64 / 25.0;
            assert_eq!(e.eval(x).unwrap().to_bits(), e.eval(x).unwrap().to_bits());
        }
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(parse("exp(x) + 2*x^2 - 1").unwrap().to_string(), "exp(x) + 2*x^2 - 1");
        assert_eq!(parse("x - (x - 1)").unwrap().to_string(), "x - (x - 1)");
        assert_eq!(parse("-(x^2)").unwrap().to_string(), "-(x^2)");
        assert_eq!(parse("x^-1").unwrap().to_string(), "x^(-1)");
    }

    #[test]
    fn minus_binds_inside_base() {
        assert_eq!(ev("-x^2", 3.0).unwrap(), 9.0);
        assert_eq!(ev("-(x^2)", 3.0).unwrap(), -9.0);
    }
}
