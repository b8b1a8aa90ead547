//! Independent ground truth for the verification harness: adaptive
//! quadrature for every integral, a grid falsifier for strong convexity,
//! estimators for `c` and `M`, and a 50-digit reference evaluator for the
//! closed-form bounds.
//!
//! Nothing here calls into [`crate::bounds`]; the two sides of every checked
//! inequality come from separate code paths.

mod convexity;
mod quadrature;
pub mod reference;

use thiserror::Error;

use crate::corpus::FunctionInstance;
use crate::expr::{EvalError, Expr};

pub use convexity::{
    check_strong_convexity, estimate_modulus, grid_max_abs, sup_abs_derivative, target_fn,
    CONVEXITY_GRID, MODULUS_GRID, SLACK_TOL, SUP_GRID, SUP_INFLATION,
};
pub use quadrature::{integrate, integrate_exact, QuadratureEstimate, MAX_EVALUATIONS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("integration interval requires finite a < b, got [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("modulus must be non-negative, got {0}")]
    InvalidModulus(f64),
    #[error("quadrature did not reach tol {tol} within {evaluations} evaluations (estimate {err_estimate})")]
    NonConvergence { evaluations: usize, err_estimate: f64, tol: f64 },
    #[error("evaluation failed at x = {x}: {source}")]
    Evaluation { x: f64, source: EvalError },
}

/// `∫_u^v f` for a corpus instance: exact through the antiderivative when
/// one is declared, adaptive quadrature otherwise.
pub fn integrate_instance(
    inst: &FunctionInstance,
    u: f64,
    v: f64,
    tol: f64,
) -> Result<QuadratureEstimate, OracleError> {
    match &inst.antiderivative {
        Some(anti) => integrate_exact(anti, u, v),
        None => integrate(|x| inst.f.eval(x), u, v, tol),
    }
}

/// Mean value `(1/(b-a)) ∫_a^b f` over the instance's interval.
pub fn mean_value(inst: &FunctionInstance, tol: f64) -> Result<f64, OracleError> {
    let (a, b) = inst.interval();
    Ok(integrate_instance(inst, a, b, tol)?.value / (b - a))
}

/// Evaluates an expression, tagging failures with the abscissa.
pub fn eval_at(e: &Expr, x: f64) -> Result<f64, OracleError> {
    e.eval(x).map_err(|source| OracleError::Evaluation { x, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::builtin_corpus;

    #[test]
    fn adaptive_matches_exact_path_on_corpus() {
        for inst in builtin_corpus() {
            let (a, b) = inst.interval();
            let Some(anti) = &inst.antiderivative else { continue };
            let exact = integrate_exact(anti, a, b).unwrap().value;
            let adaptive = integrate(|x| inst.f.eval(x), a, b, 1e-10).unwrap();
            assert!((exact - adaptive.value).abs() <= 1e-9, "{}: {exact} vs {}", inst.name, adaptive.value);
        }
    }

    #[test]
    fn mean_of_quad() {
        let quad = builtin_corpus().into_iter().find(|i| i.name == "quad").unwrap();
        assert_eq!(mean_value(&quad, 1e-12).unwrap(), 1.0 / 3.0);
    }
}
