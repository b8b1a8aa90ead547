use super::OracleError;
use crate::corpus::CertTarget;
use crate::expr::{EvalError, Expr};

/// A certificate passes when its slack is at least `-SLACK_TOL`.
pub const SLACK_TOL: f64 = 1e-10;
/// Points per axis of the (x, y) grid used by the strong-convexity falsifier.
pub const CONVEXITY_GRID: usize = 65;
/// Interior points used by [`estimate_modulus`].
pub const MODULUS_GRID: usize = 513;
/// Points used for derivative suprema.
pub const SUP_GRID: usize = 1025;
/// Safety factor applied by [`sup_abs_derivative`].
pub const SUP_INFLATION: f64 = 1.0001;

const T_DENOMINATOR: u32 = 8;

fn grid_point(a: f64, b: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        b
    } else {
        a + (b - a) * (i as f64 / (n - 1) as f64)
    }
}

fn eval_checked<F>(h: &F, x: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    h(x).map_err(|source| OracleError::Evaluation { x, source })
}

/// The function a certificate speaks about: `f`, `|f'|` or `|f'|^q`.
pub fn target_fn<'a>(
    f: &'a Expr,
    fprime: &'a Expr,
    target: CertTarget,
    q: f64,
) -> impl Fn(f64) -> Result<f64, EvalError> + 'a {
    move |x| match target {
        CertTarget::Function => f.eval(x),
        CertTarget::AbsDerivative => Ok(fprime.eval(x)?.abs()),
        CertTarget::AbsDerivativePow => {
            let d = fprime.eval(x)?.abs();
            Ok(if q == 1.0 { d } else if q == 2.0 { d * d } else { d.powf(q) })
        }
    }
}

/// Smallest value of
/// `t·h(x) + (1-t)·h(y) - c·t(1-t)(x-y)² - h(tx + (1-t)y)`
/// over a 65×65 grid of (x, y) and `t ∈ {1/8, …, 7/8}`.
///
/// This is a falsifier, not a proof: a slack below `-SLACK_TOL` shows that
/// `h` is not strongly convex with modulus `c`, a non-negative slack only
/// says no grid triple contradicts it.
pub fn check_strong_convexity<F>(h: F, a: f64, b: f64, c: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(OracleError::InvalidInterval { a, b });
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(OracleError::InvalidModulus(c));
    }
    let xs: Vec<f64> = (0..CONVEXITY_GRID).map(|i| grid_point(a, b, i, CONVEXITY_GRID)).collect();
    let hs = xs.iter().map(|&x| eval_checked(&h, x)).collect::<Result<Vec<_>, _>>()?;
    let mut slack = f64::INFINITY;
    // (x, y, t) and (y, x, 1-t) give the same triple, so i < j suffices.
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let (x, y) = (xs[i], xs[j]);
            let gap = (x - y) * (x - y);
            for k in 1..T_DENOMINATOR {
                let t = k as f64 / T_DENOMINATOR as f64;
                let s = 1.0 - t;
                let z = t * x + s * y;
                let v = t * hs[i] + s * hs[j] - c * t * s * gap - eval_checked(&h, z)?;
                slack = slack.min(v);
            }
        }
    }
    Ok(slack)
}

/// Largest modulus suggested by central second differences: half the
/// minimum of `(h(x+s) - 2h(x) + h(x-s)) / s²` with `s = (b-a)/1024` over 513
/// equally spaced points of `[a+s, b-s]`, floored at zero.
///
/// An estimate only; callers re-validate it with [`check_strong_convexity`].
pub fn estimate_modulus<F>(h: F, a: f64, b: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(OracleError::InvalidInterval { a, b });
    }
    let s = (b - a) / 1024.0;
    let mut min_second = f64::INFINITY;
    for i in 0..MODULUS_GRID {
        let x = grid_point(a + s, b - s, i, MODULUS_GRID);
        let d2 = (eval_checked(&h, x + s)? - 2.0 * eval_checked(&h, x)? + eval_checked(&h, x - s)?) / (s * s);
        min_second = min_second.min(d2);
    }
    Ok((0.5 * min_second).max(0.0))
}

/// Raw maximum of `|g|` over a 1025-point grid of `[a, b]`.
pub fn grid_max_abs<F>(g: F, a: f64, b: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(OracleError::InvalidInterval { a, b });
    }
    (0..SUP_GRID).try_fold(0.0f64, |acc, i| {
        let x = grid_point(a, b, i, SUP_GRID);
        Ok(acc.max(eval_checked(&g, x)?.abs()))
    })
}

/// Grid supremum of `|f'|`, inflated by [`SUP_INFLATION`], for use as `M`.
pub fn sup_abs_derivative<F>(fprime: F, a: f64, b: f64) -> Result<f64, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    Ok(grid_max_abs(fprime, a, b)? * SUP_INFLATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn func(s: &str) -> impl Fn(f64) -> Result<f64, EvalError> {
        let e = parse(s).unwrap();
        move |x| e.eval(x)
    }

    #[test]
    fn square_is_the_equality_case() {
        assert_eq!(check_strong_convexity(func("x^2"), 0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn square_fails_modulus_two() {
        let slack = check_strong_convexity(func("x^2"), 0.0, 1.0, 2.0).unwrap();
        // x=0, y=1, t=1/2 alone gives 1/2 - 1/2 - 1/4
        assert!(slack <= -0.25);
    }

    #[test]
    fn cubic_derivative_target() {
        let f = parse("x^3/3").unwrap();
        let fp = f.derive().unwrap();
        let h = target_fn(&f, &fp, CertTarget::AbsDerivative, 1.0);
        assert!(check_strong_convexity(h, 0.0, 1.0, 1.0).unwrap().abs() <= 1e-15);
    }

    #[test]
    fn slack_is_monotone_in_modulus() {
        let h = func("exp(x) + x^2");
        let mut last = f64::INFINITY;
        for c in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let s = check_strong_convexity(&h, 0.0, 1.0, c).unwrap();
            assert!(s <= last);
            last = s;
        }
    }

    #[test]
    fn modulus_estimates() {
        let c = estimate_modulus(func("x^2"), 0.0, 1.0).unwrap();
        assert!((0.999..=1.001).contains(&c), "{c}");
        let c = estimate_modulus(func("exp(x)"), 0.0, 1.0).unwrap();
        assert!((c - 0.5).abs() < 1e-3, "{c}");
        assert_eq!(estimate_modulus(func("2*x + 3"), 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn derivative_suprema() {
        assert!((sup_abs_derivative(func("2*x"), 0.0, 1.0).unwrap() - 2.0002).abs() < 1e-12);
        assert!((sup_abs_derivative(func("x^2"), 0.0, 1.0).unwrap() - 1.0001).abs() < 1e-12);
        assert!((sup_abs_derivative(func("2*x"), -1.0, 2.0).unwrap() - 4.0004).abs() < 1e-12);
        assert_eq!(grid_max_abs(func("2*x"), 0.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(check_strong_convexity(func("x"), 1.0, 0.0, 1.0).is_err());
        assert!(check_strong_convexity(func("x"), 0.0, 1.0, -1.0).is_err());
        assert!(matches!(
            check_strong_convexity(func("log(x)"), 0.0, 1.0, 0.0),
            Err(OracleError::Evaluation { .. })
        ));
    }
}
