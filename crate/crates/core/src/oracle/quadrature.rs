use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::OracleError;
use crate::expr::{EvalError, Expr};
use crate::sum::{neumaier, NeumaierSum};

/// Evaluation budget for a single adaptive integration.
pub const MAX_EVALUATIONS: usize = 1_000_000;

// Kronrod abscissae; odd indices are the embedded 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub err_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    left: f64,
    right: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // largest error first; ties go to the leftmost panel
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.left.total_cmp(&self.left))
    }
}

fn kronrod15<F>(f: &F, left: f64, right: f64) -> Result<Panel, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    let eval = |x: f64| f(x).map_err(|source| OracleError::Evaluation { x, source });
    let center = 0.5 * (left + right);
    let half = 0.5 * (right - left);
    let fc = eval(center)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for (j, &node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let pair = eval(center - dx)? + eval(center + dx)?;
        resk += WGK[j] * pair;
        if j % 2 == 1 {
            resg += WG[j / 2] * pair;
        }
    }
    Ok(Panel { left, right, value: resk * half, err: ((resk - resg) * half).abs() })
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The panel with the largest `|K15 - G7|` discrepancy is bisected until
/// the summed discrepancy drops to `tol`. Panel values are summed with
/// compensation in left-endpoint order, so the result does not depend on the
/// refinement history beyond the final partition.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureEstimate, OracleError>
where
    F: Fn(f64) -> Result<f64, EvalError>,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(OracleError::InvalidInterval { a, b });
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(OracleError::InvalidTolerance(tol));
    }
    let first = kronrod15(&f, a, b)?;
    let mut evaluations = 15;
    let mut total = NeumaierSum::new();
    total += first.err;
    let mut heap = BinaryHeap::from([first]);

    loop {
        if total.value() <= tol {
            let exact_total = neumaier(heap.iter().map(|p| p.err));
            if exact_total <= tol {
                break;
            }
            total = NeumaierSum::new();
            total += exact_total;
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.left + worst.right);
        if evaluations + 30 > MAX_EVALUATIONS || mid <= worst.left || mid >= worst.right {
            heap.push(worst);
            return Err(OracleError::NonConvergence {
                evaluations,
                err_estimate: neumaier(heap.iter().map(|p| p.err)),
                tol,
            });
        }
        let l = kronrod15(&f, worst.left, mid)?;
        let r = kronrod15(&f, mid, worst.right)?;
        evaluations += 30;
        total += l.err;
        total += r.err;
        total += -worst.err;
        heap.push(l);
        heap.push(r);
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.left.total_cmp(&q.left));
    Ok(QuadratureEstimate {
        value: neumaier(panels.iter().map(|p| p.value)),
        err_estimate: neumaier(panels.iter().map(|p| p.err)),
        evaluations,
        converged: true,
    })
}

/// `F(b) - F(a)` for an exact antiderivative `F`.
pub fn integrate_exact(antiderivative: &Expr, a: f64, b: f64) -> Result<QuadratureEstimate, OracleError> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(OracleError::InvalidInterval { a, b });
    }
    let at = |x: f64| antiderivative.eval(x).map_err(|source| OracleError::Evaluation { x, source });
    Ok(QuadratureEstimate {
        value: at(b)? - at(a)?,
        err_estimate: 0.0,
        evaluations: 2,
        converged: true,
    })
}
