//! 50-digit reference evaluation of the closed-form bounds.
//!
//! Every input is a binary64 value and is converted exactly; all arithmetic
//! then runs at 192 bits (about 57 decimal digits) and only the final result
//! is rounded back to binary64. The formulas are re-derived here term by
//! term, so a transcription slip in [`crate::bounds`] shows up as a mismatch.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

/// Working precision in bits.
pub const PRECISION: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    cc: Consts,
}

impl Ctx {
    fn new() -> Self {
        Ctx { cc: Consts::new().expect("astro-float constant cache") }
    }

    fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, PRECISION)
    }

    fn int(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, PRECISION)
    }

    fn pow(&mut self, base: &BigFloat, e: &BigFloat) -> BigFloat {
        if base.is_zero() {
            return self.int(0);
        }
        base.pow(e, PRECISION, RM, &mut self.cc)
    }

    fn as_f64(&mut self, v: &BigFloat) -> f64 {
        if v.is_nan() {
            return f64::NAN;
        }
        v.format(Radix::Dec, RM, &mut self.cc)
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .unwrap_or(f64::NAN)
    }
}

fn add(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.add(y, PRECISION, RM)
}

fn sub(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.sub(y, PRECISION, RM)
}

fn mul(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.mul(y, PRECISION, RM)
}

fn div(x: &BigFloat, y: &BigFloat) -> BigFloat {
    x.div(y, PRECISION, RM)
}

/// Shape of the per-side term `d²/(k(b-a)) · factor · (M^q - c d²/6)^(1/q)`.
struct Side {
    divisor: i64,
    holder_p: Option<f64>,
    q: f64,
}

fn side_sum(ctx: &mut Ctx, x: f64, a: f64, b: f64, m: f64, c: f64, shape: &Side) -> f64 {
    let (x, a, b) = (ctx.num(x), ctx.num(a), ctx.num(b));
    let (m, c) = (ctx.num(m), ctx.num(c));
    let w = sub(&b, &a);
    let q = ctx.num(shape.q);
    let inv_q = div(&ctx.int(1), &q);
    let mq = ctx.pow(&m, &q);
    let factor = match shape.holder_p {
        Some(p) => {
            let p = ctx.num(p);
            let base = div(&ctx.int(1), &add(&p, &ctx.int(1)));
            let e = div(&ctx.int(1), &p);
            ctx.pow(&base, &e)
        }
        None => ctx.int(1),
    };
    let mut total = ctx.int(0);
    for d in [sub(&x, &a), sub(&b, &x)] {
        let d2 = mul(&d, &d);
        let radicand = sub(&mq, &div(&mul(&c, &d2), &ctx.int(6)));
        let root = ctx.pow(&radicand, &inv_q);
        let weight = div(&d2, &mul(&ctx.int(shape.divisor), &w));
        total = add(&total, &mul(&mul(&weight, &factor), &root));
    }
    ctx.as_f64(&total)
}

/// `M/(b-a) · ((x-a)² + (b-x)²)/2`.
pub fn classic(x: f64, a: f64, b: f64, m: f64) -> f64 {
    side_sum(&mut Ctx::new(), x, a, b, m, 0.0, &Side { divisor: 2, holder_p: None, q: 1.0 })
}

/// `M/(b-a) · ((x-a)² + (b-x)²) / (p+1)^(1/p)`.
pub fn alomari(x: f64, a: f64, b: f64, m: f64, p: f64) -> f64 {
    let mut ctx = Ctx::new();
    let (xb, ab, bb, mb, pb) = (ctx.num(x), ctx.num(a), ctx.num(b), ctx.num(m), ctx.num(p));
    let (dl, dr) = (sub(&xb, &ab), sub(&bb, &xb));
    let sq = add(&mul(&dl, &dl), &mul(&dr, &dr));
    let denom = ctx.pow(&add(&pb, &ctx.int(1)), &div(&ctx.int(1), &pb));
    let v = div(&mul(&div(&mb, &sub(&bb, &ab)), &sq), &denom);
    ctx.as_f64(&v)
}

/// Strongly convex `|f'|` bound, first form.
pub fn t1(x: f64, a: f64, b: f64, m: f64, c: f64) -> f64 {
    side_sum(&mut Ctx::new(), x, a, b, m, c, &Side { divisor: 2, holder_p: None, q: 1.0 })
}

/// Hölder form with `M^q`.
pub fn t2(x: f64, a: f64, b: f64, m: f64, c: f64, p: f64, q: f64) -> f64 {
    side_sum(&mut Ctx::new(), x, a, b, m, c, &Side { divisor: 1, holder_p: Some(p), q })
}

/// Power-mean form with `M^q`.
pub fn t3(x: f64, a: f64, b: f64, m: f64, c: f64, q: f64) -> f64 {
    side_sum(&mut Ctx::new(), x, a, b, m, c, &Side { divisor: 2, holder_p: None, q })
}

/// `M(b-a)/4 - c(b-a)³/96`.
pub fn cor2(a: f64, b: f64, m: f64, c: f64) -> f64 {
    let mut ctx = Ctx::new();
    let w = sub(&ctx.num(b), &ctx.num(a));
    let first = div(&mul(&ctx.num(m), &w), &ctx.int(4));
    let second = div(&mul(&ctx.num(c), &mul(&w, &mul(&w, &w))), &ctx.int(96));
    ctx.as_f64(&sub(&first, &second))
}

fn midpoint_power(ctx: &mut Ctx, a: f64, b: f64, m: f64, c: f64, q: f64) -> (BigFloat, BigFloat) {
    let w = sub(&ctx.num(b), &ctx.num(a));
    let q = ctx.num(q);
    let mq = ctx.pow(&ctx.num(m), &q);
    let radicand = sub(&mq, &div(&mul(&ctx.num(c), &mul(&w, &w)), &ctx.int(24)));
    let root = ctx.pow(&radicand, &div(&ctx.int(1), &q));
    (w, root)
}

/// `(b-a)/2 · (1/(p+1))^(1/p) · (M^q - c(b-a)²/24)^(1/q)`.
pub fn cor3(a: f64, b: f64, m: f64, c: f64, p: f64, q: f64) -> f64 {
    let mut ctx = Ctx::new();
    let (w, root) = midpoint_power(&mut ctx, a, b, m, c, q);
    let p = ctx.num(p);
    let factor = ctx.pow(&div(&ctx.int(1), &add(&p, &ctx.int(1))), &div(&ctx.int(1), &p));
    let v = mul(&mul(&div(&w, &ctx.int(2)), &factor), &root);
    ctx.as_f64(&v)
}

/// `(b-a)/4 · (M^q - c(b-a)²/24)^(1/q)`.
pub fn cor4(a: f64, b: f64, m: f64, c: f64, q: f64) -> f64 {
    let mut ctx = Ctx::new();
    let (w, root) = midpoint_power(&mut ctx, a, b, m, c, q);
    let v = mul(&div(&w, &ctx.int(4)), &root);
    ctx.as_f64(&v)
}

/// Product bound in the stated arrangement, ending in `+ c(b-a)⁴/30`.
pub fn z1(fa: f64, fb: f64, ga: f64, gb: f64, a: f64, b: f64, c: f64) -> f64 {
    let mut ctx = Ctx::new();
    let (fa, fb, ga, gb) = (ctx.num(fa), ctx.num(fb), ctx.num(ga), ctx.num(gb));
    let c = ctx.num(c);
    let w = sub(&ctx.num(b), &ctx.num(a));
    let w2 = mul(&w, &w);
    let same = div(&add(&mul(&fa, &ga), &mul(&fb, &gb)), &ctx.int(3));
    let cross = div(&add(&mul(&fa, &gb), &mul(&fb, &ga)), &ctx.int(6));
    let values = add(&add(&fa, &fb), &add(&ga, &gb));
    let middle = mul(&div(&mul(&c, &w2), &ctx.int(12)), &values);
    let last = div(&mul(&c, &mul(&w2, &w2)), &ctx.int(30));
    let v = add(&sub(&add(&same, &cross), &middle), &last);
    ctx.as_f64(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn known_values() {
        assert!(rel(alomari(0.5, 0.0, 1.0, 2.0, 2.0), 1.0 / 3f64.sqrt()) < 1e-15);
        assert!(rel(t2(0.5, 0.0, 1.0, 2.0, 1.0, 2.0, 2.0), 0.5 * (1.0f64 / 3.0).sqrt() * (4.0f64 - 1.0 / 24.0).sqrt()) < 1e-15);
        assert!(rel(t3(0.5, 0.0, 1.0, 2.0, 1.0, 2.0), 0.25 * (4.0f64 - 1.0 / 24.0).sqrt()) < 1e-15);
        assert_eq!(cor2(0.0, 1.0, 2.0, 1.0), 47.0 / 96.0);
        assert_eq!(z1(0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0), 0.2);
        assert_eq!(classic(0.0, 0.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn zero_radicand_is_zero() {
        // M^q exactly equal to c(b-a)²/24
        assert_eq!(cor4(0.0, 1.0, 1.0, 24.0, 2.0), 0.0);
    }

    proptest! {
        #[test]
        fn binary64_kernels_match_reference(
            a in -4.0f64..4.0,
            w in 0.01f64..4.0,
            s in 0.0f64..=1.0,
            m in 0.1f64..10.0,
            cf in 0.0f64..1.0,
            q in 1.0f64..4.0,
        ) {
            let b = a + w;
            let x = (a + s * w).clamp(a, b);
            let d = (x - a).max(b - x);
            // keep clear of the hypothesis boundary, where the root is ill-conditioned
            let c1 = cf * 0.9 * 6.0 * m / (d * d);
            let cq = cf * 0.9 * 6.0 * m.powf(q) / (d * d);
            let tol = 1e-13;
            prop_assert!(rel(bounds::classic_ostrowski_rhs(x, a, b, m).unwrap(), classic(x, a, b, m)) < tol);
            prop_assert!(rel(bounds::sc_rhs_t1(x, a, b, m, c1).unwrap(), t1(x, a, b, m, c1)) < tol);
            prop_assert!(rel(bounds::sc_rhs_t3(x, a, b, m, cq, q).unwrap(), t3(x, a, b, m, cq, q)) < tol);
            if q > 1.0 {
                let p = q / (q - 1.0);
                if (p.recip() + q.recip() - 1.0).abs() <= bounds::HOLDER_TOL {
                    prop_assert!(rel(bounds::alomari_rhs(x, a, b, m, p).unwrap(), alomari(x, a, b, m, p)) < tol);
                    prop_assert!(rel(bounds::sc_rhs_t2(x, a, b, m, cq, p, q).unwrap(), t2(x, a, b, m, cq, p, q)) < tol);
                    let cm = cf * 0.9 * 24.0 * m.powf(q) / (w * w);
                    prop_assert!(rel(bounds::midpoint_rhs_t2(a, b, m, cm, p, q).unwrap(), cor3(a, b, m, cm, p, q)) < tol);
                }
            }
            let cm1 = cf * 0.9 * 24.0 * m / (w * w);
            let cmq = cf * 0.9 * 24.0 * m.powf(q) / (w * w);
            prop_assert!(rel(bounds::midpoint_rhs_t1(a, b, m, cm1).unwrap(), cor2(a, b, m, cm1)) < tol);
            prop_assert!(rel(bounds::midpoint_rhs_t3(a, b, m, cmq, q).unwrap(), cor4(a, b, m, cmq, q)) < tol);
        }

        #[test]
        fn product_kernel_matches_reference(
            v in proptest::array::uniform4(0.5f64..5.0),
            a in -2.0f64..2.0,
            w in 0.1f64..2.0,
            c in 0.0f64..0.5,
        ) {
            let b = a + w;
            let got = bounds::product_rhs_z1(v[0], v[1], v[2], v[3], a, b, c).unwrap();
            let want = z1(v[0], v[1], v[2], v[3], a, b, c);
            // the middle term can cancel against the rest
            let scale = v.iter().sum::<f64>() * (1.0 + w * w);
            prop_assert!((got - want).abs() <= 1e-14 * scale);
        }
    }
}
