use super::{BinaryOp, DeriveError, Expr, UnaryOp};

pub(super) fn derive(e: &Expr) -> Result<Expr, DeriveError> {
    Ok(match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var => Expr::Const(1.0),
        Expr::Unary(op, u) => {
            let du = derive(u)?;
            let u = (**u).clone();
            match op {
                UnaryOp::Neg => neg(du),
                UnaryOp::Exp => mul(Expr::unary(UnaryOp::Exp, u), du),
                UnaryOp::Log => div(du, u),
                UnaryOp::Cosh => mul(Expr::unary(UnaryOp::Sinh, u), du),
                UnaryOp::Sinh => mul(Expr::unary(UnaryOp::Cosh, u), du),
                UnaryOp::Abs => return Err(DeriveError::NonDifferentiable("abs")),
            }
        }
        Expr::Binary(op, l, r) => {
            let (dl, dr) = (derive(l)?, derive(r)?);
            let (l, r) = ((**l).clone(), (**r).clone());
            match op {
                BinaryOp::Add => add(dl, dr),
                BinaryOp::Sub => sub(dl, dr),
                BinaryOp::Mul => add(mul(dl, r.clone()), mul(l, dr)),
                BinaryOp::Div => match r {
                    // (u/k)' = u'/k keeps constant divisors foldable
                    Expr::Const(_) => div(dl, r),
                    _ => div(sub(mul(dl, r.clone()), mul(l, dr)), pow(r, 2.0)),
                },
            }
        }
        Expr::Pow(base, n) => {
            if *n == 0.0 {
                Expr::Const(0.0)
            } else {
                let db = derive(base)?;
                mul(mul(Expr::Const(*n), pow((**base).clone(), n - 1.0)), db)
            }
        }
    })
}

fn folded(v: f64, fallback: impl FnOnce() -> Expr) -> Expr {
    if v.is_finite() {
        Expr::Const(v)
    } else {
        fallback()
    }
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        e => Expr::unary(UnaryOp::Neg, e),
    }
}

fn add(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
        (Expr::Const(0.0), e) | (e, Expr::Const(0.0)) => e,
        (l, r) => Expr::binary(BinaryOp::Add, l, r),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
        (e, Expr::Const(0.0)) => e,
        (Expr::Const(0.0), e) => neg(e),
        (l, r) => Expr::binary(BinaryOp::Sub, l, r),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if z == 0.0 => Expr::Const(0.0),
        (Expr::Const(1.0), e) | (e, Expr::Const(1.0)) => e,
        (e, Expr::Const(k)) => mul(Expr::Const(k), e),
        (Expr::Const(a), Expr::Binary(BinaryOp::Mul, inner_l, inner_r))
            if matches!(*inner_l, Expr::Const(_)) =>
        {
            let Expr::Const(b) = *inner_l else { unreachable!() };
            let rest = *inner_r;
            let k = a * b;
            if k.is_finite() {
                mul(Expr::Const(k), rest)
            } else {
                Expr::binary(
                    BinaryOp::Mul,
                    Expr::Const(a),
                    Expr::binary(BinaryOp::Mul, Expr::Const(b), rest),
                )
            }
        }
        (l, r) => Expr::binary(BinaryOp::Mul, l, r),
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    match (l, r) {
        (Expr::Const(a), Expr::Const(b)) if b != 0.0 => {
            folded(a / b, || Expr::binary(BinaryOp::Div, Expr::Const(a), Expr::Const(b)))
        }
        (Expr::Const(z), r) if z == 0.0 && !matches!(r, Expr::Const(_)) => Expr::Const(0.0),
        (e, Expr::Const(1.0)) => e,
        (Expr::Binary(BinaryOp::Mul, kl, rest), Expr::Const(k))
            if k != 0.0 && matches!(*kl, Expr::Const(_)) =>
        {
            let Expr::Const(a) = *kl else { unreachable!() };
            let q = a / k;
            if q.is_finite() {
                mul(Expr::Const(q), *rest)
            } else {
                Expr::binary(
                    BinaryOp::Div,
                    Expr::binary(BinaryOp::Mul, Expr::Const(a), *rest),
                    Expr::Const(k),
                )
            }
        }
        (l, r) => Expr::binary(BinaryOp::Div, l, r),
    }
}

fn pow(base: Expr, n: f64) -> Expr {
    match base {
        _ if n == 0.0 => Expr::Const(1.0),
        b if n == 1.0 => b,
        Expr::Const(c) => folded(super::power(c, n).unwrap_or(f64::NAN), || {
            Expr::pow(Expr::Const(c), n)
        }),
        b => Expr::pow(b, n),
    }
}
