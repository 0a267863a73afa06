use super::{BinOp, Expr, Func, PI};
use crate::error::{Error, Result};

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Mul, a, b)
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Div, a, b)
}

fn add(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Add, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Sub, a, b)
}

pub(super) fn diff(e: &Expr, var: &str) -> Result<Expr> {
    Ok(raw(e, var)?.simplify_zero())
}

fn raw(e: &Expr, var: &str) -> Result<Expr> {
    if !e.depends_on(var) || var == PI {
        return Ok(Expr::Const(0.0));
    }
    Ok(match e {
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Var(v) => Expr::Const(if v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::Neg(Box::new(raw(a, var)?)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => add(raw(a, var)?, raw(b, var)?),
                BinOp::Sub => sub(raw(a, var)?, raw(b, var)?),
                BinOp::Mul => add(mul(raw(a, var)?, b.clone()), mul(a.clone(), raw(b, var)?)),
                BinOp::Div if !b.depends_on(var) => div(raw(a, var)?, b.clone()),
                BinOp::Div => div(
                    sub(mul(raw(a, var)?, b.clone()), mul(a.clone(), raw(b, var)?)),
                    Expr::pow(b.clone(), Expr::Const(2.0)),
                ),
                BinOp::Pow => power_rule(a, b, var)?,
            }
        }
        Expr::Apply(f, u) => {
            let du = raw(u, var)?;
            let u = u.as_ref().clone();
            let outer = match f {
                Func::Sin => Expr::apply(Func::Cos, u),
                Func::Cos => Expr::Neg(Box::new(Expr::apply(Func::Sin, u))),
                Func::Tan => div(
                    Expr::Const(1.0),
                    Expr::pow(Expr::apply(Func::Cos, u), Expr::Const(2.0)),
                ),
                Func::Asin => div(Expr::Const(1.0), sqrt_one_minus_sq(u)),
                Func::Acos => Expr::Neg(Box::new(div(Expr::Const(1.0), sqrt_one_minus_sq(u)))),
                Func::Atan => div(
                    Expr::Const(1.0),
                    add(Expr::Const(1.0), Expr::pow(u, Expr::Const(2.0))),
                ),
                Func::Exp => Expr::apply(Func::Exp, u),
                Func::Log => div(Expr::Const(1.0), u),
                Func::Sqrt => div(Expr::Const(1.0), mul(Expr::Const(2.0), Expr::apply(Func::Sqrt, u))),
                Func::Abs => {
                    return Err(Error::NotDifferentiable(format!(
                        "abs({u}) with respect to `{var}`"
                    )))
                }
            };
            mul(outer, du)
        }
    })
}

fn sqrt_one_minus_sq(u: Expr) -> Expr {
    Expr::apply(
        Func::Sqrt,
        sub(Expr::Const(1.0), Expr::pow(u, Expr::Const(2.0))),
    )
}

fn power_rule(base: &Expr, exponent: &Expr, var: &str) -> Result<Expr> {
    if !exponent.depends_on(var) {
        // n * u^(n-1) * u'
        let reduced = match exponent.as_const() {
            Some(n) => Expr::Const(n - 1.0),
            None => sub(exponent.clone(), Expr::Const(1.0)),
        };
        return Ok(mul(
            mul(exponent.clone(), Expr::pow(base.clone(), reduced)),
            raw(base, var)?,
        ));
    }
    let whole = Expr::pow(base.clone(), exponent.clone());
    let log_base = Expr::apply(Func::Log, base.clone());
    if !base.depends_on(var) {
        // u^v * log(u) * v'
        return Ok(mul(mul(whole, log_base), raw(exponent, var)?));
    }
    // u^v * (v' log(u) + v u'/u)
    Ok(mul(
        whole,
        add(
            mul(raw(exponent, var)?, log_base),
            div(mul(exponent.clone(), raw(base, var)?), base.clone()),
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Binding};
    use super::*;

    fn d(text: &str, var: &str) -> Expr {
        parse(text).unwrap().diff(var).unwrap()
    }

    #[test]
    fn sine() {
        assert_eq!(d("sin(x)", "x").to_string(), "cos(x)");
    }

    #[test]
    fn constant_and_foreign_var() {
        assert!(d("3", "x").is_zero());
        assert!(d("y^2", "x").is_zero());
        assert!(d("pi*x", "pi").is_zero());
    }

    #[test]
    fn mixed_partial() {
        let e = parse("y^2*sin(x)").unwrap();
        let out = e.diff("x").unwrap().diff_n("y", 2).unwrap();
        let env = Binding::from_pairs([("x", 0.3), ("y", -1.2)]).unwrap();
        let want = 2.0 * 0.3f64.cos();
        assert!((out.evaluate(&env).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn sixth_power() {
        let out = parse("x^6*y^6").unwrap().diff_n("x", 6).unwrap();
        assert_eq!(out.to_string(), "720*y^6");
    }

    #[test]
    fn abs_rejected_only_when_dependent() {
        assert!(matches!(
            parse("abs(x)").unwrap().diff("x"),
            Err(Error::NotDifferentiable(_))
        ));
        assert!(d("abs(y)*x", "x").to_string() == "abs(y)");
    }

    #[test]
    fn general_power() {
        // d/dx x^x = x^x (log x + 1)
        let out = d("x^x", "x");
        let env = Binding::from_pairs([("x", 1.7)]).unwrap();
        let want = 1.7f64.powf(1.7) * (1.7f64.ln() + 1.0);
        assert!((out.evaluate(&env).unwrap() - want).abs() < 1e-12);
    }
}
