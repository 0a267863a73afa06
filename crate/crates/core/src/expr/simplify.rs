use super::{BinOp, Expr};

/// Zero/one rewrite rules applied bottom-up until nothing changes.
///
/// Rules: `x+0`, `0+x`, `x-0` -> `x`; `0-x` -> `-x`; `x*0`, `0*x`, `0/x` -> `0`;
/// `x*1`, `1*x`, `x/1`, `x^1` -> `x`; `x^0` -> `1`; `-(-x)` -> `x`.
/// Operations whose operands are both literals are folded.
pub(super) fn simplify_zero(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Apply(f, a) => {
            let a = simplify_zero(a);
            match a {
                Expr::Const(c) => {
                    let v = f.apply(c);
                    // fold only when the result is an ordinary number
                    if v.is_finite() {
                        Expr::Const(v)
                    } else {
                        Expr::apply(*f, Expr::Const(c))
                    }
                }
                a => Expr::apply(*f, a),
            }
        }
        Expr::Neg(a) => negate(simplify_zero(a)),
        Expr::Binary(op, a, b) => rewrite(*op, simplify_zero(a), simplify_zero(b)),
    }
}

fn negate(e: Expr) -> Expr {
    match e {
        Expr::Neg(inner) => *inner,
        other => Expr::negate(other),
    }
}

fn rewrite(op: BinOp, a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        let v = op.apply(*x, *y);
        if v.is_finite() {
            return Expr::Const(v);
        }
    }
    match op {
        BinOp::Add if b.is_zero() => a,
        BinOp::Add if a.is_zero() => b,
        BinOp::Sub if b.is_zero() => a,
        BinOp::Sub if a.is_zero() => negate(b),
        BinOp::Mul if a.is_zero() || b.is_zero() => Expr::Const(0.0),
        BinOp::Mul if b.is_one() => a,
        BinOp::Mul if a.is_one() => b,
        BinOp::Div if a.is_zero() => Expr::Const(0.0),
        BinOp::Div if b.is_one() => a,
        BinOp::Pow if b.is_one() => a,
        BinOp::Pow if b.is_zero() => Expr::Const(1.0),
        _ => Expr::binary(op, a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn s(text: &str) -> String {
        parse(text).unwrap().simplify_zero().to_string()
    }

    #[test]
    fn zero_rules() {
        assert_eq!(s("0*sin(x) + y"), "y");
        assert_eq!(s("x^0"), "1");
        assert_eq!(s("1*x^1"), "x");
        assert_eq!(s("0 - x"), "-x");
        assert_eq!(s("0/x + x/1"), "x");
        assert_eq!(s("-(-x)"), "x");
        assert_eq!(s("(x - 0)*(0 + y)"), "x*y");
    }

    #[test]
    fn nested_to_fixpoint() {
        assert_eq!(s("(x*0 + 1)*y"), "y");
        assert_eq!(s("-(0 - x)"), "x");
        assert_eq!(s("x^(1 - 1)"), "1");
    }

    #[test]
    fn literal_folding() {
        assert_eq!(s("6*(5*(4*(3*2)))*y^6"), "720*y^6");
        // 1/0 is left alone rather than folded to infinity
        assert_eq!(s("1/0"), "1/0");
    }
}
