use std::fmt;

use super::{BinOp, Expr};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Const(c) if c.is_sign_negative() && *c != 0.0 => UNARY,
        Expr::Binary(BinOp::Pow, ..) => POWER,
        Expr::Const(_) | Expr::Var(_) | Expr::Apply(..) => ATOM,
    }
}

/// Integers print without a decimal point; everything else uses the shortest
/// representation that parses back to the same `f64`.
pub(crate) fn format_number(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

pub(super) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{}", format_number(*c)),
        Expr::Var(v) => write!(f, "{v}"),
        Expr::Apply(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, arg)?;
            write!(f, ")")
        }
        Expr::Neg(inner) => {
            write!(f, "-")?;
            // `-(2)` keeps a negated literal distinct from the literal `-2`
            let wrap = precedence(inner) <= UNARY || matches!(**inner, Expr::Const(_));
            write_child(f, inner, wrap)
        }
        Expr::Binary(op, lhs, rhs) => {
            let (lp, rp) = (precedence(lhs), precedence(rhs));
            match op {
                BinOp::Add | BinOp::Sub => {
                    write_child(f, lhs, false)?;
                    write!(f, " {} ", op.symbol())?;
                    write_child(f, rhs, rp <= SUM || rp == UNARY)
                }
                BinOp::Mul | BinOp::Div => {
                    write_child(f, lhs, lp < PRODUCT)?;
                    write!(f, "{}", op.symbol())?;
                    write_child(f, rhs, rp <= PRODUCT || rp == UNARY)
                }
                BinOp::Pow => {
                    write_child(f, lhs, lp <= POWER)?;
                    write!(f, "^")?;
                    write_child(f, rhs, rp < UNARY)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Func};
    use super::*;

    #[test]
    fn simple_forms() {
        assert_eq!(Expr::apply(Func::Cos, Expr::var("x")).to_string(), "cos(x)");
        let half_x2 = Expr::binary(
            BinOp::Mul,
            Expr::Const(0.5),
            Expr::pow(Expr::var("x"), Expr::Const(2.0)),
        );
        assert_eq!(half_x2.to_string(), "0.5*x^2");
    }

    #[test]
    fn determinant_shape() {
        let e = parse("a*d - b*c").unwrap();
        assert_eq!(e.to_string(), "a*d - b*c");
    }

    #[test]
    fn grouping_is_reconstructed() {
        for s in [
            "(a + b)*(c + d)",
            "a - (b - c)",
            "a/(b*c)",
            "(-x)^2",
            "-x^2",
            "x^-1",
            "-(2)",
            "-(-2)",
            "(-2)^x",
            "2^3^2",
            "(2^3)^2",
            "exp(-(x^2 + y^2)/2)",
            "a*(-b)",
        ] {
            let e = parse(s).unwrap();
            let back = parse(&e.to_string()).unwrap();
            assert_eq!(back, e, "{s} -> {e}");
        }
    }

    #[test]
    fn numbers() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-2.0), "-2");
        assert_eq!(format_number(0.25), "0.25");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(parse(&format_number(0.1 + 0.2)).unwrap(), Expr::Const(0.1 + 0.2));
    }
}
