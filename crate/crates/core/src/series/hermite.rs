use std::collections::BTreeMap;

use super::{partitions, taylor, Method, MultiIndex, SeriesResult};
use crate::deriv::Target;
use crate::error::{Error, Result};
use crate::expr::{BinOp, Binding, Expr, Func};
use crate::tensor::{Scalar, Tensor};

/// Hermite polynomials `H_k(x, Σ)` for every `|k| <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteRequest {
    pub degree: u32,
    /// Row-major square matrix.
    pub sigma: Vec<Vec<f64>>,
    pub variables: Vec<String>,
}

impl HermiteRequest {
    /// Univariate polynomials in `x` with `Σ = 1`.
    pub fn univariate(degree: u32) -> HermiteRequest {
        HermiteRequest {
            degree,
            sigma: vec![vec![1.0]],
            variables: vec!["x".into()],
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.variables.len();
        if d == 0 {
            return Err(Error::InvalidArgument("hermite needs at least one variable".into()));
        }
        if self.sigma.len() != d || self.sigma.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!("sigma must be {d}x{d} to match the variables")));
        }
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (self.sigma[i][j], self.sigma[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "sigma is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `exp(-x'Σx/2)` in simplified form, so it survives differentiation unchanged.
fn kernel(sigma: &[Vec<f64>], vars: &[String]) -> Expr {
    let mut q: Option<Expr> = None;
    for (i, row) in sigma.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let term = Expr::binary(
                BinOp::Mul,
                Expr::Const(s),
                Expr::binary(BinOp::Mul, Expr::var(&vars[i]), Expr::var(&vars[j])),
            );
            q = Some(match q {
                None => term,
                Some(q) => Expr::binary(BinOp::Add, q, term),
            });
        }
    }
    let arg = Expr::binary(BinOp::Mul, Expr::Const(-0.5), q.unwrap_or(Expr::Const(0.0)));
    Expr::apply(Func::Exp, arg).simplify_zero().simplify_zero()
}

fn round_integers(s: SeriesResult) -> SeriesResult {
    let vars: Vec<&str> = s.variables.iter().map(String::as_str).collect();
    let rows = s
        .terms
        .iter()
        .map(|t| {
            let r = t.coefficient.round();
            let c = if (t.coefficient - r).abs() <= 1e-9 { r + 0.0 } else { t.coefficient };
            (t.degree.clone(), c)
        })
        .collect();
    SeriesResult::from_coefficients(&vars, &s.center, s.order, rows)
}

/// Multivariate Hermite polynomials by repeated kernel differentiation.
///
/// Each `H_k` comes from its predecessor `H_{k - e_j}` (with `j` the first
/// non-zero position of `k`): multiply by the kernel, apply `-d/dx_j`, drop
/// the kernel factor, and re-expand as a Taylor series of degree `|k|` at 0.
/// With an integer `Σ` the coefficients are rounded to exact integers.
pub fn hermite(req: &HermiteRequest) -> Result<BTreeMap<MultiIndex, SeriesResult>> {
    req.validate()?;
    let d = req.variables.len();
    let vars: Vec<&str> = req.variables.iter().map(String::as_str).collect();
    let k_expr = kernel(&req.sigma, &req.variables);
    let integer_sigma = req.sigma.iter().flatten().all(|v| v.fract() == 0.0);
    let origin = Binding::from_pairs(vars.iter().map(|v| (*v, 0.0)))?;

    let mut out: BTreeMap<MultiIndex, SeriesResult> = BTreeMap::new();
    for k in partitions(req.degree, d, true, true, false)? {
        let Some(j) = k.as_slice().iter().position(|&n| n > 0) else {
            let zero = MultiIndex::zeros(d);
            out.insert(k, SeriesResult::from_coefficients(&vars, &vec![0.0; d], 0, vec![(zero, 1.0)]));
            continue;
        };
        let mut prev = k.clone();
        prev.0[j] -= 1;
        let p = out[&prev].expression.clone();
        let g = Expr::binary(BinOp::Mul, p, k_expr.clone());
        let h = Expr::negate(g.diff(vars[j])?)
            .replace(&k_expr, &Expr::Const(1.0))
            .simplify_zero();
        if contains_exp(&h) {
            return Err(Error::InvalidArgument("kernel factor could not be removed".into()));
        }
        let poly = Tensor::scalar(Scalar::sym(h));
        let mut s = taylor(Target::Expr(&poly), &vars, &origin, k.total(), &Method::Symbolic)?;
        if integer_sigma {
            s = round_integers(s);
        }
        out.insert(k, s);
    }
    Ok(out)
}

fn contains_exp(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Var(_) => false,
        Expr::Neg(a) => contains_exp(a),
        Expr::Binary(_, a, b) => contains_exp(a) || contains_exp(b),
        Expr::Apply(f, a) => *f == Func::Exp || contains_exp(a),
    }
}
