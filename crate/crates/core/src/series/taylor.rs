use std::collections::HashMap;

use super::{partitions, MultiIndex};
use crate::deriv::{derivative_numeric, FdOptions, Order, Target};
use crate::error::{Error, Result};
use crate::expr::{format_number, BinOp, Binding, Expr};

/// How Taylor coefficients are obtained.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Method {
    #[default]
    Symbolic,
    Numeric(FdOptions),
}

/// One row of a series: `coefficient * prod (x_i - c_i)^degree_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub label: String,
    pub coefficient: f64,
    pub degree: MultiIndex,
}

impl Term {
    pub fn total_degree(&self) -> u32 {
        self.degree.total()
    }
}

/// A truncated power series around `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    /// Sum of the terms with non-zero coefficients.
    pub expression: Expr,
    pub order: u32,
    pub variables: Vec<String>,
    pub center: Vec<f64>,
    pub terms: Vec<Term>,
}

fn base(var: &str, c: f64) -> (String, Expr) {
    let x = Expr::var(var);
    if c == 0.0 {
        (var.to_string(), x)
    } else if c > 0.0 {
        (format!("({var}-{})", format_number(c)), Expr::binary(BinOp::Sub, x, Expr::Const(c)))
    } else {
        (format!("({var}+{})", format_number(-c)), Expr::binary(BinOp::Add, x, Expr::Const(-c)))
    }
}

impl SeriesResult {
    /// Assembles labels and the expression from `(degree, coefficient)` rows.
    pub fn from_coefficients(
        variables: &[&str],
        center: &[f64],
        order: u32,
        rows: Vec<(MultiIndex, f64)>,
    ) -> SeriesResult {
        let mut expression: Option<Expr> = None;
        let mut terms = Vec::with_capacity(rows.len());
        for (degree, coefficient) in rows {
            let mut labels = Vec::new();
            let mut monomial: Option<Expr> = None;
            for ((v, &c), &k) in variables.iter().zip(center).zip(degree.as_slice()) {
                if k == 0 {
                    continue;
                }
                let (label, b) = base(v, c);
                labels.push(format!("{label}^{k}"));
                let factor = Expr::pow(b, Expr::Const(f64::from(k)));
                monomial = Some(match monomial {
                    None => factor,
                    Some(m) => Expr::binary(BinOp::Mul, m, factor),
                });
            }
            if coefficient != 0.0 {
                let term = match monomial {
                    None => Expr::Const(coefficient),
                    Some(m) => Expr::binary(BinOp::Mul, Expr::Const(coefficient), m),
                };
                expression = Some(match expression {
                    None => term,
                    Some(e) => Expr::binary(BinOp::Add, e, term),
                });
            }
            let label = if labels.is_empty() { "1".to_string() } else { labels.join("*") };
            terms.push(Term {
                label,
                coefficient,
                degree,
            });
        }
        SeriesResult {
            expression: expression.unwrap_or(Expr::Const(0.0)).simplify_zero(),
            order,
            variables: variables.iter().map(|v| v.to_string()).collect(),
            center: center.to_vec(),
            terms,
        }
    }

    pub fn coefficient(&self, degree: &[u32]) -> Option<f64> {
        self.terms
            .iter()
            .find(|t| t.degree.as_slice() == degree)
            .map(|t| t.coefficient)
    }

    /// Term table as CSV: label, coefficient, one exponent column per variable, total degree.
    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label".to_string(), "coef".to_string()];
        header.extend(self.variables.iter().cloned());
        header.push("degree".into());
        w.write_record(&header).map_err(io)?;
        for t in &self.terms {
            let mut row = vec![t.label.clone(), format!("{:?}", t.coefficient)];
            row.extend(t.degree.as_slice().iter().map(u32::to_string));
            row.push(t.total_degree().to_string());
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Taylor expansion of a scalar target up to total degree `order`.
///
/// `center` binds every variable in `vars`; other bindings are passed
/// through as parameters. Coefficients are `D^k f(center) / k!` for every
/// multi-index with `|k| <= order`.
pub fn taylor(target: Target<'_>, vars: &[&str], center: &Binding, order: u32, method: &Method) -> Result<SeriesResult> {
    let c: Vec<f64> = vars
        .iter()
        .map(|v| center.get(v).ok_or_else(|| Error::UnboundVariable(v.to_string())))
        .collect::<Result<_>>()?;
    let indices = partitions(order, vars.len().max(1), true, true, false)?;
    let mut rows = Vec::with_capacity(indices.len());
    match (target, method) {
        (Target::Expr(t), Method::Symbolic) => {
            if t.len() != 1 {
                return Err(Error::ShapeMismatch(format!("taylor needs a scalar target, got extents {:?}", t.extents())));
            }
            let f = t.data()[0].to_expr();
            let mut cache: HashMap<MultiIndex, Expr> = HashMap::new();
            for k in indices {
                let d = match k.as_slice().iter().position(|&n| n > 0) {
                    None => f.clone(),
                    Some(j) => {
                        let mut prev = k.clone();
                        prev.0[j] -= 1;
                        cache[&prev].diff(vars[j])?
                    }
                };
                let value = d.evaluate(center)?;
                if !value.is_finite() {
                    return Err(Error::NonFinite(format!("derivative {k} at the center is {value}")));
                }
                rows.push((k.clone(), value / k.factorial()?));
                cache.insert(k, d);
            }
        }
        (Target::Callable(_), Method::Symbolic) => {
            return Err(Error::InvalidArgument("a callable target needs the numeric method".into()));
        }
        (target, Method::Numeric(opts)) => {
            for k in indices {
                let d = derivative_numeric(target, vars, &Order::PerVariable(k.0.clone()), center, opts)?;
                if d.len() != 1 {
                    return Err(Error::ShapeMismatch("taylor needs a scalar target".into()));
                }
                let value = d.data()[0].as_f64().expect("numeric derivative");
                rows.push((k.clone(), value / k.factorial()?));
            }
        }
    }
    Ok(SeriesResult::from_coefficients(vars, &c, order, rows))
}
