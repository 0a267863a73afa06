use std::collections::HashMap;
use std::f64::consts::PI as PI_VALUE;

use super::{BinOp, Expr, Func, PI};
use crate::error::{Error, Result};

/// Variable name to value association used for evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    values: HashMap<String, f64>,
}

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a binding, rejecting names that appear twice.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut values = HashMap::new();
        for (name, v) in pairs {
            let name = name.into();
            if values.insert(name.clone(), v).is_some() {
                return Err(Error::DuplicateBinding(name));
            }
        }
        Ok(Binding { values })
    }

    /// Sets or overwrites a value.
    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Bound names and values, sorted by name.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        let mut pairs: Vec<(&str, f64)> = self.values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        pairs.into_iter()
    }
}

/// Value of an evaluation plus whether a domain error (e.g. `log(-1)`) occurred on the way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub domain_error: bool,
}

fn flag(out: f64, inputs_finite: bool, domain_error: &mut bool) -> f64 {
    if inputs_finite && !out.is_finite() {
        *domain_error = true;
    }
    out
}

fn eval_rec(e: &Expr, env: &Binding, domain_error: &mut bool) -> Result<f64> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Var(name) => match env.get(name) {
            Some(v) => v,
            None if name == PI => PI_VALUE,
            None => return Err(Error::UnboundVariable(name.clone())),
        },
        Expr::Neg(a) => -eval_rec(a, env, domain_error)?,
        Expr::Binary(op, a, b) => {
            let x = eval_rec(a, env, domain_error)?;
            let y = eval_rec(b, env, domain_error)?;
            flag(op.apply(x, y), x.is_finite() && y.is_finite(), domain_error)
        }
        Expr::Apply(f, a) => {
            let x = eval_rec(a, env, domain_error)?;
            flag(f.apply(x), x.is_finite(), domain_error)
        }
    })
}

pub(super) fn evaluate(e: &Expr, env: &Binding) -> Result<Evaluation> {
    let mut domain_error = false;
    let value = eval_rec(e, env, &mut domain_error)?;
    Ok(Evaluation {
        value,
        domain_error,
    })
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Apply(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Node::Const(c) => *c,
            Node::Slot(i) => x[*i],
            Node::Neg(a) => -a.eval(x),
            Node::Binary(op, a, b) => op.apply(a.eval(x), b.eval(x)),
            Node::Apply(f, a) => f.apply(a.eval(x)),
        }
    }
}

/// An expression with variables resolved to positional slots.
///
/// Performs exactly the floating-point operations of [`Expr::evaluate`].
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
    arity: usize,
}

impl Compiled {
    pub(super) fn new(e: &Expr, slots: &[&str]) -> Result<Self> {
        fn lower(e: &Expr, slots: &[&str]) -> Result<Node> {
            Ok(match e {
                Expr::Const(c) => Node::Const(*c),
                Expr::Var(name) => match slots.iter().position(|s| s == name) {
                    Some(i) => Node::Slot(i),
                    None if name == PI => Node::Const(PI_VALUE),
                    None => return Err(Error::UnboundVariable(name.clone())),
                },
                Expr::Neg(a) => Node::Neg(Box::new(lower(a, slots)?)),
                Expr::Binary(op, a, b) => {
                    Node::Binary(*op, Box::new(lower(a, slots)?), Box::new(lower(b, slots)?))
                }
                Expr::Apply(f, a) => Node::Apply(*f, Box::new(lower(a, slots)?)),
            })
        }
        Ok(Compiled {
            root: lower(e, slots)?,
            arity: slots.len(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates with `values[i]` bound to the i-th slot.
    pub fn eval(&self, values: &[f64]) -> f64 {
        debug_assert!(values.len() >= self.arity);
        self.root.eval(values)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn determinant_expression() {
        let e = parse("a*d - b*c").unwrap();
        let env = Binding::from_pairs([("a", 1.0), ("b", 2.0), ("c", 3.0), ("d", 4.0)]).unwrap();
        assert_eq!(e.evaluate(&env).unwrap(), -2.0);
    }

    #[test]
    fn pi_constant() {
        let e = parse("1/(4*pi*r)").unwrap();
        let env = Binding::from_pairs([("r", 1.0)]).unwrap();
        // 1/(4 pi) computed independently
        assert!((e.evaluate(&env).unwrap() - 0.079_577_471_545_947_67).abs() < 1e-15);
        assert_eq!(parse("sin(x)").unwrap().evaluate(&Binding::from_pairs([("x", 0.0)]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn unbound_and_duplicate() {
        let e = parse("x + y").unwrap();
        let env = Binding::from_pairs([("x", 1.0)]).unwrap();
        assert_eq!(e.evaluate(&env), Err(Error::UnboundVariable("y".into())));
        assert!(matches!(
            Binding::from_pairs([("x", 1.0), ("x", 2.0)]),
            Err(Error::DuplicateBinding(_))
        ));
    }

    #[test]
    fn domain_error_flag() {
        let env = Binding::from_pairs([("x", -1.0)]).unwrap();
        let ev = parse("log(x)").unwrap().evaluate_flagged(&env).unwrap();
        assert!(ev.value.is_nan() && ev.domain_error);
        let ev = parse("exp(x)").unwrap().evaluate_flagged(&env).unwrap();
        assert!(!ev.domain_error);
    }

    #[test]
    fn grid() {
        let e = parse("x^2").unwrap();
        let table: Vec<Binding> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&x| Binding::from_pairs([("x", x)]).unwrap())
            .collect();
        assert_eq!(e.evaluate_grid(&table).unwrap(), vec![1.0, 4.0, 9.0]);
        let e = parse("a + b").unwrap();
        let table = vec![
            Binding::from_pairs([("a", 0.0), ("b", 0.0)]).unwrap(),
            Binding::from_pairs([("a", 1.0), ("b", 2.0)]).unwrap(),
        ];
        assert_eq!(e.evaluate_grid(&table).unwrap(), vec![0.0, 3.0]);
    }

    #[test]
    fn compiled_matches_tree() {
        let e = parse("x*(1 + cos(10*t)) - pi^y").unwrap();
        let c = e.compile(&["x", "y", "t"]).unwrap();
        let env = Binding::from_pairs([("x", 1.3), ("y", 0.7), ("t", 2.1)]).unwrap();
        assert_eq!(c.eval(&[1.3, 0.7, 2.1]).to_bits(), e.evaluate(&env).unwrap().to_bits());
        assert!(matches!(e.compile(&["x"]), Err(Error::UnboundVariable(_))));
    }
}
