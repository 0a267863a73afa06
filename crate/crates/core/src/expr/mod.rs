//! Symbolic expressions.
//!
//! An [`Expr`] is an immutable tree of constants, variables, arithmetic and
//! calls to a small set of elementary functions. Parentheses are never stored:
//! grouping is carried by the tree shape and re-created by the formatter from
//! operator precedence.
//!
//! ```
//! use calculus::expr::{Expr, Binding};
//!
//! let e: Expr = "1/(4*pi*r)".parse().unwrap();
//! let env = Binding::from_pairs([("r", 1.0)]).unwrap();
//! assert!((e.evaluate(&env).unwrap() - 0.25 / std::f64::consts::PI).abs() < 1e-15);
//! ```

mod diff;
mod eval;
mod format;
mod parse;
mod simplify;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use eval::{Binding, Compiled, Evaluation};
pub use parse::parse;

/// Name of the only recognized symbolic constant.
pub const PI: &str = "pi";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => a.powf(b),
        }
    }
}

/// Elementary functions understood by the parser, evaluator and differentiator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Asin,
    Acos,
    Atan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Asin,
        Func::Acos,
        Func::Atan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Asin => "asin",
            Func::Acos => "acos",
            Func::Atan => "atan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Asin => x.asin(),
            Func::Acos => x.acos(),
            Func::Atan => x.atan(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        }
    }
}

/// Symbolic expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn pi() -> Expr {
        Expr::Var(PI.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        Expr::Apply(func, Box::new(arg))
    }

    /// Negation that folds numeric constants.
    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(base: Expr, exponent: Expr) -> Expr {
        Expr::binary(BinOp::Pow, base, exponent)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// True when `name` occurs as a variable anywhere in the tree.
    pub fn depends_on(&self, name: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == name,
            Expr::Neg(a) | Expr::Apply(_, a) => a.depends_on(name),
            Expr::Binary(_, a, b) => a.depends_on(name) || b.depends_on(name),
        }
    }

    /// Free variables, excluding `pi`.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if v != PI {
                    out.insert(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Apply(_, a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces variables by expressions. Unmapped variables are kept.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(map))),
            Expr::Apply(f, a) => Expr::apply(*f, a.substitute(map)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(map), b.substitute(map)),
        }
    }

    /// Replaces every sub-tree structurally equal to `target` with `with`.
    pub fn replace(&self, target: &Expr, with: &Expr) -> Expr {
        if self == target {
            return with.clone();
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.replace(target, with))),
            Expr::Apply(f, a) => Expr::apply(*f, a.replace(target, with)),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.replace(target, with), b.replace(target, with))
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Apply(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn simplify_zero(&self) -> Expr {
        simplify::simplify_zero(self)
    }

    pub fn diff(&self, var: &str) -> Result<Expr> {
        diff::diff(self, var)
    }

    /// Differentiates `order` times with respect to `var`.
    pub fn diff_n(&self, var: &str, order: u32) -> Result<Expr> {
        let mut out = self.clone();
        for _ in 0..order {
            out = out.diff(var)?;
        }
        Ok(out)
    }

    pub fn evaluate(&self, env: &Binding) -> Result<f64> {
        eval::evaluate(self, env).map(|ev| ev.value)
    }

    pub fn evaluate_flagged(&self, env: &Binding) -> Result<Evaluation> {
        eval::evaluate(self, env)
    }

    /// Evaluates at every binding of `table`, preserving order.
    pub fn evaluate_grid(&self, table: &[Binding]) -> Result<Vec<f64>> {
        table.iter().map(|env| self.evaluate(env)).collect()
    }

    /// Resolves variables to slots so repeated evaluation skips name lookups.
    pub fn compile(&self, slots: &[&str]) -> Result<Compiled> {
        Compiled::new(self, slots)
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::Const(value)
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format::write_expr(f, self)
    }
}

pub(crate) use format::format_number;
