//! Arbitrary-order partial derivatives of tensor-valued targets, symbolic or
//! by central finite differences.

mod stencil;

use std::fmt;
use std::str::FromStr;

pub use stencil::{fd_coefficients, Stencil};

use crate::error::{Error, Result};
use crate::expr::{Binding, Compiled};
use crate::tensor::{next_index, Dim, Scalar, Tensor};

/// Default finite-difference accuracy order.
pub const DEFAULT_ACCURACY: u32 = 4;

type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A numeric function of a point, returning a column-major tensor of fixed shape.
pub struct Callable {
    shape: Vec<usize>,
    f: Box<VectorFn>,
}

impl Callable {
    pub fn new(shape: &[usize], f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Callable {
        Callable {
            shape: shape.to_vec(),
            f: Box::new(f),
        }
    }

    pub fn scalar(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Callable {
        Callable::new(&[], move |x| vec![f(x)])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn call(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = (self.f)(x);
        let want: usize = self.shape.iter().product();
        if out.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "callable returned {} values for shape {:?}",
                out.len(),
                self.shape
            )));
        }
        Ok(out)
    }
}

impl fmt::Debug for Callable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Callable").field("shape", &self.shape).finish_non_exhaustive()
    }
}

/// What to differentiate.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Expr(&'a Tensor),
    Callable(&'a Callable),
}

/// Differentiation orders.
///
/// `Uniform(n)` over several variables gives one `n`-th derivative per
/// variable, stacked along a new last axis. Over a single variable it is the
/// plain `n`-th derivative. `PerVariable` and `Named` give one mixed partial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Order {
    Uniform(u32),
    PerVariable(Vec<u32>),
    Named(Vec<(String, u32)>),
}

impl FromStr for Order {
    type Err = Error;

    /// Accepts `2`, `1,2` or `x=1,y=2`.
    fn from_str(s: &str) -> Result<Order> {
        let bad = |part: &str| Error::InvalidArgument(format!("bad order `{part}`"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.iter().any(|p| p.contains('=')) {
            return parts
                .iter()
                .map(|p| {
                    let (name, n) = p.split_once('=').ok_or_else(|| bad(p))?;
                    Ok((name.trim().to_string(), n.trim().parse().map_err(|_| bad(p))?))
                })
                .collect::<Result<_>>()
                .map(Order::Named);
        }
        let ns: Vec<u32> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad(p)))
            .collect::<Result<_>>()?;
        Ok(match ns[..] {
            [n] => Order::Uniform(n),
            _ => Order::PerVariable(ns),
        })
    }
}

enum Resolved {
    Stacked(u32),
    Mixed(Vec<u32>),
}

impl Order {
    fn resolve(&self, vars: &[&str]) -> Result<Resolved> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument("no variables to differentiate by".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidArgument(format!("variable `{v}` listed twice")));
            }
        }
        match self {
            Order::Uniform(n) if vars.len() > 1 => Ok(Resolved::Stacked(*n)),
            Order::Uniform(n) => Ok(Resolved::Mixed(vec![*n])),
            Order::PerVariable(ns) if ns.len() == vars.len() => Ok(Resolved::Mixed(ns.clone())),
            Order::PerVariable(ns) => Err(Error::ShapeMismatch(format!(
                "{} orders for {} variables",
                ns.len(),
                vars.len()
            ))),
            Order::Named(pairs) => {
                let mut ns = vec![0; vars.len()];
                let mut seen: Vec<&str> = Vec::new();
                for (name, n) in pairs {
                    let k = vars.iter().position(|v| v == name).ok_or_else(|| {
                        Error::InvalidArgument(format!("order given for undeclared variable `{name}`"))
                    })?;
                    if seen.contains(&name.as_str()) {
                        return Err(Error::InvalidArgument(format!("order for `{name}` given twice")));
                    }
                    seen.push(name);
                    ns[k] = *n;
                }
                Ok(Resolved::Mixed(ns))
            }
        }
    }
}

/// Finite-difference settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FdOptions {
    pub accuracy: u32,
    /// Per-variable step sizes; chosen automatically when absent.
    pub steps: Option<Vec<f64>>,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            accuracy: DEFAULT_ACCURACY,
            steps: None,
        }
    }
}

/// Default step for an `n`-th derivative at accuracy `p` near `x`.
pub fn default_step(n: u32, p: u32, x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / f64::from(n + p)) * x.abs().max(1.0)
}

/// `n!` computed in integers.
pub fn factorial(n: u32) -> Result<f64> {
    if n > 20 {
        return Err(Error::TooLarge(format!("{n}! exceeds the exact integer range")));
    }
    Ok((1..=u64::from(n)).product::<u64>() as f64)
}

fn stacked_dims(base: &[Dim], m: usize) -> Vec<Dim> {
    let mut dims = base.to_vec();
    dims.push(Dim { extent: m, name: None });
    dims
}

/// Symbolic derivative of every component; evaluated at `at` when given.
pub fn derivative_symbolic(f: &Tensor, vars: &[&str], order: &Order, at: Option<&Binding>) -> Result<Tensor> {
    let mixed = |s: &Scalar, ns: &[u32]| -> Result<Scalar> {
        let mut e = s.to_expr();
        for (v, &n) in vars.iter().zip(ns) {
            e = e.diff_n(v, n)?;
        }
        Ok(Scalar::sym(e))
    };
    let out = match order.resolve(vars)? {
        Resolved::Mixed(ns) => f.try_map(|s| mixed(s, &ns))?,
        Resolved::Stacked(n) => {
            let mut data = Vec::with_capacity(f.len() * vars.len());
            for k in 0..vars.len() {
                let mut ns = vec![0; vars.len()];
                ns[k] = n;
                for s in f.data() {
                    data.push(mixed(s, &ns)?);
                }
            }
            Tensor::from_dims(stacked_dims(f.dims(), vars.len()), data)?
        }
    };
    match at {
        Some(env) => out.evaluate(env),
        None => Ok(out),
    }
}

/// A target reduced to a function of the differentiation variables.
struct Evaluator<'a> {
    shape: Vec<usize>,
    kind: EvalKind<'a>,
}

enum EvalKind<'a> {
    Compiled(Vec<Compiled>, Vec<f64>),
    Callable(&'a Callable),
}

impl<'a> Evaluator<'a> {
    fn new(target: Target<'a>, vars: &[&str], at: &Binding) -> Result<Evaluator<'a>> {
        match target {
            Target::Callable(c) => Ok(Evaluator {
                shape: c.shape().to_vec(),
                kind: EvalKind::Callable(c),
            }),
            Target::Expr(t) => {
                let rest: Vec<(&str, f64)> = at.iter().filter(|(n, _)| !vars.contains(n)).collect();
                let mut slots: Vec<&str> = vars.to_vec();
                slots.extend(rest.iter().map(|r| r.0));
                let compiled = t
                    .data()
                    .iter()
                    .map(|s| s.to_expr().compile(&slots))
                    .collect::<Result<_>>()?;
                Ok(Evaluator {
                    shape: t.extents(),
                    kind: EvalKind::Compiled(compiled, rest.iter().map(|r| r.1).collect()),
                })
            }
        }
    }

    fn eval(&self, x: &[f64], buf: &mut Vec<f64>) -> Result<Vec<f64>> {
        match &self.kind {
            EvalKind::Callable(c) => c.call(x),
            EvalKind::Compiled(comps, rest) => {
                buf.clear();
                buf.extend_from_slice(x);
                buf.extend_from_slice(rest);
                Ok(comps.iter().map(|c| c.eval(buf)).collect())
            }
        }
    }
}

fn mixed_fd(ev: &Evaluator, x: &[f64], ns: &[u32], opts: &FdOptions) -> Result<Vec<f64>> {
    let mut buf = Vec::new();
    let active: Vec<usize> = (0..ns.len()).filter(|&k| ns[k] > 0).collect();
    let stencils: Vec<Stencil> = active
        .iter()
        .map(|&k| fd_coefficients(ns[k], opts.accuracy))
        .collect::<Result<_>>()?;
    let steps: Vec<f64> = active
        .iter()
        .map(|&k| {
            let h = match &opts.steps {
                Some(hs) => hs[k],
                None => default_step(ns[k], opts.accuracy, x[k]),
            };
            // a step exactly representable as a difference of abscissae
            (x[k] + h) - x[k]
        })
        .collect();
    if steps.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::InvalidArgument("step sizes must be positive and finite".into()));
    }

    let extents: Vec<usize> = stencils.iter().map(|s| s.coefficients.len()).collect();
    let mut idx = vec![0; active.len()];
    let mut acc: Option<Vec<f64>> = None;
    let mut point = x.to_vec();
    loop {
        let weight: f64 = idx.iter().zip(&stencils).map(|(&j, s)| s.coefficients[j]).product();
        if weight != 0.0 {
            for (a, (&k, (&j, s))) in active.iter().zip(idx.iter().zip(&stencils)).enumerate() {
                point[k] = x[k] + s.offset(j) as f64 * steps[a];
            }
            let values = ev.eval(&point, &mut buf)?;
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("function value {bad} at {point:?}")));
            }
            let sum = acc.get_or_insert_with(|| vec![0.0; values.len()]);
            for (s, v) in sum.iter_mut().zip(&values) {
                *s += weight * v;
            }
        }
        if !next_index(&mut idx, &extents) {
            break;
        }
    }
    let mut scale = 1.0;
    for (a, &k) in active.iter().enumerate() {
        scale *= factorial(ns[k])? / steps[a].powi(ns[k] as i32);
    }
    let size: usize = ev.shape.iter().product();
    Ok(acc
        .map(|s| s.into_iter().map(|v| v * scale).collect())
        .unwrap_or_else(|| vec![0.0; size]))
}

/// Central finite-difference derivative at the point bound in `at`.
///
/// Variables not being differentiated keep their values from `at`.
pub fn derivative_numeric(
    target: Target<'_>,
    vars: &[&str],
    order: &Order,
    at: &Binding,
    opts: &FdOptions,
) -> Result<Tensor> {
    let resolved = order.resolve(vars)?;
    if let Some(hs) = &opts.steps {
        if hs.len() != vars.len() {
            return Err(Error::ShapeMismatch(format!("{} steps for {} variables", hs.len(), vars.len())));
        }
    }
    let x: Vec<f64> = vars
        .iter()
        .map(|v| at.get(v).ok_or_else(|| Error::UnboundVariable(v.to_string())))
        .collect::<Result<_>>()?;
    let ev = Evaluator::new(target, vars, at)?;
    let base: Vec<Dim> = ev.shape.iter().map(|&extent| Dim { extent, name: None }).collect();
    let (dims, data) = match resolved {
        Resolved::Mixed(ns) => (base, mixed_fd(&ev, &x, &ns, opts)?),
        Resolved::Stacked(n) => {
            let mut data = Vec::new();
            for k in 0..vars.len() {
                let mut ns = vec![0; vars.len()];
                ns[k] = n;
                data.extend(mixed_fd(&ev, &x, &ns, opts)?);
            }
            (stacked_dims(&base, vars.len()), data)
        }
    };
    Tensor::from_dims(dims, data.into_iter().map(Scalar::Num).collect())
}
