//! Gradient, Jacobian, Hessian, divergence, curl and Laplacian in orthogonal
//! coordinates described by scale factors.
//!
//! Tensor-valued fields are handled per component. Vector fields live on the
//! last axis, and operators that produce new axes append them at the end.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::deriv::{derivative_numeric, FdOptions, Order, Target};
use crate::error::{Error, Result};
use crate::expr::{BinOp, Binding, Expr, Func};
use crate::tensor::{next_index, permutation_parity, Dim, Scalar, Tensor};

/// A coordinate system by name, or by explicit scale factors.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Coordinates {
    #[default]
    Cartesian,
    Polar,
    Cylindrical,
    Spherical,
    Parabolic,
    ParabolicCylindrical,
    /// Scale factors written in terms of the caller's variable names.
    Custom(Vec<Expr>),
}

impl Coordinates {
    pub const BUILTIN: [Coordinates; 6] = [
        Coordinates::Cartesian,
        Coordinates::Polar,
        Coordinates::Cylindrical,
        Coordinates::Spherical,
        Coordinates::Parabolic,
        Coordinates::ParabolicCylindrical,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Coordinates::Cartesian => "cartesian",
            Coordinates::Polar => "polar",
            Coordinates::Cylindrical => "cylindrical",
            Coordinates::Spherical => "spherical",
            Coordinates::Parabolic => "parabolic",
            Coordinates::ParabolicCylindrical => "parabolic-cylindrical",
            Coordinates::Custom(_) => "custom",
        }
    }

    /// Fixed dimension of a named system; `None` for Cartesian and custom.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Coordinates::Cartesian | Coordinates::Custom(_) => None,
            Coordinates::Polar => Some(2),
            _ => Some(3),
        }
    }

    /// Scale factors for the given variables, in order.
    pub fn system(&self, vars: &[&str]) -> Result<CoordinateSystem> {
        if vars.is_empty() {
            return Err(Error::InvalidArgument("coordinates need at least one variable".into()));
        }
        let want = match self {
            Coordinates::Custom(fs) => Some(fs.len()),
            other => other.dimension(),
        };
        if let Some(n) = want {
            if n != vars.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} coordinates have {n} dimensions, got {} variables",
                    self.name(),
                    vars.len()
                )));
            }
        }
        let v = |i: usize| Expr::var(vars[i]);
        let one = || Expr::Const(1.0);
        let mul = |a: Expr, b: Expr| Expr::binary(BinOp::Mul, a, b);
        let radius = || {
            let sq = |e: Expr| Expr::pow(e, Expr::Const(2.0));
            Expr::apply(Func::Sqrt, Expr::binary(BinOp::Add, sq(v(0)), sq(v(1))))
        };
        let factors = match self {
            Coordinates::Cartesian => vec![one(); vars.len()],
            Coordinates::Polar => vec![one(), v(0)],
            Coordinates::Cylindrical => vec![one(), v(0), one()],
            Coordinates::Spherical => vec![one(), v(0), mul(v(0), Expr::apply(Func::Sin, v(1)))],
            Coordinates::Parabolic => vec![radius(), radius(), mul(v(0), v(1))],
            Coordinates::ParabolicCylindrical => vec![radius(), radius(), one()],
            Coordinates::Custom(fs) => fs.clone(),
        };
        Ok(CoordinateSystem {
            name: self.name().to_string(),
            variables: vars.iter().map(|s| s.to_string()).collect(),
            factors,
        })
    }
}

impl FromStr for Coordinates {
    type Err = Error;

    /// A system name, or a comma-separated list of scale-factor expressions.
    fn from_str(s: &str) -> Result<Coordinates> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        if let Some(c) = Coordinates::BUILTIN.into_iter().find(|c| c.name() == key) {
            return Ok(c);
        }
        let factors = s.split(',').map(|p| p.trim().parse::<Expr>()).collect::<Result<Vec<_>>>()?;
        Ok(Coordinates::Custom(factors))
    }
}

impl fmt::Display for Coordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coordinates::Custom(fs) => {
                let parts: Vec<String> = fs.iter().map(Expr::to_string).collect();
                write!(f, "{}", parts.join(","))
            }
            c => f.write_str(c.name()),
        }
    }
}

/// Scale factors bound to concrete variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSystem {
    pub name: String,
    pub variables: Vec<String>,
    pub factors: Vec<Expr>,
}

fn product<'a>(items: impl Iterator<Item = &'a Expr>) -> Expr {
    items
        .fold(Expr::Const(1.0), |acc, e| Expr::binary(BinOp::Mul, acc, e.clone()))
        .simplify_zero()
}

impl CoordinateSystem {
    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    /// `J`, the product of the scale factors.
    pub fn jacobian(&self) -> Expr {
        product(self.factors.iter())
    }

    pub fn is_cartesian(&self) -> bool {
        self.factors.iter().all(Expr::is_one)
    }

    /// `J / h_i`, formed without dividing.
    fn j_over(&self, i: usize) -> Expr {
        product(self.factors.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, h)| h))
    }

    /// Fails when a scale factor vanishes or is not finite at `at`.
    pub fn check_point(&self, at: &Binding) -> Result<()> {
        for (h, v) in self.factors.iter().zip(&self.variables) {
            let value = h.evaluate(at)?;
            if value == 0.0 || !value.is_finite() {
                return Err(Error::SingularPoint(format!(
                    "scale factor `{h}` for `{v}` is {value} at {}",
                    describe(at, &self.variables)
                )));
            }
        }
        Ok(())
    }
}

fn describe(at: &Binding, vars: &[String]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .map(|v| format!("{v}={}", at.get(v).map_or("?".to_string(), |x| x.to_string())))
        .collect();
    parts.join(", ")
}

enum Source<'a> {
    Symbolic(&'a Tensor),
    Numeric {
        target: Target<'a>,
        at: &'a Binding,
        values: Vec<f64>,
        cache: RefCell<HashMap<Vec<u32>, Vec<f64>>>,
    },
}

/// A field together with its coordinate system, doing arithmetic on
/// expressions or on numbers at a point.
struct Ctx<'a> {
    vars: &'a [&'a str],
    sys: CoordinateSystem,
    shape: Vec<Dim>,
    src: Source<'a>,
    at: Option<&'a Binding>,
}

impl<'a> Ctx<'a> {
    fn new(f: Target<'a>, vars: &'a [&'a str], coords: &Coordinates, at: Option<&'a Binding>) -> Result<Ctx<'a>> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::InvalidArgument(format!("variable `{v}` listed twice")));
            }
        }
        let sys = coords.system(vars)?;
        if let Some(at) = at {
            sys.check_point(at)?;
        }
        let (shape, src) = match (f, at) {
            (Target::Expr(t), _) => (t.dims().to_vec(), Source::Symbolic(t)),
            (Target::Callable(c), Some(at)) => {
                let x: Vec<f64> = vars
                    .iter()
                    .map(|v| at.get(v).ok_or_else(|| Error::UnboundVariable(v.to_string())))
                    .collect::<Result<_>>()?;
                let shape = c.shape().iter().map(|&extent| Dim { extent, name: None }).collect();
                let src = Source::Numeric {
                    target: f,
                    at,
                    values: c.call(&x)?,
                    cache: RefCell::new(HashMap::new()),
                };
                (shape, src)
            }
            (Target::Callable(_), None) => {
                return Err(Error::InvalidArgument("a numeric field needs a point to evaluate at".into()))
            }
        };
        Ok(Ctx { vars, sys, shape, src, at })
    }

    fn d(&self) -> usize {
        self.vars.len()
    }

    fn len(&self) -> usize {
        self.shape.iter().map(|d| d.extent).product()
    }

    /// Leading dimensions and the per-vector count, checking the last axis has extent `d`.
    fn vector_layout(&self, min_d: usize) -> Result<(Vec<Dim>, usize)> {
        let d = self.d();
        if d < min_d {
            return Err(Error::InvalidArgument(format!("operator needs at least {min_d} dimensions, got {d}")));
        }
        match self.shape.split_last() {
            Some((last, lead)) if last.extent == d => Ok((lead.to_vec(), self.len() / d)),
            _ => Err(Error::ShapeMismatch(format!(
                "last axis must have extent {d}, field has extents {:?}",
                self.shape.iter().map(|d| d.extent).collect::<Vec<_>>()
            ))),
        }
    }

    fn value(&self, c: usize) -> Scalar {
        match &self.src {
            Source::Symbolic(t) => t.data()[c].clone(),
            Source::Numeric { values, .. } => Scalar::Num(values[c]),
        }
    }

    /// Mixed partial of component `c` with per-variable orders `ns`.
    fn partial(&self, c: usize, ns: &[u32]) -> Result<Scalar> {
        match &self.src {
            Source::Symbolic(t) => {
                let mut e = t.data()[c].to_expr();
                for (v, &n) in self.vars.iter().zip(ns) {
                    e = e.diff_n(v, n)?;
                }
                Ok(Scalar::sym(e))
            }
            Source::Numeric { target, at, cache, .. } => {
                if let Some(vals) = cache.borrow().get(ns) {
                    return Ok(Scalar::Num(vals[c]));
                }
                let order = Order::PerVariable(ns.to_vec());
                let vals = derivative_numeric(*target, self.vars, &order, at, &FdOptions::default())?
                    .to_f64()
                    .expect("numeric derivative");
                let out = vals[c];
                cache.borrow_mut().insert(ns.to_vec(), vals);
                Ok(Scalar::Num(out))
            }
        }
    }

    fn unit(&self, i: usize, n: u32) -> Vec<u32> {
        let mut ns = vec![0; self.d()];
        ns[i] = n;
        ns
    }

    /// A scale-factor expression, evaluated at the point in numeric mode.
    fn factor(&self, e: &Expr) -> Result<Scalar> {
        match &self.src {
            Source::Symbolic(_) => Ok(Scalar::sym(e.clone())),
            Source::Numeric { at, .. } => Ok(Scalar::Num(e.evaluate(at)?)),
        }
    }

    /// `∂_i` of a scale-factor expression, always taken symbolically.
    fn factor_diff(&self, e: &Expr, i: usize) -> Result<Scalar> {
        self.factor(&e.diff(self.vars[i])?)
    }

    fn finish(&self, dims: Vec<Dim>, data: Vec<Scalar>) -> Result<Tensor> {
        let data = match &self.src {
            Source::Symbolic(_) => data
                .into_iter()
                .map(|s| match s {
                    Scalar::Sym(e) => Scalar::sym(e.simplify_zero()),
                    n => n,
                })
                .collect(),
            Source::Numeric { .. } => data,
        };
        let out = Tensor::from_dims(dims, data)?;
        match (&self.src, self.at) {
            (Source::Symbolic(_), Some(at)) => out.evaluate(at),
            _ => Ok(out),
        }
    }
}

fn with_axes(mut dims: Vec<Dim>, d: usize, count: usize) -> Vec<Dim> {
    dims.extend((0..count).map(|_| Dim { extent: d, name: None }));
    dims
}

/// `(∇F)_i = ∂_i F / h_i` per component, on a new last axis.
///
/// Expression fields are differentiated symbolically and, when `at` is
/// given, evaluated there. Callable fields need `at` and use finite differences.
pub fn gradient(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let ctx = Ctx::new(f, vars, coords, at)?;
    let (n, d) = (ctx.len(), ctx.d());
    let mut data = Vec::with_capacity(n * d);
    for i in 0..d {
        let h = ctx.factor(&ctx.sys.factors[i])?;
        for c in 0..n {
            data.push(ctx.partial(c, &ctx.unit(i, 1))?.over(&h)?);
        }
    }
    ctx.finish(with_axes(ctx.shape.clone(), d, 1), data)
}

/// The gradient as a `components x d` matrix, also for scalar fields.
pub fn jacobian(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let g = gradient(f, vars, coords, at)?;
    let d = vars.len();
    let rows = g.len() / d;
    g.reshape(&[rows, d])
}

/// Matrix of second partials per component, in Cartesian coordinates only.
pub fn hessian(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let ctx = Ctx::new(f, vars, coords, at)?;
    if !ctx.sys.is_cartesian() {
        return Err(Error::NotCartesian(format!("hessian in {} coordinates", ctx.sys.name)));
    }
    let (n, d) = (ctx.len(), ctx.d());
    let mut data = vec![Scalar::Num(0.0); n * d * d];
    for j in 0..d {
        for i in 0..=j {
            let mut ns = ctx.unit(i, 1);
            ns[j] += 1;
            for c in 0..n {
                let v = ctx.partial(c, &ns)?;
                data[c + n * (j + d * i)] = v.clone();
                data[c + n * (i + d * j)] = v;
            }
        }
    }
    ctx.finish(with_axes(ctx.shape.clone(), d, 2), data)
}

/// `∇·F = (1/J) Σ_i [∂_i(J/h_i) F_i + (J/h_i) ∂_i F_i]` over the last axis.
pub fn divergence(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let ctx = Ctx::new(f, vars, coords, at)?;
    let (lead, n) = ctx.vector_layout(1)?;
    let d = ctx.d();
    let j = ctx.factor(&ctx.sys.jacobian())?;
    let mut weights = Vec::with_capacity(d);
    for i in 0..d {
        let a = ctx.sys.j_over(i);
        weights.push((ctx.factor_diff(&a, i)?, ctx.factor(&a)?));
    }
    let mut data = Vec::with_capacity(n);
    for c in 0..n {
        let mut acc = Scalar::Num(0.0);
        for (i, (da, a)) in weights.iter().enumerate() {
            let comp = c + n * i;
            let term = da.times(&ctx.value(comp)).plus(&a.times(&ctx.partial(comp, &ctx.unit(i, 1))?));
            acc = acc.plus(&term);
        }
        data.push(acc.over(&j)?);
    }
    ctx.finish(lead, data)
}

/// Generalized curl over the last axis.
///
/// `(∇×F)_{k_1..k_m} = Σ_ij ε_{i j k_1..k_m} [∂_i(h_j) F_j + h_j ∂_i F_j] / (h_i h_j)`
/// with `m = d - 2`: a scalar in two dimensions, a vector in three, and `m`
/// trailing axes of extent `d` in general.
pub fn curl(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let ctx = Ctx::new(f, vars, coords, at)?;
    let (lead, n) = ctx.vector_layout(2)?;
    let d = ctx.d();
    let m = d - 2;
    let hs = &ctx.sys.factors;
    let extents = vec![d; m];
    let mut ks = vec![0; m];
    let mut data = Vec::with_capacity(n * d.pow(m as u32));
    loop {
        // terms with a non-zero symbol for this output index
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                let mut perm = vec![i, j];
                perm.extend_from_slice(&ks);
                if let Some(sign) = permutation_parity(&perm) {
                    let denom = ctx.factor(&Expr::binary(BinOp::Mul, hs[i].clone(), hs[j].clone()).simplify_zero())?;
                    terms.push((sign, i, j, ctx.factor_diff(&hs[j], i)?, ctx.factor(&hs[j])?, denom));
                }
            }
        }
        for c in 0..n {
            let mut acc = Scalar::Num(0.0);
            for (sign, i, j, dh, h, denom) in &terms {
                let comp = c + n * j;
                let inner = dh.times(&ctx.value(comp)).plus(&h.times(&ctx.partial(comp, &ctx.unit(*i, 1))?));
                let term = inner.over(denom)?;
                acc = if *sign > 0 { acc.plus(&term) } else { acc.minus(&term) };
            }
            data.push(acc);
        }
        if m == 0 || !next_index(&mut ks, &extents) {
            break;
        }
    }
    ctx.finish(with_axes(lead, d, m), data)
}

/// `∇²F = (1/J) Σ_i [∂_i(J/h_i²) ∂_i F + (J/h_i²) ∂_i² F]` per component.
pub fn laplacian(f: Target<'_>, vars: &[&str], coords: &Coordinates, at: Option<&Binding>) -> Result<Tensor> {
    let ctx = Ctx::new(f, vars, coords, at)?;
    let (n, d) = (ctx.len(), ctx.d());
    let j = ctx.factor(&ctx.sys.jacobian())?;
    let mut weights = Vec::with_capacity(d);
    for i in 0..d {
        let b = Expr::binary(BinOp::Div, ctx.sys.j_over(i), ctx.sys.factors[i].clone()).simplify_zero();
        weights.push((ctx.factor_diff(&b, i)?, ctx.factor(&b)?));
    }
    let mut data = Vec::with_capacity(n);
    for c in 0..n {
        let mut acc = Scalar::Num(0.0);
        for (i, (db, b)) in weights.iter().enumerate() {
            let first = ctx.partial(c, &ctx.unit(i, 1))?;
            let second = ctx.partial(c, &ctx.unit(i, 2))?;
            acc = acc.plus(&db.times(&first).plus(&b.times(&second)));
        }
        data.push(acc.over(&j)?);
    }
    ctx.finish(ctx.shape.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deriv::Callable;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn exprs(extents: &[usize], items: &[&str]) -> Tensor {
        Tensor::parse(extents, &[], items).unwrap()
    }

    fn env(vars: &[&str], x: &[f64]) -> Binding {
        Binding::from_pairs(vars.iter().copied().zip(x.iter().copied())).unwrap()
    }

    /// Agreement at a handful of points away from chart singularities.
    fn same_values(got: &Scalar, want: &str, vars: &[&str]) {
        let want: Expr = want.parse().unwrap();
        for k in 0..20 {
            let x: Vec<f64> = (0..vars.len()).map(|i| 0.3 + 0.17 * ((k * 7 + i * 3) % 11) as f64).collect();
            let e = env(vars, &x);
            let (g, w) = (got.evaluate(&e).unwrap(), want.evaluate(&e).unwrap());
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{got} vs {want} at {x:?}");
        }
    }

    const XYZ: [&str; 3] = ["x", "y", "z"];

    #[test]
    fn gradient_cartesian_symbolic() {
        let f = exprs(&[], &["x*y*z"]);
        let g = gradient(Target::Expr(&f), &XYZ, &Coordinates::Cartesian, None).unwrap();
        let got: Vec<String> = g.data().iter().map(Scalar::to_string).collect();
        assert_eq!(got, ["y*z", "x*z", "x*y"]);
    }

    #[test]
    fn custom_factors_match_spherical() {
        let f = exprs(&[], &["x*y*z"]);
        let custom: Coordinates = "1, x, x*sin(y)".parse().unwrap();
        let a = gradient(Target::Expr(&f), &XYZ, &Coordinates::Spherical, None).unwrap();
        let b = gradient(Target::Expr(&f), &XYZ, &custom, None).unwrap();
        assert_eq!(a, b);
        same_values(&a.data()[2], "1/(x*sin(y)) * (x*y)", &XYZ);
        let g = exprs(&[3], &["x^2*y", "sin(z)*x", "y*z"]);
        assert_eq!(
            divergence(Target::Expr(&g), &XYZ, &Coordinates::Spherical, None).unwrap(),
            divergence(Target::Expr(&g), &XYZ, &custom, None).unwrap()
        );
    }

    #[test]
    fn gradient_numeric_spherical() {
        let f = Callable::scalar(|x| x[0] * x[1] * x[2]);
        let at = env(&XYZ, &[1.0, PI / 2.0, 0.0]);
        let g = gradient(Target::Callable(&f), &XYZ, &Coordinates::Spherical, Some(&at)).unwrap();
        let v = g.to_f64().unwrap();
        assert!(v[0].abs() < 5e-5 && v[1].abs() < 5e-5 && (v[2] - 1.5708).abs() < 5e-5, "{v:?}");
    }

    fn prod_sum() -> Callable {
        Callable::new(&[2], |x| vec![x.iter().product(), x.iter().sum()])
    }

    fn assert_matrix(t: &Tensor, want: &[&[f64]], tol: f64) {
        assert_eq!(t.extents(), vec![want.len(), want[0].len()]);
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                let g = t.get(&[i, j]).unwrap().as_f64().unwrap();
                assert!((g - w).abs() <= tol, "[{i},{j}] {g} vs {w}");
            }
        }
    }

    #[test]
    fn gradient_of_vector_callable() {
        let at = env(&XYZ, &[3.0, 2.0, 1.0]);
        let f = prod_sum();
        let g = gradient(Target::Callable(&f), &XYZ, &Coordinates::Cylindrical, Some(&at)).unwrap();
        assert_matrix(&g, &[&[2.0, 1.0, 6.0], &[1.0, 1.0 / 3.0, 1.0]], 1e-8);
        let j = jacobian(Target::Callable(&f), &XYZ, &Coordinates::Cartesian, Some(&at)).unwrap();
        assert_matrix(&j, &[&[2.0, 3.0, 6.0], &[1.0, 1.0, 1.0]], 1e-8);
    }

    #[test]
    fn jacobian_shapes() {
        let f = Callable::scalar(|x| x[0] * x[0]);
        let j = jacobian(Target::Callable(&f), &["x"], &Coordinates::Cartesian, Some(&env(&["x"], &[1.0]))).unwrap();
        assert_matrix(&j, &[&[2.0]], 1e-9);
        let id = exprs(&[3], &XYZ);
        let j = jacobian(Target::Expr(&id), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(j.to_f64().unwrap(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn hessian_numeric() {
        let at = env(&XYZ, &[3.0, 2.0, 1.0]);
        let f = Callable::new(&[2], |x| vec![x[0] * x[1] * x[2], x[0] + x[1] + x[2]]);
        let h = hessian(Target::Callable(&f), &XYZ, &Coordinates::Cartesian, Some(&at)).unwrap();
        assert_eq!(h.extents(), vec![2, 3, 3]);
        let want = [[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                let a = h.get(&[0, i, j]).unwrap().as_f64().unwrap();
                let b = h.get(&[1, i, j]).unwrap().as_f64().unwrap();
                assert!((a - want[i][j]).abs() <= 1e-8, "{a}");
                assert!(b.abs() <= 1e-8, "{b}");
            }
        }
    }

    #[test]
    fn hessian_quadratic_and_coords() {
        // ½ xᵀAx with A = [[2,-1],[-1,4]]
        let f = Callable::scalar(|x| 0.5 * (2.0 * x[0] * x[0] - 2.0 * x[0] * x[1] + 4.0 * x[1] * x[1]));
        let at = env(&["x", "y"], &[0.7, -1.3]);
        let h = hessian(Target::Callable(&f), &["x", "y"], &Coordinates::Cartesian, Some(&at)).unwrap();
        assert_matrix(&h, &[&[2.0, -1.0], &[-1.0, 4.0]], 1e-8);
        let s = exprs(&[], &["x^2*y"]);
        let h = hessian(Target::Expr(&s), &["x", "y"], &Coordinates::Cartesian, None).unwrap();
        let got: Vec<String> = h.data().iter().map(Scalar::to_string).collect();
        assert_eq!(got, ["2*y", "2*x", "2*x", "0"]);
        assert!(matches!(
            hessian(Target::Expr(&s), &["x", "y"], &Coordinates::Polar, None),
            Err(Error::NotCartesian(_))
        ));
    }

    #[test]
    fn divergence_examples() {
        let f = exprs(&[3], &["x^2", "y^2", "z^2"]);
        let d = divergence(Target::Expr(&f), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(d.rank(), 0);
        same_values(&d.data()[0], "2*x + 2*y + 2*z", &XYZ);

        let p = exprs(&[2], &["sqrt(r)/10", "sqrt(r)"]);
        let d = divergence(Target::Expr(&p), &["r", "phi"], &Coordinates::Polar, None).unwrap();
        same_values(&d.data()[0], "(0.5 * r^-0.5/10 * r + (sqrt(r)/10)) / (1*r)", &["r", "phi"]);

        let m = Callable::new(&[2, 3], |x| vec![x[0] * x[0], x[0], x[1] * x[1], x[1], x[2] * x[2], x[2]]);
        let d = divergence(Target::Callable(&m), &XYZ, &Coordinates::Cartesian, Some(&env(&XYZ, &[0.0; 3]))).unwrap();
        let v = d.to_f64().unwrap();
        assert!(v[0].abs() < 1e-9 && (v[1] - 3.0).abs() < 1e-9, "{v:?}");

        let rows = Tensor::from_rows(vec![
            ["x^2", "y^2", "z^2"].iter().map(|s| Scalar::parse(s).unwrap()).collect(),
            XYZ.iter().map(|s| Scalar::parse(s).unwrap()).collect(),
        ])
        .unwrap();
        let d = divergence(Target::Expr(&rows), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(d.data()[1].to_string(), "3");
        assert!(matches!(
            divergence(Target::Expr(&exprs(&[2], &["x", "y"])), &XYZ, &Coordinates::Cartesian, None),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn curl_examples() {
        let f = exprs(&[2], &["x^3*y^2", "x"]);
        let c = curl(Target::Expr(&f), &["x", "y"], &Coordinates::Cartesian, None).unwrap();
        assert_eq!(c.rank(), 0);
        same_values(&c.data()[0], "(1) * 1 + (x^3 * (2 * y)) * -1", &["x", "y"]);

        let g = exprs(&[3], &["x", "-y", "z"]);
        let c = curl(Target::Expr(&g), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(c.to_f64().unwrap(), vec![0.0; 3]);

        let rows = Tensor::from_rows(vec![
            ["x", "-y", "z"].iter().map(|s| Scalar::parse(s).unwrap()).collect(),
            ["x^3*y^2", "x", "0"].iter().map(|s| Scalar::parse(s).unwrap()).collect(),
        ])
        .unwrap();
        let c = curl(Target::Expr(&rows), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(c.extents(), vec![2, 3]);
        for j in 0..3 {
            assert!(c.get(&[0, j]).unwrap().is_zero());
        }
        assert!(c.get(&[1, 0]).unwrap().is_zero() && c.get(&[1, 1]).unwrap().is_zero());
        same_values(c.get(&[1, 2]).unwrap(), "1 - 2*x^3*y", &XYZ);

        let one = exprs(&[1], &["x"]);
        assert!(curl(Target::Expr(&one), &["x"], &Coordinates::Cartesian, None).is_err());
    }

    #[test]
    fn curl_in_four_dimensions() {
        // m = 2: an antisymmetric d x d result per field
        let vars = ["a", "b", "c", "d"];
        let f = exprs(&[4], &["b*c", "a*d", "a^2", "c*b"]);
        let r = curl(Target::Expr(&f), &vars, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(r.extents(), vec![4, 4]);
        let at = env(&vars, &[0.3, -1.1, 0.7, 2.0]);
        let v = r.evaluate(&at).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                let a = v.get(&[k, l]).unwrap().as_f64().unwrap();
                let b = v.get(&[l, k]).unwrap().as_f64().unwrap();
                assert!((a + b).abs() < 1e-12);
            }
        }
        // (k,l) = (2,3): ε_{01kl} (∂_0F_1 - ∂_1F_0) = d - c
        let got = v.get(&[2, 3]).unwrap().as_f64().unwrap();
        assert!((got - (2.0 - 0.7)).abs() < 1e-12, "{got}");
    }

    #[test]
    fn laplacian_examples() {
        let f = exprs(&[], &["x^3+y^3+z^3"]);
        let l = laplacian(Target::Expr(&f), &XYZ, &Coordinates::Cartesian, None).unwrap();
        same_values(&l.data()[0], "6*x + 6*y + 6*z", &XYZ);

        let a = exprs(&[2, 2], &["x^3+y^3+z^3", "x^2+y^2+z^2", "y^2", "z*x^2"]);
        let l = laplacian(Target::Expr(&a), &XYZ, &Coordinates::Cartesian, None).unwrap();
        assert_eq!(l.extents(), vec![2, 2]);
        same_values(l.get(&[1, 0]).unwrap(), "6", &XYZ);
        same_values(l.get(&[0, 1]).unwrap(), "2", &XYZ);
        same_values(l.get(&[1, 1]).unwrap(), "2*z", &XYZ);

        let h = exprs(&[], &["x^2 - y^2"]);
        let l = laplacian(Target::Expr(&h), &["x", "y"], &Coordinates::Cartesian, None).unwrap();
        assert_eq!(l.data()[0].to_string(), "0");

        // 1/r is harmonic away from the origin
        let inv = exprs(&[], &["1/r"]);
        let vars = ["r", "theta", "phi"];
        let l = laplacian(Target::Expr(&inv), &vars, &Coordinates::Spherical, Some(&env(&vars, &[1.7, 0.4, 2.0]))).unwrap();
        assert!(l.to_f64().unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn singular_points() {
        let f = Callable::scalar(|x| x[0]);
        let vars = ["r", "theta", "phi"];
        let err = gradient(Target::Callable(&f), &vars, &Coordinates::Spherical, Some(&env(&vars, &[0.0, 1.0, 1.0])));
        assert!(matches!(err, Err(Error::SingularPoint(_))));
        let err = laplacian(Target::Callable(&f), &vars, &Coordinates::Spherical, Some(&env(&vars, &[1.0, 0.0, 1.0])));
        assert!(matches!(err, Err(Error::SingularPoint(_))));
        assert!(gradient(Target::Callable(&f), &vars, &Coordinates::Spherical, None).is_err());
        assert!(matches!(
            gradient(Target::Callable(&f), &["r", "t"], &Coordinates::Spherical, None),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn parse_coordinates() {
        assert_eq!("Spherical".parse::<Coordinates>().unwrap(), Coordinates::Spherical);
        assert_eq!("parabolic_cylindrical".parse::<Coordinates>().unwrap(), Coordinates::ParabolicCylindrical);
        let c: Coordinates = "1,r".parse().unwrap();
        assert_eq!(c.to_string(), "1,r");
        let sys = Coordinates::Parabolic.system(&["u", "v", "phi"]).unwrap();
        assert_eq!(sys.factors[2].to_string(), "u*v");
        let j = sys.jacobian();
        let at = env(&["u", "v", "phi"], &[1.0, 2.0, 0.0]);
        assert!((j.evaluate(&at).unwrap() - 10.0).abs() < 1e-12);
    }

    /// Variable names, and a generator of valid points, for every built-in system.
    fn systems() -> Vec<(Coordinates, Vec<&'static str>)> {
        vec![
            (Coordinates::Cartesian, vec!["x", "y", "z"]),
            (Coordinates::Polar, vec!["r", "t"]),
            (Coordinates::Cylindrical, vec!["r", "t", "z"]),
            (Coordinates::Spherical, vec!["r", "t", "p"]),
            (Coordinates::Parabolic, vec!["u", "v", "p"]),
            (Coordinates::ParabolicCylindrical, vec!["u", "v", "z"]),
        ]
    }

    fn poly(vars: &[&str], coefs: &[i32]) -> String {
        // sum of c_k * monomial_k over monomials of degree <= 3
        let mut terms = Vec::new();
        let mut k = 0;
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                for c in 0..=(3 - a - b) {
                    let coef = coefs[k % coefs.len()];
                    k += 1;
                    let pows = [a, b, c];
                    let mono: Vec<String> = vars.iter().zip(pows).filter(|(_, p)| *p > 0).map(|(v, p)| format!("{v}^{p}")).collect();
                    let mono = if mono.is_empty() { "1".to_string() } else { mono.join("*") };
                    terms.push(format!("({coef})*{mono}"));
                }
            }
        }
        terms.join(" + ")
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn curl_of_gradient_vanishes(coefs in proptest::collection::vec(-5i32..=5, 20), x in proptest::collection::vec(0.2f64..2.0, 3)) {
            for (coords, vars) in [(Coordinates::Cartesian, ["x", "y", "z"]), (Coordinates::Spherical, ["r", "t", "p"])] {
                let f = exprs(&[], &[poly(&vars, &coefs).as_str()]);
                let g = gradient(Target::Expr(&f), &vars, &coords, None).unwrap();
                let c = curl(Target::Expr(&g), &vars, &coords, Some(&env(&vars, &x))).unwrap();
                for v in c.to_f64().unwrap() {
                    prop_assert!(v.abs() <= 1e-9, "{v}");
                }
            }
        }

        #[test]
        fn divergence_of_curl_vanishes(c1 in proptest::collection::vec(-5i32..=5, 7), c2 in proptest::collection::vec(-5i32..=5, 11), c3 in proptest::collection::vec(-5i32..=5, 13), x in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let comps = [poly(&XYZ, &c1), poly(&XYZ, &c2), poly(&XYZ, &c3)];
            let f = exprs(&[3], &[comps[0].as_str(), comps[1].as_str(), comps[2].as_str()]);
            let c = curl(Target::Expr(&f), &XYZ, &Coordinates::Cartesian, None).unwrap();
            let d = divergence(Target::Expr(&c), &XYZ, &Coordinates::Cartesian, Some(&env(&XYZ, &x))).unwrap();
            prop_assert!(d.to_f64().unwrap()[0].abs() <= 1e-9);
        }

        #[test]
        fn laplacian_is_divergence_of_gradient(coefs in proptest::collection::vec(-5i32..=5, 20), x in proptest::collection::vec(0.2f64..2.5, 3)) {
            for (coords, vars) in systems() {
                let vars = &vars[..];
                let f = exprs(&[], &[poly(vars, &coefs).as_str()]);
                let at = env(vars, &x[..vars.len()]);
                let l = laplacian(Target::Expr(&f), vars, &coords, Some(&at)).unwrap().to_f64().unwrap()[0];
                let g = gradient(Target::Expr(&f), vars, &coords, None).unwrap();
                let dg = divergence(Target::Expr(&g), vars, &coords, Some(&at)).unwrap().to_f64().unwrap()[0];
                prop_assert!((l - dg).abs() <= 1e-6 * l.abs().max(1.0), "{coords:?}: {l} vs {dg}");
            }
        }

        #[test]
        fn numeric_hessian_symmetric(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let f = Callable::scalar(|x| (x[0] * x[1]).sin() + x[0].exp() * x[1]);
            let h = hessian(Target::Callable(&f), &["x", "y"], &Coordinates::Cartesian, Some(&env(&["x", "y"], &[a, b]))).unwrap();
            let v = h.to_f64().unwrap();
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            prop_assert!((v[1] - v[2]).abs() <= 1e-7 * (1.0 + max));
        }
    }
}
