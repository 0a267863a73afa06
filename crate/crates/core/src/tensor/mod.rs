//! Dense tensors of numeric or symbolic scalars with optional index names.
//!
//! Storage is column-major: the first dimension varies fastest, so the
//! literal `1..=24` with extents `(2, 3, 4)` puts `2` at position `(1, 0, 0)`.
//! Repeated index names are allowed and mark diagonals or summation indices.

mod contract;
mod display;
mod einstein;
mod product;
mod record;
mod special;

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{BinOp, Binding, Expr};

pub use contract::contraction;
pub use einstein::{einstein, einstein_pair_fast, EinsteinPlan};
pub use product::{cross, dot, inner, kron, outer};
pub use record::{Datum, ScalarKind, TensorRecord};
pub use special::{delta, epsilon, permutation_parity};

/// Tensor element: a number or a symbolic expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Num(f64),
    Sym(Expr),
}

impl Scalar {
    /// Wraps an expression; literal constants become numbers.
    pub fn sym(e: Expr) -> Scalar {
        match e {
            Expr::Const(c) => Scalar::Num(c),
            e => Scalar::Sym(e),
        }
    }

    pub fn parse(text: &str) -> Result<Scalar> {
        Ok(Scalar::sym(crate::expr::parse(text)?))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Num(v) => Some(*v),
            Scalar::Sym(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Scalar::Num(_))
    }

    pub fn is_zero(&self) -> bool {
        self.as_f64() == Some(0.0)
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Scalar::Num(v) => Expr::Const(*v),
            Scalar::Sym(e) => e.clone(),
        }
    }

    pub fn into_expr(self) -> Expr {
        match self {
            Scalar::Num(v) => Expr::Const(v),
            Scalar::Sym(e) => e,
        }
    }

    pub fn evaluate(&self, env: &Binding) -> Result<f64> {
        match self {
            Scalar::Num(v) => Ok(*v),
            Scalar::Sym(e) => e.evaluate(env),
        }
    }

    pub fn plus(&self, other: &Scalar) -> Scalar {
        combine(BinOp::Add, self, other).expect("addition cannot fail")
    }

    pub fn minus(&self, other: &Scalar) -> Scalar {
        combine(BinOp::Sub, self, other).expect("subtraction cannot fail")
    }

    pub fn times(&self, other: &Scalar) -> Scalar {
        combine(BinOp::Mul, self, other).expect("multiplication cannot fail")
    }

    pub fn over(&self, other: &Scalar) -> Result<Scalar> {
        combine(BinOp::Div, self, other)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Num(v) => Scalar::Num(-v),
            Scalar::Sym(e) => Scalar::sym(Expr::Neg(Box::new(e.clone())).simplify_zero()),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Num(v)
    }
}

impl From<Expr> for Scalar {
    fn from(e: Expr) -> Self {
        Scalar::sym(e)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Num(v) => write!(f, "{}", crate::expr::format_number(*v)),
            Scalar::Sym(e) => write!(f, "{e}"),
        }
    }
}

/// Arithmetic on scalars of either kind.
///
/// Two numbers give a number. Otherwise each operand becomes a sub-tree of a
/// new binary node, so `(a+b)*(c+d)` keeps its grouping, and the result is
/// passed through the zero/one simplifier.
pub fn combine(op: BinOp, a: &Scalar, b: &Scalar) -> Result<Scalar> {
    if op == BinOp::Pow {
        return Err(Error::InvalidArgument(
            "combine supports + - * / only".into(),
        ));
    }
    if op == BinOp::Div && b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    match (a, b) {
        (Scalar::Num(x), Scalar::Num(y)) => Ok(Scalar::Num(op.apply(*x, *y))),
        _ => Ok(Scalar::sym(
            Expr::binary(op, a.to_expr(), b.to_expr()).simplify_zero(),
        )),
    }
}

/// One dimension of a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dim {
    pub extent: usize,
    pub name: Option<String>,
}

/// Column-major strides for `extents`.
pub(crate) fn strides(extents: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(extents.len());
    let mut acc = 1;
    for &e in extents {
        out.push(acc);
        acc *= e;
    }
    out
}

/// Advances a column-major multi-index; returns false after the last one.
pub(crate) fn next_index(idx: &mut [usize], extents: &[usize]) -> bool {
    for (i, e) in idx.iter_mut().zip(extents) {
        *i += 1;
        if *i < *e {
            return true;
        }
        *i = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(into = "TensorRecord", try_from = "TensorRecord")]
pub struct Tensor {
    dims: Vec<Dim>,
    data: Vec<Scalar>,
}

impl Tensor {
    /// Builds a tensor from column-major data. `names` may be empty (all unnamed).
    pub fn new(extents: &[usize], names: &[Option<&str>], data: Vec<Scalar>) -> Result<Tensor> {
        if !names.is_empty() && names.len() != extents.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} dimensions",
                names.len(),
                extents.len()
            )));
        }
        let dims = extents
            .iter()
            .enumerate()
            .map(|(i, &extent)| Dim {
                extent,
                name: names.get(i).copied().flatten().map(str::to_string),
            })
            .collect();
        Tensor::from_dims(dims, data)
    }

    pub fn from_dims(dims: Vec<Dim>, data: Vec<Scalar>) -> Result<Tensor> {
        if dims.iter().any(|d| d.extent == 0) {
            return Err(Error::ShapeMismatch("extents must be positive".into()));
        }
        let len: usize = dims.iter().map(|d| d.extent).product();
        if len != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} elements for extents {:?}",
                data.len(),
                dims.iter().map(|d| d.extent).collect::<Vec<_>>()
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn from_f64(extents: &[usize], data: Vec<f64>) -> Result<Tensor> {
        Tensor::new(extents, &[], data.into_iter().map(Scalar::Num).collect())
    }

    /// Named tensor with every dimension named, e.g. `&[("i", 2), ("j", 3)]`.
    pub fn named(dims: &[(&str, usize)], data: Vec<Scalar>) -> Result<Tensor> {
        let extents: Vec<usize> = dims.iter().map(|d| d.1).collect();
        let names: Vec<Option<&str>> = dims.iter().map(|d| Some(d.0)).collect();
        Tensor::new(&extents, &names, data)
    }

    /// Parses each element as an expression (numbers stay numeric).
    pub fn parse(extents: &[usize], names: &[Option<&str>], elems: &[&str]) -> Result<Tensor> {
        let data = elems.iter().map(|s| Scalar::parse(s)).collect::<Result<_>>()?;
        Tensor::new(extents, names, data)
    }

    pub fn scalar(value: Scalar) -> Tensor {
        Tensor {
            dims: Vec::new(),
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<Scalar>) -> Result<Tensor> {
        Tensor::new(&[data.len()], &[], data)
    }

    /// Matrix from row-major rows.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Tensor> {
        let nrow = rows.len();
        let ncol = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncol) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(nrow * ncol);
        for j in 0..ncol {
            for row in &rows {
                data.push(row[j].clone());
            }
        }
        Tensor::new(&[nrow, ncol], &[], data)
    }

    pub fn zeros(extents: &[usize]) -> Result<Tensor> {
        let len = extents.iter().product();
        Tensor::new(extents, &[], vec![Scalar::Num(0.0); len])
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn extents(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.extent).collect()
    }

    pub fn names(&self) -> Vec<Option<&str>> {
        self.dims.iter().map(|d| d.name.as_deref()).collect()
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Scalar> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.rank() {
            return Err(Error::ShapeMismatch(format!(
                "index of length {} for rank {}",
                idx.len(),
                self.rank()
            )));
        }
        let mut off = 0;
        let mut stride = 1;
        for (i, d) in idx.iter().zip(&self.dims) {
            if *i >= d.extent {
                return Err(Error::ShapeMismatch(format!(
                    "index {i} out of range for extent {}",
                    d.extent
                )));
            }
            off += i * stride;
            stride *= d.extent;
        }
        Ok(off)
    }

    /// Element at a zero-based multi-index.
    pub fn get(&self, idx: &[usize]) -> Result<&Scalar> {
        Ok(&self.data[self.offset(idx)?])
    }

    pub fn is_numeric(&self) -> bool {
        self.data.iter().all(Scalar::is_numeric)
    }

    pub fn to_f64(&self) -> Option<Vec<f64>> {
        self.data.iter().map(Scalar::as_f64).collect()
    }

    /// Replaces index names; an empty slice clears them.
    pub fn with_names(mut self, names: &[Option<&str>]) -> Result<Tensor> {
        if names.is_empty() {
            self.dims.iter_mut().for_each(|d| d.name = None);
            return Ok(self);
        }
        if names.len() != self.rank() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for rank {}",
                names.len(),
                self.rank()
            )));
        }
        for (d, n) in self.dims.iter_mut().zip(names) {
            d.name = n.map(str::to_string);
        }
        Ok(self)
    }

    /// Same data, new extents with the same element count.
    pub fn reshape(self, extents: &[usize]) -> Result<Tensor> {
        Tensor::new(extents, &[], self.data)
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Tensor {
        Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Scalar) -> Result<Scalar>) -> Result<Tensor> {
        Ok(Tensor {
            dims: self.dims.clone(),
            data: self.data.iter().map(f).collect::<Result<_>>()?,
        })
    }

    /// Evaluates every element at `env`.
    pub fn evaluate(&self, env: &Binding) -> Result<Tensor> {
        self.try_map(|s| s.evaluate(env).map(Scalar::Num))
    }

    /// Reorders dimensions: new dimension `k` is old dimension `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&p| p >= rank || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{rank}")));
        }
        let dims: Vec<Dim> = perm.iter().map(|&p| self.dims[p].clone()).collect();
        let extents: Vec<usize> = dims.iter().map(|d| d.extent).collect();
        let old = strides(&self.extents());
        let src: Vec<usize> = perm.iter().map(|&p| old[p]).collect();
        let mut data = Vec::with_capacity(self.len());
        let mut idx = vec![0; rank];
        loop {
            let off: usize = idx.iter().zip(&src).map(|(i, s)| i * s).sum();
            data.push(self.data[off].clone());
            if !next_index(&mut idx, &extents) {
                break;
            }
        }
        Ok(Tensor { dims, data })
    }

    /// Sums over the listed axes, keeping the others in order.
    pub fn sum_axes(&self, axes: &[usize]) -> Result<Tensor> {
        if axes.iter().any(|&a| a >= self.rank()) {
            return Err(Error::InvalidArgument(format!("axes {axes:?} out of range")));
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|a| !axes.contains(a)).collect();
        let dims: Vec<Dim> = keep.iter().map(|&a| self.dims[a].clone()).collect();
        let out_extents: Vec<usize> = dims.iter().map(|d| d.extent).collect();
        let out_strides = strides(&out_extents);
        let mut out_of_axis = vec![0usize; self.rank()];
        for (k, &a) in keep.iter().enumerate() {
            out_of_axis[a] = out_strides[k];
        }
        let extents = self.extents();
        let out_len: usize = out_extents.iter().product();
        let mut idx = vec![0; self.rank()];
        if let Some(values) = self.to_f64() {
            let mut acc = vec![0.0; out_len];
            for v in values {
                let off: usize = idx.iter().zip(&out_of_axis).map(|(i, s)| i * s).sum();
                acc[off] += v;
                next_index(&mut idx, &extents);
            }
            return Tensor::from_dims(dims, acc.into_iter().map(Scalar::Num).collect());
        }
        let mut acc: Vec<Option<Scalar>> = vec![None; out_len];
        for v in &self.data {
            let off: usize = idx.iter().zip(&out_of_axis).map(|(i, s)| i * s).sum();
            acc[off] = Some(match acc[off].take() {
                None => v.clone(),
                Some(a) => a.plus(v),
            });
            next_index(&mut idx, &extents);
        }
        Tensor::from_dims(dims, acc.into_iter().map(|s| s.unwrap_or(Scalar::Num(0.0))).collect())
    }
}

/// Elementwise arithmetic on tensors with identical extents.
pub fn elementwise(op: BinOp, a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.extents() != b.extents() {
        return Err(Error::ShapeMismatch(format!(
            "elementwise on {:?} and {:?}",
            a.extents(),
            b.extents()
        )));
    }
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| combine(op, x, y))
        .collect::<Result<_>>()?;
    Ok(Tensor {
        dims: a.dims.clone(),
        data,
    })
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        display::write_tensor(f, self)
    }
}
