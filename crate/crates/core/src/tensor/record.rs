use serde::{Deserialize, Serialize};

use super::{Dim, Scalar, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Num,
    Sym,
}

/// One stored element: JSON numbers for finite values, strings otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Datum {
    Number(f64),
    Text(String),
}

/// Plain-data form of a tensor with column-major `data`.
///
/// Non-finite numbers are written as the strings `"NaN"`, `"inf"`, `"-inf"`.
/// When `kinds` is omitted, JSON numbers are numeric and strings are parsed
/// as expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub extents: Vec<usize>,
    #[serde(default)]
    pub names: Vec<Option<String>>,
    pub data: Vec<Datum>,
    #[serde(default)]
    pub kinds: Vec<ScalarKind>,
}

impl From<&Tensor> for TensorRecord {
    fn from(t: &Tensor) -> Self {
        let (data, kinds) = t
            .data()
            .iter()
            .map(|s| match s {
                Scalar::Num(v) if v.is_finite() => (Datum::Number(*v), ScalarKind::Num),
                Scalar::Num(v) => (Datum::Text(format!("{v}")), ScalarKind::Num),
                Scalar::Sym(e) => (Datum::Text(e.to_string()), ScalarKind::Sym),
            })
            .unzip();
        TensorRecord {
            extents: t.extents(),
            names: t.dims().iter().map(|d| d.name.clone()).collect(),
            data,
            kinds,
        }
    }
}

impl From<Tensor> for TensorRecord {
    fn from(t: Tensor) -> Self {
        TensorRecord::from(&t)
    }
}

fn decode(d: &Datum, kind: Option<ScalarKind>) -> Result<Scalar> {
    match (d, kind) {
        (Datum::Number(v), None | Some(ScalarKind::Num)) => Ok(Scalar::Num(*v)),
        (Datum::Text(s), Some(ScalarKind::Num)) => s
            .parse::<f64>()
            .map(Scalar::Num)
            .map_err(|_| Error::InvalidArgument(format!("`{s}` is not a number"))),
        (Datum::Text(s), None) => Scalar::parse(s),
        (Datum::Text(s), Some(ScalarKind::Sym)) => Ok(Scalar::Sym(crate::expr::parse(s)?)),
        (Datum::Number(v), Some(ScalarKind::Sym)) => Ok(Scalar::Sym(crate::expr::Expr::Const(*v))),
    }
}

impl TryFrom<TensorRecord> for Tensor {
    type Error = Error;

    fn try_from(r: TensorRecord) -> Result<Tensor> {
        if !r.kinds.is_empty() && r.kinds.len() != r.data.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} kinds for {} elements",
                r.kinds.len(),
                r.data.len()
            )));
        }
        if !r.names.is_empty() && r.names.len() != r.extents.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} dimensions",
                r.names.len(),
                r.extents.len()
            )));
        }
        let data = r
            .data
            .iter()
            .enumerate()
            .map(|(i, d)| decode(d, r.kinds.get(i).copied()))
            .collect::<Result<_>>()?;
        let dims = r
            .extents
            .iter()
            .enumerate()
            .map(|(i, &extent)| Dim {
                extent,
                name: r.names.get(i).cloned().flatten(),
            })
            .collect();
        Tensor::from_dims(dims, data)
    }
}
