//! Determinant, inverse and product of rank-2 tensors.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{einstein, einstein_pair_fast, Scalar, Tensor};

/// Largest size accepted by the symbolic cofactor expansion.
pub const MAX_SYMBOLIC_DET: usize = 8;

fn square_size(m: &Tensor) -> Result<usize> {
    match m.extents()[..] {
        [r, c] if r == c => Ok(r),
        ref e => Err(Error::ShapeMismatch(format!("expected a square matrix, got extents {e:?}"))),
    }
}

fn rows(m: &Tensor, n: usize) -> Vec<Vec<Scalar>> {
    (0..n)
        .map(|i| (0..n).map(|j| m.data()[i + n * j].clone()).collect())
        .collect()
}

fn minor(rows: &[Vec<Scalar>], skip_row: usize, skip_col: usize) -> Vec<Vec<Scalar>> {
    rows.iter()
        .enumerate()
        .filter(|(i, _)| *i != skip_row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != skip_col)
                .map(|(_, s)| s.clone())
                .collect()
        })
        .collect()
}

/// Laplace expansion along the first row.
fn laplace(rows: &[Vec<Scalar>]) -> Scalar {
    match rows.len() {
        0 => Scalar::Num(1.0),
        1 => rows[0][0].clone(),
        _ => {
            let mut acc: Option<Scalar> = None;
            for (j, a) in rows[0].iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let term = a.times(&laplace(&minor(rows, 0, j)));
                acc = Some(match (acc, j % 2 == 0) {
                    (None, true) => term,
                    (None, false) => term.neg(),
                    (Some(s), true) => s.plus(&term),
                    (Some(s), false) => s.minus(&term),
                });
            }
            acc.unwrap_or(Scalar::Num(0.0))
        }
    }
}

fn to_dmatrix(m: &Tensor, n: usize) -> Option<DMatrix<f64>> {
    m.to_f64().map(|v| DMatrix::from_column_slice(n, n, &v))
}

/// Determinant: LU for numeric input, cofactor expansion otherwise.
pub fn mxdet(m: &Tensor) -> Result<Scalar> {
    let n = square_size(m)?;
    if let Some(dm) = to_dmatrix(m, n) {
        return Ok(Scalar::Num(dm.determinant()));
    }
    if n > MAX_SYMBOLIC_DET {
        return Err(Error::TooLarge(format!(
            "symbolic determinant of size {n} (limit {MAX_SYMBOLIC_DET})"
        )));
    }
    Ok(laplace(&rows(m, n)))
}

/// Inverse: LU solve for numeric input, adjugate over determinant otherwise.
pub fn mxinv(m: &Tensor) -> Result<Tensor> {
    let n = square_size(m)?;
    if let Some(dm) = to_dmatrix(m, n) {
        let inv = dm.try_inverse().ok_or(Error::SingularMatrix)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix);
        }
        return Tensor::from_f64(&[n, n], inv.as_slice().to_vec());
    }
    let det = mxdet(m)?;
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let r = rows(m, n);
    let mut data = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            // entry (i, j) uses the minor without row j and column i
            let c = laplace(&minor(&r, j, i));
            let c = if (i + j) % 2 == 0 { c } else { c.neg() };
            data.push(c.over(&det)?);
        }
    }
    Tensor::new(&[n, n], &[], data)
}

/// Matrix product as the summation `A[i,k] B[k,j]`.
pub fn mxprod(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (ea, eb) = (a.extents(), b.extents());
    if ea.len() != 2 || eb.len() != 2 || ea[1] != eb[0] {
        return Err(Error::ShapeMismatch(format!("matrix product of {ea:?} and {eb:?}")));
    }
    let a = a.clone().with_names(&[Some("i"), Some("k")])?;
    let b = b.clone().with_names(&[Some("k"), Some("j")])?;
    let c = match einstein_pair_fast(&a, &b)? {
        Some(c) => c,
        None => einstein(&[&a, &b])?,
    };
    c.with_names(&[])
}
