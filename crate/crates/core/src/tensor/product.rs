use super::{next_index, Dim, Scalar, Tensor};
use crate::error::{Error, Result};
use crate::matrix::mxdet;

fn sum_of_products<'a>(pairs: impl Iterator<Item = (&'a Scalar, &'a Scalar)>) -> Scalar {
    pairs.fold(None, |acc: Option<Scalar>, (x, y)| {
        let p = x.times(y);
        Some(match acc {
            None => p,
            Some(a) => a.plus(&p),
        })
    })
    .unwrap_or(Scalar::Num(0.0))
}

/// Full inner product of two tensors with identical extents.
pub fn inner(a: &Tensor, b: &Tensor) -> Result<Scalar> {
    if a.extents() != b.extents() {
        return Err(Error::ShapeMismatch(format!(
            "inner product of {:?} and {:?}",
            a.extents(),
            b.extents()
        )));
    }
    Ok(sum_of_products(a.data().iter().zip(b.data())))
}

/// Contracts the trailing dimensions of `a` against all dimensions of `b`.
pub fn dot(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (ea, eb) = (a.extents(), b.extents());
    if eb.len() > ea.len() || ea[ea.len() - eb.len()..] != eb[..] {
        return Err(Error::ShapeMismatch(format!(
            "dot of {ea:?} with {eb:?}: trailing extents differ"
        )));
    }
    let lead = ea.len() - eb.len();
    let rows: usize = ea[..lead].iter().product();
    let data = (0..rows)
        .map(|i| sum_of_products((0..b.len()).map(|j| (&a.data()[i + rows * j], &b.data()[j]))))
        .collect();
    Tensor::from_dims(a.dims()[..lead].to_vec(), data)
}

/// Outer product; extents and names are concatenated.
pub fn outer(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let mut data = Vec::with_capacity(a.len() * b.len());
    for y in b.data() {
        for x in a.data() {
            data.push(x.times(y));
        }
    }
    let mut dims = a.dims().to_vec();
    dims.extend_from_slice(b.dims());
    Tensor::from_dims(dims, data)
}

/// Generalized Kronecker product. The lower-rank operand is padded with
/// unit extents; along each dimension the `b` index varies fastest.
pub fn kron(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let rank = a.rank().max(b.rank());
    let pad = |t: &Tensor| {
        let mut e = t.extents();
        e.resize(rank, 1);
        e
    };
    let (ea, eb) = (pad(a), pad(b));
    let extents: Vec<usize> = ea.iter().zip(&eb).map(|(x, y)| x * y).collect();
    let mut out = vec![Scalar::Num(0.0); extents.iter().product()];
    let mut ia = vec![0; rank];
    loop {
        let mut ib = vec![0; rank];
        loop {
            let mut off = 0;
            let mut stride = 1;
            for k in 0..rank {
                off += (ia[k] * eb[k] + ib[k]) * stride;
                stride *= extents[k];
            }
            out[off] = a.get(&ia[..a.rank()])?.times(b.get(&ib[..b.rank()])?);
            if !next_index(&mut ib, &eb) {
                break;
            }
        }
        if !next_index(&mut ia, &ea) {
            break;
        }
    }
    let dims = extents.into_iter().map(|extent| Dim { extent, name: None }).collect();
    Tensor::from_dims(dims, out)
}

/// Vector orthogonal to `n - 1` vectors of length `n`.
///
/// Component `k` (zero-based) is `(-1)^k` times the determinant of the
/// `(n-1) x (n-1)` matrix formed by the inputs as rows with column `k` removed.
pub fn cross(vectors: &[&Tensor]) -> Result<Tensor> {
    let n = vectors.len() + 1;
    if n < 2 {
        return Err(Error::InvalidArgument("cross needs at least one vector".into()));
    }
    for v in vectors {
        if v.extents() != [n] {
            return Err(Error::ShapeMismatch(format!(
                "cross of {} vectors needs length {n}, got extents {:?}",
                vectors.len(),
                v.extents()
            )));
        }
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let rows: Vec<Vec<Scalar>> = vectors
            .iter()
            .map(|v| {
                v.data()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, s)| s.clone())
                    .collect()
            })
            .collect();
        let minor = mxdet(&Tensor::from_rows(rows)?)?;
        out.push(if k % 2 == 0 { minor } else { minor.neg() });
    }
    Tensor::vector(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Binding;
    use proptest::prelude::*;

    fn vecf(v: &[f64]) -> Tensor {
        Tensor::from_f64(&[v.len()], v.to_vec()).unwrap()
    }

    fn abc() -> Tensor {
        Tensor::parse(&[3], &[], &["a", "b", "c"]).unwrap()
    }

    fn env() -> Binding {
        Binding::from_pairs([("a", 1.25), ("b", -0.5), ("c", 3.0), ("d", 0.75), ("e", 2.5), ("f", -4.0)]).unwrap()
    }

    #[test]
    fn inner_symbolic() {
        let s = inner(&vecf(&[1.0, 2.0, 3.0]), &abc()).unwrap();
        let e = env();
        assert_eq!(s.evaluate(&e).unwrap(), 1.25 + 2.0 * -0.5 + 3.0 * 3.0);
        assert!(inner(&vecf(&[1.0]), &abc()).is_err());
    }

    #[test]
    fn dot_matrix_vector() {
        let m = Tensor::from_rows(vec![
            vec![1.0.into(), 2.0.into(), 3.0.into()],
            vec![4.0.into(), 5.0.into(), 6.0.into()],
        ])
        .unwrap();
        let r = dot(&m, &abc()).unwrap();
        assert_eq!(r.extents(), vec![2]);
        let e = env();
        let (a, b, c) = (1.25, -0.5, 3.0);
        assert_eq!(r.data()[0].evaluate(&e).unwrap(), a + 2.0 * b + 3.0 * c);
        assert_eq!(r.data()[1].evaluate(&e).unwrap(), 4.0 * a + 5.0 * b + 6.0 * c);
        assert!(dot(&m, &vecf(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn outer_and_kron() {
        let o = outer(&vecf(&[1.0, 2.0, 3.0]), &abc()).unwrap();
        assert_eq!(o.extents(), vec![3, 3]);
        assert_eq!(o.get(&[1, 0]).unwrap().to_string(), "2*a");

        let k = kron(&vecf(&[1.0, 2.0, 3.0]), &abc()).unwrap();
        let got: Vec<String> = k.data().iter().map(ToString::to_string).collect();
        assert_eq!(got, ["a", "b", "c", "2*a", "2*b", "2*c", "3*a", "3*b", "3*c"]);

        // block layout: kron(I2, B)[i*2 + k, j*2 + l] = I[i,j] B[k,l]
        let i2 = Tensor::from_f64(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::from_f64(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let k = kron(&i2, &b).unwrap();
        assert_eq!(k.extents(), vec![4, 4]);
        assert_eq!(k.get(&[3, 2]).unwrap(), b.get(&[1, 0]).unwrap());
        assert_eq!(k.get(&[0, 2]).unwrap(), &Scalar::Num(0.0));

        // rank padding
        let k = kron(&vecf(&[1.0, 2.0]), &b).unwrap();
        assert_eq!(k.extents(), vec![4, 2]);
        assert_eq!(k.get(&[2, 1]).unwrap(), &Scalar::Num(6.0));
    }

    #[test]
    fn cross_examples() {
        let c = cross(&[&vecf(&[1.0, 0.0, 0.0]), &vecf(&[0.0, 1.0, 0.0])]).unwrap();
        assert_eq!(c.to_f64().unwrap(), vec![0.0, 0.0, 1.0]);

        let c = cross(&[
            &vecf(&[1.0, 0.0, 0.0, 0.0]),
            &vecf(&[0.0, 1.0, 0.0, 0.0]),
            &vecf(&[0.0, 0.0, 0.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(c.to_f64().unwrap(), vec![0.0, 0.0, 1.0, 0.0]);

        let def = Tensor::parse(&[3], &[], &["d", "e", "f"]).unwrap();
        let c = cross(&[&abc(), &def]).unwrap();
        let e = env();
        let (a, b, cc, d, ee, f) = (1.25, -0.5, 3.0, 0.75, 2.5, -4.0);
        let want = [b * f - cc * ee, cc * d - a * f, a * ee - b * d];
        for (s, w) in c.data().iter().zip(want) {
            assert_eq!(s.evaluate(&e).unwrap(), w);
        }
        assert!(cross(&[&vecf(&[1.0, 2.0])]).is_ok());
        assert!(cross(&[&vecf(&[1.0, 2.0, 3.0])]).is_err());
    }

    proptest! {
        #[test]
        fn cross_is_orthogonal(n in 2usize..=5, vals in prop::collection::vec(-3.0f64..3.0, 25)) {
            let vs: Vec<Tensor> = (0..n - 1).map(|i| vecf(&vals[i * n..(i + 1) * n])).collect();
            let refs: Vec<&Tensor> = vs.iter().collect();
            let c = cross(&refs).unwrap();
            let scale: f64 = c.to_f64().unwrap().iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            for v in &vs {
                let ip = inner(&c, v).unwrap().as_f64().unwrap();
                prop_assert!(ip.abs() <= 1e-12 * scale * 10.0, "{}", ip);
            }
        }
    }
}
