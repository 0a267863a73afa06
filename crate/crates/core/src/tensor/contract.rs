use super::{next_index, strides, Dim, Tensor};
use crate::error::{Error, Result};

/// A set of dimensions sharing one index name.
struct Group {
    axes: Vec<usize>,
    extent: usize,
    name: Option<String>,
}

fn groups(t: &Tensor) -> Result<(Vec<usize>, Vec<Group>)> {
    let dims = t.dims();
    if t.rank() >= 2 && dims.iter().all(|d| d.name.is_none()) {
        // no names at all: the whole tensor is one diagonal
        return Ok((
            Vec::new(),
            vec![Group {
                axes: (0..t.rank()).collect(),
                extent: check_extents(dims, &(0..t.rank()).collect::<Vec<_>>())?,
                name: None,
            }],
        ));
    }
    let mut singles = Vec::new();
    let mut repeated: Vec<Group> = Vec::new();
    for (a, d) in dims.iter().enumerate() {
        let Some(name) = &d.name else {
            singles.push(a);
            continue;
        };
        let axes: Vec<usize> = dims
            .iter()
            .enumerate()
            .filter(|(_, e)| e.name.as_ref() == Some(name))
            .map(|(k, _)| k)
            .collect();
        if axes.len() == 1 {
            singles.push(a);
        } else if axes[0] == a {
            repeated.push(Group {
                extent: check_extents(dims, &axes)?,
                axes,
                name: Some(name.clone()),
            });
        }
    }
    Ok((singles, repeated))
}

fn check_extents(dims: &[Dim], axes: &[usize]) -> Result<usize> {
    let extent = dims[axes[0]].extent;
    if axes.iter().any(|&a| dims[a].extent != extent) {
        return Err(Error::ShapeMismatch(format!(
            "repeated index `{}` has unequal extents",
            dims[axes[0]].name.as_deref().unwrap_or("")
        )));
    }
    Ok(extent)
}

/// Sums or extracts the diagonals over every group of repeated index names.
///
/// With `drop` the repeated dimensions are summed away. Without it one
/// diagonal dimension per group is kept, placed after the non-repeated
/// dimensions. A rank >= 2 tensor with no names is treated as a single group,
/// so `contraction(t, true)` is its full trace.
pub fn contraction(t: &Tensor, drop: bool) -> Result<Tensor> {
    let (singles, groups) = groups(t)?;
    if groups.is_empty() {
        return Ok(t.clone());
    }
    let src = strides(&t.extents());

    // walk (singles, group values) and map to a source offset
    let mut walk_extents: Vec<usize> = singles.iter().map(|&a| t.dims()[a].extent).collect();
    let mut walk_strides: Vec<usize> = singles.iter().map(|&a| src[a]).collect();
    for g in &groups {
        walk_extents.push(g.extent);
        walk_strides.push(g.axes.iter().map(|&a| src[a]).sum());
    }

    let mut gathered = Vec::with_capacity(walk_extents.iter().product());
    let mut idx = vec![0; walk_extents.len()];
    loop {
        let off: usize = idx.iter().zip(&walk_strides).map(|(i, s)| i * s).sum();
        gathered.push(t.data()[off].clone());
        if !next_index(&mut idx, &walk_extents) {
            break;
        }
    }
    let mut dims: Vec<Dim> = singles.iter().map(|&a| t.dims()[a].clone()).collect();
    dims.extend(groups.iter().map(|g| Dim {
        extent: g.extent,
        name: g.name.clone(),
    }));
    let diag = Tensor::from_dims(dims, gathered)?;
    if drop {
        let group_axes: Vec<usize> = (singles.len()..diag.rank()).collect();
        diag.sum_axes(&group_axes)
    } else {
        Ok(diag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Scalar;

    fn cube() -> Tensor {
        Tensor::from_f64(&[2, 2, 2], (1..=8).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn full_trace_unnamed() {
        let c = contraction(&cube(), true).unwrap();
        assert_eq!(c.rank(), 0);
        assert_eq!(c.to_f64().unwrap(), vec![9.0]);
    }

    #[test]
    fn named_pair() {
        let t = cube().with_names(&[Some("i"), Some("j"), Some("i")]).unwrap();
        let c = contraction(&t, true).unwrap();
        assert_eq!(c.extents(), vec![2]);
        assert_eq!(c.names(), vec![Some("j")]);
        assert_eq!(c.to_f64().unwrap(), vec![7.0, 11.0]);
    }

    #[test]
    fn keep_diagonal() {
        let t = cube().with_names(&[Some("i"), Some("j"), Some("i")]).unwrap();
        let c = contraction(&t, false).unwrap();
        assert_eq!(c.names(), vec![Some("j"), Some("i")]);
        // rows (1, 6) and (3, 8)
        assert_eq!(c.get(&[0, 0]).unwrap(), &Scalar::Num(1.0));
        assert_eq!(c.get(&[0, 1]).unwrap(), &Scalar::Num(6.0));
        assert_eq!(c.get(&[1, 0]).unwrap(), &Scalar::Num(3.0));
        assert_eq!(c.get(&[1, 1]).unwrap(), &Scalar::Num(8.0));
    }

    #[test]
    fn unequal_extents() {
        let t = Tensor::from_f64(&[2, 3], vec![0.0; 6])
            .unwrap()
            .with_names(&[Some("i"), Some("i")])
            .unwrap();
        assert!(matches!(contraction(&t, true), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn symbolic_trace() {
        let t = Tensor::parse(&[2, 2], &[], &["a", "b", "c", "d"]).unwrap();
        assert_eq!(contraction(&t, true).unwrap().data()[0].to_string(), "a + d");
    }
}
