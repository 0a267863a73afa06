use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{contraction, next_index, strides, Dim, Scalar, Tensor};
use crate::error::{Error, Result};

/// One left-fold step: multiply the accumulator by the contracted operand
/// on their shared indices, then sum the indices no later operand uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Index names of the operand after keeping one diagonal per repeated name.
    pub contracted: Vec<String>,
    /// Names present in both the accumulator and this operand.
    pub shared: Vec<String>,
    /// Names summed away after the multiply.
    pub summed: Vec<String>,
    /// Accumulator names after the step.
    pub result: Vec<String>,
}

/// Precomputed schedule for an Einstein summation over named operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EinsteinPlan {
    operands: Vec<Vec<String>>,
    steps: Vec<Step>,
    output: Vec<String>,
}

fn names_of(t: &Tensor, k: usize) -> Result<Vec<String>> {
    t.dims()
        .iter()
        .map(|d| {
            d.name.clone().ok_or_else(|| {
                Error::InvalidArgument(format!("operand {} has an unnamed dimension", k + 1))
            })
        })
        .collect()
}

/// Names in the layout `contraction(_, false)` produces: singles, then one per group.
fn contracted_layout(names: &[String]) -> Vec<String> {
    let count = |n: &String| names.iter().filter(|m| *m == n).count();
    let mut out: Vec<String> = names.iter().filter(|n| count(n) == 1).cloned().collect();
    for n in names {
        if count(n) > 1 && !out.contains(n) {
            out.push(n.clone());
        }
    }
    out
}

impl EinsteinPlan {
    pub fn new(operands: &[&Tensor]) -> Result<EinsteinPlan> {
        if operands.is_empty() {
            return Err(Error::InvalidArgument("einstein needs at least one operand".into()));
        }
        let mut extents: HashMap<String, usize> = HashMap::new();
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut first_seen: Vec<String> = Vec::new();
        let mut lists = Vec::with_capacity(operands.len());
        for (k, t) in operands.iter().enumerate() {
            let names = names_of(t, k)?;
            for (n, d) in names.iter().zip(t.dims()) {
                match extents.get(n) {
                    Some(&e) if e != d.extent => {
                        return Err(Error::ShapeMismatch(format!(
                            "index `{n}` has extents {e} and {}",
                            d.extent
                        )))
                    }
                    Some(_) => {}
                    None => {
                        extents.insert(n.clone(), d.extent);
                        first_seen.push(n.clone());
                    }
                }
                *counts.entry(n.clone()).or_default() += 1;
            }
            lists.push(names);
        }

        let mut steps = Vec::with_capacity(lists.len());
        let mut acc: Vec<String> = Vec::new();
        for (k, names) in lists.iter().enumerate() {
            let contracted = contracted_layout(names);
            let shared: Vec<String> = acc.iter().filter(|n| contracted.contains(n)).cloned().collect();
            let mut result: Vec<String> = acc.iter().filter(|n| !shared.contains(n)).cloned().collect();
            result.extend(contracted.iter().filter(|n| !shared.contains(n)).cloned());
            result.extend(shared.iter().cloned());
            let later = &lists[k + 1..];
            let summed: Vec<String> = result
                .iter()
                .filter(|n| counts[*n] >= 2 && !later.iter().any(|l| l.contains(n)))
                .cloned()
                .collect();
            result.retain(|n| !summed.contains(n));
            acc = result.clone();
            steps.push(Step {
                contracted,
                shared,
                summed,
                result,
            });
        }
        let output = first_seen.into_iter().filter(|n| counts[n] == 1).collect();
        Ok(EinsteinPlan {
            operands: lists,
            steps,
            output,
        })
    }

    pub fn operands(&self) -> &[Vec<String>] {
        &self.operands
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Free indices in order of first appearance.
    pub fn output(&self) -> &[String] {
        &self.output
    }

    pub fn execute(&self, operands: &[&Tensor]) -> Result<Tensor> {
        if operands.len() != self.operands.len() {
            return Err(Error::InvalidArgument(format!(
                "plan has {} operands, got {}",
                self.operands.len(),
                operands.len()
            )));
        }
        let mut acc: Option<Tensor> = None;
        for (t, step) in operands.iter().zip(&self.steps) {
            let c = contraction(t, false)?;
            let prod = match acc {
                None => c,
                Some(a) => multiply_on(&a, &c)?,
            };
            let axes: Vec<usize> = positions(&prod, &step.summed);
            acc = Some(if axes.is_empty() { prod } else { prod.sum_axes(&axes)? });
        }
        let acc = acc.expect("at least one operand");
        let perm = positions(&acc, &self.output);
        acc.permute(&perm)
    }
}

fn positions(t: &Tensor, names: &[String]) -> Vec<usize> {
    names
        .iter()
        .map(|n| {
            t.dims()
                .iter()
                .position(|d| d.name.as_ref() == Some(n))
                .expect("name present in accumulator")
        })
        .collect()
}

/// Product over the union of names: `a`-only dims, `b`-only dims, then shared dims.
fn multiply_on(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let name = |d: &Dim| d.name.clone();
    let in_b = |d: &Dim| b.dims().iter().any(|e| e.name == d.name);
    let in_a = |d: &Dim| a.dims().iter().any(|e| e.name == d.name);
    let mut dims: Vec<Dim> = a.dims().iter().filter(|d| !in_b(d)).cloned().collect();
    dims.extend(b.dims().iter().filter(|d| !in_a(d)).cloned());
    dims.extend(a.dims().iter().filter(|d| in_b(d)).cloned());

    let sa = strides(&a.extents());
    let sb = strides(&b.extents());
    let stride_in = |t: &Tensor, s: &[usize], d: &Dim| {
        t.dims()
            .iter()
            .position(|e| e.name == name(d))
            .map_or(0, |p| s[p])
    };
    let ra: Vec<usize> = dims.iter().map(|d| stride_in(a, &sa, d)).collect();
    let rb: Vec<usize> = dims.iter().map(|d| stride_in(b, &sb, d)).collect();
    let extents: Vec<usize> = dims.iter().map(|d| d.extent).collect();
    let len: usize = extents.iter().product();

    let mut idx = vec![0; dims.len()];
    let mut data = Vec::with_capacity(len);
    let numeric = a.to_f64().zip(b.to_f64());
    loop {
        let oa: usize = idx.iter().zip(&ra).map(|(i, s)| i * s).sum();
        let ob: usize = idx.iter().zip(&rb).map(|(i, s)| i * s).sum();
        data.push(match &numeric {
            Some((x, y)) => Scalar::Num(x[oa] * y[ob]),
            None => a.data()[oa].times(&b.data()[ob]),
        });
        if !next_index(&mut idx, &extents) {
            break;
        }
    }
    Tensor::from_dims(dims, data)
}

/// Einstein summation over named operands.
///
/// Each operand is contracted keeping its diagonals, then folded left to
/// right: multiply on shared names, sum every name that appears at least
/// twice overall and in no later operand. The result carries the names that
/// appear exactly once, in order of first appearance.
pub fn einstein(operands: &[&Tensor]) -> Result<Tensor> {
    EinsteinPlan::new(operands)?.execute(operands)
}

/// Two-operand summation as a dense matrix product.
///
/// Returns `Ok(None)` when the shortcut does not apply: a symbolic entry, or
/// an index name repeated within one operand.
pub fn einstein_pair_fast(a: &Tensor, b: &Tensor) -> Result<Option<Tensor>> {
    let (Some(_), Some(_)) = (a.to_f64(), b.to_f64()) else {
        return Ok(None);
    };
    let na = names_of(a, 0)?;
    let nb = names_of(b, 1)?;
    let repeats = |names: &[String]| names.iter().enumerate().any(|(i, n)| names[..i].contains(n));
    if repeats(&na) || repeats(&nb) {
        return Ok(None);
    }
    // reuse the plan for extent checks
    EinsteinPlan::new(&[a, b])?;

    let shared: Vec<&String> = na.iter().filter(|n| nb.contains(n)).collect();
    let pa: Vec<usize> = (0..na.len())
        .filter(|&i| !nb.contains(&na[i]))
        .chain(shared.iter().map(|n| na.iter().position(|m| m == *n).unwrap()))
        .collect();
    let pb: Vec<usize> = shared
        .iter()
        .map(|n| nb.iter().position(|m| m == *n).unwrap())
        .chain((0..nb.len()).filter(|&j| !na.contains(&nb[j])))
        .collect();
    let a2 = a.permute(&pa)?;
    let b2 = b.permute(&pb)?;
    let free_a = na.len() - shared.len();
    let rows: usize = a2.extents()[..free_a].iter().product();
    let inner: usize = a2.extents()[free_a..].iter().product();
    let cols: usize = b2.extents()[shared.len()..].iter().product();

    let ma = DMatrix::from_column_slice(rows, inner, &a2.to_f64().unwrap());
    let mb = DMatrix::from_column_slice(inner, cols, &b2.to_f64().unwrap());
    let mc = ma * mb;

    let mut dims: Vec<Dim> = a2.dims()[..free_a].to_vec();
    dims.extend_from_slice(&b2.dims()[shared.len()..]);
    let data = mc.as_slice().iter().map(|&v| Scalar::Num(v)).collect();
    Tensor::from_dims(dims, data).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Binding;
    use proptest::prelude::*;

    fn ints(dims: &[(&str, usize)], from: i32) -> Tensor {
        let len: usize = dims.iter().map(|d| d.1).product();
        let data = (0..len as i32).map(|v| Scalar::Num(f64::from(from + v))).collect();
        Tensor::named(dims, data).unwrap()
    }

    #[test]
    fn three_operand_example() {
        let a = ints(&[("i", 2), ("j", 3)], 1);
        let b = ints(&[("k", 2), ("i", 2)], 1);
        let c = Tensor::parse(&[2, 2], &[Some("i"), Some("i")], &["a", "b", "c", "d"]).unwrap();
        let d = einstein(&[&a, &b, &c]).unwrap();
        assert_eq!(d.names(), vec![Some("j"), Some("k")]);
        assert_eq!(d.extents(), vec![3, 2]);

        // D[j,k] = sum_i A[i,j] B[k,i] C[i,i]; at j=k=0: 1*1*a + 2*3*d
        let env = Binding::from_pairs([("a", 1.5), ("b", -7.0), ("c", 11.0), ("d", 0.25)]).unwrap();
        let got = d.get(&[0, 0]).unwrap().evaluate(&env).unwrap();
        assert_eq!(got, 1.5 + 6.0 * 0.25);
        let vars = d.get(&[0, 0]).unwrap().to_expr().variables();
        assert_eq!(vars.into_iter().collect::<Vec<_>>(), vec!["a", "d"]);
    }

    #[test]
    fn matrix_product() {
        let a = ints(&[("i", 2), ("k", 3)], 1);
        let b = ints(&[("k", 3), ("j", 2)], 7);
        let c = einstein(&[&a, &b]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = 0.0;
                for k in 0..3 {
                    want += a.get(&[i, k]).unwrap().as_f64().unwrap() * b.get(&[k, j]).unwrap().as_f64().unwrap();
                }
                assert_eq!(c.get(&[i, j]).unwrap(), &Scalar::Num(want));
            }
        }
        let fast = einstein_pair_fast(&a, &b).unwrap().unwrap();
        assert_eq!(fast, c);
    }

    #[test]
    fn vector_inner_product() {
        let a = ints(&[("i", 4)], 1);
        let b = ints(&[("i", 4)], 2);
        let c = einstein(&[&a, &b]).unwrap();
        assert_eq!(c.rank(), 0);
        assert_eq!(c.to_f64().unwrap(), vec![1.0 * 2.0 + 2.0 * 3.0 + 3.0 * 4.0 + 4.0 * 5.0]);
        assert_eq!(einstein_pair_fast(&a, &b).unwrap().unwrap(), c);
    }

    #[test]
    fn single_operand_matches_contraction() {
        let t = ints(&[("i", 2), ("j", 2), ("i", 2)], 1);
        let e = einstein(&[&t]).unwrap();
        assert_eq!(e, contraction(&t, true).unwrap());
    }

    #[test]
    fn fast_path_larger_shapes() {
        let a = ints(&[("a", 2), ("i", 5), ("j", 10), ("k", 5), ("d", 4)], -100);
        let b = ints(&[("a", 2), ("j", 10), ("i", 5), ("l", 8)], 3);
        let slow = einstein(&[&a, &b]).unwrap();
        let fast = einstein_pair_fast(&a, &b).unwrap().unwrap();
        assert_eq!(fast.names(), slow.names());
        assert_eq!(fast, slow);
    }

    #[test]
    fn fast_path_declines() {
        let a = ints(&[("i", 2), ("i", 2)], 1);
        let b = ints(&[("i", 2)], 1);
        assert_eq!(einstein_pair_fast(&a, &b).unwrap(), None);
        let s = Tensor::parse(&[2], &[Some("i")], &["x", "1"]).unwrap();
        assert_eq!(einstein_pair_fast(&b, &s).unwrap(), None);
    }

    #[test]
    fn errors() {
        let a = ints(&[("i", 2)], 1);
        let b = ints(&[("i", 3)], 1);
        assert!(matches!(einstein(&[&a, &b]), Err(Error::ShapeMismatch(_))));
        assert!(einstein(&[]).is_err());
        let unnamed = Tensor::from_f64(&[2], vec![1.0, 2.0]).unwrap();
        assert!(matches!(einstein(&[&unnamed]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn plan_shape() {
        let a = ints(&[("i", 2), ("j", 3)], 1);
        let b = ints(&[("k", 2), ("i", 2)], 1);
        let c = ints(&[("i", 2), ("i", 2)], 1);
        let plan = EinsteinPlan::new(&[&a, &b, &c]).unwrap();
        assert_eq!(plan.output(), ["j", "k"]);
        assert!(plan.steps()[1].summed.is_empty());
        assert_eq!(plan.steps()[2].summed, ["i"]);
        assert_eq!(plan.steps()[2].contracted, ["i"]);
    }

    const POOL: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

    /// Sums the product of all operands over every assignment of every name.
    fn oracle(ops: &[Tensor], extent: &[usize; 6]) -> Vec<(Vec<usize>, f64)> {
        let mut used: Vec<usize> = Vec::new();
        let mut count = [0usize; 6];
        let slot = |n: &str| POOL.iter().position(|p| *p == n).unwrap();
        for t in ops {
            for n in t.names() {
                let k = slot(n.unwrap());
                count[k] += 1;
                if !used.contains(&k) {
                    used.push(k);
                }
            }
        }
        let free: Vec<usize> = used.iter().copied().filter(|&k| count[k] == 1).collect();
        let ext: Vec<usize> = used.iter().map(|&k| extent[k]).collect();
        let mut acc: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut val = vec![0usize; used.len()];
        loop {
            let lookup = |k: usize| val[used.iter().position(|&u| u == k).unwrap()];
            let mut prod = 1.0;
            for t in ops {
                let idx: Vec<usize> = t.names().iter().map(|n| lookup(slot(n.unwrap()))).collect();
                prod *= t.get(&idx).unwrap().as_f64().unwrap();
            }
            let key: Vec<usize> = free.iter().map(|&k| lookup(k)).collect();
            match acc.iter_mut().find(|(k, _)| *k == key) {
                Some(e) => e.1 += prod,
                None => acc.push((key, prod)),
            }
            if !next_index(&mut val, &ext) {
                break;
            }
        }
        acc
    }

    proptest! {
        #[test]
        fn matches_exhaustive_oracle(
            extent in prop::array::uniform6(1usize..=3),
            shapes in prop::collection::vec(prop::collection::vec(0usize..6, 1..=4), 1..=4),
            seed in any::<u64>(),
        ) {
            let mut s = seed;
            let ops: Vec<Tensor> = shapes
                .iter()
                .map(|names| {
                    let dims: Vec<(&str, usize)> = names.iter().map(|&k| (POOL[k], extent[k])).collect();
                    let len: usize = dims.iter().map(|d| d.1).product();
                    let data = (0..len)
                        .map(|_| {
                            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                            Scalar::Num(((s >> 33) % 19) as f64 - 9.0)
                        })
                        .collect();
                    Tensor::named(&dims, data).unwrap()
                })
                .collect();
            let refs: Vec<&Tensor> = ops.iter().collect();
            let got = einstein(&refs).unwrap();
            for (idx, want) in oracle(&ops, &extent) {
                prop_assert_eq!(got.get(&idx).unwrap(), &Scalar::Num(want));
            }
            if ops.len() == 2 {
                if let Some(fast) = einstein_pair_fast(&ops[0], &ops[1]).unwrap() {
                    prop_assert_eq!(fast, got);
                }
            }
        }

        #[test]
        fn kept_diagonal_sums_to_dropped(extent in 1usize..=4, other in 1usize..=3, vals in prop::collection::vec(-9i32..9, 64)) {
            let len = extent * extent * other;
            let data = vals.iter().cycle().take(len).map(|&v| Scalar::Num(f64::from(v))).collect();
            let t = Tensor::named(&[("i", extent), ("j", other), ("i", extent)], data).unwrap();
            let kept = contraction(&t, false).unwrap();
            prop_assert_eq!(kept.sum_axes(&[1]).unwrap(), contraction(&t, true).unwrap());
        }
    }
}
