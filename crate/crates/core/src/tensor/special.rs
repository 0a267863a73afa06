use super::{next_index, Scalar, Tensor};
use crate::error::{Error, Result};

/// Sign of a permutation of `0..n` via cycle decomposition; `None` if `perm`
/// is not a permutation.
pub fn permutation_parity(perm: &[usize]) -> Option<i8> {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut cycles = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = *perm.get(i).filter(|&&p| p < n)?;
        }
        if i != start {
            return None;
        }
    }
    Some(if (n - cycles) % 2 == 0 { 1 } else { -1 })
}

fn dense(rank: usize, n: usize, entry: impl Fn(&[usize]) -> i8) -> Result<Tensor> {
    let extents = vec![n; rank];
    let mut idx = vec![0; rank];
    let mut data = Vec::with_capacity(n.pow(rank as u32));
    loop {
        data.push(Scalar::Num(f64::from(entry(&idx))));
        if !next_index(&mut idx, &extents) {
            break;
        }
    }
    Tensor::new(&extents, &[], data)
}

/// Levi-Civita symbol of order `n` as a dense rank-`n` tensor.
pub fn epsilon(n: usize) -> Result<Tensor> {
    if n == 0 {
        return Err(Error::InvalidArgument("epsilon needs n >= 1".into()));
    }
    dense(n, n, |idx| permutation_parity(idx).unwrap_or(0))
}

/// Generalized Kronecker delta with `p` upper then `p` lower indices, each of extent `n`.
pub fn delta(n: usize, p: usize) -> Result<Tensor> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("delta needs n, p >= 1".into()));
    }
    dense(2 * p, n, |idx| {
        let (upper, lower) = idx.split_at(p);
        let distinct = (0..p).all(|i| !upper[..i].contains(&upper[i]));
        if !distinct {
            return 0;
        }
        // position in `upper` of each lower index
        let perm: Option<Vec<usize>> = lower
            .iter()
            .map(|l| upper.iter().position(|u| u == l))
            .collect();
        perm.and_then(|perm| permutation_parity(&perm)).unwrap_or(0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(t: &Tensor, idx: &[usize]) -> f64 {
        t.get(idx).unwrap().as_f64().unwrap()
    }

    #[test]
    fn parity() {
        assert_eq!(permutation_parity(&[0, 1, 2]), Some(1));
        assert_eq!(permutation_parity(&[1, 0, 2]), Some(-1));
        assert_eq!(permutation_parity(&[1, 2, 0]), Some(1));
        assert_eq!(permutation_parity(&[0, 0, 2]), None);
        assert_eq!(permutation_parity(&[0, 3, 1]), None);
        assert_eq!(permutation_parity(&[]), Some(1));
    }

    #[test]
    fn epsilon_two_and_three() {
        let e2 = epsilon(2).unwrap();
        assert_eq!(e2.to_f64().unwrap(), vec![0.0, -1.0, 1.0, 0.0]);
        let e3 = epsilon(3).unwrap();
        assert_eq!(at(&e3, &[0, 1, 2]), 1.0);
        assert_eq!(at(&e3, &[1, 0, 2]), -1.0);
        assert_eq!(at(&e3, &[0, 0, 2]), 0.0);
        assert!(epsilon(0).is_err());
    }

    #[test]
    fn delta_examples() {
        let d = delta(3, 1).unwrap();
        assert_eq!(d.to_f64().unwrap(), vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let d = delta(2, 2).unwrap();
        assert_eq!(at(&d, &[0, 1, 0, 1]), 1.0);
        assert_eq!(at(&d, &[0, 1, 1, 0]), -1.0);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(at(&d, &[0, 0, a, b]), 0.0);
            }
        }
        for n in 1..=6 {
            let d = delta(n, 1).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(at(&d, &[i, j]), if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    proptest! {
        #[test]
        fn epsilon_antisymmetric(n in 2usize..=5, seed in any::<u64>()) {
            let e = epsilon(n).unwrap();
            let idx: Vec<usize> = (0..n).map(|k| ((seed >> (4 * k)) as usize) % n).collect();
            let (a, b) = ((seed >> 40) as usize % n, (seed >> 48) as usize % n);
            prop_assume!(a != b);
            let mut swapped = idx.clone();
            swapped.swap(a, b);
            prop_assert_eq!(at(&e, &idx), -at(&e, &swapped));
        }

        #[test]
        fn delta_antisymmetric(n in 1usize..=4, p in 1usize..=3, seed in any::<u64>()) {
            let d = delta(n, p).unwrap();
            let idx: Vec<usize> = (0..2 * p).map(|k| ((seed >> (4 * k)) as usize) % n).collect();
            let v = at(&d, &idx);
            prop_assert!(v == -1.0 || v == 0.0 || v == 1.0);
            if p >= 2 {
                let half = (seed >> 60) as usize % 2;
                let mut swapped = idx.clone();
                swapped.swap(half * p, half * p + 1);
                prop_assert_eq!(v, -at(&d, &swapped));
            }
        }
    }
}
