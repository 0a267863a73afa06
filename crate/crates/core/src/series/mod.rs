//! Integer partitions, multivariate Taylor series and Hermite polynomials.

mod hermite;
mod taylor;

use std::cmp::Ordering;
use std::fmt;

pub use hermite::{hermite, HermiteRequest};
pub use taylor::{taylor, Method, SeriesResult, Term};

use crate::error::{Error, Result};

/// Per-variable non-negative orders, ordered by total degree then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(d: usize) -> MultiIndex {
        MultiIndex(vec![0; d])
    }

    /// `|k|`
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `k!`
    pub fn factorial(&self) -> Result<f64> {
        self.0.iter().try_fold(1.0, |acc, &k| Ok(acc * crate::deriv::factorial(k)?))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// Partitions of `n` into at most `length` positive parts, largest first.
fn base_partitions(n: u32, length: usize, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        out.push(prefix.clone());
        return;
    }
    if prefix.len() == length {
        return;
    }
    for part in (1..=n.min(max_part)).rev() {
        prefix.push(part);
        base_partitions(n - part, length, part, prefix, out);
        prefix.pop();
    }
}

/// Distinct permutations of `v` (which must be sorted).
fn permutations(v: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    v.sort_unstable();
    loop {
        out.push(v.clone());
        // next lexicographic permutation
        let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
            return;
        };
        let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
        v.swap(i - 1, j);
        v[i..].reverse();
    }
}

/// Integer partitions as multi-indices.
///
/// The base set holds the partitions of `n` into at most `length` parts, or
/// of every `m <= n` when `equal` is false. `fill` pads each with zeros to
/// exactly `length` components and `perm` expands each to all its distinct
/// permutations. Output is sorted by total degree, then lexicographically.
pub fn partitions(n: u32, length: usize, fill: bool, perm: bool, equal: bool) -> Result<Vec<MultiIndex>> {
    if length == 0 {
        return Err(Error::InvalidArgument("partition length must be at least 1".into()));
    }
    let mut base = Vec::new();
    let totals = if equal { n..=n } else { 0..=n };
    for m in totals {
        base_partitions(m, length, m, &mut Vec::new(), &mut base);
    }
    let mut out = Vec::new();
    for mut p in base {
        if fill {
            p.resize(length, 0);
        }
        if perm {
            permutations(&mut p, &mut out);
        } else {
            out.push(p);
        }
    }
    let mut out: Vec<MultiIndex> = out.into_iter().map(MultiIndex).collect();
    out.sort();
    out.dedup();
    Ok(out)
}
