//! Integration of scalar integrands over boxes in orthogonal coordinates.
//!
//! The integrand is weighted by `J`, the product of the scale factors, and
//! is only ever evaluated at interior points of the box.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deriv::Callable;
use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr};
use crate::ops::Coordinates;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_REL_TOL: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_EVALS: usize = 20_000_000;
/// Highest dimension handled by the adaptive rule.
pub const MAX_ADAPTIVE_DIM: usize = 6;

/// Integration range of one variable; a fixed variable is not integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Range(f64, f64),
    Fixed(f64),
}

impl Bound {
    /// A range whose ends coincide is fixed.
    pub fn new(lo: f64, hi: f64) -> Bound {
        if lo == hi {
            Bound::Fixed(lo)
        } else {
            Bound::Range(lo, hi)
        }
    }
}

#[derive(Debug)]
pub enum Integrand {
    Expr(Expr),
    /// Called with every bound variable, in bound order.
    Callable(Callable),
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMethod {
    Adaptive,
    MonteCarlo,
}

impl IntegrationMethod {
    pub fn name(self) -> &'static str {
        match self {
            IntegrationMethod::Adaptive => "adaptive",
            IntegrationMethod::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for IntegrationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegrationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<IntegrationMethod> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "adaptive" => Ok(IntegrationMethod::Adaptive),
            "monte-carlo" | "mc" => Ok(IntegrationMethod::MonteCarlo),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}` (adaptive, monte-carlo)"))),
        }
    }
}

#[derive(Debug)]
pub struct IntegralRequest {
    pub integrand: Integrand,
    pub bounds: Vec<(String, Bound)>,
    pub coords: Coordinates,
    /// Adaptive up to six integrated variables, Monte Carlo beyond, when unset.
    pub method: Option<IntegrationMethod>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Adaptive evaluation budget.
    pub max_evals: usize,
    /// Monte Carlo sample count.
    pub samples: usize,
    pub seed: u64,
}

impl IntegralRequest {
    pub fn new(integrand: Integrand, bounds: Vec<(String, Bound)>) -> IntegralRequest {
        IntegralRequest {
            integrand,
            bounds,
            coords: Coordinates::Cartesian,
            method: None,
            abs_tol: 0.0,
            rel_tol: DEFAULT_REL_TOL,
            max_evals: DEFAULT_MAX_EVALS,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }

    pub fn coords(mut self, coords: Coordinates) -> IntegralRequest {
        self.coords = coords;
        self
    }

    pub fn method(mut self, method: IntegrationMethod) -> IntegralRequest {
        self.method = Some(method);
        self
    }

    pub fn seed(mut self, seed: u64) -> IntegralRequest {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    /// Adaptive: summed `|Q7 - Q5|` over cells. Monte Carlo: standard error.
    pub error: f64,
    pub evaluations: usize,
    pub method: IntegrationMethod,
    /// False when the adaptive budget ran out before the tolerance was met.
    pub converged: bool,
    /// Monte Carlo seed.
    pub seed: Option<u64>,
}

/// `J·f` as a function of the integrated variables.
struct Weighted<'a> {
    integrand: Source<'a>,
    jacobian: Compiled,
    point: Vec<f64>,
    free: Vec<usize>,
    evaluations: usize,
}

enum Source<'a> {
    Compiled(Compiled),
    Callable(&'a Callable),
}

impl Weighted<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        for (&k, &v) in self.free.iter().zip(x) {
            self.point[k] = v;
        }
        self.evaluations += 1;
        let f = match &self.integrand {
            Source::Compiled(c) => c.eval(&self.point),
            Source::Callable(c) => c.call(&self.point)?[0],
        };
        let v = self.jacobian.eval(&self.point) * f;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand is {v} at {:?}", self.point)));
        }
        Ok(v)
    }
}

/// Integrates `J·f` over the non-fixed variables, with fixed ones substituted.
///
/// Setting one coordinate fixed gives a surface integral over that level set,
/// still weighted by the full `J`.
pub fn integral(req: &IntegralRequest) -> Result<IntegralResult> {
    let names: Vec<&str> = req.bounds.iter().map(|(n, _)| n.as_str()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::InvalidArgument(format!("variable `{n}` bounded twice")));
        }
    }
    let mut point = Vec::with_capacity(names.len());
    let (mut lo, mut hi, mut free) = (Vec::new(), Vec::new(), Vec::new());
    for (k, (name, b)) in req.bounds.iter().enumerate() {
        let (a, c) = match *b {
            Bound::Range(a, c) => (a, c),
            Bound::Fixed(a) => (a, a),
        };
        if !a.is_finite() || !c.is_finite() || a > c {
            return Err(Error::InvalidArgument(format!("bad bounds {a}:{c} for `{name}`")));
        }
        point.push(a);
        if a < c {
            lo.push(a);
            hi.push(c);
            free.push(k);
        }
    }
    if free.is_empty() {
        return Err(Error::InvalidArgument("every variable is fixed; nothing to integrate".into()));
    }
    let jacobian = req.coords.system(&names)?.jacobian().compile(&names)?;
    let integrand = match &req.integrand {
        Integrand::Expr(e) => Source::Compiled(e.compile(&names)?),
        Integrand::Constant(c) => Source::Compiled(Expr::Const(*c).compile(&names)?),
        Integrand::Callable(c) => {
            if c.shape().iter().product::<usize>() != 1 {
                return Err(Error::ShapeMismatch(format!("integrand must be scalar, has shape {:?}", c.shape())));
            }
            Source::Callable(c)
        }
    };
    let mut g = Weighted {
        integrand,
        jacobian,
        point,
        free,
        evaluations: 0,
    };
    let method = req.method.unwrap_or(if lo.len() <= MAX_ADAPTIVE_DIM {
        IntegrationMethod::Adaptive
    } else {
        IntegrationMethod::MonteCarlo
    });
    match method {
        IntegrationMethod::Adaptive => adaptive(&mut g, &lo, &hi, req),
        IntegrationMethod::MonteCarlo => monte_carlo(&mut g, &lo, &hi, req),
    }
}

fn monte_carlo(g: &mut Weighted<'_>, lo: &[f64], hi: &[f64], req: &IntegralRequest) -> Result<IntegralResult> {
    if req.samples < 2 {
        return Err(Error::InvalidArgument("monte carlo needs at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let volume: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let mut x = vec![0.0; lo.len()];
    // Welford running mean and variance
    let (mut mean, mut m2) = (0.0, 0.0);
    for n in 1..=req.samples {
        for (k, xi) in x.iter_mut().enumerate() {
            let u: f64 = rng.sample(Open01);
            *xi = lo[k] + u * (hi[k] - lo[k]);
        }
        let v = g.eval(&x)?;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let n = req.samples as f64;
    let std = (m2 / (n - 1.0)).sqrt();
    Ok(IntegralResult {
        value: volume * mean,
        error: volume * std / n.sqrt(),
        evaluations: g.evaluations,
        method: IntegrationMethod::MonteCarlo,
        converged: true,
        seed: Some(req.seed),
    })
}

const GL7: [(f64, f64); 7] = [
    (-0.949_107_912_342_758_5, 0.129_484_966_168_869_7),
    (-0.741_531_185_599_394_4, 0.279_705_391_489_276_7),
    (-0.405_845_151_377_397_2, 0.381_830_050_505_118_9),
    (0.0, 0.417_959_183_673_469_4),
    (0.405_845_151_377_397_2, 0.381_830_050_505_118_9),
    (0.741_531_185_599_394_4, 0.279_705_391_489_276_7),
    (0.949_107_912_342_758_5, 0.129_484_966_168_869_7),
];

const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Tensor-product Gauss-Legendre rule on one cell.
fn product_rule(g: &mut Weighted<'_>, lo: &[f64], hi: &[f64], rule: &[(f64, f64)]) -> Result<f64> {
    let d = lo.len();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut sum = 0.0;
    loop {
        let mut w = 1.0;
        for k in 0..d {
            let (node, weight) = rule[idx[k]];
            x[k] = mid[k] + half[k] * node;
            w *= weight;
        }
        sum += w * g.eval(&x)?;
        // odometer over the node grid
        let mut k = 0;
        loop {
            if k == d {
                return Ok(sum * half.iter().product::<f64>());
            }
            idx[k] += 1;
            if idx[k] < rule.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

impl Cell {
    fn new(g: &mut Weighted<'_>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Cell> {
        let q7 = product_rule(g, &lo, &hi, &GL7)?;
        let q5 = product_rule(g, &lo, &hi, &GL5)?;
        Ok(Cell {
            lo,
            hi,
            value: q7,
            error: (q7 - q5).abs(),
        })
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive(g: &mut Weighted<'_>, lo: &[f64], hi: &[f64], req: &IntegralRequest) -> Result<IntegralResult> {
    let d = lo.len();
    if d > MAX_ADAPTIVE_DIM {
        return Err(Error::TooLarge(format!(
            "adaptive integration supports at most {MAX_ADAPTIVE_DIM} dimensions, got {d}"
        )));
    }
    let per_cell = 7usize.pow(d as u32) + 5usize.pow(d as u32);
    let mut heap = BinaryHeap::new();
    heap.push(Cell::new(g, lo.to_vec(), hi.to_vec())?);
    let totals = |heap: &BinaryHeap<Cell>| heap.iter().fold((0.0, 0.0), |(v, e), c| (v + c.value, e + c.error));
    let (mut value, mut error) = totals(&heap);
    let mut converged = false;
    loop {
        if error <= req.abs_tol.max(req.rel_tol * value.abs()) {
            // re-sum to shed drift from the running totals
            (value, error) = totals(&heap);
            if error <= req.abs_tol.max(req.rel_tol * value.abs()) {
                converged = true;
                break;
            }
        }
        if g.evaluations + 2 * per_cell > req.max_evals {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let axis = (0..d)
            .max_by(|&a, &b| (worst.hi[a] - worst.lo[a]).total_cmp(&(worst.hi[b] - worst.lo[b])))
            .expect("at least one axis");
        let cut = 0.5 * (worst.lo[axis] + worst.hi[axis]);
        let mut left_hi = worst.hi.clone();
        left_hi[axis] = cut;
        let mut right_lo = worst.lo.clone();
        right_lo[axis] = cut;
        let left = Cell::new(g, worst.lo.clone(), left_hi)?;
        let right = Cell::new(g, right_lo, worst.hi.clone())?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let (value, error) = totals(&heap);
    Ok(IntegralResult {
        value,
        error,
        evaluations: g.evaluations,
        method: IntegrationMethod::Adaptive,
        converged,
        seed: None,
    })
}
