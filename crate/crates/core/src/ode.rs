//! Fixed-step solvers for first-order systems `y' = f(y, t)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::{Compiled, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Method::Euler),
            "rk4" => Ok(Method::Rk4),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}` (euler, rk4)"))),
        }
    }
}

type RhsFn = dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync;

/// Right-hand side of the system.
pub enum Rhs {
    /// One expression per state variable, in terms of the states and the time variable.
    Symbolic(Vec<Expr>),
    /// `(state, t) -> derivative`.
    Callable(Box<RhsFn>),
}

impl fmt::Debug for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Symbolic(es) => f.debug_tuple("Symbolic").field(es).finish(),
            Rhs::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

#[derive(Debug)]
pub struct OdeProblem {
    pub rhs: Rhs,
    pub names: Vec<String>,
    pub initial: Vec<f64>,
    pub times: Vec<f64>,
    pub timevar: String,
    pub method: Method,
}

/// States at each grid time, one row per time.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub states: Vec<Vec<f64>>,
}

impl OdeSolution {
    /// Final state.
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("solution has at least two rows")
    }

    /// Header of the time variable and state names, then one row per time.
    pub fn to_csv(&self, timevar: &str) -> Result<String> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![timevar.to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (t, row) in self.times.iter().zip(&self.states) {
            let mut rec = vec![format!("{t:?}")];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Grid `a, a+h, ...` ending exactly at `b`.
pub fn time_grid(a: f64, b: f64, h: f64) -> Result<Vec<f64>> {
    if !(a.is_finite() && b.is_finite() && h.is_finite()) || h <= 0.0 || b <= a {
        return Err(Error::InvalidArgument(format!("bad time grid {a}:{b}:{h}")));
    }
    let steps = ((b - a) / h).floor() as usize;
    let mut out: Vec<f64> = (0..=steps).map(|k| a + k as f64 * h).collect();
    let last = *out.last().expect("non-empty");
    if b - last <= 1e-9 * h {
        *out.last_mut().expect("non-empty") = b;
    } else {
        out.push(b);
    }
    if out.len() < 2 {
        out.push(b);
    }
    Ok(out)
}

enum Field<'a> {
    Compiled(Vec<Compiled>, Vec<f64>),
    Callable(&'a RhsFn),
}

impl Field<'_> {
    fn eval(&mut self, y: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        match self {
            Field::Compiled(comps, slots) => {
                let n = y.len();
                slots[..n].copy_from_slice(y);
                slots[n] = t;
                for (o, c) in out.iter_mut().zip(comps.iter()) {
                    *o = c.eval(slots);
                }
            }
            Field::Callable(f) => {
                let v = f(y, t);
                if v.len() != out.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "right-hand side returned {} values for {} states",
                        v.len(),
                        out.len()
                    )));
                }
                out.copy_from_slice(&v);
            }
        }
        Ok(())
    }
}

/// Integrates the problem over its time grid.
pub fn solve_ode(p: &OdeProblem) -> Result<OdeSolution> {
    let n = p.initial.len();
    if p.names.len() != n {
        return Err(Error::ShapeMismatch(format!("{} names for {n} initial values", p.names.len())));
    }
    if p.times.len() < 2 || p.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("time grid must be strictly increasing with at least two points".into()));
    }
    let mut field = match &p.rhs {
        Rhs::Symbolic(es) => {
            if es.len() != n {
                return Err(Error::ShapeMismatch(format!("{} equations for {n} states", es.len())));
            }
            let mut slots: Vec<&str> = p.names.iter().map(String::as_str).collect();
            slots.push(&p.timevar);
            let comps = es.iter().map(|e| e.compile(&slots)).collect::<Result<_>>()?;
            Field::Compiled(comps, vec![0.0; n + 1])
        }
        Rhs::Callable(f) => Field::Callable(f.as_ref()),
    };

    let mut states = Vec::with_capacity(p.times.len());
    let mut y = p.initial.clone();
    states.push(y.clone());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for w in p.times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        match p.method {
            Method::Euler => {
                field.eval(&y, t, &mut k1)?;
                for i in 0..n {
                    y[i] += h * k1[i];
                }
            }
            Method::Rk4 => {
                field.eval(&y, t, &mut k1)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                field.eval(&tmp, t + 0.5 * h, &mut k2)?;
                for i in 0..n {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                field.eval(&tmp, t + 0.5 * h, &mut k3)?;
                for i in 0..n {
                    tmp[i] = y[i] + h * k3[i];
                }
                field.eval(&tmp, t + h, &mut k4)?;
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state `{}` at t = {}", p.names[i], w[1])));
        }
        states.push(y.clone());
    }
    Ok(OdeSolution {
        times: p.times.clone(),
        names: p.names.clone(),
        states,
    })
}
