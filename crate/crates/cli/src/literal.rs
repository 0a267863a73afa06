//! Parsing of command-line values: tensor literals, bindings, bounds, numbers.

use std::f64::consts::PI;

use calculus::integrate::Bound;
use calculus::tensor::Dim;
use calculus::{Binding, Expr, Scalar, Tensor};

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// A number, allowing `pi` multiples (`2pi`, `-pi`, `0.5pi`) and constant expressions (`pi/2`).
pub fn number(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    if let Some(coef) = t.strip_suffix("pi") {
        let c = match coef {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            c => c.parse::<f64>().ok(),
        };
        if let Some(c) = c {
            return Ok(c * PI);
        }
    }
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let e: Expr = t.parse().map_err(|_| usage(format!("`{text}` is not a number")))?;
    e.evaluate(&Binding::new()).map_err(|_| usage(format!("`{text}` is not a constant")))
}

pub fn list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

pub fn numbers(text: &str) -> Result<Vec<f64>, CliError> {
    list(text).iter().map(|s| number(s)).collect()
}

fn pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    list(text)
        .into_iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| usage(format!("expected name=value, got `{p}`")))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// `x=1,y=pi/2`
pub fn binding(text: &str) -> Result<Binding, CliError> {
    let mut b = Binding::new();
    for (k, v) in pairs(text)? {
        if b.get(&k).is_some() {
            return Err(usage(format!("`{k}` given twice")));
        }
        b.set(k, number(&v)?);
    }
    Ok(b)
}

/// `r=0:1,theta=0:pi,z=2`
pub fn bounds(text: &str) -> Result<Vec<(String, Bound)>, CliError> {
    pairs(text)?
        .into_iter()
        .map(|(k, v)| {
            let b = match v.split_once(':') {
                Some((lo, hi)) => Bound::new(number(lo)?, number(hi)?),
                None => Bound::Fixed(number(&v)?),
            };
            Ok((k, b))
        })
        .collect()
}

/// `a:b:h`
pub fn times(text: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts[..] {
        [a, b, h] => Ok((number(a)?, number(b)?, number(h)?)),
        _ => Err(usage(format!("times must be a:b:h, got `{text}`"))),
    }
}

/// Row-major matrix `a,b;c,d`.
pub fn matrix_rows(text: &str) -> Result<Vec<Vec<String>>, CliError> {
    let rows: Vec<Vec<String>> = text.split(';').map(list).collect();
    if rows.iter().any(|r| r.len() != rows[0].len() || r.is_empty()) {
        return Err(usage(format!("ragged matrix literal `{text}`")));
    }
    Ok(rows)
}

/// A tensor literal.
///
/// * `{...}`: a JSON tensor record, as printed by this tool
/// * `i=2,j=3:1,2,3,4,5,6`: dimensions (optionally named) then column-major data
/// * `a,b;c,d`: a matrix given by rows
/// * `a,b,c`: a vector
/// * `x*y`: a scalar
pub fn tensor(text: &str) -> Result<Tensor, CliError> {
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| usage(format!("bad tensor record: {e}")));
    }
    if let Some((head, body)) = t.split_once(':') {
        let mut dims = Vec::new();
        for d in list(head) {
            let (name, extent) = match d.split_once('=') {
                Some((n, e)) => (Some(n.trim().to_string()), e.trim()),
                None => (None, d.as_str()),
            };
            let extent = extent.parse().map_err(|_| usage(format!("bad extent `{extent}`")))?;
            dims.push(Dim { extent, name });
        }
        let data = list(body).iter().map(|s| Scalar::parse(s)).collect::<Result<_, _>>()?;
        return Ok(Tensor::from_dims(dims, data)?);
    }
    if t.contains(';') {
        let rows = matrix_rows(t)?
            .iter()
            .map(|r| r.iter().map(|s| Scalar::parse(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Tensor::from_rows(rows)?);
    }
    if t.contains(',') {
        let data = list(t).iter().map(|s| Scalar::parse(s)).collect::<Result<_, _>>()?;
        return Ok(Tensor::vector(data)?);
    }
    Ok(Tensor::scalar(Scalar::parse(t)?))
}
