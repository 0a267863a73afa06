use crate::error::{Error, Result};

/// Central finite-difference stencil on offsets `-half_width..=half_width`.
///
/// `sum_j C_j f(x + j h)` approximates `h^n f^(n)(x) / n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub order: u32,
    pub accuracy: u32,
    pub half_width: usize,
    pub coefficients: Vec<f64>,
}

impl Stencil {
    /// Offset of the `j`-th coefficient.
    pub fn offset(&self, j: usize) -> i64 {
        j as i64 - self.half_width as i64
    }

    /// Coefficients scaled by `n!`, so that `sum_j w_j f(x + j h) / h^n`
    /// approximates `f^(n)(x)` directly.
    pub fn derivative_weights(&self) -> Vec<f64> {
        let nf: f64 = (1..=self.order).map(f64::from).product();
        self.coefficients.iter().map(|c| c * nf).collect()
    }
}

/// Solves the moment system `sum_j C_j j^m = [m == n]`, `m = 0..=2i`.
pub fn fd_coefficients(n: u32, p: u32) -> Result<Stencil> {
    if p == 0 || p % 2 == 1 {
        return Err(Error::InvalidArgument(format!("accuracy must be a positive even integer, got {p}")));
    }
    if n == 0 {
        return Ok(Stencil {
            order: 0,
            accuracy: p,
            half_width: 0,
            coefficients: vec![1.0],
        });
    }
    let half = ((n + p - 1) / 2) as usize;
    let size = 2 * half + 1;
    let mut a: Vec<Vec<f64>> = (0..size)
        .map(|m| {
            (0..size)
                .map(|j| (j as f64 - half as f64).powi(m as i32))
                .collect()
        })
        .collect();
    let mut b: Vec<f64> = (0..size).map(|m| if m == n as usize { 1.0 } else { 0.0 }).collect();

    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("non-empty range");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..size {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..size {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut c = vec![0.0; size];
    for row in (0..size).rev() {
        let tail: f64 = (row + 1..size).map(|k| a[row][k] * c[k]).sum();
        c[row] = (b[row] - tail) / a[row][row];
    }
    Ok(Stencil {
        order: n,
        accuracy: p,
        half_width: half,
        coefficients: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn small_stencils() {
        close(&fd_coefficients(1, 2).unwrap().coefficients, &[-0.5, 0.0, 0.5]);
        let second = fd_coefficients(2, 2).unwrap();
        close(&second.coefficients, &[0.5, -1.0, 0.5]);
        close(&second.derivative_weights(), &[1.0, -2.0, 1.0]);
        close(
            &fd_coefficients(1, 4).unwrap().coefficients,
            &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        );
        let s = fd_coefficients(0, 4).unwrap();
        assert_eq!((s.half_width, s.coefficients), (0, vec![1.0]));
        assert!(fd_coefficients(1, 3).is_err());
        assert!(fd_coefficients(1, 0).is_err());
    }

    #[test]
    fn moment_conditions() {
        for n in 1..=6u32 {
            for p in [2, 4, 6, 8] {
                let s = fd_coefficients(n, p).unwrap();
                assert_eq!(s.half_width, ((n + p - 1) / 2) as usize);
                for m in 0..=2 * s.half_width {
                    let moment: f64 = s
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * (s.offset(j) as f64).powi(m as i32))
                        .sum();
                    let want = if m == n as usize { 1.0 } else { 0.0 };
                    assert!((moment - want).abs() < 1e-10, "n={n} p={p} m={m}: {moment}");
                }
            }
        }
    }
}
