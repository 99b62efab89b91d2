//! Savitzky-Golay smoothing: local least-squares polynomial fits.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Smooth `values` with a centred polynomial fit of degree `order` over
/// `window` points. Near the ends the window shrinks symmetrically to the
/// largest that fits, and the degree is capped at what that window can
/// determine. Sequences shorter than the window are returned unchanged.
pub fn savitzky_golay_smooth(values: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if window % 2 == 0 || window <= order {
        return Err(Error::domain(format!("window must be odd and exceed the order, got window={window} order={order}")));
    }
    let n = values.len();
    if n < window {
        return Ok(values.to_vec());
    }
    let h = (window - 1) / 2;
    let mut cache: HashMap<usize, Vec<f64>> = HashMap::new();
    Ok((0..n)
        .map(|i| {
            let hi = h.min(i).min(n - 1 - i);
            let c = cache.entry(hi).or_insert_with(|| centre_coefficients(hi, order.min(2 * hi)));
            c.iter().zip(&values[i - hi..=i + hi]).map(|(c, v)| c * v).sum()
        })
        .collect())
}

/// Weights giving the fitted value at the centre of a `2h+1` window.
fn centre_coefficients(h: usize, order: usize) -> Vec<f64> {
    if h == 0 {
        return vec![1.0];
    }
    let m = order + 1;
    // Offsets scaled to [-1, 1] keep the normal equations well conditioned.
    let xs: Vec<f64> = (0..=2 * h).map(|k| (k as f64 - h as f64) / h as f64).collect();
    let mut gram = vec![vec![0.0; m + 1]; m];
    for &x in &xs {
        let mut pows = vec![1.0; 2 * m];
        for j in 1..2 * m {
            pows[j] = pows[j - 1] * x;
        }
        for r in 0..m {
            for c in 0..m {
                gram[r][c] += pows[r + c];
            }
        }
    }
    // Solve gram v = e_0; the centre value is Σ_j v_j x^j applied per point.
    gram[0][m] = 1.0;
    let v = solve(gram);
    xs.iter()
        .map(|&x| {
            let mut p = 1.0;
            let mut s = 0.0;
            for vj in &v {
                s += vj * p;
                p *= x;
            }
            s
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..=m {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    x
}
