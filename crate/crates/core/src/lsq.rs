//! Dense least squares by Householder QR with column scaling.

use crate::error::{err, Result};
use crate::math::{abs, sqrt};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub struct LsqFit {
    pub coef: Vec<f64>,
    /// max |A c - y|
    pub max_residual: f64,
    pub rms_residual: f64,
}

/// Solves min |A c - y| for row-major `rows` (each of length `p`).
pub fn solve(rows: &[Vec<f64>], y: &[f64]) -> Result<LsqFit> {
    let m = rows.len();
    if m == 0 {
        return Err(err!(Fit, "empty design matrix"));
    }
    let p = rows[0].len();
    if m < p {
        return Err(err!(Fit, "underdetermined fit: {m} rows, {p} columns"));
    }
    let mut scale = vec![0.0; p];
    for r in rows {
        for j in 0..p {
            scale[j] = f64::max(scale[j], abs(r[j]));
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    // column-major working copy
    let mut a: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|r| r[j] / scale[j]).collect()).collect();
    let mut b: Vec<f64> = y.to_vec();
    for k in 0..p {
        let norm = sqrt(a[k][k..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            return Err(err!(Fit, "rank-deficient design matrix (column {k})"));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let d: f64 = v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
            for (i, vi) in v.iter().enumerate() {
                col[k + i] -= d * vi;
            }
        }
        let d: f64 = v.iter().zip(&b[k..]).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
        for (i, vi) in v.iter().enumerate() {
            b[k + i] -= d * vi;
        }
    }
    let mut c = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in k + 1..p {
            s -= a[j][k] * c[j];
        }
        if abs(a[k][k]) < 1e-14 * abs(a[0][0]) {
            return Err(err!(Fit, "ill-conditioned design matrix (column {k})"));
        }
        c[k] = s / a[k][k];
    }
    for j in 0..p {
        c[j] /= scale[j];
    }
    let mut max_r: f64 = 0.0;
    let mut ss = 0.0;
    for (r, yi) in rows.iter().zip(y) {
        let fit: f64 = r.iter().zip(&c).map(|(x, w)| x * w).sum();
        let d = fit - yi;
        max_r = max_r.max(abs(d));
        ss += d * d;
    }
    Ok(LsqFit { coef: c, max_residual: max_r, rms_residual: sqrt(ss / m as f64) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, *x, x * x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let f = solve(&rows, &y).unwrap();
        assert!((f.coef[0] - 2.0).abs() < 1e-12);
        assert!((f.coef[1] + 3.0).abs() < 1e-12);
        assert!((f.coef[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_underdetermined() {
        assert!(solve(&[vec![1.0, 2.0]], &[1.0]).is_err());
    }
}
