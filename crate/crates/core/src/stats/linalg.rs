//! Householder QR for dense least squares.

use super::StatsError;

/// Relative size below which a column's remaining norm after orthogonalizing
/// against earlier columns counts as linear dependence.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub beta: Vec<f64>,
    /// Upper-triangular inverse of R, row-major `p x p`. `R^-1 R^-T` is
    /// `(X'X)^-1`.
    pub r_inv: Vec<Vec<f64>>,
}

/// Solves `min ||y - X b||` for column-major `columns` via Householder QR.
///
/// Columns are processed in order without pivoting, so when a column is a
/// linear combination of earlier ones it is the one reported by name.
pub fn least_squares_qr(
    columns: &[Vec<f64>],
    names: &[String],
    y: &[f64],
) -> Result<LeastSquares, StatsError> {
    let p = columns.len();
    let n = y.len();
    if let Some(c) = columns.iter().find(|c| c.len() != n) {
        return Err(StatsError::LengthMismatch {
            left: c.len(),
            right: n,
        });
    }
    if n <= p {
        return Err(StatsError::InsufficientObservations {
            n_obs: n,
            n_params: p,
        });
    }
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut qty = y.to_vec();
    let norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();

    for k in 0..p {
        let tail = norm(&a[k][k..]);
        if tail <= RANK_TOL * norms[k] || norms[k] == 0.0 || !tail.is_finite() {
            return Err(StatsError::RankDeficient(names[k].clone()));
        }
        let alpha = if a[k][k] > 0.0 { -tail } else { tail };
        let mut v = a[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vtv;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(k + 1) {
            reflect(&mut col[k..]);
        }
        reflect(&mut qty[k..]);
        a[k][k] = alpha;
        for x in &mut a[k][k + 1..] {
            *x = 0.0;
        }
    }

    // R[i][j] = a[j][i] for i <= j.
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[j][i] * beta[j]).sum();
        beta[i] = (qty[i] - s) / a[i][i];
    }

    let mut r_inv = vec![vec![0.0; p]; p];
    for j in 0..p {
        r_inv[j][j] = 1.0 / a[j][j];
        for i in (0..j).rev() {
            let s: f64 = (i + 1..=j).map(|k| a[k][i] * r_inv[k][j]).sum();
            r_inv[i][j] = -s / a[i][i];
        }
    }
    Ok(LeastSquares { beta, r_inv })
}

fn norm(x: &[f64]) -> f64 {
    // scaled to avoid overflow on large inputs
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn exact_line() {
        let cols = vec![vec![1.0; 3], vec![1.0, 2.0, 3.0]];
        let ls = least_squares_qr(&cols, &names(2), &[1.0, 2.0, 3.0]).unwrap();
        assert!(ls.beta[0].abs() < 1e-14);
        assert!((ls.beta[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn r_inverse_times_r_is_identity() {
        // X'X = R'R, so (R^-1 R^-T)(X'X) = I.
        let cols = vec![vec![1.0; 5], vec![0.5, 1.5, -2.0, 3.0, 0.1], vec![2.0, 0.0, 1.0, -1.0, 4.0]];
        let ls = least_squares_qr(&cols, &names(3), &[1.0, 0.0, 2.0, 1.0, 3.0]).unwrap();
        let p = 3;
        let xtx: Vec<Vec<f64>> = (0..p)
            .map(|i| (0..p).map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let inv: Vec<Vec<f64>> = (0..p)
            .map(|i| (0..p).map(|j| (0..p).map(|k| ls.r_inv[i][k] * ls.r_inv[j][k]).sum()).collect())
            .collect();
        for i in 0..p {
            for j in 0..p {
                let v: f64 = (0..p).map(|k| inv[i][k] * xtx[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{i},{j}: {v}");
            }
        }
    }

    #[test]
    fn collinear_column_is_named() {
        let cols = vec![vec![1.0; 4], vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]];
        let err = least_squares_qr(&cols, &names(3), &[1.0, 2.0, 2.0, 5.0]).unwrap_err();
        assert_eq!(err, StatsError::RankDeficient("c2".into()));
        let cols = vec![vec![1.0; 4], vec![3.0; 4]];
        let err = least_squares_qr(&cols, &names(2), &[1.0, 2.0, 2.0, 5.0]).unwrap_err();
        assert_eq!(err, StatsError::RankDeficient("c1".into()));
    }

    #[test]
    fn needs_more_rows_than_columns() {
        let cols = vec![vec![1.0; 2], vec![1.0, 2.0]];
        assert!(matches!(
            least_squares_qr(&cols, &names(2), &[1.0, 2.0]),
            Err(StatsError::InsufficientObservations { n_obs: 2, n_params: 2 })
        ));
    }
}
