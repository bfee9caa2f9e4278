use super::{listwise, mean, StatsError};

fn centered(x: &[f64], what: &str) -> Result<Vec<f64>, StatsError> {
    if x.len() < 2 {
        return Err(StatsError::DegenerateInput(format!(
            "{what} needs at least 2 observations, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::DegenerateInput(format!("{what} contains non-finite values")));
    }
    if x.iter().all(|v| *v == x[0]) {
        return Err(StatsError::DegenerateInput(format!("{what} has zero variance")));
    }
    let m = mean(x);
    Ok(x.iter().map(|v| v - m).collect())
}

/// Pearson product-moment correlation of two complete series.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let dx = centered(x, "x")?;
    let dy = centered(y, "y")?;
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    let sxx: f64 = dx.iter().map(|a| a * a).sum();
    let syy: f64 = dy.iter().map(|b| b * b).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("zero variance".into()));
    }
    let denom = match (sxx * syy).sqrt() {
        d if d.is_finite() && d > 0.0 => d,
        _ => sxx.sqrt() * syy.sqrt(),
    };
    Ok((sxy / denom).clamp(-1.0, 1.0))
}

/// Pearson correlation after dropping pairs with a missing side.
pub fn pearson_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<f64, StatsError> {
    let (x, y) = listwise(x, y)?;
    pearson(&x, &y)
}

/// Z-scores using the sample standard deviation (divisor `n - 1`).
pub fn standardize(x: &[f64]) -> Result<Vec<f64>, StatsError> {
    let d = centered(x, "series")?;
    let var = d.iter().map(|v| v * v).sum::<f64>() / (x.len() - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(StatsError::DegenerateInput("series has zero variance".into()));
    }
    Ok(d.into_iter().map(|v| v / sd).collect())
}

/// Lower-triangular matrix of pairwise correlations. Cell `(i, j)` with
/// `i > j` is the correlation of series `i` and `j` on their mutual
/// non-missing rows, or `None` when that subset is degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTriangle {
    pub names: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl CorrelationTriangle {
    /// Symmetric lookup; the diagonal is 1.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.rows[hi][lo]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// `(row name, column name, r)` for every cell on or below the diagonal.
    pub fn cells(&self) -> impl Iterator<Item = (&str, &str, Option<f64>)> + '_ {
        (0..self.len()).flat_map(move |i| {
            (0..=i).map(move |j| (self.names[i].as_str(), self.names[j].as_str(), self.rows[i][j]))
        })
    }
}

pub fn correlation_triangle(
    series: &[(String, Vec<Option<f64>>)],
) -> Result<CorrelationTriangle, StatsError> {
    if let Some((_, first)) = series.first() {
        if let Some((_, bad)) = series.iter().find(|(_, s)| s.len() != first.len()) {
            return Err(StatsError::LengthMismatch {
                left: first.len(),
                right: bad.len(),
            });
        }
    }
    let rows = (0..series.len())
        .map(|i| {
            (0..=i)
                .map(|j| {
                    if i == j {
                        Some(1.0)
                    } else {
                        pearson_pairwise(&series[i].1, &series[j].1).ok()
                    }
                })
                .collect()
        })
        .collect();
    Ok(CorrelationTriangle {
        names: series.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn hand_computed_value() {
        // dx = (-1.5,-0.5,0.5,1.5), dy = (-1.5,0.5,-0.5,1.5): sxy = 4, sxx = syy = 5
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(pearson(&[1.0], &[2.0]), Err(StatsError::DegenerateInput(_))));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::DegenerateInput(_))
        ));
        assert!(matches!(standardize(&[0.1; 5]), Err(StatsError::DegenerateInput(_))));
    }

    #[test]
    fn pairwise_drops_missing() {
        let x = [Some(1.0), Some(2.0), None, Some(3.0)];
        let y = [Some(2.0), Some(4.0), Some(100.0), Some(6.0)];
        assert_eq!(pearson_pairwise(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn standardize_small() {
        assert_eq!(standardize(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn triangle_shape() {
        let s = vec![
            ("a".to_string(), vec![Some(1.0), Some(2.0), Some(3.0)]),
            ("b".to_string(), vec![Some(1.0), Some(2.0), Some(3.0)]),
            ("c".to_string(), vec![Some(5.0), Some(5.0), Some(5.0)]),
        ];
        let t = correlation_triangle(&s).unwrap();
        assert_eq!(t.get(1, 0), Some(1.0));
        assert_eq!(t.get(0, 1), Some(1.0));
        assert_eq!(t.get(2, 2), Some(1.0));
        assert_eq!(t.get(2, 0), None);
        assert_eq!(t.cells().count(), 6);
    }
}
