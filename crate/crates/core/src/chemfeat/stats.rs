use super::descriptors::{DescriptorVector, DESCRIPTOR_COUNT};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: zero variance")]
    ZeroVariance,
}

/// Per-column (min, max) with `min <= max` for every fitted column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Fits column-wise min and max. An empty dataset yields zero ranges.
pub fn fit_scaler<V: AsRef<[f64]>>(data: &[V]) -> ScalerParams {
    let width = data.first().map_or(DESCRIPTOR_COUNT, |v| v.as_ref().len());
    let mut min = vec![f64::INFINITY; width];
    let mut max = vec![f64::NEG_INFINITY; width];
    for row in data {
        for (j, &x) in row.as_ref().iter().enumerate().take(width) {
            min[j] = min[j].min(x);
            max[j] = max[j].max(x);
        }
    }
    for j in 0..width {
        if min[j] > max[j] {
            min[j] = 0.0;
            max[j] = 0.0;
        }
    }
    ScalerParams { min, max }
}

/// `(x - min) / (max - min)`, unclamped; degenerate columns map to 0.
pub fn apply_scaler(v: &[f64], p: &ScalerParams) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(j, &x)| {
            let (lo, hi) = (p.min[j], p.max[j]);
            if hi > lo {
                (x - lo) / (hi - lo)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Indices of the `k` columns with the largest `|r|` against `target`,
/// ties broken by column order. Undefined correlations count as 0.
pub fn select_descriptors<V: AsRef<[f64]>>(data: &[V], target: &[f64], k: usize) -> Vec<usize> {
    let width = data.first().map_or(0, |v| v.as_ref().len());
    let mut scored: Vec<(f64, usize)> = (0..width)
        .map(|j| {
            let col: Vec<f64> = data.iter().map(|v| v.as_ref()[j]).collect();
            (pearson(&col, target).map_or(0.0, f64::abs), j)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, j)| j).collect()
}

impl AsRef<[f64]> for DescriptorVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaler_formula() {
        let data = vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]];
        let p = fit_scaler(&data);
        let scaled: Vec<Vec<f64>> = data.iter().map(|r| apply_scaler(r, &p)).collect();
        assert_eq!(scaled, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
        assert_eq!(apply_scaler(&[0.0, 7.0], &p), vec![-0.5, 0.0]);
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0];
        assert!((pearson(&x, &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-12);
        // deviations (-1,0,1) and (-1,1,0): sxy = 1, sxx = syy = 2
        assert!((pearson(&x, &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(pearson(&x, &[1.0, 1.0, 1.0]), Err(StatsError::ZeroVariance));
        assert_eq!(pearson(&[1.0], &[1.0]), Err(StatsError::TooFew(1)));
    }

    #[test]
    fn selection_order() {
        let target = [1.0, 2.0, 3.0, 4.0];
        // columns: |r| = 0.8 (by hand), constant, exact, anti-exact
        let cols = [[1.0, 3.0, 2.0, 4.0], [7.0; 4], [1.0, 2.0, 3.0, 4.0], [4.0, 3.0, 2.0, 1.0]];
        let data: Vec<Vec<f64>> = (0..4).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        assert_eq!(select_descriptors(&data, &target, 4), vec![2, 3, 0, 1]);
        assert_eq!(select_descriptors(&data, &target, 1), vec![2]);
        let r = pearson(&cols[0], &target).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }
}
