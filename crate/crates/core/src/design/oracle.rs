use super::DesignError;
use crate::chemfeat::{
    apply_scaler, compute_descriptors, fit_scaler, select_descriptors, DescriptorVector,
    ScalerParams, DESCRIPTOR_COUNT,
};
use crate::molgraph::MolGraph;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Smallest-to-largest singular value ratio below which an unpenalized
/// system counts as singular.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// Ridge regression with an unpenalized intercept. Returns `(weights, bias)`.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<(Vec<f64>, f64), DesignError> {
    let n = x.len();
    if n != y.len() {
        return Err(DesignError::Shape(format!("{n} rows but {} targets", y.len())));
    }
    if n == 0 {
        return Err(DesignError::TooFewRecords { needed: 1, got: 0 });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(DesignError::Config(format!("ridge lambda must be finite and >= 0, got {lambda}")));
    }
    let p = x[0].len();
    if x.iter().any(|r| r.len() != p) {
        return Err(DesignError::Shape("ragged feature rows".into()));
    }
    let mean_x: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    if p == 0 {
        return Ok((Vec::new(), mean_y));
    }
    let xc = DMatrix::from_fn(n, p, |i, j| x[i][j] - mean_x[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - mean_y));
    let mut a = xc.transpose() * &xc;
    for j in 0..p {
        a[(j, j)] += lambda;
    }
    let b = xc.transpose() * yc;
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < SINGULAR_RATIO {
        return Err(DesignError::Singular);
    }
    let w = svd
        .solve(&b, 0.0)
        .map_err(|e| DesignError::Shape(e.to_string()))?;
    let bias = mean_y - w.iter().zip(&mean_x).map(|(w, m)| w * m).sum::<f64>();
    Ok((w.iter().copied().collect(), bias))
}

/// `1 - SS_res / SS_tot`.
pub fn r2_score(pred: &[f64], truth: &[f64]) -> Result<f64, DesignError> {
    if pred.len() != truth.len() {
        return Err(DesignError::Shape(format!("{} predictions, {} truths", pred.len(), truth.len())));
    }
    if truth.len() < 2 {
        return Err(DesignError::TooFewRecords { needed: 2, got: truth.len() });
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(DesignError::ConstantTruth);
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Linear map over scaled, selected descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyOracle {
    pub property_name: String,
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaler: ScalerParams,
}

impl PropertyOracle {
    /// Selected, scaled feature values of one descriptor vector.
    pub fn features(&self, d: &DescriptorVector) -> Vec<f64> {
        let scaled = apply_scaler(&d.values, &self.scaler);
        self.selected.iter().map(|&j| scaled[j]).collect()
    }

    pub fn predict_descriptors(&self, d: &DescriptorVector) -> f64 {
        self.bias
            + self
                .features(d)
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| x * w)
                .sum::<f64>()
    }

    /// Gradient of the prediction with respect to the raw descriptor vector.
    pub fn descriptor_gradient(&self) -> [f64; DESCRIPTOR_COUNT] {
        let mut g = [0.0; DESCRIPTOR_COUNT];
        for (&j, &w) in self.selected.iter().zip(&self.weights) {
            let range = self.scaler.max[j] - self.scaler.min[j];
            if range > 0.0 {
                g[j] += w / range;
            }
        }
        g
    }

    pub fn predict(&self, g: &MolGraph) -> f64 {
        self.predict_descriptors(&compute_descriptors(g))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFit {
    pub oracle: PropertyOracle,
    pub train_r2: f64,
}

/// Fits an oracle on precomputed descriptors: min-max scale, keep the `k`
/// most correlated descriptors, then ridge.
pub fn train_oracle_descriptors(
    name: &str,
    descriptors: &[DescriptorVector],
    values: &[f64],
    k: usize,
    lambda: f64,
) -> Result<OracleFit, DesignError> {
    if descriptors.len() != values.len() {
        return Err(DesignError::Shape(format!(
            "{} molecules, {} values",
            descriptors.len(),
            values.len()
        )));
    }
    if k > DESCRIPTOR_COUNT {
        return Err(DesignError::Config(format!("k = {k} exceeds {DESCRIPTOR_COUNT} descriptors")));
    }
    if descriptors.len() < k + 2 {
        return Err(DesignError::TooFewRecords { needed: k + 2, got: descriptors.len() });
    }
    let scaler = fit_scaler(descriptors);
    let scaled: Vec<Vec<f64>> = descriptors.iter().map(|d| apply_scaler(&d.values, &scaler)).collect();
    let selected = select_descriptors(&scaled, values, k);
    let x: Vec<Vec<f64>> = scaled
        .iter()
        .map(|r| selected.iter().map(|&j| r[j]).collect())
        .collect();
    let (weights, bias) = fit_ridge(&x, values, lambda)?;
    let oracle = PropertyOracle {
        property_name: name.to_string(),
        selected,
        weights,
        bias,
        scaler,
    };
    let pred: Vec<f64> = descriptors.iter().map(|d| oracle.predict_descriptors(d)).collect();
    let train_r2 = r2_score(&pred, values)?;
    Ok(OracleFit { oracle, train_r2 })
}

pub fn train_oracle(
    name: &str,
    graphs: &[MolGraph],
    values: &[f64],
    k: usize,
    lambda: f64,
) -> Result<OracleFit, DesignError> {
    let d: Vec<DescriptorVector> = graphs.iter().map(compute_descriptors).collect();
    train_oracle_descriptors(name, &d, values, k, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Normal equations on [1 | X] by Gauss-Jordan elimination with partial pivoting.
    fn lstsq_oracle(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let p = x[0].len() + 1;
        let mut m = vec![vec![0.0; p + 1]; p];
        for (r, &t) in x.iter().zip(y) {
            let row: Vec<f64> = std::iter::once(1.0).chain(r.iter().copied()).collect();
            for i in 0..p {
                for j in 0..p {
                    m[i][j] += row[i] * row[j];
                }
                m[i][p] += row[i] * t;
            }
        }
        for c in 0..p {
            let piv = (c..p).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            m.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..=p {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        (0..p).map(|i| m[i][p] / m[i][i]).collect()
    }

    fn synthetic(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.7).sin(), (t * 1.3).cos() + 0.1 * t, t * t / 50.0]
            })
            .collect();
        let y = x
            .iter()
            .enumerate()
            .map(|(i, r)| 2.0 - 1.5 * r[0] + 0.25 * r[1] + 3.0 * r[2] + 0.01 * ((i * 7 % 5) as f64))
            .collect();
        (x, y)
    }

    #[test]
    fn zero_lambda_is_least_squares() {
        let (x, y) = synthetic(20);
        let (w, b) = fit_ridge(&x, &y, 0.0).unwrap();
        let want = lstsq_oracle(&x, &y);
        assert!((b - want[0]).abs() < 1e-9);
        for (a, e) in w.iter().zip(&want[1..]) {
            assert!((a - e).abs() < 1e-9, "{a} vs {e}");
        }
    }

    #[test]
    fn huge_lambda_predicts_mean() {
        let (x, y) = synthetic(20);
        let (w, b) = fit_ridge(&x, &y, 1e12).unwrap();
        assert!(w.iter().all(|w| w.abs() < 1e-8));
        let mean = y.iter().sum::<f64>() / 20.0;
        assert!((b - mean).abs() < 1e-6);
    }

    #[test]
    fn collinear_is_singular() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert_eq!(fit_ridge(&x, &y, 0.0), Err(DesignError::Singular));
        assert!(fit_ridge(&x, &y, 1.0).is_ok());
    }

    #[test]
    fn r2_cases() {
        let t = [1.0, 2.0, 4.0];
        assert_eq!(r2_score(&t, &t), Ok(1.0));
        let mean = 7.0 / 3.0;
        assert!(r2_score(&[mean; 3], &t).unwrap().abs() < 1e-15);
        // residuals (0, 1, -1): 1 - 2 / (14/3)
        assert!((r2_score(&[1.0, 1.0, 5.0], &t).unwrap() - (1.0 - 6.0 / 14.0)).abs() < 1e-12);
        assert_eq!(r2_score(&[1.0, 2.0], &[3.0, 3.0]), Err(DesignError::ConstantTruth));
    }

    #[test]
    fn exact_single_descriptor_fit() {
        use crate::molgraph::parse_smiles;
        let smiles = ["C", "CC", "CCC", "CCCC", "CCCCC", "CCCCCC", "CCO", "c1ccccc1"];
        let graphs: Vec<MolGraph> = smiles.iter().map(|s| parse_smiles(s).unwrap()).collect();
        let y: Vec<f64> = graphs
            .iter()
            .map(|g| 3.0 * compute_descriptors(g).values[1] + 10.0)
            .collect();
        let fit = train_oracle("heavy", &graphs, &y, 1, 0.0).unwrap();
        assert!((fit.train_r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.oracle.selected, vec![1]);
        for (g, v) in graphs.iter().zip(&y) {
            assert!((fit.oracle.predict(g) - v).abs() < 1e-9);
        }
        let zero = PropertyOracle {
            weights: vec![0.0],
            ..fit.oracle.clone()
        };
        assert_eq!(zero.predict(&graphs[0]), zero.bias);
    }
}
