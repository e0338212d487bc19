//! Integrated Gradients with subgroup- and descriptor-level aggregation.

use crate::chemfeat::{compute_descriptors, DescriptorVector, DESCRIPTOR_COUNT, DESCRIPTOR_NAMES};
use crate::design::PropertyOracle;
use crate::forge::Vocabulary;
use crate::happy::{HappyError, HappyString};
use crate::molgraph::parse_smiles;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttributionError {
    #[error("dimension mismatch: input {input}, baseline {baseline}")]
    Dimension { input: usize, baseline: usize },
    #[error("steps must be at least 1")]
    ZeroSteps,
    #[error("monomer has no subgroups")]
    NoSubgroups,
    #[error(transparent)]
    Happy(#[from] HappyError),
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

fn compensated(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = KahanSum::default();
    xs.into_iter().for_each(|x| k.add(x));
    k.value()
}

/// `IG_i = (x_i - b_i) * mean_j grad_f(b + a_j (x - b))_i` with midpoints
/// `a_j = (j - 0.5) / steps`.
pub fn integrated_gradients(
    grad_f: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    baseline: &[f64],
    steps: usize,
) -> Result<Vec<f64>, AttributionError> {
    if x.len() != baseline.len() {
        return Err(AttributionError::Dimension {
            input: x.len(),
            baseline: baseline.len(),
        });
    }
    if steps == 0 {
        return Err(AttributionError::ZeroSteps);
    }
    let mut acc = vec![KahanSum::default(); x.len()];
    let mut point = vec![0.0; x.len()];
    for j in 1..=steps {
        let a = (j as f64 - 0.5) / steps as f64;
        for i in 0..x.len() {
            point[i] = baseline[i] + a * (x[i] - baseline[i]);
        }
        let g = grad_f(&point);
        for (s, gi) in acc.iter_mut().zip(g) {
            s.add(gi);
        }
    }
    Ok(acc
        .into_iter()
        .zip(x.iter().zip(baseline))
        .map(|(s, (xi, bi))| (xi - bi) * s.value() / steps as f64)
        .collect())
}

/// `|sum IG - (f(x) - f(baseline))|`.
pub fn completeness_gap(attributions: &[f64], fx: f64, fb: f64) -> f64 {
    (compensated(attributions.iter().copied()) - (fx - fb)).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenValue {
    pub token: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NameValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    /// Totals per distinct token, in order of first appearance.
    pub subgroups: Vec<TokenValue>,
    pub descriptors: Vec<NameValue>,
    pub completeness_gap: f64,
    pub prediction: f64,
    pub baseline_prediction: f64,
    /// One row per subgroup occurrence, one column per descriptor.
    pub attributions: Vec<Vec<f64>>,
}

/// Oracle applied to the mean of per-subgroup descriptor rows.
#[derive(Debug, Clone, Copy)]
pub struct PooledOracle<'a> {
    pub oracle: &'a PropertyOracle,
}

impl PooledOracle<'_> {
    fn pooled(rows: usize, flat: &[f64]) -> DescriptorVector {
        let mut values = [0.0; DESCRIPTOR_COUNT];
        for (c, v) in values.iter_mut().enumerate() {
            *v = compensated((0..rows).map(|r| flat[r * DESCRIPTOR_COUNT + c])) / rows as f64;
        }
        DescriptorVector { values }
    }

    /// Prediction for a row-major `rows x DESCRIPTOR_COUNT` matrix.
    pub fn value(&self, rows: usize, flat: &[f64]) -> f64 {
        self.oracle.predict_descriptors(&Self::pooled(rows, flat))
    }

    /// The model is affine, so the gradient is the same everywhere.
    pub fn gradient(&self, rows: usize) -> Vec<f64> {
        let g = self.oracle.descriptor_gradient();
        (0..rows)
            .flat_map(|_| g.iter().map(move |x| x / rows as f64))
            .collect()
    }
}

/// Subgroup rows of a HAPPY string: each unit with the descriptors of its
/// hydrogen-capped key graph, in depth-first order.
pub fn subgroup_rows(h: &HappyString, vocab: &Vocabulary) -> Result<Vec<(String, DescriptorVector)>, AttributionError> {
    h.tokens()
        .into_iter()
        .map(|t| {
            let e = vocab
                .by_token(t)
                .ok_or_else(|| HappyError::UnknownToken(t.to_string()))?;
            let g = parse_smiles(&e.key).map_err(|_| HappyError::UnknownToken(t.to_string()))?;
            Ok((t.to_string(), compute_descriptors(&g)))
        })
        .collect()
}

/// IG of the pooled oracle over the subgroup descriptor matrix against the
/// all-zero baseline, aggregated by token and by descriptor.
pub fn attribute_rows(
    oracle: &PropertyOracle,
    rows: &[(String, DescriptorVector)],
    steps: usize,
) -> Result<AttributionReport, AttributionError> {
    let n = rows.len();
    if n == 0 {
        return Err(AttributionError::NoSubgroups);
    }
    let model = PooledOracle { oracle };
    let x: Vec<f64> = rows.iter().flat_map(|(_, d)| d.values).collect();
    let baseline = vec![0.0; x.len()];
    let grad = model.gradient(n);
    let ig = integrated_gradients(|_| grad.clone(), &x, &baseline, steps)?;
    let fx = model.value(n, &x);
    let fb = model.value(n, &baseline);
    let matrix: Vec<Vec<f64>> = ig.chunks(DESCRIPTOR_COUNT).map(<[f64]>::to_vec).collect();

    let mut subgroups: Vec<TokenValue> = Vec::new();
    for ((token, _), row) in rows.iter().zip(&matrix) {
        let v = compensated(row.iter().copied());
        match subgroups.iter_mut().find(|s| &s.token == token) {
            Some(s) => s.value += v,
            None => subgroups.push(TokenValue {
                token: token.clone(),
                value: v,
            }),
        }
    }
    let descriptors = DESCRIPTOR_NAMES
        .iter()
        .enumerate()
        .map(|(c, name)| NameValue {
            name: name.to_string(),
            value: compensated(matrix.iter().map(|r| r[c])),
        })
        .collect();
    Ok(AttributionReport {
        subgroups,
        descriptors,
        completeness_gap: completeness_gap(&ig, fx, fb),
        prediction: fx,
        baseline_prediction: fb,
        attributions: matrix,
    })
}

/// [`attribute_rows`] for an encoded monomer.
pub fn attribute_monomer(
    oracle: &PropertyOracle,
    h: &HappyString,
    vocab: &Vocabulary,
    steps: usize,
) -> Result<AttributionReport, AttributionError> {
    attribute_rows(oracle, &subgroup_rows(h, vocab)?, steps)
}
