use super::oracle::PropertyOracle;
use super::DesignError;
use crate::chemfeat::tanimoto;
use crate::forge::Vocabulary;
use crate::metrics::{nearest_neighbor, GenerationBatch, SaModel, Scaffold, TrainSet, DIVERSITY_NEIGHBORS};
use crate::molgraph::parse_smiles;
use serde::{Deserialize, Serialize};

/// How a raw value becomes a reward term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// `-|v - t|`
    Match(f64),
    /// `min(v, x)`
    GreaterThan(f64),
    /// `-max(v, x)`
    LessThan(f64),
}

impl TargetMode {
    pub fn raw(self, v: f64) -> f64 {
        match self {
            TargetMode::Match(t) => -(v - t).abs(),
            TargetMode::GreaterThan(x) => v.min(x),
            TargetMode::LessThan(x) => -v.max(x),
        }
    }

    fn threshold(self) -> f64 {
        match self {
            TargetMode::Match(t) | TargetMode::GreaterThan(t) | TargetMode::LessThan(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyTarget {
    pub oracle: PropertyOracle,
    pub mode: TargetMode,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TermWeights {
    pub diversity: f64,
    pub similarity: f64,
    pub specificity: f64,
    pub sa: f64,
    pub scaffold: f64,
}

impl Default for TermWeights {
    fn default() -> Self {
        TermWeights {
            diversity: 1.0,
            similarity: 1.0,
            specificity: 1.0,
            sa: 1.0,
            scaffold: 1.0,
        }
    }
}

/// Scaffold named by a vocabulary token or given as a SMILES pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaffoldSpec {
    Token(String),
    Smiles(String),
}

impl ScaffoldSpec {
    pub fn resolve(&self, vocab: Option<&Vocabulary>) -> Result<Scaffold, DesignError> {
        match self {
            ScaffoldSpec::Token(t) => match vocab {
                Some(v) => Scaffold::token(t, v).map_err(|e| DesignError::Config(e.to_string())),
                None => Ok(Scaffold::Token(t.clone())),
            },
            ScaffoldSpec::Smiles(s) => parse_smiles(s)
                .map(Scaffold::Subgraph)
                .map_err(|e| DesignError::Config(format!("scaffold: {e}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub property_targets: Vec<PropertyTarget>,
    pub diversity_target: f64,
    pub similarity_target: f64,
    pub specificity_target: f64,
    pub sa_threshold: f64,
    pub weights: TermWeights,
    pub batch_size: usize,
    pub scaffold: Option<ScaffoldSpec>,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            property_targets: Vec::new(),
            diversity_target: 0.6,
            similarity_target: 0.7,
            specificity_target: 1.0,
            sa_threshold: 4.5,
            weights: TermWeights::default(),
            batch_size: 512,
            scaffold: None,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), DesignError> {
        let w = &self.weights;
        let mut weights = vec![w.diversity, w.similarity, w.specificity, w.sa, w.scaffold];
        weights.extend(self.property_targets.iter().map(|t| t.weight));
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(DesignError::Config("weights must be finite and >= 0".into()));
        }
        let mut thresholds = vec![
            self.diversity_target,
            self.similarity_target,
            self.specificity_target,
            self.sa_threshold,
        ];
        thresholds.extend(self.property_targets.iter().map(|t| t.mode.threshold()));
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(DesignError::Config("thresholds must be finite".into()));
        }
        if self.batch_size == 0 {
            return Err(DesignError::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Reference data the reward terms may need.
#[derive(Default, Clone, Copy)]
pub struct RewardContext<'a> {
    pub train: Option<&'a TrainSet>,
    pub sa: Option<&'a SaModel>,
    pub vocab: Option<&'a Vocabulary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub valid: bool,
    /// Raw term values, parallel to [`Rewards::terms`]; empty when invalid.
    pub raw: Vec<f64>,
    pub scaled: Vec<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rewards {
    pub terms: Vec<String>,
    pub rewards: Vec<f64>,
    pub breakdowns: Vec<RewardBreakdown>,
}

/// Min-max scaling to `[0, 1]`; a constant column maps to 0.5.
pub fn min_max(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
        .collect()
}

/// Per-sample `1 - sim` averaged over the `min(10, n - 1)` most similar peers.
fn sample_diversity(batch: &GenerationBatch, valid: &[usize]) -> Vec<f64> {
    let n = valid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let m = DIVERSITY_NEIGHBORS.min(n - 1);
    let fps: Vec<_> = valid.iter().map(|&i| batch.fingerprints[i].expect("valid sample")).collect();
    (0..n)
        .map(|a| {
            let mut sims: Vec<f64> = (0..n).filter(|&b| b != a).map(|b| tanimoto(&fps[a], &fps[b])).collect();
            sims.sort_by(|x, y| y.total_cmp(x));
            sims[..m].iter().map(|s| 1.0 - s).sum::<f64>() / m as f64
        })
        .collect()
}

/// Weighted sum of min-max scaled terms for every valid sample; invalid
/// samples get exactly 0. Terms with zero weight are not evaluated.
pub fn compute_rewards(
    batch: &GenerationBatch,
    config: &RewardConfig,
    ctx: RewardContext,
) -> Result<Rewards, DesignError> {
    if batch.is_empty() {
        return Err(DesignError::EmptyBatch);
    }
    config.validate()?;
    let valid = batch.valid_indices();
    let graphs: Vec<_> = valid.iter().map(|&i| batch.decoded[i].as_ref().expect("valid")).collect();
    let mut terms: Vec<String> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();

    for t in &config.property_targets {
        if t.weight > 0.0 {
            terms.push(format!("property:{}", t.oracle.property_name));
            weights.push(t.weight);
            columns.push(graphs.iter().map(|g| t.mode.raw(t.oracle.predict(g))).collect());
        }
    }
    let w = &config.weights;
    if w.diversity > 0.0 {
        let mode = TargetMode::GreaterThan(config.diversity_target);
        terms.push("diversity".into());
        weights.push(w.diversity);
        columns.push(sample_diversity(batch, &valid).into_iter().map(|d| mode.raw(d)).collect());
    }
    if w.similarity > 0.0 || w.specificity > 0.0 {
        let train = ctx
            .train
            .ok_or_else(|| DesignError::Config("similarity/specificity terms need a training set".into()))?;
        let nearest: Vec<(usize, f64)> = valid
            .iter()
            .map(|&i| nearest_neighbor(batch.fingerprints[i].as_ref().expect("valid"), &train.fingerprints))
            .collect::<Option<_>>()
            .ok_or_else(|| DesignError::Config("empty training set".into()))?;
        if w.similarity > 0.0 {
            let mode = TargetMode::Match(config.similarity_target);
            terms.push("similarity".into());
            weights.push(w.similarity);
            columns.push(nearest.iter().map(|&(_, s)| mode.raw(s)).collect());
        }
        if w.specificity > 0.0 {
            let mut counts = vec![0usize; train.fingerprints.len()];
            for &(t, _) in &nearest {
                counts[t] += 1;
            }
            let n = batch.len() as f64;
            let mode = TargetMode::Match(config.specificity_target);
            terms.push("specificity".into());
            weights.push(w.specificity);
            columns.push(nearest.iter().map(|&(t, _)| mode.raw(1.0 - counts[t] as f64 / n)).collect());
        }
    }
    if w.sa > 0.0 {
        let sa = ctx.sa.ok_or_else(|| DesignError::Config("SA term needs a reference model".into()))?;
        let mode = TargetMode::LessThan(config.sa_threshold);
        terms.push("sa".into());
        weights.push(w.sa);
        columns.push(graphs.iter().map(|g| mode.raw(sa.score(g))).collect());
    }
    if w.scaffold > 0.0 {
        if let Some(spec) = &config.scaffold {
            let scaffold = spec.resolve(ctx.vocab)?;
            terms.push("scaffold".into());
            weights.push(w.scaffold);
            columns.push(valid.iter().map(|&i| scaffold.matches(batch, i) as u8 as f64).collect());
        }
    }

    let scaled: Vec<Vec<f64>> = columns.iter().map(|c| min_max(c)).collect();
    let mut breakdowns: Vec<RewardBreakdown> = (0..batch.len())
        .map(|_| RewardBreakdown {
            valid: false,
            raw: Vec::new(),
            scaled: Vec::new(),
            reward: 0.0,
        })
        .collect();
    for (k, &i) in valid.iter().enumerate() {
        let raw: Vec<f64> = columns.iter().map(|c| c[k]).collect();
        let sc: Vec<f64> = scaled.iter().map(|c| c[k]).collect();
        let reward = sc.iter().zip(&weights).map(|(s, w)| s * w).sum();
        breakdowns[i] = RewardBreakdown {
            valid: true,
            raw,
            scaled: sc,
            reward,
        };
    }
    Ok(Rewards {
        terms,
        rewards: breakdowns.iter().map(|b| b.reward).collect(),
        breakdowns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps() {
        let gt = TargetMode::GreaterThan(600.0);
        assert_eq!(gt.raw(650.0), 600.0);
        assert_eq!(gt.raw(550.0), 550.0);
        let lt = TargetMode::LessThan(4.5);
        assert_eq!(lt.raw(3.0), -4.5);
        assert_eq!(lt.raw(6.0), -6.0);
        assert!((TargetMode::Match(0.7).raw(0.5) + 0.2).abs() < 1e-12);
    }

    #[test]
    fn min_max_degenerate() {
        assert_eq!(min_max(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max(&[3.0, 3.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn config_json_defaults() {
        let c: RewardConfig = serde_json::from_str(r#"{"weights": {"sa": 0}}"#).unwrap();
        assert_eq!(c.weights.sa, 0.0);
        assert_eq!(c.weights.diversity, 1.0);
        assert_eq!(c.batch_size, 512);
        assert_eq!(c.sa_threshold, 4.5);
        let m: TargetMode = serde_json::from_str(r#"{"greater_than": 600}"#).unwrap();
        assert_eq!(m, TargetMode::GreaterThan(600.0));
        let bad = RewardConfig {
            sa_threshold: f64::NAN,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn invalid_samples_get_zero() {
        let b = GenerationBatch::from_smiles(&["CCO", "C(", "c1ccccc1", "CC"], None);
        let cfg = RewardConfig {
            weights: TermWeights {
                similarity: 0.0,
                specificity: 0.0,
                sa: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = compute_rewards(&b, &cfg, RewardContext::default()).unwrap();
        assert_eq!(r.rewards[1], 0.0);
        assert!(!r.breakdowns[1].valid);
        assert_eq!(r.terms, vec!["diversity"]);
        for b in r.breakdowns.iter().filter(|b| b.valid) {
            assert!(b.scaled.iter().all(|s| (0.0..=1.0).contains(s)));
        }
        assert!(compute_rewards(&GenerationBatch::default(), &cfg, RewardContext::default()).is_err());
    }
}
