use anyhow::{bail, Context, Result};
use happy_core::design::{
    PropertyOracle, PropertyTarget, RewardConfig, RlConfig, ScaffoldSpec, TargetMode, TermWeights,
    DEFAULT_CONTEXT, DEFAULT_LEARNING_RATE, DEFAULT_MAX_LEN,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Pipeline settings. Every section is optional; command-line flags win.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub forge: ForgeSection,
    pub oracle: OracleSection,
    pub policy: PolicySection,
    pub generate: GenerateSection,
    pub rl: RlSection,
    pub attribute: AttributeSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForgeSection {
    pub threshold: usize,
    pub max_iterations: usize,
}

impl Default for ForgeSection {
    fn default() -> Self {
        ForgeSection {
            threshold: 100,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub k: usize,
    pub lambda: f64,
    pub folds: usize,
    pub repeats: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            k: 5,
            lambda: 1e-3,
            folds: 5,
            repeats: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub context_length: usize,
    pub smoothing: f64,
}

impl Default for PolicySection {
    fn default() -> Self {
        PolicySection {
            context_length: DEFAULT_CONTEXT,
            smoothing: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateSection {
    pub n: usize,
    pub max_len: usize,
}

impl Default for GenerateSection {
    fn default() -> Self {
        GenerateSection {
            n: 512,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

/// A property target whose oracle lives in a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub oracle: PathBuf,
    pub mode: TargetMode,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlSection {
    pub steps: usize,
    pub learning_rate: f64,
    pub max_len: usize,
    pub batch_size: usize,
    pub property_targets: Vec<TargetSpec>,
    pub diversity_target: f64,
    pub similarity_target: f64,
    pub specificity_target: f64,
    pub sa_threshold: f64,
    pub weights: TermWeights,
    pub scaffold: Option<ScaffoldSpec>,
}

impl Default for RlSection {
    fn default() -> Self {
        let r = RewardConfig::default();
        RlSection {
            steps: 100,
            learning_rate: DEFAULT_LEARNING_RATE,
            max_len: DEFAULT_MAX_LEN,
            batch_size: r.batch_size,
            property_targets: Vec::new(),
            diversity_target: r.diversity_target,
            similarity_target: r.similarity_target,
            specificity_target: r.specificity_target,
            sa_threshold: r.sa_threshold,
            weights: r.weights,
            scaffold: None,
        }
    }
}

impl RlSection {
    /// Resolves oracle paths relative to `base` (the config file's directory).
    pub fn to_rl_config(&self, base: &Path, seed: u64) -> Result<RlConfig> {
        let property_targets = self
            .property_targets
            .iter()
            .map(|t| {
                let path = base.join(&t.oracle);
                let oracle: PropertyOracle = crate::io::read_oracle(&path)?.oracle;
                Ok(PropertyTarget {
                    oracle,
                    mode: t.mode,
                    weight: t.weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RlConfig {
            reward: RewardConfig {
                property_targets,
                diversity_target: self.diversity_target,
                similarity_target: self.similarity_target,
                specificity_target: self.specificity_target,
                sa_threshold: self.sa_threshold,
                weights: self.weights.clone(),
                batch_size: self.batch_size,
                scaffold: self.scaffold.clone(),
            },
            steps: self.steps,
            learning_rate: self.learning_rate,
            max_len: self.max_len,
            seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeSection {
    pub steps: usize,
}

impl Default for AttributeSection {
    fn default() -> Self {
        AttributeSection { steps: 200 }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let c: Config = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if c.schema_version != CONFIG_SCHEMA_VERSION {
            bail!(
                "{}: schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                path.display(),
                c.schema_version
            );
        }
        Ok(c)
    }

    pub fn defaults() -> Self {
        Config {
            schema_version: CONFIG_SCHEMA_VERSION,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c: Config = serde_json::from_str(r#"{"schema_version": 1, "rl": {"steps": 3, "weights": {"sa": 0}}}"#).unwrap();
        assert_eq!(c.rl.steps, 3);
        assert_eq!(c.rl.batch_size, 512);
        assert_eq!(c.rl.weights.sa, 0.0);
        assert_eq!(c.rl.weights.diversity, 1.0);
        assert_eq!(c.forge.threshold, 100);
        assert!(serde_json::from_str::<Config>(r#"{"schema_version": 1, "bogus": 2}"#).is_err());
    }
}
