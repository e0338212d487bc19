use super::policy::{sample_batch, Policy, DEFAULT_MAX_LEN};
use super::reward::{compute_rewards, RewardConfig, RewardContext};
use super::DesignError;
use crate::happy::Decoder;
use crate::metrics::{evaluate, EvalContext, GenerationBatch, MetricsReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_LEARNING_RATE: f64 = 0.05;

/// Adds `lr * (r_i - mean r) * grad log pi(seq_i)` over the batch.
pub fn reinforce_update(policy: &Policy, seqs: &[Vec<u32>], rewards: &[f64], lr: f64) -> Policy {
    if rewards.is_empty() {
        return policy.clone();
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    let adv: Vec<f64> = rewards.iter().map(|r| r - mean).collect();
    policy.apply(&policy.gradient(seqs, &adv), lr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlConfig {
    pub reward: RewardConfig,
    pub steps: usize,
    pub learning_rate: f64,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            reward: RewardConfig::default(),
            steps: 100,
            learning_rate: DEFAULT_LEARNING_RATE,
            max_len: DEFAULT_MAX_LEN,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: usize,
    pub mean_reward: f64,
    pub metrics: MetricsReport,
    /// Mean prediction of each property target over valid samples.
    pub property_means: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct RlOutcome {
    pub policy: Policy,
    pub log: Vec<StepLog>,
}

/// Decodes a sampled batch and returns it with the per-step distributions.
pub fn decode_samples(
    policy: &Policy,
    decoder: &Decoder,
    n: usize,
    max_len: usize,
    seed: u64,
) -> (GenerationBatch, Vec<Vec<u32>>, Vec<Vec<Vec<f64>>>) {
    let s = sample_batch(policy, n, max_len, seed);
    (GenerationBatch::from_happy(&s.texts, decoder), s.ids, s.distributions)
}

/// Sample, reward and update for `config.steps` steps. Step `s` samples
/// with the `s`-th draw of a ChaCha8 stream seeded by `config.seed`.
pub fn rl_train(
    policy: &Policy,
    config: &RlConfig,
    decoder: &Decoder,
    ctx: RewardContext,
    mut on_step: impl FnMut(&StepLog),
) -> Result<RlOutcome, DesignError> {
    config.reward.validate()?;
    if !(config.learning_rate.is_finite()) {
        return Err(DesignError::Config("learning_rate must be finite".into()));
    }
    let scaffold = config
        .reward
        .scaffold
        .as_ref()
        .map(|s| s.resolve(ctx.vocab))
        .transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut policy = policy.clone();
    let mut log = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        let seed: u64 = rng.gen();
        let (batch, ids, dists) =
            decode_samples(&policy, decoder, config.reward.batch_size, config.max_len, seed);
        let rewards = compute_rewards(&batch, &config.reward, ctx)?;
        let metrics = evaluate(
            &batch,
            &EvalContext {
                train: ctx.train,
                sa: ctx.sa,
                scaffold: scaffold.as_ref(),
                distributions: Some(&dists),
            },
        );
        let valid: Vec<_> = batch.decoded.iter().flatten().collect();
        let property_means = config
            .reward
            .property_targets
            .iter()
            .map(|t| {
                (!valid.is_empty())
                    .then(|| valid.iter().map(|g| t.oracle.predict(g)).sum::<f64>() / valid.len() as f64)
            })
            .collect();
        let entry = StepLog {
            step,
            mean_reward: rewards.rewards.iter().sum::<f64>() / rewards.rewards.len() as f64,
            metrics,
            property_means,
        };
        on_step(&entry);
        log.push(entry);
        policy = reinforce_update(&policy, &ids, &rewards.rewards, config.learning_rate);
    }
    Ok(RlOutcome { policy, log })
}

#[cfg(test)]
mod tests {
    use super::super::policy::{BOS, BOS_TOKEN, EOS, EOS_TOKEN};
    use super::*;

    fn toy() -> Policy {
        let v = [BOS_TOKEN, EOS_TOKEN, "A", "B"].iter().map(|s| s.to_string()).collect();
        Policy::uniform(v, 1)
    }

    #[test]
    fn equal_rewards_do_not_move() {
        let p = toy();
        let seqs = vec![vec![2, EOS], vec![3, EOS]];
        let q = reinforce_update(&p, &seqs, &[0.7, 0.7], 0.5);
        assert_eq!(p.distribution(&[BOS]), q.distribution(&[BOS]));
    }

    #[test]
    fn rewarded_token_gains_probability() {
        let p = toy();
        let seqs = vec![vec![2, EOS], vec![3, EOS], vec![3, 2, EOS], vec![EOS]];
        let r: Vec<f64> = seqs.iter().map(|s| s.contains(&2) as u8 as f64).collect();
        let q = reinforce_update(&p, &seqs, &r, DEFAULT_LEARNING_RATE);
        assert!(q.distribution(&[BOS])[2] > p.distribution(&[BOS])[2]);
    }
}
