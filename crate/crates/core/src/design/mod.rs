//! Property oracle, reward composition, tabular token policy and
//! REINFORCE training.

mod oracle;
mod policy;
mod reward;
mod rl;

pub use oracle::{
    fit_ridge, r2_score, train_oracle, train_oracle_descriptors, OracleFit, PropertyOracle,
    SINGULAR_RATIO,
};
pub use policy::{
    policy_tokens, sample_batch, Gradient, Policy, SampledBatch, TokenGrammar, BOS, BOS_TOKEN, DEFAULT_CONTEXT,
    DEFAULT_MAX_LEN, EOS, EOS_TOKEN, LOGIT_FLOOR,
};
pub use reward::{
    compute_rewards, min_max, PropertyTarget, RewardBreakdown, RewardConfig, RewardContext,
    Rewards, ScaffoldSpec, TargetMode, TermWeights,
};
pub use rl::{
    decode_samples, reinforce_update, rl_train, RlConfig, RlOutcome, StepLog,
    DEFAULT_LEARNING_RATE,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("singular system: features are collinear")]
    Singular,
    #[error("truth values are constant")]
    ConstantTruth,
    #[error("unknown token {0}")]
    UnknownToken(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid configuration: {0}")]
    Config(String),
}
