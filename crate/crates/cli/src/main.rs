mod commands;
mod config;
mod error;
mod io;
mod split;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "happy", version, about = "Repeat-unit tokenization, property oracles and RL design")]
pub struct Cli {
    /// Seed for every random choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV dataset and write it as JSON.
    Ingest(IngestArgs),
    /// Mine a vocabulary from a corpus.
    Forge(ForgeArgs),
    /// SMILES lines to HAPPY lines.
    Encode(CodecArgs),
    /// HAPPY lines to canonical SMILES lines.
    Decode(CodecArgs),
    /// Sequence-length report for HAPPY against SMILES.
    Stats(StatsArgs),
    /// Fit a descriptor ridge oracle for one property.
    TrainOracle(TrainOracleArgs),
    /// Predict a property for SMILES lines.
    Predict(PredictArgs),
    /// Sample HAPPY strings from a policy.
    Generate(GenerateArgs),
    /// Optimize a policy with REINFORCE.
    RlTrain(RlTrainArgs),
    /// Batch metrics for generated samples.
    Evaluate(EvaluateArgs),
    /// Integrated Gradients attribution of an oracle prediction.
    Attribute(AttributeArgs),
    /// Print the default configuration.
    Config,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Where to write rejected rows (CSV); defaults to `<output>.rejects.csv`.
    #[arg(long)]
    pub rejects: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorpusArg {
    /// Dataset JSON, CSV, or one SMILES per line; the bundled corpus if omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ForgeArgs {
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write an empty line for a record that fails instead of aborting.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArg,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainOracleArgs {
    /// Dataset JSON written by `ingest`.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Property column, e.g. tg_K.
    #[arg(long)]
    pub property: String,
    /// Number of descriptors kept.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    /// One SMILES per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[arg(long)]
    pub vocab: PathBuf,
    /// Policy JSON; pretrained on the corpus when omitted.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusArg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(short, long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the policy used (useful when it was pretrained here).
    #[arg(long)]
    pub policy_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RlTrainArgs {
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Optimized policy JSON.
    #[arg(long)]
    pub output: PathBuf,
    /// Per-step log as JSON lines.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Samples, one per line (HAPPY unless --smiles).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Treat input lines as SMILES.
    #[arg(long)]
    pub smiles: bool,
    /// Training corpus for novelty, similarity and specificity.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Use the bundled corpus as the training corpus.
    #[arg(long, conflicts_with = "train")]
    pub train_bundled: bool,
    /// Policy that produced the samples, for entropy.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    #[arg(long)]
    pub scaffold_token: Option<String>,
    #[arg(long, conflicts_with = "scaffold_token")]
    pub scaffold_smiles: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttributeArgs {
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Repeat unit to explain.
    #[arg(long)]
    pub smiles: String,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match std::panic::catch_unwind(|| commands::run(cli)) {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            std::process::exit(error::exit_code(&e));
        }
        Err(_) => std::process::exit(error::EXIT_INTERNAL),
    }
}
