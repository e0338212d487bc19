use crate::config::Config;
use crate::error::{data, invariant, usage};
use crate::io::{self, Dataset, OracleFile};
use crate::split::{kfold_split, SplitPlan};
use crate::{Cli, Command};
use anyhow::Result;
use happy_core::attribute::attribute_monomer;
use happy_core::chemfeat::{compute_descriptors, DescriptorVector};
use happy_core::design::{
    r2_score, rl_train, sample_batch, train_oracle_descriptors, Policy, RewardContext,
};
use happy_core::forge::{forge_run, MiningConfig, Vocabulary};
use happy_core::happy::{flatten, length_stats_graphs, parse_happy_str, Decoder, Encoder};
use happy_core::metrics::{evaluate, EvalContext, GenerationBatch, SaModel, Scaffold, TrainSet};
use happy_core::molgraph::{graph_isomorphic, parse_smiles, write_smiles, MolGraph};
use std::path::{Path, PathBuf};

pub fn run(cli: Cli) -> Result<()> {
    let (config, base) = match &cli.config {
        Some(p) => (
            Config::load(p).map_err(|e| usage(format!("{e:#}")))?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (Config::defaults(), PathBuf::new()),
    };
    let seed = cli.seed;
    match cli.command {
        Command::Ingest(a) => ingest(&a),
        Command::Forge(a) => forge(&a, &config),
        Command::Encode(a) => encode(&a),
        Command::Decode(a) => decode(&a),
        Command::Stats(a) => stats(&a),
        Command::TrainOracle(a) => train_oracle(&a, &config, seed),
        Command::Predict(a) => predict(&a),
        Command::Generate(a) => generate(&a, &config, seed),
        Command::RlTrain(a) => rl(&a, &config, &base, seed),
        Command::Evaluate(a) => eval(&a),
        Command::Attribute(a) => attribute(&a, &config),
        Command::Config => io::emit_json(None, &Config::defaults()),
    }
}

fn ingest(a: &crate::IngestArgs) -> Result<()> {
    let (dataset, rejects) = io::ingest_csv(&a.input)?;
    log::info!("{} records, {} rejects", dataset.records.len(), rejects.len());
    let rejects_path = a.rejects.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".rejects.csv");
        p.into()
    });
    io::write_atomic(&rejects_path, &io::rejects_csv(&rejects)?)?;
    io::emit_json(Some(&a.output), &dataset)
}

fn forge(a: &crate::ForgeArgs, config: &Config) -> Result<()> {
    let corpus = io::load_corpus(a.corpus.corpus.as_deref())?;
    let mining = MiningConfig {
        threshold: a.threshold.unwrap_or(config.forge.threshold),
        max_iterations: a.max_iterations.unwrap_or(config.forge.max_iterations),
    };
    if mining.threshold == 0 {
        return Err(usage("--threshold must be at least 1"));
    }
    let r = forge_run(&corpus, &mining).map_err(|e| data(e.to_string()))?;
    for (i, t) in r.tilings.iter().enumerate() {
        if !graph_isomorphic(&t.reassemble(), &corpus[i]) {
            return Err(invariant(format!("tiling of monomer {i} does not reassemble")));
        }
    }
    if !r.converged {
        log::warn!("stopped after {} iterations without converging", r.iterations);
    }
    log::info!(
        "{} entries after {} iterations (converged: {})",
        r.vocabulary.len(),
        r.iterations,
        r.converged
    );
    io::emit_json(a.output.as_deref(), &r.vocabulary)
}

/// Lines of a record file; every line is a record, including empty ones.
fn records(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| data(format!("reading {}: {e}", path.display())))?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}

fn codec_lines(
    a: &crate::CodecArgs,
    f: impl Fn(&str) -> std::result::Result<String, String>,
) -> Result<()> {
    let input = records(&a.input)?;
    let mut out = Vec::with_capacity(input.len());
    let mut failed = 0usize;
    for (i, line) in input.iter().enumerate() {
        match f(line) {
            Ok(s) => out.push(s),
            Err(e) if a.lenient => {
                log::warn!("line {}: {e}", i + 1);
                failed += 1;
                out.push(String::new());
            }
            Err(e) => return Err(data(format!("{} line {}: {e}", a.input.display(), i + 1))),
        }
    }
    if failed > 0 {
        log::warn!("{failed} of {} lines failed", input.len());
    }
    io::emit(a.output.as_deref(), &io::lines_bytes(&out))
}

fn encode(a: &crate::CodecArgs) -> Result<()> {
    let vocab = io::read_vocabulary(&a.vocab)?;
    let enc = Encoder::new(&vocab);
    codec_lines(a, |s| {
        let g = io::parse_repeat_unit(s)?;
        enc.encode(&g).map(|h| h.to_string()).map_err(|e| e.to_string())
    })
}

fn decode(a: &crate::CodecArgs) -> Result<()> {
    let vocab = io::read_vocabulary(&a.vocab)?;
    let dec = Decoder::new(&vocab);
    codec_lines(a, |s| {
        let h = parse_happy_str(s).map_err(|e| e.to_string())?;
        dec.decode(&h).map(|g| write_smiles(&g)).map_err(|e| e.to_string())
    })
}

fn stats(a: &crate::StatsArgs) -> Result<()> {
    let vocab = io::read_vocabulary(&a.vocab)?;
    let corpus = io::load_corpus(a.corpus.corpus.as_deref())?;
    let s = length_stats_graphs(&corpus, &Encoder::new(&vocab)).map_err(|e| data(e.to_string()))?;
    io::emit_json(a.output.as_deref(), &s)
}

fn property_rows(dataset: &Dataset, property: &str) -> Result<(Vec<DescriptorVector>, Vec<f64>)> {
    let mut d = Vec::new();
    let mut y = Vec::new();
    for r in &dataset.records {
        if let Some(&v) = r.properties.get(property) {
            let g = io::parse_repeat_unit(&r.smiles).map_err(|e| data(format!("{}: {e}", r.smiles)))?;
            d.push(compute_descriptors(&g));
            y.push(v);
        }
    }
    Ok((d, y))
}

fn train_oracle(a: &crate::TrainOracleArgs, config: &Config, seed: u64) -> Result<()> {
    let dataset = io::read_dataset(&a.dataset)?;
    let (d, y) = property_rows(&dataset, &a.property)?;
    if d.is_empty() {
        return Err(data(format!("no records carry `{}`", a.property)));
    }
    let k = a.k.unwrap_or(config.oracle.k);
    let lambda = a.lambda.unwrap_or(config.oracle.lambda);
    let plan = SplitPlan {
        n_folds: a.folds.unwrap_or(config.oracle.folds),
        n_repeats: a.repeats.unwrap_or(config.oracle.repeats),
        seed,
    };
    if !(lambda >= 0.0) {
        return Err(usage("--lambda must be non-negative"));
    }
    let fit = train_oracle_descriptors(&a.property, &d, &y, k, lambda).map_err(|e| data(e.to_string()))?;
    let mut file = OracleFile::from(fit);
    if plan.n_folds >= 2 && plan.n_repeats >= 1 {
        let mut scores = Vec::new();
        for assign in kfold_split(d.len(), &plan) {
            let mut pred = vec![0.0; d.len()];
            for fold in 0..plan.n_folds {
                let (train_d, train_y): (Vec<DescriptorVector>, Vec<f64>) = (0..d.len())
                    .filter(|&i| assign[i] != fold)
                    .map(|i| (d[i].clone(), y[i]))
                    .unzip();
                let f = train_oracle_descriptors(&a.property, &train_d, &train_y, k, lambda)
                    .map_err(|e| data(format!("fold {fold}: {e}")))?;
                for i in (0..d.len()).filter(|&i| assign[i] == fold) {
                    pred[i] = f.oracle.predict_descriptors(&d[i]);
                }
            }
            scores.push(r2_score(&pred, &y).map_err(|e| data(e.to_string()))?);
        }
        log::info!("cross-validated R2 per repeat: {scores:?}");
        file.cv_r2 = Some(scores);
    }
    io::emit_json(a.output.as_deref(), &file)
}

fn predict(a: &crate::PredictArgs) -> Result<()> {
    let oracle = io::read_oracle(&a.oracle)?.oracle;
    let lines = records(&a.input)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["smiles", &oracle.property_name])?;
    for (i, s) in lines.iter().enumerate() {
        let g = parse_smiles(s).map_err(|e| data(format!("{} line {}: {e}", a.input.display(), i + 1)))?;
        w.write_record([s.as_str(), &oracle.predict(&g).to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| invariant(e.to_string()))?;
    io::emit(a.output.as_deref(), &bytes)
}

/// Token sequences of the encodable corpus members.
fn corpus_sequences(corpus: &[MolGraph], vocab: &Vocabulary) -> Vec<Vec<String>> {
    let enc = Encoder::new(vocab);
    let seqs: Vec<Vec<String>> = corpus.iter().filter_map(|g| enc.encode(g).ok()).map(|h| flatten(&h)).collect();
    if seqs.len() < corpus.len() {
        log::warn!("{} corpus monomers are not encodable and were skipped", corpus.len() - seqs.len());
    }
    seqs
}

fn load_policy(a: &crate::PolicyArgs, vocab: &Vocabulary, corpus: &[MolGraph], config: &Config) -> Result<Policy> {
    match &a.policy {
        Some(p) => {
            let policy = io::read_policy(p)?;
            for t in vocab.tokens() {
                if policy.token_id(t).is_none() {
                    return Err(data(format!("policy has no token {t} of the vocabulary")));
                }
            }
            Ok(policy)
        }
        None => {
            let seqs = corpus_sequences(corpus, vocab);
            if seqs.is_empty() {
                return Err(data("no corpus monomer is encodable with this vocabulary"));
            }
            Policy::pretrain(vocab, config.policy.context_length, &seqs, config.policy.smoothing)
                .map_err(|e| data(e.to_string()))
        }
    }
}

fn generate(a: &crate::GenerateArgs, config: &Config, seed: u64) -> Result<()> {
    let vocab = io::read_vocabulary(&a.policy.vocab)?;
    let corpus = match a.policy.policy {
        Some(_) => Vec::new(),
        None => io::load_corpus(a.policy.corpus.corpus.as_deref())?,
    };
    let policy = load_policy(&a.policy, &vocab, &corpus, config)?;
    let n = a.n.unwrap_or(config.generate.n);
    let max_len = a.max_len.unwrap_or(config.generate.max_len);
    let batch = sample_batch(&policy, n, max_len, seed);
    if let Some(p) = &a.policy_out {
        io::write_atomic(p, &io::to_json(&policy)?)?;
    }
    io::emit(a.output.as_deref(), &io::lines_bytes(&batch.texts))
}

fn rl(a: &crate::RlTrainArgs, config: &Config, base: &Path, seed: u64) -> Result<()> {
    let vocab = io::read_vocabulary(&a.policy.vocab)?;
    let corpus = io::load_corpus(a.policy.corpus.corpus.as_deref())?;
    let policy = load_policy(&a.policy, &vocab, &corpus, config)?;
    let mut section = config.rl.clone();
    if let Some(s) = a.steps {
        section.steps = s;
    }
    if let Some(b) = a.batch_size {
        section.batch_size = b;
    }
    let rl_config = section.to_rl_config(base, seed)?;
    rl_config.reward.validate().map_err(|e| usage(e.to_string()))?;
    let train = TrainSet::new(&corpus);
    let sa = SaModel::fit(&corpus).map_err(|e| data(e.to_string()))?;
    let ctx = RewardContext {
        train: Some(&train),
        sa: Some(&sa),
        vocab: Some(&vocab),
    };
    let decoder = Decoder::new(&vocab);
    let mut lines = Vec::with_capacity(rl_config.steps);
    let out = rl_train(&policy, &rl_config, &decoder, ctx, |s| {
        log::info!("step {} mean reward {:.4} validity {:?}", s.step, s.mean_reward, s.metrics.validity);
        lines.push(serde_json::to_string(s));
    })
    .map_err(|e| data(e.to_string()))?;
    let lines: Vec<String> = lines
        .into_iter()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| invariant(e.to_string()))?;
    if let Some(t) = &a.trajectory {
        io::write_atomic(t, &io::lines_bytes(&lines))?;
    }
    io::write_atomic(&a.output, &io::to_json(&out.policy)?)
}

/// Per-step distributions of each sample under `policy`; `None` when a
/// sample is not a token sequence of the policy.
fn replay_distributions(policy: &Policy, samples: &[String]) -> Option<Vec<Vec<Vec<f64>>>> {
    samples
        .iter()
        .map(|s| {
            let tokens: Vec<&str> = s.split_whitespace().collect();
            let ids = policy.ids(&tokens).ok()?;
            Some((0..ids.len()).map(|t| policy.next_distribution(&ids[..t])).collect())
        })
        .collect()
}

fn eval(a: &crate::EvaluateArgs) -> Result<()> {
    let vocab = a.vocab.as_deref().map(io::read_vocabulary).transpose()?;
    let samples = records(&a.input)?;
    let batch = if a.smiles {
        let enc = vocab.as_ref().map(Encoder::new);
        GenerationBatch::from_smiles(&samples, enc.as_ref())
    } else {
        let v = vocab.as_ref().ok_or_else(|| usage("--vocab is required for HAPPY input"))?;
        GenerationBatch::from_happy(&samples, &Decoder::new(v))
    };
    let train_graphs = if a.train_bundled {
        Some(io::load_corpus(None)?)
    } else {
        a.train.as_deref().map(|p| io::load_corpus(Some(p))).transpose()?
    };
    let train = train_graphs.as_deref().map(TrainSet::new);
    let sa = train_graphs
        .as_deref()
        .map(SaModel::fit)
        .transpose()
        .map_err(|e| data(e.to_string()))?;
    let scaffold = match (&a.scaffold_token, &a.scaffold_smiles) {
        (Some(t), _) => {
            let v = vocab.as_ref().ok_or_else(|| usage("--scaffold-token needs --vocab"))?;
            Some(Scaffold::token(t, v).map_err(|e| usage(e.to_string()))?)
        }
        (None, Some(s)) => Some(Scaffold::Subgraph(
            parse_smiles(s).map_err(|e| usage(format!("--scaffold-smiles: {e}")))?,
        )),
        (None, None) => None,
    };
    let dists = match &a.policy {
        Some(p) if !a.smiles => {
            let policy = io::read_policy(p)?;
            let d = replay_distributions(&policy, &samples);
            if d.is_none() {
                log::warn!("some samples are not sequences of the policy; entropy omitted");
            }
            d
        }
        _ => None,
    };
    let report = evaluate(
        &batch,
        &EvalContext {
            train: train.as_ref(),
            sa: sa.as_ref(),
            scaffold: scaffold.as_ref(),
            distributions: dists.as_deref(),
        },
    );
    io::emit_json(a.output.as_deref(), &report)
}

fn attribute(a: &crate::AttributeArgs, config: &Config) -> Result<()> {
    let oracle = io::read_oracle(&a.oracle)?.oracle;
    let vocab = io::read_vocabulary(&a.vocab)?;
    let g = io::parse_repeat_unit(&a.smiles).map_err(|e| data(format!("--smiles: {e}")))?;
    let h = Encoder::new(&vocab).encode(&g).map_err(|e| data(e.to_string()))?;
    let steps = a.steps.unwrap_or(config.attribute.steps);
    if steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let report = attribute_monomer(&oracle, &h, &vocab, steps).map_err(|e| data(e.to_string()))?;
    io::emit_json(a.output.as_deref(), &report)
}
