//! Batch metrics for generated repeat units.

mod sa;

pub use sa::SaModel;

use crate::chemfeat::{morgan_fingerprint, tanimoto, FingerprintBits};
use crate::forge::Vocabulary;
use crate::happy::{parse_happy_str, token_set, Decoder, Encoder};
use crate::molgraph::{check_valence, contains_substructure, parse_smiles, write_smiles, MolGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("{0} is undefined for this batch")]
    Undefined(&'static str),
    #[error("empty reference corpus")]
    EmptyReference,
    #[error("distribution at sample {sample}, step {step} is not normalized")]
    NotNormalized { sample: usize, step: usize },
    #[error("unknown scaffold token {0}")]
    UnknownScaffold(String),
}

/// Generated samples with their decoded graphs. `decoded[i]` is present iff
/// sample `i` is valid; `fingerprints` and `tokens` are parallel.
#[derive(Debug, Clone, Default)]
pub struct GenerationBatch {
    pub samples: Vec<String>,
    pub decoded: Vec<Option<MolGraph>>,
    pub fingerprints: Vec<Option<FingerprintBits>>,
    /// Fragment tokens of each valid sample, when known.
    pub tokens: Vec<Option<BTreeSet<String>>>,
}

impl GenerationBatch {
    fn push(&mut self, sample: String, graph: Option<MolGraph>, tokens: Option<BTreeSet<String>>) {
        self.fingerprints.push(graph.as_ref().map(morgan_fingerprint));
        self.tokens.push(graph.as_ref().and(tokens));
        self.decoded.push(graph);
        self.samples.push(sample);
    }

    /// Space-separated HAPPY strings decoded with `decoder`.
    pub fn from_happy<S: AsRef<str>>(samples: &[S], decoder: &Decoder) -> Self {
        let mut b = GenerationBatch::default();
        for s in samples {
            let s = s.as_ref();
            let (g, toks) = match parse_happy_str(s) {
                Ok(h) => {
                    let toks = token_set(&h).into_iter().map(String::from).collect();
                    (decoder.decode(&h).ok(), Some(toks))
                }
                Err(_) => (None, None),
            };
            b.push(s.to_string(), g, toks);
        }
        b
    }

    /// SMILES samples; valid ones are optionally encoded to recover tokens.
    pub fn from_smiles<S: AsRef<str>>(samples: &[S], encoder: Option<&Encoder>) -> Self {
        let mut b = GenerationBatch::default();
        for s in samples {
            let s = s.as_ref();
            let g = parse_smiles(s).ok().filter(|g| check_valence(g).valid);
            let toks = match (&g, encoder) {
                (Some(g), Some(e)) => e
                    .encode(g)
                    .ok()
                    .map(|h| token_set(&h).into_iter().map(String::from).collect()),
                _ => None,
            };
            b.push(s.to_string(), g, toks);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn valid_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.decoded[i].is_some()).collect()
    }

    fn valid_fingerprints(&self) -> Vec<&FingerprintBits> {
        self.fingerprints.iter().flatten().collect()
    }
}

/// Reference molecules indexed for novelty and similarity lookups.
#[derive(Debug, Clone)]
pub struct TrainSet {
    pub canonical: HashSet<String>,
    pub fingerprints: Vec<FingerprintBits>,
    /// (atom count, bond count) of every member; molecules of other sizes
    /// are novel without canonicalization.
    sizes: HashSet<(usize, usize)>,
}

impl TrainSet {
    pub fn new(graphs: &[MolGraph]) -> Self {
        TrainSet {
            canonical: graphs.iter().map(write_smiles).collect(),
            fingerprints: graphs.iter().map(morgan_fingerprint).collect(),
            sizes: graphs.iter().map(|g| (g.atom_count(), g.bond_count())).collect(),
        }
    }

    pub fn contains(&self, g: &MolGraph) -> bool {
        self.sizes.contains(&(g.atom_count(), g.bond_count())) && self.canonical.contains(&write_smiles(g))
    }
}

pub fn validity_fraction(batch: &GenerationBatch) -> Result<f64, MetricsError> {
    if batch.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    Ok(batch.valid_indices().len() as f64 / batch.len() as f64)
}

/// Fraction of valid samples whose canonical SMILES is absent from `train`.
pub fn novelty_fraction(batch: &GenerationBatch, train: &TrainSet) -> Result<f64, MetricsError> {
    let valid: Vec<&MolGraph> = batch.decoded.iter().flatten().collect();
    if valid.is_empty() {
        return Err(MetricsError::Undefined("novelty"));
    }
    let novel = valid
        .iter()
        .filter(|g| !train.contains(g))
        .count();
    Ok(novel as f64 / valid.len() as f64)
}

/// Most similar reference fingerprint as (index, similarity); ties go to
/// the lowest index. `None` for an empty reference.
pub fn nearest_neighbor(fp: &FingerprintBits, train: &[FingerprintBits]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in train.iter().enumerate() {
        let s = tanimoto(fp, t);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

pub fn nearest_train_similarity(fp: &FingerprintBits, train: &[FingerprintBits]) -> f64 {
    nearest_neighbor(fp, train).map_or(0.0, |(_, s)| s)
}

/// Mean nearest-train similarity over valid samples.
pub fn mean_similarity(batch: &GenerationBatch, train: &TrainSet) -> Result<f64, MetricsError> {
    let fps = batch.valid_fingerprints();
    if fps.is_empty() {
        return Err(MetricsError::Undefined("similarity"));
    }
    if train.fingerprints.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let total: f64 = fps
        .iter()
        .map(|fp| nearest_train_similarity(fp, &train.fingerprints))
        .sum();
    Ok(total / fps.len() as f64)
}

pub const DIVERSITY_NEIGHBORS: usize = 10;

/// Mean over valid samples of the average `1 - sim` to their
/// `min(10, n - 1)` most similar valid peers.
pub fn internal_diversity(batch: &GenerationBatch) -> Result<f64, MetricsError> {
    let fps = batch.valid_fingerprints();
    let n = fps.len();
    if n < 2 {
        return Err(MetricsError::Undefined("internal diversity"));
    }
    let m = DIVERSITY_NEIGHBORS.min(n - 1);
    let mut total = 0.0;
    for i in 0..n {
        let mut sims: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| tanimoto(fps[i], fps[j]))
            .collect();
        sims.sort_by(|a, b| b.total_cmp(a));
        total += sims[..m].iter().map(|s| 1.0 - s).sum::<f64>() / m as f64;
    }
    Ok(total / n as f64)
}

/// Mean over valid samples of `1 - c(t)/N`, where `t` is the sample's
/// nearest training neighbour, `c(t)` counts valid samples sharing it and
/// `N` is the full batch size.
pub fn specificity(batch: &GenerationBatch, train: &TrainSet) -> Result<f64, MetricsError> {
    let fps = batch.valid_fingerprints();
    if fps.is_empty() {
        return Err(MetricsError::Undefined("specificity"));
    }
    let nearest: Vec<usize> = fps
        .iter()
        .map(|fp| nearest_neighbor(fp, &train.fingerprints).map(|(i, _)| i))
        .collect::<Option<_>>()
        .ok_or(MetricsError::EmptyReference)?;
    let mut counts = vec![0usize; train.fingerprints.len()];
    for &t in &nearest {
        counts[t] += 1;
    }
    let n = batch.len() as f64;
    let total: f64 = nearest.iter().map(|&t| 1.0 - counts[t] as f64 / n).sum();
    Ok(total / fps.len() as f64)
}

pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Mean Shannon entropy (natural log) of next-token distributions, over all
/// steps of all sampled sequences.
pub fn policy_entropy(dists: &[Vec<Vec<f64>>]) -> Result<f64, MetricsError> {
    let mut total = 0.0;
    let mut steps = 0usize;
    for (sample, seq) in dists.iter().enumerate() {
        for (step, p) in seq.iter().enumerate() {
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE || p.iter().any(|&x| x < 0.0) {
                return Err(MetricsError::NotNormalized { sample, step });
            }
            total -= p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
            steps += 1;
        }
    }
    if steps == 0 {
        return Err(MetricsError::Undefined("entropy"));
    }
    Ok(total / steps as f64)
}

/// A scaffold given either as a vocabulary token or as a graph pattern.
#[derive(Debug, Clone)]
pub enum Scaffold {
    Token(String),
    Subgraph(MolGraph),
}

impl Scaffold {
    /// Checks that a token scaffold names a vocabulary entry.
    pub fn token(token: &str, vocab: &Vocabulary) -> Result<Self, MetricsError> {
        vocab
            .by_token(token)
            .map(|_| Scaffold::Token(token.to_string()))
            .ok_or_else(|| MetricsError::UnknownScaffold(token.to_string()))
    }

    /// Whether valid sample `i` contains the scaffold.
    pub fn matches(&self, batch: &GenerationBatch, i: usize) -> bool {
        let Some(g) = &batch.decoded[i] else {
            return false;
        };
        match self {
            Scaffold::Token(t) => batch.tokens[i].as_ref().is_some_and(|s| s.contains(t)),
            Scaffold::Subgraph(p) => contains_substructure(g, p),
        }
    }
}

pub fn scaffold_fraction(batch: &GenerationBatch, scaffold: &Scaffold) -> Result<f64, MetricsError> {
    let valid = batch.valid_indices();
    if valid.is_empty() {
        return Err(MetricsError::Undefined("scaffold fraction"));
    }
    let hits = valid.iter().filter(|&&i| scaffold.matches(batch, i)).count();
    Ok(hits as f64 / valid.len() as f64)
}

/// Flat metrics record; undefined metrics serialize as null.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub validity: Option<f64>,
    pub novelty: Option<f64>,
    pub mean_similarity: Option<f64>,
    pub internal_diversity: Option<f64>,
    pub mean_sa: Option<f64>,
    pub specificity: Option<f64>,
    pub entropy: Option<f64>,
    pub scaffold_fraction: Option<f64>,
}

/// Optional inputs for [`evaluate`].
#[derive(Default)]
pub struct EvalContext<'a> {
    pub train: Option<&'a TrainSet>,
    pub sa: Option<&'a SaModel>,
    pub scaffold: Option<&'a Scaffold>,
    pub distributions: Option<&'a [Vec<Vec<f64>>]>,
}

pub fn evaluate(batch: &GenerationBatch, ctx: &EvalContext) -> MetricsReport {
    let valid: Vec<&MolGraph> = batch.decoded.iter().flatten().collect();
    MetricsReport {
        validity: validity_fraction(batch).ok(),
        novelty: ctx.train.and_then(|t| novelty_fraction(batch, t).ok()),
        mean_similarity: ctx.train.and_then(|t| mean_similarity(batch, t).ok()),
        internal_diversity: internal_diversity(batch).ok(),
        mean_sa: ctx.sa.filter(|_| !valid.is_empty()).map(|m| {
            valid.iter().map(|g| m.score(g)).sum::<f64>() / valid.len() as f64
        }),
        specificity: ctx.train.and_then(|t| specificity(batch, t).ok()),
        entropy: ctx.distributions.and_then(|d| policy_entropy(d).ok()),
        scaffold_fraction: ctx.scaffold.and_then(|s| scaffold_fraction(batch, s).ok()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(s: &[&str]) -> GenerationBatch {
        GenerationBatch::from_smiles(s, None)
    }

    fn train(s: &[&str]) -> TrainSet {
        let g: Vec<MolGraph> = s.iter().map(|x| parse_smiles(x).unwrap()).collect();
        TrainSet::new(&g)
    }

    #[test]
    fn validity_counts() {
        assert_eq!(validity_fraction(&batch(&["CC", "CO", "C(C", "CCO"])), Ok(0.75));
        assert_eq!(validity_fraction(&batch(&["C(", "C(C)(C)(C)(C)C"])), Ok(0.0));
        assert_eq!(validity_fraction(&batch(&[])), Err(MetricsError::EmptyBatch));
    }

    #[test]
    fn novelty_uses_canonical_form() {
        let t = train(&["OCC", "c1ccccc1"]);
        assert_eq!(novelty_fraction(&batch(&["CCO", "c1ccccc1"]), &t), Ok(0.0));
        assert_eq!(novelty_fraction(&batch(&["CCO", "CCN", "x"]), &t), Ok(0.5));
        assert!(novelty_fraction(&batch(&["x"]), &t).is_err());
    }

    #[test]
    fn similarity_and_specificity() {
        let t = train(&["CCO", "c1ccccc1"]);
        let b = batch(&["OCC", "CCO", "C1CCCCC1", "bad"]);
        let s = mean_similarity(&b, &t).unwrap();
        assert!(s <= 1.0 && s > 2.0 / 3.0);
        // all four distinct neighbours: 1 - 1/4 each
        let t4 = train(&["C", "CC", "CCC", "CCCC"]);
        let b4 = batch(&["C", "CC", "CCC", "CCCC"]);
        assert_eq!(specificity(&b4, &t4), Ok(0.75));
        let same = batch(&["C", "C", "C", "C"]);
        assert_eq!(specificity(&same, &t4), Ok(0.0));
    }

    #[test]
    fn diversity_of_duplicates_is_zero() {
        assert_eq!(internal_diversity(&batch(&["CCO", "OCC", "C(O)C"])), Ok(0.0));
        assert!(internal_diversity(&batch(&["CCO"])).is_err());
        let b = batch(&["CCO", "c1ccccc1"]);
        let sim = tanimoto(b.fingerprints[0].as_ref().unwrap(), b.fingerprints[1].as_ref().unwrap());
        assert!((internal_diversity(&b).unwrap() - (1.0 - sim)).abs() < 1e-15);
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(policy_entropy(&[vec![vec![0.0, 1.0, 0.0]]]), Ok(0.0));
        let u = vec![1.0 / 865.0; 865];
        assert!((policy_entropy(&[vec![u]]).unwrap() - 865f64.ln()).abs() < 1e-9);
        let two = vec![vec![vec![0.5, 0.5], vec![1.0, 0.0]]];
        assert!((policy_entropy(&two).unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!(matches!(
            policy_entropy(&[vec![vec![0.5, 0.4]]]),
            Err(MetricsError::NotNormalized { .. })
        ));
    }

    #[test]
    fn scaffold_subgraph_mode() {
        let b = batch(&["*CC(*)c1ccccc1", "*CC(*)C", "*CC(*)c1ccc(Cl)cc1", "*Oc1ccccc1*", "?"]);
        let s = Scaffold::Subgraph(parse_smiles("*c1ccccc1").unwrap());
        assert_eq!(scaffold_fraction(&b, &s), Ok(0.75));
        let none = Scaffold::Subgraph(parse_smiles("C#N").unwrap());
        assert_eq!(scaffold_fraction(&b, &none), Ok(0.0));
    }

    #[test]
    fn report_serializes_nulls() {
        let r = MetricsReport {
            validity: Some(1.0),
            ..Default::default()
        };
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["validity"], 1.0);
        assert!(j["novelty"].is_null());
    }
}
