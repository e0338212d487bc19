use super::DesignError;
use crate::forge::Vocabulary;
use crate::fragment::{key_port_roles, PortRole};
use crate::molgraph::parse_smiles;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const BOS: u32 = 0;
pub const EOS: u32 = 1;
pub const BOS_TOKEN: &str = "<bos>";
pub const EOS_TOKEN: &str = "<eos>";
pub const DEFAULT_CONTEXT: usize = 3;
pub const DEFAULT_MAX_LEN: usize = 64;
/// Lower bound for fitted logits; keeps tables finite and JSON-safe.
pub const LOGIT_FLOOR: f64 = -50.0;

/// Tabular softmax policy over the previous `k` tokens. Contexts without a
/// table row are uniform; BOS is never emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub vocabulary: Vec<String>,
    pub context_length: usize,
    #[serde(with = "table")]
    pub logits: BTreeMap<Vec<u32>, Vec<f64>>,
    /// When present, only grammatical continuations get probability mass.
    #[serde(default)]
    pub grammar: Option<TokenGrammar>,
}

/// Arity of each policy token: `Some((has_next_port, sideline_groups))` for
/// fragment tokens usable in a HAPPY string, `None` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenGrammar {
    pub arity: Vec<Option<(bool, usize)>>,
    pub open: u32,
    pub close: u32,
}

impl TokenGrammar {
    /// Grammar for [`policy_tokens`] of `vocab`.
    pub fn from_vocabulary(vocab: &Vocabulary) -> Self {
        let mut arity = vec![None; 4];
        for e in &vocab.entries {
            let roles = parse_smiles(&e.key).map(|g| key_port_roles(&g)).unwrap_or_default();
            let count = |r: PortRole| roles.iter().filter(|&&x| x == r).count();
            let (prev, next, side) = (count(PortRole::Prev), count(PortRole::Next), count(PortRole::Sideline));
            arity.push((prev == 1 && next <= 1).then_some((next == 1, side)));
        }
        TokenGrammar { arity, open: 2, close: 3 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    mainline: bool,
    has_unit: bool,
    last_next: bool,
    owed: usize,
}

/// Parser state of a partial HAPPY token sequence.
#[derive(Debug, Clone)]
struct GrammarState {
    stack: Vec<Frame>,
}

impl GrammarState {
    fn new() -> Self {
        GrammarState {
            stack: vec![Frame {
                mainline: true,
                has_unit: false,
                last_next: false,
                owed: 0,
            }],
        }
    }

    fn allows(&self, g: &TokenGrammar, t: u32) -> bool {
        let Some(top) = self.stack.last() else {
            return false;
        };
        let settled = top.has_unit && top.owed == 0;
        if t == BOS {
            false
        } else if t == EOS {
            self.stack.len() == 1 && settled
        } else if t == g.open {
            top.has_unit && top.owed > 0
        } else if t == g.close {
            !top.mainline && settled && !top.last_next
        } else {
            match g.arity.get(t as usize).copied().flatten() {
                Some((next, _)) => {
                    top.owed == 0 && (!top.has_unit || top.last_next) && (next || !top.mainline)
                }
                None => false,
            }
        }
    }

    fn advance(&mut self, g: &TokenGrammar, t: u32) {
        if t == g.open {
            if let Some(top) = self.stack.last_mut() {
                top.owed = top.owed.saturating_sub(1);
            }
            self.stack.push(Frame {
                mainline: false,
                has_unit: false,
                last_next: false,
                owed: 0,
            });
        } else if t == g.close {
            self.stack.pop();
        } else if let (Some(top), Some((next, side))) =
            (self.stack.last_mut(), g.arity.get(t as usize).copied().flatten())
        {
            top.has_unit = true;
            top.last_next = next;
            top.owed = side;
        }
    }
}

mod table {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Row {
        context: Vec<u32>,
        logits: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(t: &BTreeMap<Vec<u32>, Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row> = t
            .iter()
            .map(|(c, l)| Row {
                context: c.clone(),
                logits: l.clone(),
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<u32>, Vec<f64>>, D::Error> {
        let rows = Vec::<Row>::deserialize(d)?;
        Ok(rows.into_iter().map(|r| (r.context, r.logits)).collect())
    }
}

/// Token list for a fragment vocabulary: BOS, EOS, the two group brackets,
/// then the vocabulary tokens.
pub fn policy_tokens(vocab: &Vocabulary) -> Vec<String> {
    let mut t = vec![BOS_TOKEN.to_string(), EOS_TOKEN.to_string(), "(".into(), ")".into()];
    t.extend(vocab.tokens().into_iter().map(String::from));
    t
}

/// Per-context gradient table.
pub type Gradient = BTreeMap<Vec<u32>, Vec<f64>>;

impl Policy {
    pub fn uniform(vocabulary: Vec<String>, context_length: usize) -> Self {
        Policy {
            vocabulary,
            context_length,
            logits: BTreeMap::new(),
            grammar: None,
        }
    }

    pub fn with_grammar(mut self, grammar: TokenGrammar) -> Self {
        self.grammar = Some(grammar);
        self
    }

    /// Maximum-likelihood k-gram table with additive smoothing `alpha`:
    /// seen contexts get `ln(count + alpha)`, floored at [`LOGIT_FLOOR`].
    pub fn fit<S: AsRef<str>>(
        vocabulary: Vec<String>,
        context_length: usize,
        sequences: &[Vec<S>],
        alpha: f64,
    ) -> Result<Self, DesignError> {
        let mut p = Policy::uniform(vocabulary, context_length);
        let v = p.vocabulary.len();
        let mut counts: BTreeMap<Vec<u32>, Vec<f64>> = BTreeMap::new();
        for seq in sequences {
            let ids = p.ids(seq)?;
            p.for_each_step(&ids, |ctx, tok, _| {
                counts.entry(ctx.to_vec()).or_insert_with(|| vec![0.0; v])[tok as usize] += 1.0;
            });
        }
        for (ctx, c) in counts {
            let row = c.iter().map(|&n| (n + alpha).ln().max(LOGIT_FLOOR)).collect();
            p.logits.insert(ctx, row);
        }
        Ok(p)
    }

    /// [`Policy::fit`] over [`policy_tokens`] of `vocab`, sampling restricted
    /// by the vocabulary's [`TokenGrammar`].
    pub fn pretrain<S: AsRef<str>>(
        vocab: &Vocabulary,
        context_length: usize,
        sequences: &[Vec<S>],
        alpha: f64,
    ) -> Result<Self, DesignError> {
        Ok(Policy::fit(policy_tokens(vocab), context_length, sequences, alpha)?
            .with_grammar(TokenGrammar::from_vocabulary(vocab)))
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.vocabulary.iter().position(|t| t == token).map(|i| i as u32)
    }

    /// Ids of body tokens followed by EOS.
    pub fn ids<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<u32>, DesignError> {
        let mut ids = tokens
            .iter()
            .map(|t| {
                self.token_id(t.as_ref())
                    .filter(|&i| i != BOS && i != EOS)
                    .ok_or_else(|| DesignError::UnknownToken(t.as_ref().to_string()))
            })
            .collect::<Result<Vec<u32>, _>>()?;
        ids.push(EOS);
        Ok(ids)
    }

    fn initial_context(&self) -> Vec<u32> {
        vec![BOS; self.context_length]
    }

    fn shift(ctx: &mut Vec<u32>, tok: u32) {
        if !ctx.is_empty() {
            ctx.remove(0);
            ctx.push(tok);
        }
    }

    /// Calls `f(context, token, distribution)` for every position of `ids`.
    fn for_each_step(&self, ids: &[u32], mut f: impl FnMut(&[u32], u32, &[f64])) {
        let mut ctx = self.initial_context();
        let mut state = GrammarState::new();
        for &t in ids {
            let p = self.step_distribution(&ctx, &state);
            f(&ctx, t, &p);
            if let Some(g) = &self.grammar {
                state.advance(g, t);
            }
            Self::shift(&mut ctx, t);
        }
    }

    /// Softmax of the context's logits (uniform for unseen contexts) over
    /// the tokens `allowed` admits.
    fn masked_distribution(&self, ctx: &[u32], allowed: impl Fn(u32) -> bool) -> Vec<f64> {
        let v = self.vocab_size();
        let mut p = vec![0.0; v];
        let row = self.logits.get(ctx);
        let logit = |i: usize| row.map_or(0.0, |l| l[i]);
        let m = (0..v)
            .filter(|&i| allowed(i as u32))
            .map(logit)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            p[EOS as usize] = 1.0;
            return p;
        }
        let mut z = 0.0;
        for (i, x) in p.iter_mut().enumerate() {
            if allowed(i as u32) {
                *x = (logit(i) - m).exp();
                z += *x;
            }
        }
        p.iter_mut().for_each(|x| *x /= z);
        p
    }

    fn step_distribution(&self, ctx: &[u32], state: &GrammarState) -> Vec<f64> {
        match &self.grammar {
            Some(g) => self.masked_distribution(ctx, |t| state.allows(g, t)),
            None => self.masked_distribution(ctx, |t| t != BOS),
        }
    }

    /// Next-token distribution of a context, ignoring any grammar;
    /// `probs[BOS] == 0`.
    pub fn distribution(&self, ctx: &[u32]) -> Vec<f64> {
        self.masked_distribution(ctx, |t| t != BOS)
    }

    /// Distribution after the body-token prefix `ids`, grammar applied.
    pub fn next_distribution(&self, ids: &[u32]) -> Vec<f64> {
        let mut ctx = self.initial_context();
        let mut state = GrammarState::new();
        for &t in ids {
            if let Some(g) = &self.grammar {
                state.advance(g, t);
            }
            Self::shift(&mut ctx, t);
        }
        self.step_distribution(&ctx, &state)
    }

    /// `sum log pi(token | prefix)` over `ids` (which include EOS when the
    /// sequence terminated).
    pub fn log_prob_ids(&self, ids: &[u32]) -> f64 {
        let mut lp = 0.0;
        self.for_each_step(ids, |_, t, p| lp += p[t as usize].ln());
        lp
    }

    /// Log-probability of a body token sequence followed by EOS.
    pub fn sequence_log_prob<S: AsRef<str>>(&self, tokens: &[S]) -> Result<f64, DesignError> {
        Ok(self.log_prob_ids(&self.ids(tokens)?))
    }

    /// `sum_i w_i * grad log pi(seq_i)` as a per-context table.
    pub fn gradient(&self, seqs: &[Vec<u32>], weights: &[f64]) -> Gradient {
        let v = self.vocab_size();
        let mut g: Gradient = BTreeMap::new();
        for (ids, &w) in seqs.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            self.for_each_step(ids, |ctx, t, p| {
                let row = g.entry(ctx.to_vec()).or_insert_with(|| vec![0.0; v]);
                for i in 1..v {
                    row[i] -= w * p[i];
                }
                row[t as usize] += w;
            });
        }
        g
    }

    /// Returns a policy with `step * gradient` added to the logits.
    pub fn apply(&self, grad: &Gradient, step: f64) -> Policy {
        let mut next = self.clone();
        let v = self.vocab_size();
        for (ctx, d) in grad {
            let row = next.logits.entry(ctx.clone()).or_insert_with(|| vec![0.0; v]);
            for (x, dx) in row.iter_mut().zip(d) {
                *x += step * dx;
            }
        }
        next
    }

    /// One autoregressive sample. Returns ids (with EOS when it was emitted
    /// within `max_len` tokens) and the distribution at every step.
    pub fn sample_one<R: Rng>(&self, rng: &mut R, max_len: usize) -> (Vec<u32>, Vec<Vec<f64>>) {
        let mut ctx = self.initial_context();
        let mut state = GrammarState::new();
        let mut ids = Vec::new();
        let mut dists = Vec::new();
        while ids.len() < max_len {
            let p = self.step_distribution(&ctx, &state);
            let t = WeightedIndex::new(&p).expect("distribution has positive mass").sample(rng) as u32;
            dists.push(p);
            ids.push(t);
            if t == EOS {
                break;
            }
            if let Some(g) = &self.grammar {
                state.advance(g, t);
            }
            Self::shift(&mut ctx, t);
        }
        (ids, dists)
    }

    /// Body text of a sampled id sequence: tokens joined by spaces.
    pub fn text(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter(|&&t| t != EOS && t != BOS)
            .map(|&t| self.vocabulary[t as usize].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Samples drawn from one policy with the per-step distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledBatch {
    pub ids: Vec<Vec<u32>>,
    pub texts: Vec<String>,
    pub distributions: Vec<Vec<Vec<f64>>>,
}

/// `n` samples; sample `i` uses its own ChaCha8 stream seeded from the
/// `i`-th draw of a ChaCha8 stream seeded with `seed`.
pub fn sample_batch(policy: &Policy, n: usize, max_len: usize, seed: u64) -> SampledBatch {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n).map(|_| master.gen()).collect();
    let draws: Vec<(Vec<u32>, Vec<Vec<f64>>)> = seeds
        .par_iter()
        .map(|&s| policy.sample_one(&mut ChaCha8Rng::seed_from_u64(s), max_len))
        .collect();
    let texts = draws.iter().map(|(ids, _)| policy.text(ids)).collect();
    let (ids, distributions) = draws.into_iter().unzip();
    SampledBatch {
        ids,
        texts,
        distributions,
    }
}
