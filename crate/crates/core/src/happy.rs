//! HAPPY strings: mainline subgroup tokens with nested sideline groups.
//!
//! Grammar (whitespace-separated tokens):
//! `happy := unit+`, `unit := TOKEN ('(' unit+ ')')*`.
//! Within a run of units each unit's prev port bonds to the previous unit's
//! next port; a group's first unit bonds to the host's next free sideline
//! port, in port-id order.

use crate::forge::{resolve_overlaps, Match, MonomerTiling, Vocabulary};
use crate::fragment::{
    assemble, fragment_both_directions, key_port_roles, FragmentError, FragmentTree, PortRole,
};
use crate::molgraph::{check_valence, parse_smiles, write_smiles, MolGraph};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HappyError {
    #[error("empty HAPPY string")]
    Empty,
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("fragment `{0}` is not covered by the vocabulary")]
    Uncovered(String),
    #[error("token `{token}`: {reason}")]
    Arity { token: String, reason: String },
    #[error("unbalanced markers at token {0}")]
    Unbalanced(usize),
    #[error("empty sideline group at token {0}")]
    EmptyGroup(usize),
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("decoded graph fails valence check: {0}")]
    Invalid(String),
    #[error("cannot tokenize `{ch}` at position {position}")]
    Tokenize { position: usize, ch: char },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HappyUnit {
    pub token: String,
    /// Sideline subtrees in host port order; each is a run of units.
    pub groups: Vec<Vec<HappyUnit>>,
}

impl HappyUnit {
    pub fn new(token: impl Into<String>) -> Self {
        HappyUnit {
            token: token.into(),
            groups: Vec::new(),
        }
    }

    fn flatten_into(&self, out: &mut Vec<String>) {
        out.push(self.token.clone());
        for g in &self.groups {
            out.push("(".into());
            for u in g {
                u.flatten_into(out);
            }
            out.push(")".into());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HappyString {
    pub units: Vec<HappyUnit>,
}

impl HappyString {
    /// All tokens, excluding structural markers.
    pub fn tokens(&self) -> Vec<&str> {
        fn walk<'a>(u: &'a HappyUnit, out: &mut Vec<&'a str>) {
            out.push(&u.token);
            for g in &u.groups {
                for v in g {
                    walk(v, out);
                }
            }
        }
        let mut out = Vec::new();
        for u in &self.units {
            walk(u, &mut out);
        }
        out
    }
}

impl fmt::Display for HappyString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&flatten(self).join(" "))
    }
}

/// Depth-first linearization with `(` `)` markers.
pub fn flatten(s: &HappyString) -> Vec<String> {
    let mut out = Vec::new();
    for u in &s.units {
        u.flatten_into(&mut out);
    }
    out
}

/// Inverse of [`flatten`].
pub fn parse_happy<S: AsRef<str>>(tokens: &[S]) -> Result<HappyString, HappyError> {
    let mut pos = 0;
    let units = parse_run(tokens, &mut pos)?;
    if pos < tokens.len() {
        return Err(HappyError::Unbalanced(pos));
    }
    if units.is_empty() {
        return Err(HappyError::Empty);
    }
    Ok(HappyString { units })
}

/// Parse a whitespace-separated HAPPY line.
pub fn parse_happy_str(text: &str) -> Result<HappyString, HappyError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    parse_happy(&tokens)
}

fn parse_run<S: AsRef<str>>(tokens: &[S], pos: &mut usize) -> Result<Vec<HappyUnit>, HappyError> {
    let mut units = Vec::new();
    while let Some(t) = tokens.get(*pos).map(AsRef::as_ref) {
        match t {
            ")" => break,
            "(" => return Err(HappyError::Unbalanced(*pos)),
            _ => {
                *pos += 1;
                let mut unit = HappyUnit::new(t);
                while tokens.get(*pos).map(AsRef::as_ref) == Some("(") {
                    let open = *pos;
                    *pos += 1;
                    let group = parse_run(tokens, pos)?;
                    if group.is_empty() {
                        return Err(HappyError::EmptyGroup(open));
                    }
                    if tokens.get(*pos).map(AsRef::as_ref) != Some(")") {
                        return Err(HappyError::Unbalanced(open));
                    }
                    *pos += 1;
                    unit.groups.push(group);
                }
                units.push(unit);
            }
        }
    }
    Ok(units)
}

/// Tile keys and layout of one tiled monomer, ready to be written.
fn build_happy(
    tree: &FragmentTree,
    tiles: &[Vec<usize>],
    token_of: &dyn Fn(&str) -> Option<String>,
) -> Result<HappyString, HappyError> {
    let mut tile_of = vec![usize::MAX; tree.len()];
    for (t, members) in tiles.iter().enumerate() {
        for &f in members {
            tile_of[f] = t;
        }
    }
    let keys: Vec<_> = tiles.iter().map(|m| tree.tile_key(m)).collect();
    let mut tokens = Vec::with_capacity(tiles.len());
    for k in &keys {
        tokens.push(token_of(&k.key).ok_or_else(|| HappyError::Uncovered(k.key.clone()))?);
    }
    let across = |t: usize, p: usize| -> Option<usize> {
        let (f, fp) = keys[t].ports[p];
        tree.links[f][fp].map(|(h, _)| tile_of[h])
    };
    fn unit(
        t: usize,
        keys: &[crate::fragment::TileKey],
        tokens: &[String],
        across: &dyn Fn(usize, usize) -> Option<usize>,
    ) -> HappyUnit {
        let mut u = HappyUnit::new(tokens[t].clone());
        for (p, role) in keys[t].roles.iter().enumerate() {
            if *role == PortRole::Sideline {
                if let Some(s) = across(t, p) {
                    u.groups.push(vec![unit(s, keys, tokens, across)]);
                }
            }
        }
        u
    }
    let mut units = Vec::new();
    let mut current = Some(tile_of[tree.end_fragments[0]]);
    while let Some(t) = current {
        units.push(unit(t, &keys, &tokens, &across));
        current = keys[t]
            .roles
            .iter()
            .position(|&r| r == PortRole::Next)
            .and_then(|p| across(t, p));
        if units.len() > tiles.len() {
            unreachable!("mainline revisits a tile");
        }
    }
    Ok(HappyString { units })
}

/// HAPPY string of a FORGE tiling.
pub fn encode_tiling(m: &MonomerTiling, vocab: &Vocabulary) -> Result<HappyString, HappyError> {
    let index = vocab.key_index();
    let tiles: Vec<Vec<usize>> = m.tiles.iter().map(|t| t.fragments.clone()).collect();
    build_happy(&m.tree, &tiles, &|k| index.get(k).map(|e| e.token.clone()))
}

/// Cheap composition summary used to skip fragment sets that cannot match
/// any vocabulary entry: per-element counts, aromatic atoms, port count.
type Signature = ([u16; 13], u16, usize);

fn graph_formula(g: &MolGraph) -> ([u16; 13], u16) {
    let mut counts = [0u16; 13];
    let mut aromatic = 0;
    for a in g.atoms() {
        if !a.is_wildcard() {
            counts[a.element as usize] += 1;
            aromatic += a.aromatic as u16;
        }
    }
    (counts, aromatic)
}

/// Vocabulary lookups for encoding, built once per vocabulary.
#[derive(Debug, Clone)]
pub struct Encoder<'v> {
    vocab: &'v Vocabulary,
    index: HashMap<&'v str, usize>,
    signatures: HashSet<Signature>,
    max_atoms: usize,
}

impl<'v> Encoder<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        let mut signatures = HashSet::new();
        for e in &vocab.entries {
            let g = parse_smiles(&e.key).expect("vocabulary keys parse");
            let (f, a) = graph_formula(&g);
            signatures.insert((f, a, g.wildcards().len()));
        }
        Encoder {
            vocab,
            index: vocab.entries.iter().enumerate().map(|(i, e)| (e.key.as_str(), i)).collect(),
            signatures,
            max_atoms: vocab.max_atom_count(),
        }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    fn token_of(&self, key: &str) -> Option<String> {
        self.index.get(key).map(|&i| self.vocab.entries[i].token.clone())
    }

    /// Connected fragment sets whose signature matches some entry.
    fn candidate_sets(&self, tree: &FragmentTree) -> Vec<Vec<usize>> {
        let info: Vec<(([u16; 13], u16), usize, usize)> = tree
            .fragments
            .iter()
            .map(|f| (graph_formula(&f.graph), f.heavy_atom_count(), f.ports.len()))
            .collect();
        let signature = |set: &[usize]| -> Signature {
            let mut counts = [0u16; 13];
            let mut aromatic = 0;
            let mut ports = 0;
            for &f in set {
                let ((c, a), _, p) = &info[f];
                for (x, y) in counts.iter_mut().zip(c) {
                    *x += y;
                }
                aromatic += a;
                ports += p;
            }
            (counts, aromatic, ports - 2 * (set.len() - 1))
        };
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut stack: Vec<(Vec<usize>, usize)> = Vec::new();
        for f in 0..tree.len() {
            if info[f].1 <= self.max_atoms && seen.insert(vec![f]) {
                stack.push((vec![f], info[f].1));
            }
        }
        let mut out = Vec::new();
        while let Some((set, atoms)) = stack.pop() {
            for &f in &set {
                for &(h, _) in tree.links[f].iter().flatten() {
                    if set.contains(&h) || atoms + info[h].1 > self.max_atoms {
                        continue;
                    }
                    let mut next = set.clone();
                    next.push(h);
                    next.sort_unstable();
                    if seen.insert(next.clone()) {
                        stack.push((next, atoms + info[h].1));
                    }
                }
            }
            if self.signatures.contains(&signature(&set)) {
                out.push(set);
            }
        }
        out.sort();
        out
    }

    /// Greedy vocabulary tiling of one orientation, with the same priorities
    /// as overlap resolution in mining.
    fn greedy_tiles(&self, tree: &FragmentTree) -> Result<Vec<Vec<usize>>, HappyError> {
        let mut matches = Vec::new();
        for set in self.candidate_sets(tree) {
            let k = tree.tile_key(&set);
            if let Some(&i) = self.index.get(k.key.as_str()) {
                let e = &self.vocab.entries[i];
                matches.push(Match {
                    key: k.key,
                    iteration: e.iteration,
                    atom_count: e.atom_count,
                    tiles: set,
                });
            }
        }
        let accepted = resolve_overlaps(matches);
        let mut covered = vec![false; tree.len()];
        for m in &accepted {
            for &f in &m.tiles {
                covered[f] = true;
            }
        }
        if let Some(f) = covered.iter().position(|c| !c) {
            return Err(HappyError::Uncovered(tree.fragments[f].canonical_key.clone()));
        }
        let mut tiles: Vec<Vec<usize>> = accepted.into_iter().map(|m| m.tiles).collect();
        tiles.sort();
        Ok(tiles)
    }

    /// Encode a repeat unit. Both mainline directions are tiled greedily and
    /// the lexicographically smaller flattened token sequence wins.
    pub fn encode(&self, g: &MolGraph) -> Result<HappyString, HappyError> {
        let token_of = |k: &str| self.token_of(k);
        let mut best: Option<(Vec<String>, HappyString)> = None;
        let mut first_err = None;
        for tree in fragment_both_directions(g)? {
            let attempt = self
                .greedy_tiles(&tree)
                .and_then(|t| build_happy(&tree, &t, &token_of));
            match attempt {
                Ok(h) => {
                    let flat = flatten(&h);
                    if best.as_ref().is_none_or(|(b, _)| flat < *b) {
                        best = Some((flat, h));
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        match best {
            Some((_, h)) => Ok(h),
            None => Err(first_err.expect("at least one direction tried")),
        }
    }
}

/// One-shot encode; see [`Encoder::encode`].
pub fn encode(g: &MolGraph, vocab: &Vocabulary) -> Result<HappyString, HappyError> {
    Encoder::new(vocab).encode(g)
}

/// Key graphs of vocabulary tokens, parsed once.
#[derive(Debug, Clone)]
pub struct Decoder {
    parts: HashMap<String, (MolGraph, Vec<PortRole>)>,
}

impl Decoder {
    pub fn new(vocab: &Vocabulary) -> Self {
        let parts = vocab
            .entries
            .iter()
            .map(|e| {
                let g = parse_smiles(&e.key).expect("vocabulary keys parse");
                let roles = key_port_roles(&g);
                (e.token.clone(), (g, roles))
            })
            .collect();
        Decoder { parts }
    }

    pub fn decode(&self, s: &HappyString) -> Result<MolGraph, HappyError> {
        if s.units.is_empty() {
            return Err(HappyError::Empty);
        }
        let mut b = Builder {
            decoder: self,
            parts: Vec::new(),
            joins: Vec::new(),
        };
        let ends = b.run(&s.units, None)?;
        let (first, last) = ends;
        let graphs: Vec<&MolGraph> = b.parts.iter().map(|&(t, _)| &self.parts[t].0).collect();
        let g = assemble(&graphs, &b.joins, &[first, last.expect("mainline ends in a next port")]);
        let report = check_valence(&g);
        if !report.valid {
            let v = &report.violations[0];
            return Err(HappyError::Invalid(format!("atom {}: {}", v.atom, v.reason)));
        }
        Ok(g)
    }
}

type PortRef = (usize, usize);

struct Builder<'a> {
    decoder: &'a Decoder,
    /// (token, sideline port ids) per instantiated unit
    parts: Vec<(&'a str, Vec<usize>)>,
    joins: Vec<(PortRef, PortRef)>,
}

impl<'a> Builder<'a> {
    /// Instantiate a run of units. Returns the first unit's prev port and the
    /// last unit's next port (if any). `host` is the sideline port a group
    /// hangs from; the mainline has none.
    fn run(
        &mut self,
        units: &'a [HappyUnit],
        host: Option<PortRef>,
    ) -> Result<(PortRef, Option<PortRef>), HappyError> {
        let mut first = None;
        let mut open_next: Option<PortRef> = None;
        for (k, u) in units.iter().enumerate() {
            let (_, roles) = self
                .decoder
                .parts
                .get(&u.token)
                .ok_or_else(|| HappyError::UnknownToken(u.token.clone()))?;
            let arity = |reason: &str| HappyError::Arity {
                token: u.token.clone(),
                reason: reason.into(),
            };
            let id = self.parts.len();
            let ports_with = |r: PortRole| -> Vec<usize> {
                roles.iter().enumerate().filter(|(_, &x)| x == r).map(|(i, _)| i).collect()
            };
            let prev = ports_with(PortRole::Prev);
            let next = ports_with(PortRole::Next);
            let side = ports_with(PortRole::Sideline);
            if prev.len() != 1 {
                return Err(arity("needs exactly one prev port"));
            }
            let is_last = k + 1 == units.len();
            let mainline = host.is_none();
            if next.len() > 1 || (next.is_empty() && (mainline || !is_last)) {
                return Err(arity("missing next port for the following unit"));
            }
            if !mainline && is_last && !next.is_empty() {
                return Err(arity("next port left open at the end of a sideline"));
            }
            if side.len() != u.groups.len() {
                return Err(arity(&format!(
                    "{} sideline ports but {} groups",
                    side.len(),
                    u.groups.len()
                )));
            }
            self.parts.push((&u.token, side.clone()));
            let p = (id, prev[0]);
            match (k, open_next) {
                (0, _) => first = Some(p),
                (_, Some(n)) => self.joins.push((n, p)),
                (_, None) => unreachable!("checked above"),
            }
            open_next = next.first().map(|&q| (id, q));
            for (g, &sp) in u.groups.iter().zip(&side) {
                let (root, _) = self.run(g, Some((id, sp)))?;
                self.joins.push(((id, sp), root));
            }
        }
        Ok((first.ok_or(HappyError::Empty)?, open_next))
    }
}

/// One-shot decode.
pub fn decode(s: &HappyString, vocab: &Vocabulary) -> Result<MolGraph, HappyError> {
    Decoder::new(vocab).decode(s)
}

/// Split SMILES into atom, bond, ring-closure, branch and wildcard tokens.
pub fn tokenize_smiles(text: &str) -> Result<Vec<String>, HappyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let len = match c {
            b'[' => match bytes[i..].iter().position(|&b| b == b']') {
                Some(close) => close + 1,
                None => return Err(HappyError::Tokenize { position: i, ch: '[' }),
            },
            b'%' if i + 2 < bytes.len()
                && bytes[i + 1].is_ascii_digit()
                && bytes[i + 2].is_ascii_digit() =>
            {
                3
            }
            b'C' if bytes.get(i + 1) == Some(&b'l') => 2,
            b'B' if bytes.get(i + 1) == Some(&b'r') => 2,
            b'S' if bytes.get(i + 1) == Some(&b'i') => 2,
            b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' | b'H' => 1,
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => 1,
            b'*' | b'(' | b')' | b'.' | b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => 1,
            b'0'..=b'9' => 1,
            _ => {
                return Err(HappyError::Tokenize {
                    position: i,
                    ch: text[i..].chars().next().unwrap_or('?'),
                })
            }
        };
        out.push(text[i..i + len].to_string());
        i += len;
    }
    Ok(out)
}

/// Sequence-length comparison over a tiled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub monomers: usize,
    pub vocabulary_size: usize,
    pub happy_mean: f64,
    pub happy_std: f64,
    pub smiles_mean: f64,
    pub smiles_std: f64,
    /// happy_mean / smiles_mean
    pub ratio: f64,
    /// Monomers whose two ends sit on one fragment.
    pub single_fragment_mainlines: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn summarize(happy: &[f64], smiles: &[f64], single: usize, vocabulary_size: usize) -> LengthStats {
    let (happy_mean, happy_std) = mean_std(happy);
    let (smiles_mean, smiles_std) = mean_std(smiles);
    LengthStats {
        monomers: happy.len(),
        vocabulary_size,
        happy_mean,
        happy_std,
        smiles_mean,
        smiles_std,
        ratio: happy_mean / smiles_mean,
        single_fragment_mainlines: single,
    }
}

/// HAPPY length counts tokens and markers; SMILES length counts tokens of the
/// canonical SMILES.
pub fn length_stats(tilings: &[MonomerTiling], vocab: &Vocabulary) -> Result<LengthStats, HappyError> {
    let mut happy = Vec::with_capacity(tilings.len());
    let mut smiles = Vec::with_capacity(tilings.len());
    let mut single = 0;
    for m in tilings {
        happy.push(flatten(&encode_tiling(m, vocab)?).len() as f64);
        smiles.push(tokenize_smiles(&write_smiles(&m.tree.monomer))?.len() as f64);
        if m.tree.ends_share_fragment() {
            single += 1;
        }
    }
    Ok(summarize(&happy, &smiles, single, vocab.len()))
}

/// [`length_stats`] for arbitrary monomers encoded with `encoder`; a
/// single-unit mainline counts as a single-fragment mainline.
pub fn length_stats_graphs(graphs: &[MolGraph], encoder: &Encoder) -> Result<LengthStats, HappyError> {
    let mut happy = Vec::with_capacity(graphs.len());
    let mut smiles = Vec::with_capacity(graphs.len());
    let mut single = 0;
    for g in graphs {
        let h = encoder.encode(g)?;
        if h.units.len() == 1 {
            single += 1;
        }
        happy.push(flatten(&h).len() as f64);
        smiles.push(tokenize_smiles(&write_smiles(g))?.len() as f64);
    }
    Ok(summarize(&happy, &smiles, single, encoder.vocabulary_size()))
}

/// Distinct tokens of a HAPPY string.
pub fn token_set(s: &HappyString) -> BTreeSet<&str> {
    s.tokens().into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{forge_run, MiningConfig};
    use crate::molgraph::graph_isomorphic;

    fn styrene_vocab() -> Vocabulary {
        // threshold high enough that only initial fragments exist
        let c = vec![parse_smiles("*CC(*)c1ccccc1").unwrap()];
        forge_run(&c, &MiningConfig { threshold: 10, max_iterations: 5 }).unwrap().vocabulary
    }

    #[test]
    fn styrene_shape() {
        let v = styrene_vocab();
        let g = parse_smiles("*CC(*)c1ccccc1").unwrap();
        let h = encode(&g, &v).unwrap();
        assert_eq!(h.units.len(), 2);
        assert_eq!(h.units.iter().map(|u| u.groups.len()).sum::<usize>(), 1);
        let tok = |k: &str| v.by_key(k).unwrap().token.clone();
        // the CH end sorts first: G0000 ( phenyl ) CH2
        let expect = [
            tok("[*:1]C([*:2])[*:3]"),
            "(".into(),
            tok("[*:1]c1ccccc1"),
            ")".into(),
            tok("[*:1]C[*:2]"),
        ];
        assert_eq!(flatten(&h), expect);
        assert!(graph_isomorphic(&decode(&h, &v).unwrap(), &g));
        // reversed spelling encodes identically
        let r = parse_smiles("c1ccccc1C(*)C*").unwrap();
        assert_eq!(encode(&r, &v).unwrap(), h);
    }

    #[test]
    fn single_token_unit() {
        let c = vec![parse_smiles("*C*").unwrap()];
        let v = forge_run(&c, &MiningConfig::default()).unwrap().vocabulary;
        let h = encode(&c[0], &v).unwrap();
        assert_eq!(h.to_string(), "G0000");
    }

    #[test]
    fn arity_and_token_errors() {
        let v = styrene_vocab();
        let phenyl = v.by_key("[*:1]c1ccccc1").unwrap().token.clone();
        let s = parse_happy_str(&format!("{phenyl} {phenyl}")).unwrap();
        assert!(matches!(decode(&s, &v), Err(HappyError::Arity { .. })));
        let s = parse_happy_str("G9999").unwrap();
        assert_eq!(decode(&s, &v), Err(HappyError::UnknownToken("G9999".into())));
    }

    #[test]
    fn uncovered_fragment_is_named() {
        let v = styrene_vocab();
        let err = encode(&parse_smiles("*CC(*)Cl").unwrap(), &v).unwrap_err();
        assert_eq!(err, HappyError::Uncovered("[*:1]Cl".into()));
    }

    #[test]
    fn flatten_round_trips() {
        for text in ["A", "A B ( C ) D", "A ( B ( C ) ( D E ) ) F ( G )"] {
            let h = parse_happy_str(text).unwrap();
            assert_eq!(h.to_string(), text);
            assert_eq!(parse_happy(&flatten(&h)).unwrap(), h);
        }
        assert_eq!(parse_happy_str("A ( B"), Err(HappyError::Unbalanced(1)));
        assert_eq!(parse_happy_str("A B )"), Err(HappyError::Unbalanced(2)));
        assert_eq!(parse_happy_str("A ( )"), Err(HappyError::EmptyGroup(1)));
        assert_eq!(parse_happy_str(""), Err(HappyError::Empty));
    }

    #[test]
    fn smiles_tokens() {
        assert_eq!(tokenize_smiles("CCO").unwrap(), ["C", "C", "O"]);
        assert_eq!(tokenize_smiles("c1ccccc1").unwrap().len(), 8);
        assert_eq!(
            tokenize_smiles("[*]C(Cl)Br").unwrap(),
            ["[*]", "C", "(", "Cl", ")", "Br"]
        );
        assert_eq!(tokenize_smiles("C%12CC%12").unwrap()[1], "%12");
        assert!(tokenize_smiles("C$").is_err());
    }
}
