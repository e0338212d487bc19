//! Frequency-driven re-grouping of adjacent fragments into larger subgroups,
//! iterated to a fixpoint.

use crate::fragment::{assemble, fragment_acyclic, FragmentError, FragmentTree};
use crate::molgraph::{parse_smiles, write_smiles, MolGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

pub const VOCABULARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("threshold must be at least 1")]
    ZeroThreshold,
    #[error("monomer {index}: {source}")]
    Fragment {
        index: usize,
        #[source]
        source: FragmentError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub threshold: usize,
    pub max_iterations: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            threshold: 100,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub token: String,
    pub key: String,
    pub atom_count: usize,
    pub iteration: usize,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub schema_version: u32,
    pub threshold: usize,
    pub corpus_hash: String,
    pub entries: Vec<VocabularyEntry>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn by_token(&self, token: &str) -> Option<&VocabularyEntry> {
        self.entries.iter().find(|e| e.token == token)
    }

    pub fn by_key(&self, key: &str) -> Option<&VocabularyEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn key_index(&self) -> HashMap<&str, &VocabularyEntry> {
        self.entries.iter().map(|e| (e.key.as_str(), e)).collect()
    }

    pub fn max_atom_count(&self) -> usize {
        self.entries.iter().map(|e| e.atom_count).max().unwrap_or(0)
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.token.as_str()).collect()
    }
}

/// Hex SHA-256 over the canonical SMILES of the corpus joined by newlines.
pub fn corpus_hash(corpus: &[MolGraph]) -> String {
    let joined: Vec<String> = corpus.iter().map(write_smiles).collect();
    let digest = Sha256::digest(joined.join("\n").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn token_name(index: usize) -> String {
    format!("G{index:04}")
}

/// A group of fragments standing for one vocabulary entry. Merged tiles
/// remember the two tiles they were built from so pruning can undo them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tile {
    pub key: String,
    /// Sorted fragment indices.
    pub fragments: Vec<usize>,
    pub parts: Option<Box<(Tile, Tile)>>,
}

impl Tile {
    fn leaf(key: String, fragment: usize) -> Tile {
        Tile {
            key,
            fragments: vec![fragment],
            parts: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomerTiling {
    pub tree: FragmentTree,
    /// Ordered by smallest fragment index.
    pub tiles: Vec<Tile>,
}

impl MonomerTiling {
    pub fn from_tree(tree: FragmentTree) -> Self {
        let tiles = tree
            .fragments
            .iter()
            .enumerate()
            .map(|(i, f)| Tile::leaf(f.canonical_key.clone(), i))
            .collect();
        MonomerTiling { tree, tiles }
    }

    /// Tile index of every fragment.
    pub fn tile_of(&self) -> Vec<usize> {
        let mut of = vec![usize::MAX; self.tree.len()];
        for (t, tile) in self.tiles.iter().enumerate() {
            for &f in &tile.fragments {
                of[f] = t;
            }
        }
        of
    }

    /// Adjacent tile pairs `(a, b)` with `a < b`, one per crossing tree edge.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let of = self.tile_of();
        let mut pairs: Vec<(usize, usize)> = self
            .tree
            .edges
            .iter()
            .filter_map(|e| {
                let (a, b) = (of[e.fragment_a], of[e.fragment_b]);
                (a != b).then_some((a.min(b), a.max(b)))
            })
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Whether the tiles partition the fragments.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.tree.len()];
        for tile in &self.tiles {
            for &f in &tile.fragments {
                if seen[f] {
                    return false;
                }
                seen[f] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Rebuild the monomer from the tile keys alone.
    pub fn reassemble(&self) -> MolGraph {
        let keys: Vec<_> = self
            .tiles
            .iter()
            .map(|t| self.tree.tile_key(&t.fragments))
            .collect();
        let graphs: Vec<MolGraph> = keys
            .iter()
            .map(|k| parse_smiles(&k.key).expect("tile keys parse"))
            .collect();
        let mut where_port = HashMap::new();
        for (t, k) in keys.iter().enumerate() {
            for (p, &fp) in k.ports.iter().enumerate() {
                where_port.insert(fp, (t, p));
            }
        }
        let joins: Vec<_> = self
            .tree
            .edges
            .iter()
            .filter_map(|e| {
                let a = where_port.get(&(e.fragment_a, e.port_a))?;
                let b = where_port.get(&(e.fragment_b, e.port_b))?;
                Some((*a, *b))
            })
            .collect();
        let ends: Vec<_> = (0..2)
            .map(|i| where_port[&(self.tree.end_fragments[i], self.tree.end_ports[i])])
            .collect();
        let parts: Vec<&MolGraph> = graphs.iter().collect();
        assemble(&parts, &joins, &ends)
    }
}

/// Counted merge candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub count: usize,
    pub atom_count: usize,
}

/// One adjacent-pair occurrence whose merged subgroup respects the port bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub key: String,
    pub atom_count: usize,
    pub tiles: (usize, usize),
}

/// Merge candidates of one monomer: every adjacent tile pair whose union has
/// at most two external ports.
pub fn monomer_candidates(m: &MonomerTiling) -> Vec<Occurrence> {
    m.adjacent_pairs()
        .into_iter()
        .filter_map(|(a, b)| {
            let mut members = m.tiles[a].fragments.clone();
            members.extend_from_slice(&m.tiles[b].fragments);
            members.sort_unstable();
            let k = m.tree.tile_key(&members);
            (k.ports.len() <= 2).then_some(Occurrence {
                key: k.key,
                atom_count: k.atom_count,
                tiles: (a, b),
            })
        })
        .collect()
}

/// Candidate counts over the corpus. Every occurrence counts, including
/// repeats within one monomer, except that occurrences of the same key that
/// share a tile are counted once (only one of them can ever be merged).
pub fn enumerate_candidates(tilings: &[MonomerTiling]) -> BTreeMap<String, Candidate> {
    count_occurrences(&tilings.par_iter().map(monomer_candidates).collect::<Vec<_>>())
}

fn count_occurrences(per_monomer: &[Vec<Occurrence>]) -> BTreeMap<String, Candidate> {
    let mut counts: BTreeMap<String, Candidate> = BTreeMap::new();
    for occ in per_monomer.iter().flat_map(|o| non_overlapping(o)) {
        counts
            .entry(occ.key.clone())
            .or_insert(Candidate {
                count: 0,
                atom_count: occ.atom_count,
            })
            .count += 1;
    }
    counts
}

/// Occurrences in tile-pair order, skipping any that reuse a tile already
/// claimed by an earlier occurrence of the same key.
fn non_overlapping(occ: &[Occurrence]) -> Vec<&Occurrence> {
    let mut used: BTreeSet<(&str, usize)> = BTreeSet::new();
    let mut out = Vec::new();
    for o in occ {
        if used.contains(&(o.key.as_str(), o.tiles.0)) || used.contains(&(o.key.as_str(), o.tiles.1)) {
            continue;
        }
        used.insert((o.key.as_str(), o.tiles.0));
        used.insert((o.key.as_str(), o.tiles.1));
        out.push(o);
    }
    out
}

/// A match offered to [`resolve_overlaps`]: merge the listed tiles into one
/// tile with `key`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub key: String,
    pub iteration: usize,
    pub atom_count: usize,
    pub tiles: Vec<usize>,
}

/// Greedy overlap resolution: later iteration first, then more atoms, then
/// smaller key, then earlier tiles. A match is taken only if none of its
/// tiles is already consumed. Returns the accepted matches in that order.
pub fn resolve_overlaps(mut matches: Vec<Match>) -> Vec<Match> {
    matches.sort_by(|x, y| {
        y.iteration
            .cmp(&x.iteration)
            .then(y.atom_count.cmp(&x.atom_count))
            .then_with(|| x.key.cmp(&y.key))
            .then_with(|| x.tiles.cmp(&y.tiles))
    });
    let mut used = BTreeSet::new();
    let mut accepted = Vec::new();
    for m in matches {
        if m.tiles.iter().any(|t| used.contains(t)) {
            continue;
        }
        used.extend(m.tiles.iter().copied());
        accepted.push(m);
    }
    accepted
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EntryInfo {
    atom_count: usize,
    iteration: usize,
}

/// Mining state: corpus tilings plus the live entries.
#[derive(Debug, Clone)]
pub struct ForgeState {
    pub tilings: Vec<MonomerTiling>,
    entries: BTreeMap<String, EntryInfo>,
    /// Steps taken so far; new entries get `iterations + 1`.
    pub iterations: usize,
    corpus_hash: String,
}

#[derive(Debug, Clone)]
pub struct ForgeResult {
    pub vocabulary: Vocabulary,
    pub tilings: Vec<MonomerTiling>,
    /// Steps executed, including the final one that changed nothing.
    pub iterations: usize,
    /// Whether the last step changed nothing (false: stopped by the cap).
    pub converged: bool,
}

impl ForgeState {
    pub fn new(corpus: &[MolGraph]) -> Result<Self, ForgeError> {
        if corpus.is_empty() {
            return Err(ForgeError::EmptyCorpus);
        }
        let trees: Vec<FragmentTree> = corpus
            .par_iter()
            .enumerate()
            .map(|(index, g)| fragment_acyclic(g).map_err(|source| ForgeError::Fragment { index, source }))
            .collect::<Result<_, _>>()?;
        let mut entries = BTreeMap::new();
        for t in &trees {
            for f in &t.fragments {
                entries.entry(f.canonical_key.clone()).or_insert(EntryInfo {
                    atom_count: f.heavy_atom_count(),
                    iteration: 0,
                });
            }
        }
        Ok(ForgeState {
            tilings: trees.into_iter().map(MonomerTiling::from_tree).collect(),
            entries,
            iterations: 0,
            corpus_hash: corpus_hash(corpus),
        })
    }

    pub fn frequencies(&self) -> BTreeMap<String, usize> {
        let mut freq: BTreeMap<String, usize> = self.entries.keys().map(|k| (k.clone(), 0)).collect();
        for m in &self.tilings {
            for t in &m.tiles {
                *freq.entry(t.key.clone()).or_insert(0) += 1;
            }
        }
        freq
    }

    /// One discover, promote, rewrite, prune round. Returns whether the
    /// tilings or the live entry set changed.
    pub fn step(&mut self, threshold: usize) -> bool {
        let before_tiles: Vec<Vec<Tile>> = self.tilings.iter().map(|m| m.tiles.clone()).collect();
        let before_entries = self.entries.clone();
        let next_iteration = self.iterations + 1;
        self.iterations = next_iteration;

        let occurrences: Vec<Vec<Occurrence>> =
            self.tilings.par_iter().map(monomer_candidates).collect();
        let counts = count_occurrences(&occurrences);
        let promoted: BTreeMap<&String, &Candidate> =
            counts.iter().filter(|(_, c)| c.count > threshold).collect();
        for (key, c) in &promoted {
            self.entries.entry((*key).clone()).or_insert(EntryInfo {
                atom_count: c.atom_count,
                iteration: next_iteration,
            });
        }

        let entries = &self.entries;
        self.tilings
            .par_iter_mut()
            .zip(occurrences.par_iter())
            .for_each(|(m, occ)| {
                let matches: Vec<Match> = occ
                    .iter()
                    .filter(|o| promoted.contains_key(&o.key))
                    .map(|o| Match {
                        key: o.key.clone(),
                        iteration: entries[&o.key].iteration,
                        atom_count: o.atom_count,
                        tiles: vec![o.tiles.0, o.tiles.1],
                    })
                    .collect();
                if !matches.is_empty() {
                    apply_matches(m, resolve_overlaps(matches));
                }
            });

        self.prune(threshold);
        let changed = self.entries != before_entries
            || self
                .tilings
                .iter()
                .zip(&before_tiles)
                .any(|(m, b)| &m.tiles != b);
        changed
    }

    /// Remove merged entries whose frequency fell below the threshold,
    /// re-expanding their tiles, until no such entry is left.
    fn prune(&mut self, threshold: usize) {
        loop {
            let freq = self.frequencies();
            let dead: BTreeSet<String> = self
                .entries
                .iter()
                .filter(|(k, e)| e.iteration >= 1 && freq.get(*k).copied().unwrap_or(0) < threshold)
                .map(|(k, _)| k.clone())
                .collect();
            if dead.is_empty() {
                return;
            }
            for k in &dead {
                self.entries.remove(k);
            }
            let live = &self.entries;
            for m in &mut self.tilings {
                let mut tiles = Vec::with_capacity(m.tiles.len());
                for t in m.tiles.drain(..) {
                    expand_into(t, live, &mut tiles);
                }
                tiles.sort_by_key(|t| t.fragments[0]);
                m.tiles = tiles;
            }
        }
    }

    pub fn vocabulary(&self, threshold: usize) -> Vocabulary {
        let freq = self.frequencies();
        let mut live: Vec<(&String, &EntryInfo)> = self.entries.iter().collect();
        live.sort_by(|a, b| a.1.iteration.cmp(&b.1.iteration).then_with(|| a.0.cmp(b.0)));
        Vocabulary {
            schema_version: VOCABULARY_SCHEMA_VERSION,
            threshold,
            corpus_hash: self.corpus_hash.clone(),
            entries: live
                .into_iter()
                .enumerate()
                .map(|(i, (k, e))| VocabularyEntry {
                    token: token_name(i),
                    key: k.clone(),
                    atom_count: e.atom_count,
                    iteration: e.iteration,
                    frequency: freq.get(k).copied().unwrap_or(0),
                })
                .collect(),
        }
    }

    /// Step until nothing changes or the iteration cap is hit.
    pub fn run(mut self, config: &MiningConfig) -> Result<ForgeResult, ForgeError> {
        if config.threshold == 0 {
            return Err(ForgeError::ZeroThreshold);
        }
        let mut converged = false;
        let mut steps = 0;
        while steps < config.max_iterations {
            steps += 1;
            if !self.step(config.threshold) {
                converged = true;
                break;
            }
        }
        Ok(ForgeResult {
            vocabulary: self.vocabulary(config.threshold),
            tilings: self.tilings,
            iterations: steps,
            converged,
        })
    }

    /// Resume from existing tilings and a vocabulary they were mined with.
    pub fn resume(tilings: Vec<MonomerTiling>, vocab: &Vocabulary) -> Self {
        ForgeState {
            tilings,
            entries: vocab
                .entries
                .iter()
                .map(|e| {
                    (
                        e.key.clone(),
                        EntryInfo {
                            atom_count: e.atom_count,
                            iteration: e.iteration,
                        },
                    )
                })
                .collect(),
            iterations: vocab.entries.iter().map(|e| e.iteration).max().unwrap_or(0),
            corpus_hash: vocab.corpus_hash.clone(),
        }
    }
}

fn apply_matches(m: &mut MonomerTiling, accepted: Vec<Match>) {
    let mut slots: Vec<Option<Tile>> = m.tiles.drain(..).map(Some).collect();
    let mut merged = Vec::new();
    for mt in accepted {
        let a = slots[mt.tiles[0]].take().expect("tile consumed once");
        let b = slots[mt.tiles[1]].take().expect("tile consumed once");
        let mut fragments = a.fragments.clone();
        fragments.extend_from_slice(&b.fragments);
        fragments.sort_unstable();
        merged.push(Tile {
            key: mt.key,
            fragments,
            parts: Some(Box::new((a, b))),
        });
    }
    let mut tiles: Vec<Tile> = slots.into_iter().flatten().chain(merged).collect();
    tiles.sort_by_key(|t| t.fragments[0]);
    m.tiles = tiles;
}

fn expand_into(t: Tile, live: &BTreeMap<String, EntryInfo>, out: &mut Vec<Tile>) {
    if live.contains_key(&t.key) {
        out.push(t);
        return;
    }
    let (a, b) = *t.parts.expect("initial fragments are never pruned");
    expand_into(a, live, out);
    expand_into(b, live, out);
}

/// Mine a vocabulary from `corpus`.
pub fn forge_run(corpus: &[MolGraph], config: &MiningConfig) -> Result<ForgeResult, ForgeError> {
    ForgeState::new(corpus)?.run(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(s: &[&str]) -> Vec<MolGraph> {
        s.iter().map(|x| parse_smiles(x).unwrap()).collect()
    }

    #[test]
    fn strict_threshold() {
        // CH-phenyl occurs once per monomer
        let at = forge_run(&corpus(&["*CC(*)c1ccccc1"; 3]), &MiningConfig { threshold: 3, max_iterations: 10 }).unwrap();
        assert!(at.vocabulary.entries.iter().all(|e| e.iteration == 0));
        let above = forge_run(&corpus(&["*CC(*)c1ccccc1"; 4]), &MiningConfig { threshold: 3, max_iterations: 10 }).unwrap();
        assert!(above.vocabulary.entries.iter().any(|e| e.iteration >= 1));
    }

    #[test]
    fn styrene_hand_trace() {
        let r = forge_run(&corpus(&["*CC(*)c1ccccc1"; 5]), &MiningConfig { threshold: 3, max_iterations: 50 }).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 3);
        let v = &r.vocabulary;
        let summary: Vec<(usize, usize, usize)> = v
            .entries
            .iter()
            .map(|e| (e.iteration, e.atom_count, e.frequency))
            .collect();
        let mut sorted = summary.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![(0, 1, 0), (0, 1, 0), (0, 6, 0), (2, 8, 5)]);
        for m in &r.tilings {
            assert_eq!(m.tiles.len(), 1);
        }
    }

    #[test]
    fn resolve_prefers_later_then_larger() {
        let m = |key: &str, iteration, atom_count, tiles: Vec<usize>| Match {
            key: key.into(),
            iteration,
            atom_count,
            tiles,
        };
        let got = resolve_overlaps(vec![m("a", 1, 9, vec![0, 1]), m("b", 2, 2, vec![1, 2])]);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].key, "b");
        let got = resolve_overlaps(vec![m("a", 1, 5, vec![0, 1]), m("b", 1, 7, vec![1, 2])]);
        assert_eq!(got[0].key, "b");
        assert_eq!(got.len(), 1);
        let got = resolve_overlaps(vec![m("a", 1, 5, vec![0, 1]), m("b", 1, 7, vec![2, 3])]);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn counts_every_occurrence() {
        let c = corpus(&["*CC(=O)NCC(=O)N*"; 2]);
        let s = ForgeState::new(&c).unwrap();
        let counts = enumerate_candidates(&s.tilings);
        assert!(counts.values().any(|c| c.count == 4), "{counts:?}");
    }

    #[test]
    fn overlapping_pairs_count_once() {
        let s = ForgeState::new(&corpus(&["*CCCC*"])).unwrap();
        let counts = enumerate_candidates(&s.tilings);
        assert_eq!(counts["[*:1]CC[*:2]"].count, 2);
    }

    #[test]
    fn large_threshold_keeps_initial_fragments() {
        let r = forge_run(&corpus(&["*CC(*)C", "*CC(*)Cl"]), &MiningConfig { threshold: 10, max_iterations: 50 }).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.vocabulary.entries.iter().all(|e| e.iteration == 0));
        assert_eq!(r.vocabulary.entries[0].token, "G0000");
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(forge_run(&[], &MiningConfig::default()), Err(ForgeError::EmptyCorpus)));
    }
}
