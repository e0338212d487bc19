use super::MetricsError;
use crate::chemfeat::atom_environments;
use crate::molgraph::{find_rings, MolGraph};
use fnv::FnvHasher;
use std::collections::HashMap;
use std::hash::Hasher;

const ENV_RADIUS: usize = 2;

fn env_hashes(g: &MolGraph) -> Vec<u64> {
    let capped = g.capped();
    let mut levels = atom_environments(&capped, ENV_RADIUS);
    levels
        .pop()
        .unwrap_or_default()
        .iter()
        .map(|e| {
            let mut h = FnvHasher::default();
            h.write(e.as_bytes());
            h.finish()
        })
        .collect()
}

/// Synthetic-accessibility estimate in `[1, 10]` from radius-2 environment
/// frequencies of a reference corpus plus size and ring penalties.
#[derive(Debug, Clone)]
pub struct SaModel {
    counts: HashMap<u64, usize>,
    max_count: usize,
}

impl SaModel {
    pub fn fit(reference: &[MolGraph]) -> Result<Self, MetricsError> {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for g in reference {
            for h in env_hashes(g) {
                *counts.entry(h).or_default() += 1;
            }
        }
        let max_count = counts.values().copied().max().ok_or(MetricsError::EmptyReference)?;
        Ok(SaModel { counts, max_count })
    }

    /// Mean of `ln(1 + count) / ln(1 + max_count)` over the atoms' environments.
    pub fn familiarity(&self, g: &MolGraph) -> f64 {
        let envs = env_hashes(g);
        if envs.is_empty() {
            return 0.0;
        }
        let norm = (1.0 + self.max_count as f64).ln();
        let sum: f64 = envs
            .iter()
            .map(|h| (1.0 + *self.counts.get(h).unwrap_or(&0) as f64).ln() / norm)
            .sum();
        sum / envs.len() as f64
    }

    /// Size penalty `n^1.005 - n` plus `log10(1 + fused atoms)` plus
    /// `log10 2` when any ring is larger than eight.
    pub fn complexity(g: &MolGraph) -> f64 {
        let capped = g.capped();
        let n = capped.heavy_atom_count() as f64;
        let rings = find_rings(&capped);
        let mut membership = vec![0usize; capped.atom_count()];
        for r in &rings {
            for &a in &r.atoms {
                membership[a] += 1;
            }
        }
        let fused = membership.iter().filter(|&&m| m >= 2).count() as f64;
        let macrocycle = if rings.iter().any(|r| r.size() > 8) {
            2f64.log10()
        } else {
            0.0
        };
        (n.powf(1.005) - n) + (1.0 + fused).log10() + macrocycle
    }

    pub fn score(&self, g: &MolGraph) -> f64 {
        let raw = (Self::complexity(g) - self.familiarity(g) + 1.0) / 3.0;
        1.0 + 9.0 * raw.clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn g(s: &str) -> MolGraph {
        parse_smiles(s).unwrap()
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(SaModel::fit(&[]).is_err());
    }

    #[test]
    fn familiar_chain_scores_near_one() {
        let m = SaModel::fit(&[g("CC"), g("CCC")]).unwrap();
        let s = m.score(&g("CC"));
        assert!((1.0..1.05).contains(&s), "{s}");
    }

    #[test]
    fn unseen_fused_macrocycle_scores_near_ten() {
        let m = SaModel::fit(&[g("O")]).unwrap();
        let s = m.score(&g("C1CCCCCCCCCC2CC3CC4CC5CC6CCCCC6CC5CC4CC3CC21"));
        assert!(s > 9.0, "{s}");
        assert!(s <= 10.0);
    }

    #[test]
    fn complexity_terms() {
        // cyclohexane: 6 heavy atoms, no fused atoms, no macrocycle
        let c = SaModel::complexity(&g("C1CCCCC1"));
        assert!((c - (6f64.powf(1.005) - 6.0)).abs() < 1e-12);
        // naphthalene: two atoms shared by both rings
        let c = SaModel::complexity(&g("c1ccc2ccccc2c1"));
        assert!((c - (10f64.powf(1.005) - 10.0 + 3f64.log10())).abs() < 1e-12);
    }
}
