//! Bundled repeat-unit corpus: combinatorial polyimides, polyamides,
//! polyesters and polycarbonates plus vinyl and methacrylic units.

use crate::molgraph::{parse_smiles, MolGraph};

pub const BUNDLED_SMILES: &str = include_str!("../data/polymers.smi");

/// Non-empty lines of the bundled corpus file.
pub fn bundled_smiles() -> Vec<&'static str> {
    BUNDLED_SMILES
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
}

/// The bundled corpus parsed into graphs.
pub fn bundled() -> Vec<MolGraph> {
    bundled_smiles()
        .into_iter()
        .map(|s| parse_smiles(s).expect("bundled corpus parses"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{check_valence, write_smiles};
    use std::collections::HashSet;

    #[test]
    fn corpus_is_valid_and_distinct() {
        let graphs = bundled();
        assert!(graphs.len() >= 200);
        let mut seen = HashSet::new();
        for g in &graphs {
            let report = check_valence(g);
            assert!(report.valid, "{}: {:?}", g.source().unwrap_or(""), report.violations);
            assert_eq!(g.wildcards().len(), 2);
            assert!(g.is_connected());
            assert!(seen.insert(write_smiles(g)));
        }
    }
}
