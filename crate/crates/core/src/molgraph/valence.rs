use super::{BondOrder, MolGraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub atom: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidityReport {
            valid: violations.is_empty(),
            violations,
        }
    }
}

/// (sum of integer orders of non-aromatic bonds, number of aromatic bonds)
fn bond_sums(g: &MolGraph, i: usize) -> (u32, u32) {
    let mut plain = 0;
    let mut aromatic = 0;
    for &(_, bi) in g.neighbors(i) {
        match g.bond(bi).order {
            BondOrder::Aromatic => aromatic += 1,
            o => plain += o.sigma() as u32,
        }
    }
    (plain, aromatic)
}

/// Implicit hydrogen count for an organic-subset atom given its bonds.
///
/// Aliphatic atoms take the smallest default valence that accommodates the
/// bond-order sum. Aromatic atoms use their lowest valence and reserve one
/// unit for the pi bond when it fits.
pub fn implicit_hydrogens(g: &MolGraph, i: usize) -> u8 {
    let atom = g.atom(i);
    let valences = atom.element.default_valences();
    if valences.is_empty() {
        return 0;
    }
    let (plain, aromatic) = bond_sums(g, i);
    let sum = plain + aromatic;
    if atom.aromatic {
        let v = valences[0] as u32;
        return if v > sum { (v - sum - 1) as u8 } else { 0 };
    }
    valences
        .iter()
        .map(|&v| v as u32)
        .find(|&v| v >= sum)
        .map_or(0, |v| (v - sum) as u8)
}

/// Check every atom's valence.
///
/// Non-aromatic bonds contribute their order and explicit/implicit hydrogens
/// one each. Aromatic bonds contribute one each, and every aromatic atom whose
/// lowest fitting valence leaves room for it must receive exactly one extra
/// pi bond from an aromatic neighbour: the aromatic bonds have to admit a
/// consistent 1/2 (Kekulé) rounding. Wildcards are exempt except that they
/// must have degree one, no charge and no hydrogens.
pub fn check_valence(g: &MolGraph) -> ValidityReport {
    let mut violations = Vec::new();
    let n = g.atom_count();
    let mut needs_pi = vec![false; n];
    for i in 0..n {
        let atom = g.atom(i);
        if atom.is_wildcard() {
            let d = g.degree(i);
            if d != 1 {
                violations.push(Violation {
                    atom: i,
                    reason: format!("wildcard degree {d} != 1"),
                });
            }
            if atom.charge != 0 || atom.hydrogens != 0 {
                violations.push(Violation {
                    atom: i,
                    reason: "wildcard carries charge or hydrogens".into(),
                });
            }
            continue;
        }
        let (plain, aromatic) = bond_sums(g, i);
        let total = plain + aromatic + atom.hydrogens as u32;
        let allowed = atom.element.charged_valences(atom.charge);
        let Some(&max) = allowed.last() else {
            violations.push(Violation {
                atom: i,
                reason: format!("no valence for {} with charge {}", atom.element, atom.charge),
            });
            continue;
        };
        if total > max as u32 {
            violations.push(Violation {
                atom: i,
                reason: format!("valence {total} > {max}"),
            });
            continue;
        }
        if atom.aromatic && !atom.element.can_be_aromatic() {
            violations.push(Violation {
                atom: i,
                reason: format!("{} cannot be aromatic", atom.element),
            });
            continue;
        }
        if aromatic > 0 || atom.aromatic {
            let lowest = allowed
                .iter()
                .map(|&v| v as u32)
                .find(|&v| v >= total)
                .expect("total <= max");
            needs_pi[i] = lowest > total;
            if needs_pi[i] && aromatic == 0 {
                violations.push(Violation {
                    atom: i,
                    reason: "aromatic atom without aromatic bonds".into(),
                });
            }
        }
    }
    if violations.is_empty() {
        for i in unmatched_pi_atoms(g, &needs_pi) {
            violations.push(Violation {
                atom: i,
                reason: "aromatic system cannot be kekulized".into(),
            });
        }
    }
    ValidityReport::from_violations(violations)
}

/// Atoms left without a partner in the best perfect matching of `needs` atoms
/// over aromatic bonds, searched per connected aromatic system.
fn unmatched_pi_atoms(g: &MolGraph, needs: &[bool]) -> Vec<usize> {
    let n = g.atom_count();
    let partners: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            if !needs[i] {
                return Vec::new();
            }
            let mut v: Vec<usize> = g
                .neighbors(i)
                .iter()
                .filter(|&&(j, bi)| needs[j] && g.bond(bi).order == BondOrder::Aromatic)
                .map(|&(j, _)| j)
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut seen = vec![false; n];
    let mut bad = Vec::new();
    for start in 0..n {
        if !needs[start] || seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in &partners[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        if comp.len() % 2 == 1 {
            bad.extend(comp);
            continue;
        }
        let mut mate = vec![usize::MAX; n];
        let mut budget = 200_000usize;
        if !perfect_matching(&partners, &comp, &mut mate, &mut budget) {
            bad.extend(comp);
        }
    }
    bad.sort_unstable();
    bad
}

/// Backtracking perfect matching: always branch on the unmatched atom with the
/// fewest free partners.
fn perfect_matching(
    partners: &[Vec<usize>],
    comp: &[usize],
    mate: &mut [usize],
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let mut best: Option<(usize, usize)> = None;
    for &u in comp {
        if mate[u] != usize::MAX {
            continue;
        }
        let free = partners[u].iter().filter(|&&v| mate[v] == usize::MAX).count();
        if free == 0 {
            return false;
        }
        if best.is_none_or(|(_, f)| free < f) {
            best = Some((u, free));
        }
    }
    let Some((u, _)) = best else {
        return true;
    };
    for &v in &partners[u] {
        if mate[v] != usize::MAX {
            continue;
        }
        mate[u] = v;
        mate[v] = u;
        if perfect_matching(partners, comp, mate, budget) {
            return true;
        }
        mate[u] = usize::MAX;
        mate[v] = usize::MAX;
    }
    false
}
