use crate::fragment::Fragment;
use crate::molgraph::{bridge_bonds, find_rings, BondOrder, Element, MolGraph};
use serde::{Deserialize, Serialize};

pub const DESCRIPTOR_COUNT: usize = 20;

pub const DESCRIPTOR_NAMES: [&str; DESCRIPTOR_COUNT] = [
    "molecular_weight",
    "heavy_atoms",
    "rings",
    "aromatic_rings",
    "six_membered_rings",
    "rotatable_bonds",
    "rigidity",
    "sp3_carbon_fraction",
    "sp2_atoms",
    "double_bonds",
    "triple_bonds",
    "nitrogen",
    "oxygen",
    "sulfur",
    "halogens",
    "hbond_donors",
    "hbond_acceptors",
    "valence_electron_adjacency",
    "polarizability_adjacency",
    "mean_ionization_energy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub values: [f64; DESCRIPTOR_COUNT],
}

impl DescriptorVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        DESCRIPTOR_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// The 20-descriptor vector of `g` with wildcards replaced by hydrogens.
pub fn compute_descriptors(g: &MolGraph) -> DescriptorVector {
    let g = g.capped();
    let n = g.atom_count();
    let heavy: Vec<bool> = g.atoms().iter().map(|a| a.element.is_heavy()).collect();
    let heavy_degree: Vec<usize> = (0..n)
        .map(|i| g.neighbors(i).iter().filter(|&&(j, _)| heavy[j]).count())
        .collect();
    let mut in_ring = vec![true; g.bond_count()];
    for b in bridge_bonds(&g) {
        in_ring[b] = false;
    }
    let rings = find_rings(&g);

    let mut v = [0.0; DESCRIPTOR_COUNT];
    v[0] = g
        .atoms()
        .iter()
        .map(|a| a.element.mass() + a.hydrogens as f64 * Element::H.mass())
        .sum();
    v[1] = heavy.iter().filter(|&&h| h).count() as f64;
    v[2] = rings.len() as f64;
    v[3] = rings
        .iter()
        .filter(|r| r.atoms.iter().all(|&a| g.atom(a).aromatic))
        .count() as f64;
    v[4] = rings.iter().filter(|r| r.size() == 6).count() as f64;

    let mut rotatable = 0usize;
    let mut acyclic_heavy = 0usize;
    let mut double = 0usize;
    let mut triple = 0usize;
    let mut ve_adj = 0.0;
    let mut pol_adj = 0.0;
    for (bi, b) in g.bonds().iter().enumerate() {
        match b.order {
            BondOrder::Double => double += 1,
            BondOrder::Triple => triple += 1,
            _ => {}
        }
        if !(heavy[b.a] && heavy[b.b]) {
            continue;
        }
        let (x, y) = (g.atom(b.a).element, g.atom(b.b).element);
        ve_adj += x.valence_electrons() * y.valence_electrons();
        pol_adj += x.polarizability() * y.polarizability();
        if !in_ring[bi] {
            acyclic_heavy += 1;
            if b.order == BondOrder::Single && heavy_degree[b.a] >= 2 && heavy_degree[b.b] >= 2 {
                rotatable += 1;
            }
        }
    }
    v[5] = rotatable as f64;
    v[6] = if acyclic_heavy == 0 {
        1.0
    } else {
        1.0 - rotatable as f64 / acyclic_heavy as f64
    };

    let mut carbons = 0usize;
    let mut sp3_carbons = 0usize;
    let mut sp2 = 0usize;
    let mut ie_sum = 0.0;
    for i in 0..n {
        let a = g.atom(i);
        if !heavy[i] {
            continue;
        }
        ie_sum += a.element.ionization_energy();
        let orders: Vec<BondOrder> = g.neighbors(i).iter().map(|&(_, bi)| g.bond(bi).order).collect();
        let doubles = orders.iter().filter(|&&o| o == BondOrder::Double).count();
        let triples = orders.iter().filter(|&&o| o == BondOrder::Triple).count();
        let saturated = !a.aromatic && doubles == 0 && triples == 0;
        if a.element == Element::C {
            carbons += 1;
            if saturated {
                sp3_carbons += 1;
            }
        }
        if triples == 0 && ((a.aromatic && doubles == 0) || (!a.aromatic && doubles == 1)) {
            sp2 += 1;
        }
        match a.element {
            Element::N => v[11] += 1.0,
            Element::O => v[12] += 1.0,
            Element::S => v[13] += 1.0,
            e if e.is_halogen() => v[14] += 1.0,
            _ => {}
        }
        if matches!(a.element, Element::N | Element::O) {
            v[16] += 1.0;
            let explicit_h = g
                .neighbors(i)
                .iter()
                .any(|&(j, _)| g.atom(j).element == Element::H);
            if a.hydrogens > 0 || explicit_h {
                v[15] += 1.0;
            }
        }
    }
    v[7] = if carbons == 0 {
        0.0
    } else {
        sp3_carbons as f64 / carbons as f64
    };
    v[8] = sp2 as f64;
    v[9] = double as f64;
    v[10] = triple as f64;
    v[17] = ve_adj;
    v[18] = pol_adj;
    v[19] = if v[1] == 0.0 { 0.0 } else { ie_sum / v[1] };
    DescriptorVector { values: v }
}

/// Descriptors of a fragment with its ports capped by hydrogens.
pub fn subgroup_descriptors(f: &Fragment) -> DescriptorVector {
    compute_descriptors(&f.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::fragment_acyclic;
    use crate::molgraph::parse_smiles;

    fn d(s: &str) -> DescriptorVector {
        compute_descriptors(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene() {
        let v = d("c1ccccc1");
        assert_eq!(v.get("rings"), Some(1.0));
        assert_eq!(v.get("aromatic_rings"), Some(1.0));
        assert_eq!(v.get("six_membered_rings"), Some(1.0));
        assert_eq!(v.get("rotatable_bonds"), Some(0.0));
        assert_eq!(v.get("sp3_carbon_fraction"), Some(0.0));
        assert_eq!(v.get("sp2_atoms"), Some(6.0));
        assert!((v.get("molecular_weight").unwrap() - 78.114).abs() < 1e-9);
        // six C-C bonds, 4 valence electrons each side
        assert_eq!(v.get("valence_electron_adjacency"), Some(96.0));
    }

    #[test]
    fn hexane_rotors() {
        let v = d("CCCCCC");
        assert_eq!(v.get("rotatable_bonds"), Some(3.0));
        assert!((v.get("rigidity").unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(v.get("sp3_carbon_fraction"), Some(1.0));
    }

    #[test]
    fn single_atom_has_no_adjacency() {
        let v = d("O");
        assert_eq!(v.get("valence_electron_adjacency"), Some(0.0));
        assert_eq!(v.get("polarizability_adjacency"), Some(0.0));
        assert_eq!(v.get("hbond_donors"), Some(1.0));
        assert_eq!(v.get("rigidity"), Some(1.0));
    }

    #[test]
    fn capped_fragments() {
        let t = fragment_acyclic(&parse_smiles("*CC(*)c1ccccc1").unwrap()).unwrap();
        let ch2 = t
            .fragments
            .iter()
            .find(|f| f.heavy_atom_count() == 1 && f.ports.len() == 2)
            .unwrap();
        assert_eq!(subgroup_descriptors(ch2), d("C"));
        let phenyl = t.fragments.iter().find(|f| f.heavy_atom_count() == 6).unwrap();
        assert_eq!(subgroup_descriptors(phenyl), d("c1ccccc1"));
        let t = fragment_acyclic(&parse_smiles("*CC(*)C(=O)O").unwrap()).unwrap();
        // the C-O single bond is cut, so the carbonyl is its own fragment
        let carbonyl = t.fragments.iter().find(|f| f.heavy_atom_count() == 2).unwrap();
        assert_eq!(subgroup_descriptors(carbonyl), d("C=O"));
    }

    #[test]
    fn counts() {
        let v = d("N#CC(Cl)=CC(=O)NS");
        assert_eq!(v.get("triple_bonds"), Some(1.0));
        assert_eq!(v.get("double_bonds"), Some(2.0));
        assert_eq!(v.get("nitrogen"), Some(2.0));
        assert_eq!(v.get("halogens"), Some(1.0));
        assert_eq!(v.get("sulfur"), Some(1.0));
        assert_eq!(v.get("hbond_acceptors"), Some(3.0));
        assert_eq!(v.get("hbond_donors"), Some(1.0));
    }
}
