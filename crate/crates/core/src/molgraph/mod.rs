//! Molecular graphs: SMILES parsing and writing, canonical ranking, ring
//! perception and valence checking.

mod canon;
mod element;
mod parse;
mod rings;
mod substructure;
mod valence;
mod write;

pub use canon::{canonical_rank, graph_isomorphic, Canonical};
pub use element::Element;
pub use parse::{parse_smiles, SmilesError, SmilesErrorKind};
pub use rings::{bridge_bonds, find_rings, Ring};
pub use substructure::contains_substructure;
pub use valence::{check_valence, implicit_hydrogens, ValidityReport, Violation};
pub use write::{write_smiles, write_smiles_with_order};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer order for non-aromatic bonds; aromatic bonds count 1 here and
    /// are handled separately by valence perception.
    pub fn sigma(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BondOrder::Single => "-",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic => ":",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Total attached hydrogens (implicit ones are resolved at parse time).
    pub hydrogens: u8,
    /// Atom class (`[*:n]`); zero when absent.
    pub class: u16,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            hydrogens: 0,
            class: 0,
        }
    }

    pub fn wildcard() -> Self {
        Atom::new(Element::Wildcard)
    }

    pub fn with_class(mut self, class: u16) -> Self {
        self.class = class;
        self
    }

    pub fn with_hydrogens(mut self, h: u8) -> Self {
        self.hydrogens = h;
        self
    }

    pub fn is_wildcard(&self) -> bool {
        self.element == Element::Wildcard
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("atom index {0} out of range")]
    BadIndex(usize),
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
}

/// An attributed molecular graph. Atom indices are positions in `atoms`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    source: Option<String>,
}

impl MolGraph {
    pub fn new() -> Self {
        MolGraph::default()
    }

    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let mut g = MolGraph {
            adjacency: vec![Vec::new(); atoms.len()],
            atoms,
            bonds: Vec::with_capacity(bonds.len()),
            source: None,
        };
        for b in bonds {
            g.add_bond(b.a, b.b, b.order)?;
        }
        Ok(g)
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, GraphError> {
        let n = self.atoms.len();
        if a >= n {
            return Err(GraphError::BadIndex(a));
        }
        if b >= n {
            return Err(GraphError::BadIndex(b));
        }
        if a == b {
            return Err(GraphError::SelfBond(a));
        }
        if self.bond_between(a, b).is_some() {
            return Err(GraphError::DuplicateBond(a, b));
        }
        let idx = self.bonds.len();
        self.bonds.push(Bond { a, b, order });
        self.adjacency[a].push((b, idx));
        self.adjacency[b].push((a, idx));
        Ok(idx)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub(crate) fn set_bond_order(&mut self, i: usize, order: BondOrder) {
        self.bonds[i].order = order;
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `(neighbor, bond index)` pairs for an atom.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, bi)| bi)
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn set_source(&mut self, s: impl Into<String>) {
        self.source = Some(s.into());
    }

    pub fn wildcards(&self) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i].is_wildcard())
            .collect()
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element.is_heavy()).count()
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Induced subgraph on `atoms` (in the given order). Returns the graph and
    /// the old-index -> new-index map.
    pub fn induced_subgraph(&self, atoms: &[usize]) -> (MolGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.atoms.len()];
        let mut g = MolGraph::new();
        for &a in atoms {
            map[a] = Some(g.add_atom(self.atoms[a]));
        }
        for b in &self.bonds {
            if let (Some(x), Some(y)) = (map[b.a], map[b.b]) {
                g.add_bond(x, y, b.order).expect("induced bonds are valid");
            }
        }
        (g, map)
    }

    /// Copy with atoms renumbered: new index of old atom `i` is `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> MolGraph {
        let n = self.atoms.len();
        assert_eq!(perm.len(), n);
        let mut atoms = vec![Atom::wildcard(); n];
        for (old, &new) in perm.iter().enumerate() {
            atoms[new] = self.atoms[old];
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
            })
            .collect();
        let mut g = MolGraph::from_parts(atoms, bonds).expect("permutation preserves validity");
        g.source = self.source.clone();
        g
    }

    /// Replace every wildcard by an extra hydrogen on its neighbor.
    pub fn capped(&self) -> MolGraph {
        let keep: Vec<usize> = (0..self.atoms.len())
            .filter(|&i| !self.atoms[i].is_wildcard())
            .collect();
        let (mut g, map) = self.induced_subgraph(&keep);
        for w in self.wildcards() {
            for &(nb, _) in self.neighbors(w) {
                if let Some(m) = map[nb] {
                    g.atoms[m].hydrogens += 1;
                }
            }
        }
        g
    }
}

impl fmt::Display for MolGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_smiles(self))
    }
}
