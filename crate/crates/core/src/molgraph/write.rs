use super::canon::canonical_rank;
use super::valence::implicit_hydrogens;
use super::{BondOrder, MolGraph};
use std::fmt::Write as _;

/// Canonical SMILES.
pub fn write_smiles(g: &MolGraph) -> String {
    write_smiles_with_order(g).0
}

/// Canonical SMILES plus the atom indices in the order they were written, so
/// atom `k` of the re-parsed string corresponds to `order[k]` of `g`.
pub fn write_smiles_with_order(g: &MolGraph) -> (String, Vec<usize>) {
    let n = g.atom_count();
    let canon = canonical_rank(g);
    let rank = &canon.rank;
    let sorted_neighbors: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            let mut v = g.neighbors(i).to_vec();
            v.sort_by_key(|&(j, _)| rank[j]);
            v
        })
        .collect();

    let mut tree = Tree {
        visited: vec![false; n],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
        preorder: Vec::new(),
        tree_bond: vec![false; g.bond_count()],
        ring_bond: vec![false; g.bond_count()],
    };
    let mut roots = Vec::new();
    for &start in &canon.order {
        if !tree.visited[start] {
            roots.push(start);
            tree.dfs(start, &sorted_neighbors);
        }
    }

    let mut out = String::new();
    let mut writer = Writer {
        g,
        tree: &tree,
        rank,
        digits: Vec::new(),
        digit_of: vec![None; g.bond_count()],
        order: Vec::with_capacity(n),
    };
    for (k, &root) in roots.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        writer.emit(root, &mut out);
    }
    let order = writer.order;
    (out, order)
}

struct Tree {
    visited: Vec<bool>,
    children: Vec<Vec<(usize, usize)>>,
    /// ring bonds opened at this atom: (partner, bond)
    opens: Vec<Vec<(usize, usize)>>,
    /// ring bonds closed at this atom: (partner, bond)
    closes: Vec<Vec<(usize, usize)>>,
    preorder: Vec<usize>,
    tree_bond: Vec<bool>,
    ring_bond: Vec<bool>,
}

impl Tree {
    fn dfs(&mut self, root: usize, nbrs: &[Vec<(usize, usize)>]) {
        // iterative DFS with per-atom cursor, matching recursive visit order
        self.visited[root] = true;
        self.preorder.push(root);
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (u, ref mut cursor)) = stack.last_mut() {
            let Some(&(v, bi)) = nbrs[u].get(*cursor) else {
                stack.pop();
                continue;
            };
            *cursor += 1;
            if self.tree_bond[bi] || self.ring_bond[bi] {
                continue;
            }
            if self.visited[v] {
                self.ring_bond[bi] = true;
                self.opens[v].push((u, bi));
                self.closes[u].push((v, bi));
            } else {
                self.tree_bond[bi] = true;
                self.visited[v] = true;
                self.preorder.push(v);
                self.children[u].push((v, bi));
                stack.push((v, 0));
            }
        }
    }
}

struct Writer<'a> {
    g: &'a MolGraph,
    tree: &'a Tree,
    rank: &'a [usize],
    digits: Vec<bool>,
    digit_of: Vec<Option<usize>>,
    order: Vec<usize>,
}

impl Writer<'_> {
    fn emit(&mut self, u: usize, out: &mut String) {
        self.order.push(u);
        self.atom_symbol(u, out);
        // closures first, then openings, each in partner rank order
        let mut closes = self.tree.closes[u].clone();
        closes.sort_by_key(|&(p, _)| self.rank[p]);
        let mut freed = Vec::new();
        for (_, bi) in closes {
            let d = self.digit_of[bi].expect("ring opened before closing");
            push_digit(out, d);
            freed.push(d);
        }
        let mut opens = self.tree.opens[u].clone();
        opens.sort_by_key(|&(p, _)| self.rank[p]);
        for (p, bi) in opens {
            let d = match self.digits.iter().position(|used| !used) {
                Some(d) => d,
                None => {
                    self.digits.push(false);
                    self.digits.len() - 1
                }
            };
            self.digits[d] = true;
            self.digit_of[bi] = Some(d);
            out.push_str(self.bond_symbol(u, p, bi));
            push_digit(out, d);
        }
        for d in freed {
            self.digits[d] = false;
        }
        let children = &self.tree.children[u];
        for (k, &(v, bi)) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                out.push('(');
            }
            out.push_str(self.bond_symbol(u, v, bi));
            self.emit(v, out);
            if !last {
                out.push(')');
            }
        }
    }

    fn bond_symbol(&self, a: usize, b: usize, bi: usize) -> &'static str {
        let both_aromatic = self.g.atom(a).aromatic && self.g.atom(b).aromatic;
        match (self.g.bond(bi).order, both_aromatic) {
            (BondOrder::Single, true) => "-",
            (BondOrder::Single, false) => "",
            (BondOrder::Aromatic, true) => "",
            (BondOrder::Aromatic, false) => ":",
            (BondOrder::Double, _) => "=",
            (BondOrder::Triple, _) => "#",
        }
    }

    fn atom_symbol(&self, i: usize, out: &mut String) {
        let atom = self.g.atom(i);
        let symbol = if atom.aromatic {
            atom.element.symbol().to_ascii_lowercase()
        } else {
            atom.element.symbol().to_string()
        };
        let bare = atom.element.is_organic()
            && atom.charge == 0
            && atom.class == 0
            && (!atom.aromatic || atom.element.can_be_aromatic())
            && atom.hydrogens == implicit_hydrogens(self.g, i);
        if bare {
            out.push_str(&symbol);
            return;
        }
        out.push('[');
        out.push_str(&symbol);
        match atom.hydrogens {
            0 => {}
            1 => out.push('H'),
            h => {
                let _ = write!(out, "H{h}");
            }
        }
        match atom.charge {
            0 => {}
            1 => out.push('+'),
            -1 => out.push('-'),
            c if c > 0 => {
                let _ = write!(out, "+{c}");
            }
            c => {
                let _ = write!(out, "-{}", -c);
            }
        }
        if atom.class != 0 {
            let _ = write!(out, ":{}", atom.class);
        }
        out.push(']');
    }
}

fn push_digit(out: &mut String, d: usize) {
    let label = d + 1;
    if label < 10 {
        let _ = write!(out, "{label}");
    } else {
        let _ = write!(out, "%{label:02}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{graph_isomorphic, parse_smiles};

    fn canon(s: &str) -> String {
        write_smiles(&parse_smiles(s).unwrap())
    }

    #[test]
    fn same_molecule_same_string() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("N(C)C"), canon("CNC"));
        assert_eq!(canon("c1ccccc1O"), canon("Oc1ccccc1"));
        assert_ne!(canon("c1ccccc1"), canon("C1CCCCC1"));
    }

    #[test]
    fn round_trips() {
        for s in [
            "c1ccccc1",
            "CC(=O)Oc1ccccc1C(=O)O",
            "[*]CC([*])c1ccccc1",
            "c1ccc2ccccc2c1",
            "C1CC2CCC1CC2",
            "c1ccccc1-c1ccccc1",
            "O=C1c2ccccc2C(=O)N1",
            "C[N+](C)(C)C.[Cl-]",
            "[*:1]C([*:2])[*:3]",
            "C12C3C4C1C5C2C3C45",
            "c1cc[nH]c1",
            "FC(F)(F)C#N",
            "[H]C([H])([H])[H]",
            "CS(=O)(=O)c1ccsc1",
        ] {
            let g = parse_smiles(s).unwrap();
            let out = write_smiles(&g);
            let back = parse_smiles(&out).unwrap_or_else(|e| panic!("{s} -> {out}: {e}"));
            assert!(graph_isomorphic(&g, &back), "{s} -> {out}");
            assert_eq!(write_smiles(&back), out, "{s} not idempotent");
        }
    }

    #[test]
    fn order_maps_written_atoms() {
        let g = parse_smiles("OCC(=O)N").unwrap();
        let (s, order) = write_smiles_with_order(&g);
        let back = parse_smiles(&s).unwrap();
        for (k, &i) in order.iter().enumerate() {
            assert_eq!(back.atom(k).element, g.atom(i).element);
        }
    }

    #[test]
    fn many_rings_use_percent_digits() {
        // twelve separate rings fused in a chain keep several digits open
        let s = "C1C2C3C4C5C6C7C8C9C%10C%11C%12CC%12C%11C%10C9C8C7C6C5C4C3C2C1";
        let g = parse_smiles(s).unwrap();
        let out = write_smiles(&g);
        assert!(graph_isomorphic(&g, &parse_smiles(&out).unwrap()));
    }
}
