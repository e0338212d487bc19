use super::MolGraph;

/// Whether `pattern` occurs in `host` as a (not necessarily induced) subgraph.
///
/// Wildcards of the pattern are dropped first, so attachment points do not
/// constrain the match. Atoms match on element, charge and aromaticity;
/// hydrogen counts are ignored. Pattern atoms never map onto host wildcards.
pub fn contains_substructure(host: &MolGraph, pattern: &MolGraph) -> bool {
    let keep: Vec<usize> = (0..pattern.atom_count())
        .filter(|&i| !pattern.atom(i).is_wildcard())
        .collect();
    let (pat, _) = pattern.induced_subgraph(&keep);
    if pat.atom_count() == 0 {
        return true;
    }
    if pat.atom_count() > host.atom_count() {
        return false;
    }
    let order = match_order(&pat);
    let mut m = Matcher {
        host,
        pat: &pat,
        map: vec![usize::MAX; pat.atom_count()],
        used: vec![false; host.atom_count()],
    };
    m.extend(&order, 0)
}

/// Pattern atoms in BFS order per component, so every atom after a
/// component's first has an already-mapped neighbour.
fn match_order(p: &MolGraph) -> Vec<usize> {
    let mut order = Vec::with_capacity(p.atom_count());
    let mut seen = vec![false; p.atom_count()];
    let mut roots: Vec<usize> = (0..p.atom_count()).collect();
    // most constrained first: high degree, rare heteroatoms
    roots.sort_by_key(|&i| (std::cmp::Reverse(p.degree(i)), p.atom(i).element == super::Element::C));
    for r in roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let start = order.len();
        order.push(r);
        let mut head = start;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(v, _) in p.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    order.push(v);
                }
            }
        }
    }
    order
}

struct Matcher<'a> {
    host: &'a MolGraph,
    pat: &'a MolGraph,
    map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn compatible(&self, pi: usize, hi: usize) -> bool {
        let (a, b) = (self.pat.atom(pi), self.host.atom(hi));
        !b.is_wildcard()
            && a.element == b.element
            && a.charge == b.charge
            && a.aromatic == b.aromatic
            && self.host.degree(hi) >= self.pat.degree(pi)
    }

    fn extend(&mut self, order: &[usize], k: usize) -> bool {
        let Some(&pi) = order.get(k) else {
            return true;
        };
        // anchor on a mapped neighbour when there is one
        let anchor = self
            .pat
            .neighbors(pi)
            .iter()
            .find(|&&(q, _)| self.map[q] != usize::MAX)
            .map(|&(q, _)| self.map[q]);
        let candidates: Vec<usize> = match anchor {
            Some(h) => self.host.neighbors(h).iter().map(|&(v, _)| v).collect(),
            None => (0..self.host.atom_count()).collect(),
        };
        for hi in candidates {
            if self.used[hi] || !self.compatible(pi, hi) {
                continue;
            }
            let bonds_ok = self.pat.neighbors(pi).iter().all(|&(q, pb)| {
                let hq = self.map[q];
                hq == usize::MAX
                    || self
                        .host
                        .bond_between(hi, hq)
                        .is_some_and(|hb| self.host.bond(hb).order == self.pat.bond(pb).order)
            });
            if !bonds_ok {
                continue;
            }
            self.map[pi] = hi;
            self.used[hi] = true;
            if self.extend(order, k + 1) {
                return true;
            }
            self.map[pi] = usize::MAX;
            self.used[hi] = false;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn has(host: &str, pat: &str) -> bool {
        contains_substructure(&parse_smiles(host).unwrap(), &parse_smiles(pat).unwrap())
    }

    #[test]
    fn phenyl_in_styrene() {
        assert!(has("*CC(*)c1ccccc1", "*c1ccccc1"));
        assert!(!has("*CC(*)C1CCCCC1", "*c1ccccc1"));
    }

    #[test]
    fn ports_are_ignored_but_bond_orders_are_not() {
        assert!(has("CC(=O)O", "[*:1]C(=O)[*:2]"));
        assert!(!has("CCO", "C=O"));
        assert!(has("OCC", "CO"));
    }

    #[test]
    fn host_wildcards_never_matched() {
        assert!(!has("*C*", "CCC"));
    }

    #[test]
    fn imide_ring_needs_ring() {
        let imide = "O=C1c2ccccc2C(=O)N1*";
        assert!(has("*N1C(=O)c2ccc(cc2C1=O)C(=O)O*", imide));
        assert!(!has("*NC(=O)c1ccccc1C(=O)O*", imide));
    }
}
