use super::MolGraph;
use std::cmp::Ordering;

/// Leaves explored by the tie-breaking search before it stops branching.
const LEAF_BUDGET: usize = 4096;

/// A canonical labeling of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    /// `rank[atom]`: position of the atom in canonical order.
    pub rank: Vec<usize>,
    /// `order[rank]`: atom at that canonical position.
    pub order: Vec<usize>,
    /// Attribute-aware adjacency certificate in canonical order; equal
    /// certificates mean isomorphic graphs.
    pub certificate: Vec<i64>,
}

fn atom_invariant(g: &MolGraph, i: usize) -> [i64; 6] {
    let a = g.atom(i);
    [
        a.element.atomic_number() as i64,
        a.class as i64,
        a.charge as i64,
        a.hydrogens as i64,
        a.aromatic as i64,
        g.degree(i) as i64,
    ]
}

/// Dense ranks from sort keys: equal keys share a rank, ranks are 0..k.
fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            r = w;
        }
        ranks[idx[w]] = r;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    let mut v = ranks.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Iterative neighbourhood refinement until the partition stops splitting.
fn refine(g: &MolGraph, mut ranks: Vec<usize>) -> Vec<usize> {
    let mut classes = class_count(&ranks);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..g.atom_count())
            .map(|i| {
                let mut nb: Vec<(usize, u8)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(j, bi)| (ranks[j], g.bond(bi).order.code()))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_ranks(&keys);
        let c = class_count(&next);
        ranks = next;
        if c == classes {
            return ranks;
        }
        classes = c;
    }
}

fn certificate(g: &MolGraph, rank: &[usize], order: &[usize]) -> Vec<i64> {
    let mut cert = Vec::with_capacity(order.len() * 10);
    for &a in order {
        cert.extend_from_slice(&atom_invariant(g, a));
        let mut nb: Vec<(usize, u8)> = g
            .neighbors(a)
            .iter()
            .map(|&(j, bi)| (rank[j], g.bond(bi).order.code()))
            .collect();
        nb.sort_unstable();
        for (r, o) in nb {
            cert.push(r as i64);
            cert.push(o as i64);
        }
        cert.push(-1);
    }
    cert
}

struct Search<'a> {
    g: &'a MolGraph,
    best: Option<(Vec<i64>, Vec<usize>)>,
    automorphisms: Vec<Vec<usize>>,
    leaves: usize,
}

impl Search<'_> {
    fn explore(&mut self, ranks: Vec<usize>, path: &mut Vec<usize>) {
        let n = ranks.len();
        // smallest rank value shared by several atoms
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let Some(target) = (0..n).find(|&r| counts[r] > 1) else {
            self.leaf(&ranks);
            return;
        };
        let cell: Vec<usize> = (0..n).filter(|&i| ranks[i] == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for &m in &cell {
            if self.leaves >= LEAF_BUDGET && !explored.is_empty() {
                break;
            }
            if !explored.is_empty() && self.same_orbit(m, &explored, path) {
                continue;
            }
            explored.push(m);
            let keys: Vec<(usize, bool)> = (0..n).map(|i| (ranks[i], i != m)).collect();
            let split = refine(self.g, dense_ranks(&keys));
            path.push(m);
            self.explore(split, path);
            path.pop();
        }
    }

    /// Whether `m` lies in the orbit of an explored atom under the known
    /// automorphisms that fix the current path pointwise.
    fn same_orbit(&self, m: usize, explored: &[usize], path: &[usize]) -> bool {
        let n = self.g.atom_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        let mut any = false;
        for gamma in &self.automorphisms {
            if path.iter().any(|&p| gamma[p] != p) {
                continue;
            }
            any = true;
            for (x, &y) in gamma.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        if !any {
            return false;
        }
        let root = find(&mut parent, m);
        explored.iter().any(|&e| find(&mut parent, e) == root)
    }

    fn leaf(&mut self, ranks: &[usize]) {
        self.leaves += 1;
        let mut order = vec![0; ranks.len()];
        for (atom, &r) in ranks.iter().enumerate() {
            order[r] = atom;
        }
        let cert = certificate(self.g, ranks, &order);
        match &self.best {
            None => self.best = Some((cert, order)),
            Some((best_cert, best_order)) => match cert.cmp(best_cert) {
                Ordering::Less => self.best = Some((cert, order)),
                Ordering::Equal => {
                    let mut gamma = vec![0; order.len()];
                    for (r, &a) in order.iter().enumerate() {
                        gamma[a] = best_order[r];
                    }
                    self.automorphisms.push(gamma);
                }
                Ordering::Greater => {}
            },
        }
    }
}

/// Canonical atom ordering: Morgan-style refinement seeded with (element,
/// atom class, charge, H count, aromaticity, degree), then remaining ties are
/// broken by individualizing each member of the first tied class in turn and
/// keeping the labeling with the smallest certificate.
pub fn canonical_rank(g: &MolGraph) -> Canonical {
    let n = g.atom_count();
    if n == 0 {
        return Canonical {
            rank: Vec::new(),
            order: Vec::new(),
            certificate: Vec::new(),
        };
    }
    let seeds: Vec<[i64; 6]> = (0..n).map(|i| atom_invariant(g, i)).collect();
    let ranks = refine(g, dense_ranks(&seeds));
    let mut search = Search {
        g,
        best: None,
        automorphisms: Vec::new(),
        leaves: 0,
    };
    search.explore(ranks, &mut Vec::new());
    let (certificate, order) = search.best.expect("at least one leaf");
    let mut rank = vec![0; n];
    for (r, &a) in order.iter().enumerate() {
        rank[a] = r;
    }
    Canonical {
        rank,
        order,
        certificate,
    }
}

/// Attribute-aware graph isomorphism via canonical certificates.
pub fn graph_isomorphic(a: &MolGraph, b: &MolGraph) -> bool {
    a.atom_count() == b.atom_count()
        && a.bond_count() == b.bond_count()
        && canonical_rank(a).certificate == canonical_rank(b).certificate
}
