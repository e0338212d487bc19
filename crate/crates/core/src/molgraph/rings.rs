use super::MolGraph;
use std::collections::{BTreeSet, VecDeque};

/// A ring of the smallest set of smallest rings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ring {
    /// Sorted atom indices.
    pub atoms: Vec<usize>,
    /// Sorted bond indices.
    pub bonds: Vec<usize>,
}

impl Ring {
    pub fn size(&self) -> usize {
        self.atoms.len()
    }
}

/// Indices of bonds whose removal disconnects the graph (bonds on no cycle).
pub fn bridge_bonds(g: &MolGraph) -> Vec<usize> {
    let n = g.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut bridges = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, parent bond, next neighbor cursor)
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(root, None, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent_bond, ref mut cursor)) = stack.last_mut() {
            if let Some(&(v, bi)) = g.neighbors(u).get(*cursor) {
                *cursor += 1;
                if Some(bi) == parent_bond {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, Some(bi), 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let (Some(pb), Some(&(p, _, _))) = (parent_bond, stack.last()) {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        bridges.push(pb);
                    }
                }
            }
        }
    }
    bridges.sort_unstable();
    bridges
}

/// Per-bond ring membership flags.
pub(crate) fn ring_bond_flags(g: &MolGraph) -> Vec<bool> {
    let mut flags = vec![true; g.bond_count()];
    for b in bridge_bonds(g) {
        flags[b] = false;
    }
    flags
}

/// Smallest set of smallest rings.
///
/// Candidate cycles are the shortest cycle through every ring bond; they are
/// taken in order of size and kept when linearly independent (over GF(2) on
/// bond sets) of those already kept, until the cycle rank
/// `bonds - atoms + components` is reached.
pub fn find_rings(g: &MolGraph) -> Vec<Ring> {
    let rank = (g.bond_count() + g.components().len()).saturating_sub(g.atom_count());
    if rank == 0 {
        return Vec::new();
    }
    let in_ring = ring_bond_flags(g);
    let mut candidates: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for (bi, bond) in g.bonds().iter().enumerate() {
        if !in_ring[bi] {
            continue;
        }
        if let Some(path) = shortest_path_avoiding(g, bond.a, bond.b, bi) {
            let mut bonds: Vec<usize> = path;
            bonds.push(bi);
            bonds.sort_unstable();
            candidates.insert((bonds.len(), bonds));
        }
    }
    let words = g.bond_count().div_ceil(64);
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rings = Vec::new();
    for (_, bonds) in candidates {
        let mut v = vec![0u64; words];
        for &b in &bonds {
            v[b / 64] |= 1 << (b % 64);
        }
        if reduce_insert(&mut basis, v) {
            let mut atoms: Vec<usize> = bonds
                .iter()
                .flat_map(|&b| [g.bond(b).a, g.bond(b).b])
                .collect();
            atoms.sort_unstable();
            atoms.dedup();
            rings.push(Ring { atoms, bonds });
            if rings.len() == rank {
                break;
            }
        }
    }
    rings.sort();
    rings
}

/// Bond path from `from` to `to` not using bond `skip`, by BFS.
fn shortest_path_avoiding(g: &MolGraph, from: usize, to: usize, skip: usize) -> Option<Vec<usize>> {
    let n = g.atom_count();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        let mut nbrs: Vec<(usize, usize)> = g.neighbors(u).to_vec();
        nbrs.sort_unstable();
        for (v, bi) in nbrs {
            if bi == skip || seen[v] {
                continue;
            }
            seen[v] = true;
            prev[v] = Some((u, bi));
            queue.push_back(v);
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = to;
    while let Some((p, bi)) = prev[cur] {
        path.push(bi);
        cur = p;
    }
    Some(path)
}

/// Gaussian elimination over GF(2) with explicit pivots; the basis is kept
/// fully reduced. Inserts `v` if independent.
fn reduce_insert(basis: &mut Vec<(usize, Vec<u64>)>, mut v: Vec<u64>) -> bool {
    let bit = |x: &[u64], i: usize| x[i / 64] >> (i % 64) & 1 == 1;
    for (p, b) in basis.iter() {
        if bit(&v, *p) {
            for (x, y) in v.iter_mut().zip(b) {
                *x ^= y;
            }
        }
    }
    let Some(pivot) = v
        .iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    else {
        return false;
    };
    for (_, b) in basis.iter_mut() {
        if bit(b, pivot) {
            for (x, y) in b.iter_mut().zip(&v) {
                *x ^= y;
            }
        }
    }
    basis.push((pivot, v));
    true
}
