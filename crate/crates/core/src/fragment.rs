//! Acyclic-single-bond fragmentation of repeat units into port-labelled
//! subgroups, and the mainline/sideline structure between the two ends.

use crate::molgraph::{
    bridge_bonds, canonical_rank, write_smiles_with_order, Atom, BondOrder, Element, MolGraph,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("repeat unit needs exactly two wildcard ends, found {0}")]
    WildcardCount(usize),
    #[error("repeat unit is not connected")]
    Disconnected,
    #[error("wildcard atom {0} must have a single bond to one non-wildcard atom")]
    BadEnd(usize),
}

/// Which way a port faces. Serialized into keys as the wildcard atom class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PortRole {
    /// Toward the start end (mainline) or toward the host (sideline).
    Prev,
    /// Toward the far end of the mainline.
    Next,
    /// Toward a sideline subtree.
    Sideline,
}

impl PortRole {
    pub fn class(self) -> u16 {
        match self {
            PortRole::Prev => 1,
            PortRole::Next => 2,
            PortRole::Sideline => 3,
        }
    }

    pub fn from_class(class: u16) -> Option<Self> {
        match class {
            1 => Some(PortRole::Prev),
            2 => Some(PortRole::Next),
            3 => Some(PortRole::Sideline),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    /// Atom of the fragment graph that carries the port.
    pub fragment_atom: usize,
    /// Position of the port among the key's wildcards, in written order.
    pub port_id: usize,
    pub role: PortRole,
    /// The port's wildcard atom in the fragment graph.
    pub wildcard: usize,
    /// (inside, outside) atom indices in the monomer.
    pub link: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    /// Key graph: subgroup atoms plus one role-labelled wildcard per port, in
    /// key written order (identical to parsing `canonical_key`).
    pub graph: MolGraph,
    /// Indexed by port id.
    pub ports: Vec<Port>,
    pub canonical_key: String,
    /// Monomer atoms of this fragment, ascending.
    pub atoms: Vec<usize>,
}

impl Fragment {
    pub fn heavy_atom_count(&self) -> usize {
        self.graph.heavy_atom_count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeEdge {
    pub fragment_a: usize,
    pub port_a: usize,
    pub fragment_b: usize,
    pub port_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentTree {
    pub monomer: MolGraph,
    /// Ordered by smallest canonical rank of their atoms.
    pub fragments: Vec<Fragment>,
    pub edges: Vec<TreeEdge>,
    /// Fragments holding the start and the far end.
    pub end_fragments: [usize; 2],
    /// Port ids of the two end ports within their fragments.
    pub end_ports: [usize; 2],
    /// `links[f][p]`: fragment and port across the tree edge at port `p` of
    /// fragment `f`; `None` for end ports.
    pub links: Vec<Vec<Option<(usize, usize)>>>,
    /// Canonical rank of each monomer atom.
    pub rank: Vec<usize>,
}

/// A connected set of fragments rendered as one subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileKey {
    pub key: String,
    pub atom_count: usize,
    /// External ports by tile port id: (fragment, fragment port id).
    pub ports: Vec<(usize, usize)>,
    pub roles: Vec<PortRole>,
}

/// Port stub awaiting a role: inside/outside monomer atoms and the cut bond,
/// if any (end ports have none).
#[derive(Debug, Clone, Copy)]
struct RawPort {
    inner: usize,
    outer: usize,
    cut: Option<usize>,
}

/// Render a subgroup (monomer atoms plus role-labelled port stubs) as a key.
/// Atoms and stubs enter the graph in canonical-rank order so the port id of
/// each stub does not depend on how the monomer was numbered.
fn build_key(
    monomer: &MolGraph,
    rank: &[usize],
    atoms: &[usize],
    stubs: &[(usize, usize, PortRole)],
) -> (String, MolGraph, Vec<usize>) {
    let mut sorted = atoms.to_vec();
    sorted.sort_by_key(|&a| rank[a]);
    let (mut g, map) = monomer.induced_subgraph(&sorted);
    let mut stub_order: Vec<usize> = (0..stubs.len()).collect();
    stub_order.sort_by_key(|&s| {
        let (inner, outer, role) = stubs[s];
        (rank[inner], role, rank[outer])
    });
    let mut stub_atom = vec![0; stubs.len()];
    for s in stub_order {
        let (inner, _, role) = stubs[s];
        let w = g.add_atom(Atom::wildcard().with_class(role.class()));
        g.add_bond(map[inner].expect("stub on subgroup atom"), w, BondOrder::Single)
            .expect("fresh wildcard");
        stub_atom[s] = w;
    }
    let (key, order) = write_smiles_with_order(&g);
    let mut position = vec![0; order.len()];
    for (k, &a) in order.iter().enumerate() {
        position[a] = k;
    }
    let written = g.permuted(&position);
    // port id = index among wildcards in written order
    let mut wild_rank = vec![usize::MAX; written.atom_count()];
    let mut next = 0;
    for (i, atom) in written.atoms().iter().enumerate() {
        if atom.is_wildcard() {
            wild_rank[i] = next;
            next += 1;
        }
    }
    let port_of_stub = stub_atom.iter().map(|&w| wild_rank[position[w]]).collect();
    (key, written, port_of_stub)
}

fn ports_of(graph: &MolGraph) -> Vec<(usize, usize, PortRole)> {
    graph
        .wildcards()
        .into_iter()
        .map(|w| {
            let role = PortRole::from_class(graph.atom(w).class).unwrap_or(PortRole::Sideline);
            (w, graph.neighbors(w)[0].0, role)
        })
        .collect()
}

/// The fragment tree with the start end chosen canonically: the end whose
/// wildcard has the lower canonical rank.
pub fn fragment_acyclic(g: &MolGraph) -> Result<FragmentTree, FragmentError> {
    let ends = validate_ends(g)?;
    let rank = canonical_rank(g).rank;
    let start = if rank[ends[0]] <= rank[ends[1]] {
        ends[0]
    } else {
        ends[1]
    };
    build_tree(g, start, rank)
}

/// Both orientations of the mainline (canonical start first; the second is
/// `None` when reversing gives the same start).
pub fn fragment_both_directions(g: &MolGraph) -> Result<Vec<FragmentTree>, FragmentError> {
    let ends = validate_ends(g)?;
    let rank = canonical_rank(g).rank;
    let (a, b) = if rank[ends[0]] <= rank[ends[1]] {
        (ends[0], ends[1])
    } else {
        (ends[1], ends[0])
    };
    Ok(vec![build_tree(g, a, rank.clone())?, build_tree(g, b, rank)?])
}

fn validate_ends(g: &MolGraph) -> Result<[usize; 2], FragmentError> {
    let w = g.wildcards();
    if w.len() != 2 {
        return Err(FragmentError::WildcardCount(w.len()));
    }
    if !g.is_connected() {
        return Err(FragmentError::Disconnected);
    }
    for &x in &w {
        let nbrs = g.neighbors(x);
        if nbrs.len() != 1
            || g.bond(nbrs[0].1).order != BondOrder::Single
            || g.atom(nbrs[0].0).is_wildcard()
        {
            return Err(FragmentError::BadEnd(x));
        }
    }
    Ok([w[0], w[1]])
}

fn build_tree(g: &MolGraph, start: usize, rank: Vec<usize>) -> Result<FragmentTree, FragmentError> {
    let n = g.atom_count();
    let mut cut = vec![false; g.bond_count()];
    for bi in bridge_bonds(g) {
        let b = g.bond(bi);
        let (x, y) = (g.atom(b.a), g.atom(b.b));
        cut[bi] = b.order == BondOrder::Single
            && !x.is_wildcard()
            && !y.is_wildcard()
            && x.element != Element::H
            && y.element != Element::H;
    }

    // fragment atom sets: components after removing wildcards and cut bonds
    let mut frag_of = vec![usize::MAX; n];
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&a| rank[a]);
    for &s in &by_rank {
        if g.atom(s).is_wildcard() || frag_of[s] != usize::MAX {
            continue;
        }
        let id = sets.len();
        let mut comp = vec![s];
        frag_of[s] = id;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &(v, bi) in g.neighbors(u) {
                if !cut[bi] && !g.atom(v).is_wildcard() && frag_of[v] == usize::MAX {
                    frag_of[v] = id;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        sets.push(comp);
    }
    let nf = sets.len();

    // raw ports per fragment, in canonical order of (inner, outer)
    let mut raw: Vec<Vec<RawPort>> = vec![Vec::new(); nf];
    for w in g.wildcards() {
        let inner = g.neighbors(w)[0].0;
        raw[frag_of[inner]].push(RawPort {
            inner,
            outer: w,
            cut: None,
        });
    }
    for (bi, b) in g.bonds().iter().enumerate() {
        if cut[bi] {
            raw[frag_of[b.a]].push(RawPort {
                inner: b.a,
                outer: b.b,
                cut: Some(bi),
            });
            raw[frag_of[b.b]].push(RawPort {
                inner: b.b,
                outer: b.a,
                cut: Some(bi),
            });
        }
    }
    for r in &mut raw {
        r.sort_by_key(|p| (rank[p.inner], rank[p.outer]));
    }

    // fragment adjacency through cut bonds
    let start_frag = frag_of[g.neighbors(start)[0].0];
    let far = g.wildcards().into_iter().find(|&w| w != start).expect("two ends");
    let far_frag = frag_of[g.neighbors(far)[0].0];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nf];
    let mut seen = vec![false; nf];
    seen[start_frag] = true;
    let mut queue = VecDeque::from([start_frag]);
    while let Some(f) = queue.pop_front() {
        for (k, p) in raw[f].iter().enumerate() {
            if p.cut.is_some() {
                let h = frag_of[p.outer];
                if !seen[h] {
                    seen[h] = true;
                    parent[h] = Some((f, k));
                    queue.push_back(h);
                }
            }
        }
    }
    let mut mainline = vec![far_frag];
    while let Some((p, _)) = parent[*mainline.last().unwrap()] {
        mainline.push(p);
    }
    mainline.reverse();
    let on_main: Vec<Option<usize>> = {
        let mut v = vec![None; nf];
        for (i, &f) in mainline.iter().enumerate() {
            v[f] = Some(i);
        }
        v
    };

    // roles
    let mut roles: Vec<Vec<PortRole>> = raw
        .iter()
        .map(|r| vec![PortRole::Sideline; r.len()])
        .collect();
    for (f, ports) in raw.iter().enumerate() {
        for (k, p) in ports.iter().enumerate() {
            let role = match (p.cut, on_main[f]) {
                (None, _) if p.outer == start => PortRole::Prev,
                (None, _) => PortRole::Next,
                (Some(_), Some(i)) => match on_main[frag_of[p.outer]] {
                    Some(j) if j + 1 == i => PortRole::Prev,
                    Some(j) if j == i + 1 => PortRole::Next,
                    _ => PortRole::Sideline,
                },
                // sideline fragment: the port toward its parent faces the host
                (Some(_), None) => match parent[f] {
                    Some((pf, _)) if frag_of[p.outer] == pf => PortRole::Prev,
                    _ => PortRole::Sideline,
                },
            };
            roles[f][k] = role;
        }
    }

    let mut fragments = Vec::with_capacity(nf);
    let mut port_id_of: Vec<Vec<usize>> = Vec::with_capacity(nf);
    for f in 0..nf {
        let stubs: Vec<(usize, usize, PortRole)> = raw[f]
            .iter()
            .zip(&roles[f])
            .map(|(p, &r)| (p.inner, p.outer, r))
            .collect();
        let (key, graph, ids) = build_key(g, &rank, &sets[f], &stubs);
        let wild = ports_of(&graph);
        let mut ports: Vec<Option<Port>> = vec![None; raw[f].len()];
        for (k, p) in raw[f].iter().enumerate() {
            let (w, atom, role) = wild[ids[k]];
            debug_assert_eq!(role, roles[f][k]);
            ports[ids[k]] = Some(Port {
                fragment_atom: atom,
                port_id: ids[k],
                role,
                wildcard: w,
                link: (p.inner, p.outer),
            });
        }
        fragments.push(Fragment {
            graph,
            ports: ports.into_iter().map(|p| p.expect("bijective ports")).collect(),
            canonical_key: key,
            atoms: sets[f].clone(),
        });
        port_id_of.push(ids);
    }

    let mut links: Vec<Vec<Option<(usize, usize)>>> =
        fragments.iter().map(|fr| vec![None; fr.ports.len()]).collect();
    let mut edges = Vec::new();
    for (bi, _) in cut.iter().enumerate().filter(|(_, &c)| c) {
        let mut sides = Vec::with_capacity(2);
        for (f, ports) in raw.iter().enumerate() {
            for (k, p) in ports.iter().enumerate() {
                if p.cut == Some(bi) {
                    sides.push((f, port_id_of[f][k]));
                }
            }
        }
        let (a, b) = (sides[0].min(sides[1]), sides[0].max(sides[1]));
        links[a.0][a.1] = Some(b);
        links[b.0][b.1] = Some(a);
        edges.push(TreeEdge {
            fragment_a: a.0,
            port_a: a.1,
            fragment_b: b.0,
            port_b: b.1,
        });
    }
    edges.sort();

    let end_port = |w: usize| -> (usize, usize) {
        let f = frag_of[g.neighbors(w)[0].0];
        let k = raw[f].iter().position(|p| p.outer == w).expect("end port");
        (f, port_id_of[f][k])
    };
    let (sf, sp) = end_port(start);
    let (ff, fp) = end_port(far);
    Ok(FragmentTree {
        monomer: g.clone(),
        fragments,
        edges,
        end_fragments: [sf, ff],
        end_ports: [sp, fp],
        links,
        rank,
    })
}

impl FragmentTree {
    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Both ends sit on one fragment (mainline of length one).
    pub fn ends_share_fragment(&self) -> bool {
        self.end_fragments[0] == self.end_fragments[1]
    }

    /// Key of the subgroup formed by the connected fragment set `members`.
    pub fn tile_key(&self, members: &[usize]) -> TileKey {
        let mut inside = vec![false; self.fragments.len()];
        for &f in members {
            inside[f] = true;
        }
        let mut atoms = Vec::new();
        let mut stubs = Vec::new();
        let mut external = Vec::new();
        for &f in members {
            let fr = &self.fragments[f];
            atoms.extend_from_slice(&fr.atoms);
            for p in &fr.ports {
                if self.links[f][p.port_id].is_some_and(|(h, _)| inside[h]) {
                    continue;
                }
                stubs.push((p.link.0, p.link.1, p.role));
                external.push((f, p.port_id));
            }
        }
        let (key, graph, ids) = build_key(&self.monomer, &self.rank, &atoms, &stubs);
        let mut ports = vec![(0, 0); external.len()];
        let mut roles = vec![PortRole::Sideline; external.len()];
        for (k, &e) in external.iter().enumerate() {
            ports[ids[k]] = e;
            roles[ids[k]] = stubs[k].2;
        }
        TileKey {
            key,
            atom_count: graph.heavy_atom_count(),
            ports,
            roles,
        }
    }

    /// Reconnect all fragments across the tree edges and restore the ends.
    pub fn reassemble(&self) -> MolGraph {
        let parts: Vec<&MolGraph> = self.fragments.iter().map(|f| &f.graph).collect();
        let joins: Vec<((usize, usize), (usize, usize))> = self
            .edges
            .iter()
            .map(|e| ((e.fragment_a, e.port_a), (e.fragment_b, e.port_b)))
            .collect();
        let ends = [
            (self.end_fragments[0], self.end_ports[0]),
            (self.end_fragments[1], self.end_ports[1]),
        ];
        assemble(&parts, &joins, &ends)
    }
}

/// Join key graphs: each `joins` entry bonds the atoms carrying the two named
/// ports with a single bond; each `ends` entry becomes a plain wildcard.
/// Ports are addressed as (part, port id). Ports not named anywhere are
/// dropped together with their wildcard.
pub fn assemble(
    parts: &[&MolGraph],
    joins: &[((usize, usize), (usize, usize))],
    ends: &[(usize, usize)],
) -> MolGraph {
    let mut g = MolGraph::new();
    let mut port_atom: Vec<Vec<usize>> = Vec::with_capacity(parts.len());
    for part in parts {
        let mut map = vec![usize::MAX; part.atom_count()];
        for (i, a) in part.atoms().iter().enumerate() {
            if !a.is_wildcard() {
                map[i] = g.add_atom(*a);
            }
        }
        for b in part.bonds() {
            if map[b.a] != usize::MAX && map[b.b] != usize::MAX {
                g.add_bond(map[b.a], map[b.b], b.order).expect("copied bond");
            }
        }
        port_atom.push(
            part.wildcards()
                .into_iter()
                .map(|w| map[part.neighbors(w)[0].0])
                .collect(),
        );
    }
    for &((pa, qa), (pb, qb)) in joins {
        g.add_bond(port_atom[pa][qa], port_atom[pb][qb], BondOrder::Single)
            .expect("join between distinct atoms");
    }
    for &(p, q) in ends {
        let w = g.add_atom(Atom::wildcard());
        g.add_bond(port_atom[p][q], w, BondOrder::Single).expect("end bond");
    }
    g
}

/// Roles of a key graph's ports, by port id.
pub fn key_port_roles(graph: &MolGraph) -> Vec<PortRole> {
    ports_of(graph).into_iter().map(|(_, _, r)| r).collect()
}

/// A sideline subtree: `fragment` attaches to port `host_port` of its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidelineNode {
    pub host_port: usize,
    pub fragment: usize,
    /// Ordered by the port id on `fragment`.
    pub children: Vec<SidelineNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MainlineDecomposition {
    /// Fragments from the start end to the far end.
    pub mainline: Vec<usize>,
    /// Host fragment -> sideline subtrees ordered by host port id.
    pub sidelines: BTreeMap<usize, Vec<SidelineNode>>,
}

/// Mainline = tree path between the end fragments; everything else hangs off
/// it as rooted sideline subtrees.
pub fn locate_mainline(t: &FragmentTree) -> MainlineDecomposition {
    let nf = t.fragments.len();
    let [a, b] = t.end_fragments;
    let mut parent = vec![usize::MAX; nf];
    parent[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(f) = queue.pop_front() {
        for &(h, _) in t.links[f].iter().flatten() {
            if parent[h] == usize::MAX {
                parent[h] = f;
                queue.push_back(h);
            }
        }
    }
    let mut mainline = vec![b];
    while *mainline.last().unwrap() != a {
        mainline.push(parent[*mainline.last().unwrap()]);
    }
    mainline.reverse();
    let mut on_main = vec![false; nf];
    for &f in &mainline {
        on_main[f] = true;
    }
    let mut sidelines = BTreeMap::new();
    for &f in &mainline {
        let subs: Vec<SidelineNode> = t.links[f]
            .iter()
            .enumerate()
            .filter_map(|(p, l)| l.filter(|(h, _)| !on_main[*h]).map(|(h, _)| sideline(t, f, p, h)))
            .collect();
        if !subs.is_empty() {
            sidelines.insert(f, subs);
        }
    }
    MainlineDecomposition {
        mainline,
        sidelines,
    }
}

fn sideline(t: &FragmentTree, host: usize, host_port: usize, f: usize) -> SidelineNode {
    let children = t.links[f]
        .iter()
        .enumerate()
        .filter_map(|(p, l)| l.filter(|(h, _)| *h != host).map(|(h, _)| sideline(t, f, p, h)))
        .collect();
    SidelineNode {
        host_port,
        fragment: f,
        children,
    }
}

/// Key of a fragment: its canonical SMILES with ports as role-labelled
/// wildcards.
pub fn canonical_fragment_key(f: &Fragment) -> &str {
    &f.canonical_key
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{graph_isomorphic, parse_smiles};

    fn tree(s: &str) -> FragmentTree {
        fragment_acyclic(&parse_smiles(s).unwrap()).unwrap()
    }

    fn keys(t: &FragmentTree) -> Vec<&str> {
        t.fragments.iter().map(|f| f.canonical_key.as_str()).collect()
    }

    #[test]
    fn styrene_unit() {
        let t = tree("*CC(*)c1ccccc1");
        assert_eq!(t.len(), 3);
        assert_eq!(t.edges.len(), 2);
        let sizes: Vec<usize> = t.fragments.iter().map(Fragment::heavy_atom_count).collect();
        let mut sorted = sizes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 6]);
        let ch = t
            .fragments
            .iter()
            .position(|f| f.heavy_atom_count() == 1 && f.ports.len() == 3)
            .expect("CH with three ports");
        let phenyl = sizes.iter().position(|&s| s == 6).unwrap();
        let ch2 = (0..3).find(|&i| i != ch && i != phenyl).unwrap();
        let d = locate_mainline(&t);
        let mut main = d.mainline.clone();
        main.sort_unstable();
        let mut expect = vec![ch2, ch];
        expect.sort_unstable();
        assert_eq!(main, expect);
        assert_eq!(d.sidelines.len(), 1);
        assert_eq!(d.sidelines[&ch][0].fragment, phenyl);
        assert_eq!(t.fragments[phenyl].canonical_key, "[*:1]c1ccccc1");
        assert!(graph_isomorphic(&t.reassemble(), &t.monomer));
    }

    #[test]
    fn trivial_and_ring_only_units() {
        let t = tree("*C*");
        assert_eq!(t.len(), 1);
        assert!(t.edges.is_empty());
        assert!(t.ends_share_fragment());
        assert_eq!(keys(&t), vec!["[*:1]C[*:2]"]);
        let t = tree("*c1ccc(*)cc1");
        assert_eq!(t.len(), 1);
        assert_eq!(t.fragments[0].ports.len(), 2);
        assert_eq!(locate_mainline(&t).mainline, vec![0]);
    }

    #[test]
    fn same_chemistry_same_key() {
        let a = tree("*CC(*)C");
        let b = tree("*CC(*)CC");
        let ka: Vec<&str> = keys(&a);
        let kb: Vec<&str> = keys(&b);
        assert!(ka.iter().any(|k| kb.contains(k)), "{ka:?} {kb:?}");
    }

    #[test]
    fn ring_substitution_pattern_changes_key() {
        let ortho = tree("*c1ccccc1*");
        let para = tree("*c1ccc(*)cc1");
        let mono = tree("*CC(*)c1ccccc1");
        assert_ne!(ortho.fragments[0].canonical_key, para.fragments[0].canonical_key);
        let phenyl = mono.fragments.iter().find(|f| f.heavy_atom_count() == 6).unwrap();
        assert_ne!(phenyl.canonical_key, para.fragments[0].canonical_key);
    }

    #[test]
    fn mainline_with_hanging_fragment() {
        // A-B-C-D along the backbone, E hanging off B
        let t = tree("*C(=O)C(OC)C(=O)N*");
        let d = locate_mainline(&t);
        assert_eq!(d.mainline.len(), 4, "{:?}", keys(&t));
        let hosts: Vec<usize> = d.sidelines.keys().copied().collect();
        assert_eq!(hosts.len(), 1);
        let host_pos = d.mainline.iter().position(|&f| f == hosts[0]).unwrap();
        assert!(host_pos == 1 || host_pos == 2);
        // O-C side chain: O then methyl nested under it
        let side = &d.sidelines[&hosts[0]][0];
        assert_eq!(side.children.len(), 1);
        assert!(graph_isomorphic(&t.reassemble(), &t.monomer));
    }

    #[test]
    fn roles_follow_direction() {
        let both = fragment_both_directions(&parse_smiles("*CC(*)c1ccccc1").unwrap()).unwrap();
        for t in &both {
            let start = t.end_fragments[0];
            let p = &t.fragments[start].ports[t.end_ports[0]];
            assert_eq!(p.role, PortRole::Prev);
            let far = t.end_fragments[1];
            assert_eq!(t.fragments[far].ports[t.end_ports[1]].role, PortRole::Next);
        }
        assert_ne!(both[0].end_fragments, both[1].end_fragments);
    }

    #[test]
    fn tile_keys_merge_fragments() {
        let t = tree("*CC(*)c1ccccc1");
        let all: Vec<usize> = (0..t.len()).collect();
        let whole = t.tile_key(&all);
        assert_eq!(whole.atom_count, 8);
        assert_eq!(whole.ports.len(), 2);
        let single = t.tile_key(&[0]);
        assert_eq!(single.key, t.fragments[0].canonical_key);
        let ids: Vec<usize> = single.ports.iter().map(|&(_, p)| p).collect();
        assert_eq!(ids, (0..ids.len()).collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        let e = |s: &str| fragment_acyclic(&parse_smiles(s).unwrap()).unwrap_err();
        assert_eq!(e("*CC"), FragmentError::WildcardCount(1));
        assert_eq!(e("*CC*.C"), FragmentError::Disconnected);
        assert!(matches!(e("*=CC*"), FragmentError::BadEnd(_)));
    }
}
