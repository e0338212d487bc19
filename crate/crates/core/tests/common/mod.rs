#![allow(dead_code)]

use happy_core::molgraph::{check_valence, parse_smiles, MolGraph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ATOMS: &[&str] = &["C", "C", "C", "N", "O", "S", "F", "Cl", "c1ccccc1", "C1CCCC1", "c1ccncc1", "C(=O)"];

/// SMILES text built from random construction steps; ring closures use
/// digits 5-9 so they never clash with the ring blocks in `ATOMS`.
pub fn build_smiles(steps: &[(u8, u8)], polymer: bool) -> String {
    let mut out = String::new();
    if polymer {
        out.push('*');
    }
    out.push_str(ATOMS[0]);
    let mut depth = 0;
    let mut open: Vec<u8> = Vec::new();
    for &(a, b) in steps {
        let atom = ATOMS[b as usize % ATOMS.len()];
        let bond = if b % 5 == 4 && !atom.starts_with('c') { "=" } else { "" };
        match a % 7 {
            0..=2 => {
                out.push_str(bond);
                out.push_str(atom);
            }
            3 if depth < 3 => {
                out.push('(');
                out.push_str(atom);
                depth += 1;
            }
            4 if depth > 0 => {
                out.push(')');
                depth -= 1;
            }
            5 if !open.is_empty() => {
                let d = open.pop().unwrap();
                out.push((b'0' + d) as char);
            }
            6 if open.len() < 3 => {
                let d = (5..=9).find(|d| !open.contains(d)).unwrap();
                open.push(d);
                out.push((b'0' + d) as char);
                out.push('C');
            }
            _ => out.push('C'),
        }
    }
    for d in open {
        out.push_str("CC");
        out.push((b'0' + d) as char);
    }
    for _ in 0..depth {
        out.push(')');
    }
    if polymer {
        out.push_str("(*)");
    }
    out
}

/// Parses `s`, keeping only valence-valid graphs.
pub fn valid(s: &str) -> Option<MolGraph> {
    parse_smiles(s).ok().filter(|g| check_valence(g).valid)
}

pub fn steps() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((any::<u8>(), any::<u8>()), 0..14)
}

pub fn molecule() -> impl Strategy<Value = MolGraph> {
    steps().prop_filter_map("invalid molecule", |s| valid(&build_smiles(&s, false)))
}

pub fn repeat_unit() -> impl Strategy<Value = MolGraph> {
    steps().prop_filter_map("invalid repeat unit", |s| {
        valid(&build_smiles(&s, true)).filter(|g| g.wildcards().len() == 2)
    })
}

pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}
