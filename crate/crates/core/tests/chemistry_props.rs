mod common;

use common::{molecule, permutation, repeat_unit};
use happy_core::chemfeat::{apply_scaler, compute_descriptors, fit_scaler, morgan_fingerprint, tanimoto};
use happy_core::corpus::bundled;
use happy_core::forge::{enumerate_candidates, forge_run, MiningConfig};
use happy_core::fragment::{fragment_acyclic, locate_mainline};
use happy_core::happy::{decode, encode, flatten, parse_happy, HappyString, HappyUnit};
use happy_core::molgraph::{
    bridge_bonds, check_valence, find_rings, graph_isomorphic, parse_smiles, write_smiles, BondOrder, MolGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn acyclic_heavy_single_bonds(g: &MolGraph) -> usize {
    let bridges = bridge_bonds(g);
    bridges
        .iter()
        .filter(|&&b| {
            let bond = g.bond(b);
            bond.order == BondOrder::Single
                && !g.atom(bond.a).is_wildcard()
                && !g.atom(bond.b).is_wildcard()
                && g.atom(bond.a).element.is_heavy()
                && g.atom(bond.b).element.is_heavy()
        })
        .count()
}

proptest! {
    #![proptest_config(common::config(128))]

    #[test]
    fn smiles_round_trip(g in molecule()) {
        let s = write_smiles(&g);
        let back = parse_smiles(&s).unwrap();
        prop_assert!(graph_isomorphic(&back, &g), "{s}");
        prop_assert_eq!(write_smiles(&back), s);
    }

    #[test]
    fn canonical_form_ignores_numbering(g in molecule(), seed in any::<u64>()) {
        let p = g.permuted(&permutation(g.atom_count(), seed));
        prop_assert_eq!(write_smiles(&p), write_smiles(&g));
        prop_assert_eq!(morgan_fingerprint(&p), morgan_fingerprint(&g));
        // sums may run in another order
        let (dp, dg) = (compute_descriptors(&p), compute_descriptors(&g));
        for (x, y) in dp.values.iter().zip(&dg.values) {
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
    }

    #[test]
    fn cycle_rank(g in molecule()) {
        prop_assert!(g.is_connected());
        prop_assert_eq!(find_rings(&g).len() + g.atom_count(), g.bond_count() + 1);
    }

    #[test]
    fn adding_a_bond_keeps_invalid_graphs_invalid(g in molecule(), seed in any::<u64>()) {
        prop_assume!(g.atoms().iter().all(|a| !a.aromatic) && g.atom_count() >= 3);
        let n = g.atom_count();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut free: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| g.bond_between(a, b).is_none())
            .collect();
        free.shuffle(&mut rng);
        let mut bad = g.clone();
        while check_valence(&bad).valid {
            let Some((a, b)) = free.pop() else { break };
            bad.add_bond(a, b, BondOrder::Double).unwrap();
        }
        prop_assume!(!check_valence(&bad).valid);
        for (a, b) in free {
            let mut more = bad.clone();
            more.add_bond(a, b, BondOrder::Single).unwrap();
            prop_assert!(!check_valence(&more).valid);
        }
    }

    #[test]
    fn tanimoto_bounds(a in molecule(), b in molecule()) {
        let (fa, fb) = (morgan_fingerprint(&a), morgan_fingerprint(&b));
        let t = tanimoto(&fa, &fb);
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert_eq!(t, tanimoto(&fb, &fa));
        prop_assert_eq!(tanimoto(&fa, &fa), 1.0);
    }

    #[test]
    fn autocorrelations_add_over_components(a in molecule(), b in molecule()) {
        let joined = parse_smiles(&format!("{}.{}", write_smiles(&a), write_smiles(&b))).unwrap();
        let (da, db, dj) = (compute_descriptors(&a), compute_descriptors(&b), compute_descriptors(&joined));
        for name in ["valence_electron_adjacency", "polarizability_adjacency", "heavy_atoms", "rings"] {
            let sum = da.get(name).unwrap() + db.get(name).unwrap();
            prop_assert!((dj.get(name).unwrap() - sum).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn scaler_maps_fit_data_into_unit_interval(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 4), 1..20)) {
        let p = fit_scaler(&rows);
        for r in &rows {
            for v in apply_scaler(r, &p) {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
        }
    }

    #[test]
    fn fragmentation_invariants(g in repeat_unit(), seed in any::<u64>()) {
        let t = fragment_acyclic(&g).unwrap();
        prop_assert!(graph_isomorphic(&t.reassemble(), &g));
        prop_assert_eq!(t.fragments.len(), t.edges.len() + 1);
        prop_assert_eq!(t.edges.len(), acyclic_heavy_single_bonds(&g));
        let keys = |t: &happy_core::fragment::FragmentTree| -> Vec<String> {
            locate_mainline(t).mainline.iter().map(|&f| t.fragments[f].canonical_key.clone()).collect()
        };
        let p = g.permuted(&permutation(g.atom_count(), seed));
        prop_assert_eq!(keys(&fragment_acyclic(&p).unwrap()), keys(&t));
    }

    #[test]
    fn codec_round_trip_and_direction(g in repeat_unit(), seed in any::<u64>()) {
        let vocab = forge_run(std::slice::from_ref(&g), &MiningConfig { threshold: 1000, max_iterations: 5 })
            .unwrap()
            .vocabulary;
        let h = encode(&g, &vocab).unwrap();
        prop_assert!(graph_isomorphic(&decode(&h, &vocab).unwrap(), &g));
        let p = g.permuted(&permutation(g.atom_count(), seed));
        prop_assert_eq!(encode(&p, &vocab).unwrap(), h.clone());
        prop_assert_eq!(parse_happy(&flatten(&h)).unwrap(), h);
    }
}

fn happy_unit(depth: u32) -> BoxedStrategy<HappyUnit> {
    let token = "G[0-9]{4}".prop_map(String::from);
    if depth == 0 {
        return token.prop_map(HappyUnit::new).boxed();
    }
    (token, prop::collection::vec(prop::collection::vec(happy_unit(depth - 1), 1..3), 0..3))
        .prop_map(|(token, groups)| HappyUnit { token, groups })
        .boxed()
}

proptest! {
    #![proptest_config(common::config(256))]

    #[test]
    fn flatten_and_parse_are_inverse(units in prop::collection::vec(happy_unit(2), 1..5)) {
        let h = HappyString { units };
        let flat = flatten(&h);
        let back = parse_happy(&flat).unwrap();
        prop_assert_eq!(flatten(&back), flat);
        prop_assert_eq!(back, h);
    }
}

proptest! {
    #![proptest_config(common::config(12))]

    #[test]
    fn forge_invariants(start in 0usize..200, len in 8usize..36, threshold in 1usize..6) {
        let corpus: Vec<MolGraph> = bundled().into_iter().cycle().skip(start).take(len).collect();
        let config = MiningConfig { threshold, max_iterations: 50 };
        let r = forge_run(&corpus, &config).unwrap();
        prop_assert!(r.converged);
        for (m, g) in r.tilings.iter().zip(&corpus) {
            prop_assert!(m.is_partition());
            prop_assert!(graph_isomorphic(&m.reassemble(), g));
        }
        prop_assert!(enumerate_candidates(&r.tilings).values().all(|c| c.count <= threshold));
        for e in &r.vocabulary.entries {
            if e.iteration >= 1 {
                prop_assert!(parse_smiles(&e.key).unwrap().wildcards().len() <= 2, "{}", e.key);
            }
        }
        let again = forge_run(&corpus, &config).unwrap();
        prop_assert_eq!(&again.vocabulary, &r.vocabulary);
        prop_assert!(again.tilings.iter().zip(&r.tilings).all(|(a, b)| a.tiles == b.tiles));
    }
}
