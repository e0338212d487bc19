mod common;

use common::{build_smiles, permutation, steps, valid};
use happy_core::attribute::{completeness_gap, integrated_gradients};
use happy_core::chemfeat::{ScalerParams, DESCRIPTOR_COUNT};
use happy_core::corpus::bundled;
use happy_core::design::{
    compute_rewards, fit_ridge, Policy, PropertyOracle, PropertyTarget, RewardConfig, RewardContext, TargetMode,
    TermWeights, EOS,
};
use happy_core::forge::{forge_run, MiningConfig, Vocabulary};
use happy_core::happy::{flatten, parse_happy_str, Decoder, Encoder};
use happy_core::metrics::{
    internal_diversity, mean_similarity, novelty_fraction, policy_entropy, scaffold_fraction, specificity,
    validity_fraction, GenerationBatch, SaModel, Scaffold, TrainSet,
};
use happy_core::molgraph::{check_valence, parse_smiles, write_smiles, MolGraph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

/// SMILES strings from random construction steps; some are invalid.
fn smiles_batch(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(steps(), 1..max).prop_map(|v| v.iter().map(|s| build_smiles(s, false)).collect())
}

fn train_set() -> &'static (Vec<MolGraph>, TrainSet, SaModel) {
    static T: OnceLock<(Vec<MolGraph>, TrainSet, SaModel)> = OnceLock::new();
    T.get_or_init(|| {
        let g: Vec<MolGraph> = ["CCO", "c1ccccc1", "CC(=O)O", "CCN", "C1CCCCC1", "CCCl"]
            .iter()
            .map(|s| parse_smiles(s).unwrap())
            .collect();
        let t = TrainSet::new(&g);
        let sa = SaModel::fit(&g).unwrap();
        (g, t, sa)
    })
}

fn pretrained() -> &'static (Vocabulary, Policy) {
    static P: OnceLock<(Vocabulary, Policy)> = OnceLock::new();
    P.get_or_init(|| {
        let corpus = bundled();
        let vocab = forge_run(&corpus, &MiningConfig { threshold: 5, max_iterations: 50 }).unwrap().vocabulary;
        let enc = Encoder::new(&vocab);
        let seqs: Vec<Vec<String>> = corpus.iter().map(|g| flatten(&enc.encode(g).unwrap())).collect();
        let policy = Policy::pretrain(&vocab, 3, &seqs, 0.01).unwrap();
        (vocab, policy)
    })
}

fn toy_oracle(weights: Vec<f64>) -> PropertyOracle {
    PropertyOracle {
        property_name: "toy".into(),
        selected: (0..weights.len()).collect(),
        weights,
        bias: 0.5,
        scaler: ScalerParams {
            min: vec![0.0; DESCRIPTOR_COUNT],
            max: vec![50.0; DESCRIPTOR_COUNT],
        },
    }
}

fn unit(v: Result<f64, happy_core::metrics::MetricsError>) -> bool {
    v.map_or(true, |x| (0.0..=1.0).contains(&x))
}

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn fractions_in_unit_interval(samples in smiles_batch(12)) {
        let (_, train, _) = train_set();
        let b = GenerationBatch::from_smiles(&samples, None);
        prop_assert!(unit(validity_fraction(&b)));
        prop_assert!(unit(novelty_fraction(&b, train)));
        prop_assert!(unit(mean_similarity(&b, train)));
        prop_assert!(unit(internal_diversity(&b)));
        prop_assert!(unit(specificity(&b, train)));
        let ring = Scaffold::Subgraph(parse_smiles("C1CCCC1").unwrap());
        prop_assert!(unit(scaffold_fraction(&b, &ring)));
    }

    #[test]
    fn duplicates_have_no_diversity(s in steps(), n in 2usize..12, seed in any::<u64>()) {
        let Some(g) = valid(&build_smiles(&s, false)) else { return Ok(()) };
        // differently numbered copies of one molecule
        let copies: Vec<String> = (0..n)
            .map(|i| happy_core::molgraph::write_smiles_with_order(&g.permuted(&permutation(g.atom_count(), seed + i as u64))).0)
            .collect();
        let b = GenerationBatch::from_smiles(&copies, None);
        prop_assert_eq!(internal_diversity(&b), Ok(0.0));
    }

    #[test]
    fn entropy_bounds(raw in prop::collection::vec(prop::collection::vec(prop::collection::vec(0.0f64..1.0, 5), 1..6), 1..6)) {
        let dists: Vec<Vec<Vec<f64>>> = raw
            .into_iter()
            .map(|seq| seq.into_iter().map(|row| {
                let row: Vec<f64> = row.iter().map(|x| x + 1e-3).collect();
                let z: f64 = row.iter().sum();
                row.iter().map(|x| x / z).collect()
            }).collect())
            .collect();
        let h = policy_entropy(&dists).unwrap();
        prop_assert!(h >= 0.0 && h <= 5f64.ln() + 1e-12);
    }

    #[test]
    fn reward_contract(samples in smiles_batch(12), w in prop::collection::vec(-3.0f64..3.0, 3), x in 0.0f64..5.0, mode in 0u8..3) {
        let (_, train, sa) = train_set();
        let b = GenerationBatch::from_smiles(&samples, None);
        let mode = [TargetMode::Match(x), TargetMode::GreaterThan(x), TargetMode::LessThan(x)][mode as usize];
        let config = RewardConfig {
            property_targets: vec![PropertyTarget { oracle: toy_oracle(w), mode, weight: 2.0 }],
            batch_size: samples.len(),
            ..Default::default()
        };
        let ctx = RewardContext { train: Some(train), sa: Some(sa), vocab: None };
        let r = compute_rewards(&b, &config, ctx).unwrap();
        let total_weight = 2.0 + 4.0;
        for (i, br) in r.breakdowns.iter().enumerate() {
            if b.decoded[i].is_none() {
                prop_assert_eq!(r.rewards[i], 0.0);
            } else {
                prop_assert!(br.scaled.iter().all(|s| (0.0..=1.0).contains(s)));
                prop_assert!(r.rewards[i] >= 0.0 && r.rewards[i] <= total_weight + 1e-12);
            }
        }

        // with zero similarity and specificity weights the training set is irrelevant
        let blind = RewardConfig {
            weights: TermWeights { similarity: 0.0, specificity: 0.0, ..TermWeights::default() },
            ..config
        };
        let other = TrainSet::new(&[parse_smiles("CCCCCCCCS").unwrap()]);
        let a = compute_rewards(&b, &blind, RewardContext { train: Some(train), sa: Some(sa), vocab: None }).unwrap();
        let c = compute_rewards(&b, &blind, RewardContext { train: Some(&other), sa: Some(sa), vocab: None }).unwrap();
        prop_assert_eq!(a.rewards, c.rewards);
    }

    #[test]
    fn clamped_terms_are_monotone(x in -10.0f64..10.0, v in -20.0f64..20.0, d in 0.0f64..5.0) {
        let gt = TargetMode::GreaterThan(x);
        let lt = TargetMode::LessThan(x);
        prop_assert!(gt.raw(v + d) >= gt.raw(v));
        prop_assert_eq!(gt.raw(x + d), x);
        prop_assert_eq!(lt.raw(x - d), -x);
        if v > x && d > 0.0 {
            prop_assert!(lt.raw(v + d) < lt.raw(v));
        }
    }

    #[test]
    fn grammar_samples_decode(seed in any::<u64>()) {
        let (vocab, policy) = pretrained();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ids, dists) = policy.sample_one(&mut rng, 64);
        for d in &dists {
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let lp: f64 = ids.iter().zip(&dists).map(|(&t, d)| d[t as usize].ln()).sum();
        prop_assert!((lp - policy.log_prob_ids(&ids)).abs() < 1e-9);
        if ids.last() == Some(&EOS) {
            let text = policy.text(&ids);
            let h = parse_happy_str(&text).unwrap();
            let g = Decoder::new(vocab).decode(&h).unwrap();
            prop_assert!(check_valence(&g).valid, "{}", write_smiles(&g));
        }
    }

    #[test]
    fn ig_linear_completeness(w in prop::collection::vec(-5.0f64..5.0, 1..8), seed in any::<u64>(), steps in 1usize..300) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = w.iter().map(|_| rng.gen_range(-10.0..10.0)).collect();
        let ig = integrated_gradients(|_| w.clone(), &x, &vec![0.0; x.len()], steps).unwrap();
        let fx: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!(completeness_gap(&ig, fx + 1.0, 1.0) <= 1e-9);
        let zero = integrated_gradients(|_| w.clone(), &x, &x, steps).unwrap();
        prop_assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ig_refinement_never_hurts(w in prop::collection::vec(-2.0f64..2.0, 1..5), seed in any::<u64>(), steps in 1usize..120) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = w.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = |p: &[f64]| -> f64 { w.iter().zip(p).map(|(a, v)| a * (v / 2.0).exp()).sum() };
        let grad = |p: &[f64]| -> Vec<f64> { w.iter().zip(p).map(|(a, v)| a / 2.0 * (v / 2.0).exp()).collect() };
        let b = vec![0.0; x.len()];
        let (fx, fb) = (f(&x), f(&b));
        let g1 = completeness_gap(&integrated_gradients(grad, &x, &b, steps).unwrap(), fx, fb);
        let g2 = completeness_gap(&integrated_gradients(grad, &x, &b, 2 * steps).unwrap(), fx, fb);
        prop_assert!(g2 <= g1 + 1e-12, "{g1} -> {g2}");
    }

    #[test]
    fn ridge_recovers_and_shrinks(coef in prop::collection::vec(-4.0f64..4.0, 1..4), seed in any::<u64>(), lambda in 0.01f64..10.0) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = coef.len();
        let x: Vec<Vec<f64>> = (0..p + 8).map(|_| (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 1.5 + r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>()).collect();
        let (w, b) = fit_ridge(&x, &y, 0.0).unwrap();
        for (a, c) in w.iter().zip(&coef) {
            prop_assert!((a - c).abs() < 1e-6);
        }
        prop_assert!((b - 1.5).abs() < 1e-6);
        let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        let (w1, _) = fit_ridge(&x, &y, lambda).unwrap();
        let (w2, _) = fit_ridge(&x, &y, 2.0 * lambda).unwrap();
        prop_assert!(norm(&w2) <= norm(&w1) + 1e-12 && norm(&w1) <= norm(&w) + 1e-9);
    }
}
