use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub n_folds: usize,
    pub n_repeats: usize,
    pub seed: u64,
}

/// Fold id of every record for one repeat: a seeded shuffle, then record at
/// shuffled position `p` goes to fold `p % n_folds`.
pub fn kfold_assign(n: usize, n_folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        fold[i] = p % n_folds;
    }
    fold
}

/// Assignments for each repeat; repeat `r` uses seed `plan.seed + r`.
pub fn kfold_split(n: usize, plan: &SplitPlan) -> Vec<Vec<usize>> {
    (0..plan.n_repeats)
        .map(|r| kfold_assign(n, plan.n_folds, plan.seed.wrapping_add(r as u64)))
        .collect()
}
