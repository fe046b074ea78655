use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::DatasetManifest;
use crate::error::{Error, Result};

/// Row indices of one train/test rotation, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified K-fold split over binary targets.
///
/// Positives and negatives are shuffled separately, laid out positives
/// first, and dealt round-robin into `k` test folds. Fold sizes then differ
/// by at most one, and so do per-fold positive counts.
pub fn stratified_folds(targets: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Config(format!("K-fold needs K >= 2, got {k}")));
    }
    if targets.len() < k {
        return Err(Error::TooFewSamples {
            samples: targets.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positives: Vec<usize> = (0..targets.len()).filter(|&i| targets[i] == 1).collect();
    let mut negatives: Vec<usize> = (0..targets.len()).filter(|&i| targets[i] != 1).collect();
    positives.shuffle(&mut rng);
    negatives.shuffle(&mut rng);

    let mut tests = vec![Vec::with_capacity(targets.len() / k + 1); k];
    for (slot, i) in positives.into_iter().chain(negatives).enumerate() {
        tests[slot % k].push(i);
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; targets.len()];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..targets.len()).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect())
}

pub fn kfold_split(manifest: &DatasetManifest, k: usize, seed: u64) -> Result<Vec<Fold>> {
    stratified_folds(&manifest.targets(), k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_samples_five_folds() {
        let y = [0, 1, 0, 0, 1, 0, 0, 0, 1, 0];
        let folds = stratified_folds(&y, 5, 7).unwrap();
        assert_eq!(folds.len(), 5);
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.test.len(), 2);
            assert_eq!(f.train.len(), 8);
        }
    }

    #[test]
    fn stratification_arithmetic() {
        let y: Vec<u8> = (0..100).map(|i| u8::from(i % 10 < 3)).collect();
        for f in stratified_folds(&y, 5, 1).unwrap() {
            assert_eq!(f.test.iter().filter(|&&i| y[i] == 1).count(), 6);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let y: Vec<u8> = (0..37).map(|i| u8::from(i % 4 == 0)).collect();
        assert_eq!(stratified_folds(&y, 5, 3).unwrap(), stratified_folds(&y, 5, 3).unwrap());
        assert_ne!(stratified_folds(&y, 5, 3).unwrap(), stratified_folds(&y, 5, 4).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(stratified_folds(&[0, 1, 0], 5, 0), Err(Error::TooFewSamples { .. })));
        assert!(stratified_folds(&[0, 1, 0], 1, 0).is_err());
    }
}
