use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Characterization;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    /// Example indices held out in `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified assignment: each class is shuffled with its own seeded stream,
/// then dealt round-robin to the folds. Class `c` starts dealing at
/// `(base + examples of lower-index classes) mod k`, where `base` is a seeded
/// rotation, so fold sizes also differ by at most one overall.
pub fn stratified_folds(
    y: &[Characterization],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, EvalError> {
    if y.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if k < 2 {
        return Err(EvalError::InvalidFolds { k, n: y.len() });
    }
    if k > y.len() {
        return Err(EvalError::InvalidFolds { k, n: y.len() });
    }
    let base = stream(seed, Purpose::FoldOffset, 0).random_range(0..k);
    let mut fold_of = vec![usize::MAX; y.len()];
    let mut dealt = 0;
    for class in Characterization::ALL {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        members.shuffle(&mut stream(
            seed,
            Purpose::FoldShuffle,
            class.index() as u64,
        ));
        let offset = (base + dealt) % k;
        for (j, &i) in members.iter().enumerate() {
            fold_of[i] = (offset + j) % k;
        }
        dealt += members.len();
    }
    Ok(FoldAssignment { fold_of, k, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Characterization::{Read, Write};

    #[test]
    fn two_balanced_classes() {
        let y: Vec<_> = (0..20)
            .map(|i| if i % 2 == 0 { Read } else { Write })
            .collect();
        let f = stratified_folds(&y, 10, 123).unwrap();
        for fold in 0..10 {
            let t = f.test_indices(fold);
            assert_eq!(t.len(), 2);
            assert_ne!(y[t[0]], y[t[1]]);
        }
        assert_eq!(f, stratified_folds(&y, 10, 123).unwrap());
    }

    #[test]
    fn pigeonhole_for_twelve() {
        let f = stratified_folds(&[Read; 12], 10, 1).unwrap();
        let mut sizes = f.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [1, 1, 1, 1, 1, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            stratified_folds(&[], 2, 1),
            Err(EvalError::EmptyInput)
        ));
        assert!(stratified_folds(&[Read, Write], 3, 1).is_err());
        assert!(stratified_folds(&[Read, Write], 1, 1).is_err());
    }
}
