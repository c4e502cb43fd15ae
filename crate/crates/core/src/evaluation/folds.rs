use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::Corpus;

/// Fold of every row, derived from the fold of its author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub author_fold: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    /// Authors dealt to each fold.
    pub fn authors_per_fold(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &f in self.author_fold.values() {
            counts[f] += 1;
        }
        counts
    }
}

/// Sorts the distinct authors, shuffles them with `seed` and deals them
/// round-robin into `k` folds; every row follows its author.
pub fn group_folds<S: AsRef<str>>(authors: &[S], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    let mut distinct: Vec<&str> = authors.iter().map(AsRef::as_ref).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < k {
        return Err(EvalError::TooFewAuthors { authors: distinct.len(), k });
    }
    distinct.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let author_fold: BTreeMap<String, usize> =
        distinct.iter().enumerate().map(|(i, a)| (a.to_string(), i % k)).collect();
    let fold_of = authors.iter().map(|a| author_fold[a.as_ref()]).collect();
    Ok(FoldAssignment { k, fold_of, author_fold })
}

pub fn make_grouped_folds(c: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    let authors: Vec<&str> = c.tweets.iter().map(|t| t.author_id.as_str()).collect();
    group_folds(&authors, k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_authors_two_folds() {
        let authors = ["a", "b", "c", "d", "a", "c"];
        let f = group_folds(&authors, 2, 5).unwrap();
        assert_eq!(f.authors_per_fold(), vec![2, 2]);
        assert_eq!(f.fold_of[0], f.fold_of[4]);
        assert_eq!(f.fold_of[2], f.fold_of[5]);
    }

    #[test]
    fn prolific_author_stays_together() {
        let mut authors = vec!["big"; 100];
        authors.extend(["x", "y", "z", "w"]);
        let f = group_folds(&authors, 3, 0).unwrap();
        let fold = f.fold_of[0];
        assert!(f.fold_of[..100].iter().all(|&g| g == fold));
        assert_eq!(f.test_rows(fold).len() + f.train_rows(fold).len(), 104);
    }

    #[test]
    fn too_few_authors() {
        assert!(matches!(group_folds(&["a", "b", "a"], 3, 0), Err(EvalError::TooFewAuthors { authors: 2, k: 3 })));
        assert!(matches!(group_folds(&["a", "b"], 1, 0), Err(EvalError::InvalidK(1))));
    }

    proptest! {
        #[test]
        fn grouping_and_balance(
            authors in prop::collection::vec(0u8..40, 10..200),
            k in 2usize..8,
            seed in any::<u64>(),
        ) {
            let names: Vec<String> = authors.iter().map(|a| format!("u{a}")).collect();
            let distinct = names.iter().collect::<std::collections::BTreeSet<_>>().len();
            match group_folds(&names, k, seed) {
                Err(_) => prop_assert!(distinct < k),
                Ok(f) => {
                    for (name, fold) in names.iter().zip(&f.fold_of) {
                        prop_assert_eq!(f.author_fold[name], *fold);
                    }
                    let per = f.authors_per_fold();
                    prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
                    // same seed with rows permuted gives the same author → fold map
                    let mut rev = names.clone();
                    rev.reverse();
                    prop_assert_eq!(group_folds(&rev, k, seed).unwrap().author_fold, f.author_fold);
                }
            }
        }
    }
}
