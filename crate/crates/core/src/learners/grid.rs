use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{DistanceMatrix, FULL_GRAM_LIMIT};
use super::svm::decisions_with_distances;
use super::{train, LearnError, ModelSpec};
use crate::corpus::GenderLabel;
use crate::evaluation::FoldAssignment;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub spec: ModelSpec,
    /// `None` for folds whose training part lacks a class.
    pub fold_accuracies: Vec<Option<f64>>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub best: usize,
}

impl GridResult {
    pub fn best_spec(&self) -> &ModelSpec {
        &self.rows[self.best].spec
    }

    pub fn best_accuracy(&self) -> Option<f64> {
        self.rows[self.best].mean
    }
}

fn fold_accuracy(
    spec: &ModelSpec,
    m: &FeatureMatrix,
    folds: &FoldAssignment,
    fold: usize,
    distances: Option<&DistanceMatrix>,
) -> Result<Option<f64>, LearnError> {
    let train_rows = folds.train_rows(fold);
    let test_rows = folds.test_rows(fold);
    if test_rows.is_empty() {
        return Ok(None);
    }
    let predictions: Result<Vec<GenderLabel>, LearnError> = match (spec, distances) {
        (ModelSpec::Svm(p), Some(d)) => spec.check().and_then(|_| {
            let f = decisions_with_distances(&m.labels, m.dim(), d, &train_rows, &test_rows, p)?;
            Ok(f.into_iter().map(|f| if f >= 0.0 { GenderLabel::Male } else { GenderLabel::Female }).collect())
        }),
        _ => train(spec, &m.subset(&train_rows))
            .and_then(|model| test_rows.iter().map(|&r| model.predict(&m.rows[r])).collect()),
    };
    let predictions = match predictions {
        Ok(p) => p,
        Err(LearnError::SingleClass | LearnError::Empty) => return Ok(None),
        Err(e) => return Err(e),
    };
    let correct = test_rows.iter().zip(&predictions).filter(|(&r, p)| m.labels[r] == **p).count();
    Ok(Some(correct as f64 / test_rows.len() as f64))
}

/// Scores every candidate by grouped cross-validation over `folds` (which
/// index the rows of `m`). The best candidate has the highest mean fold
/// accuracy; ties go to the earlier candidate.
pub fn grid_search(candidates: &[ModelSpec], m: &FeatureMatrix, folds: &FoldAssignment) -> Result<GridResult, LearnError> {
    let wants_distances = candidates.iter().any(|c| matches!(c, ModelSpec::Svm(_))) && m.len() <= FULL_GRAM_LIMIT;
    let distances = wants_distances.then(|| DistanceMatrix::new(&m.rows));
    grid_search_with_distances(candidates, m, folds, distances.as_ref())
}

/// As [`grid_search`], reusing pairwise distances over the rows of `m` for
/// the SVM candidates.
pub fn grid_search_with_distances(
    candidates: &[ModelSpec],
    m: &FeatureMatrix,
    folds: &FoldAssignment,
    distances: Option<&DistanceMatrix>,
) -> Result<GridResult, LearnError> {
    if candidates.is_empty() {
        return Err(LearnError::EmptyGrid);
    }
    assert_eq!(folds.len(), m.len(), "fold assignment does not cover the matrix");
    let jobs: Vec<(usize, usize)> = (0..candidates.len()).flat_map(|c| (0..folds.k).map(move |f| (c, f))).collect();
    let scores: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|&(c, f)| fold_accuracy(&candidates[c], m, folds, f, distances))
        .collect::<Result<_, _>>()?;

    let rows: Vec<GridRow> = candidates
        .iter()
        .zip(scores.chunks(folds.k))
        .map(|(spec, accs)| {
            let scored: Vec<f64> = accs.iter().flatten().copied().collect();
            let mean = (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
            GridRow { spec: *spec, fold_accuracies: accs.to_vec(), mean }
        })
        .collect();
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if let Some(mean) = row.mean {
            if rows[best].mean.is_none_or(|b| mean > b) {
                best = i;
            }
        }
    }
    Ok(GridResult { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GenderLabel::{Female, Male};
    use crate::evaluation::group_folds;
    use crate::features::SparseVector;
    use crate::learners::{Gamma, SvmParams};

    /// Two well separated blobs, 8 authors with 5 rows each.
    fn blobs() -> FeatureMatrix {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut authors = Vec::new();
        for a in 0..8 {
            let label = if a % 2 == 0 { Male } else { Female };
            for t in 0..5 {
                let shift = if label == Male { 2.0 } else { -2.0 };
                rows.push(SparseVector::from_dense(&[shift + (t as f64) * 0.1, shift - (a as f64) * 0.05]));
                labels.push(label);
                authors.push(format!("a{a}"));
            }
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(2, rows, labels, authors, ids).unwrap()
    }

    fn svm(c: f64) -> ModelSpec {
        ModelSpec::Svm(SvmParams { c, gamma: Gamma::Value(0.5), ..SvmParams::default() })
    }

    #[test]
    fn one_row_per_candidate_and_single_candidate_wins() {
        let m = blobs();
        let folds = group_folds(&m.authors, 3, 1).unwrap();
        let r = grid_search(&[svm(1.0)], &m, &folds).unwrap();
        assert_eq!((r.rows.len(), r.best), (1, 0));
        let grid = [svm(1.0), ModelSpec::NaiveBayes { alpha: 1.0 }, svm(10.0)];
        let r = grid_search(&grid, &m, &folds).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.fold_accuracies.len() == 3));
    }

    #[test]
    fn ties_go_to_the_first_candidate() {
        let m = blobs();
        let folds = group_folds(&m.authors, 4, 2).unwrap();
        let r = grid_search(&[svm(1.0), svm(10.0), svm(100.0)], &m, &folds).unwrap();
        assert!(r.rows.iter().all(|row| row.mean == Some(1.0)));
        assert_eq!(r.best, 0);
    }

    #[test]
    fn degenerate_candidate_loses() {
        // heavy overlap except for one informative coordinate; tiny C with a
        // narrow kernel leaves f ≈ b everywhere, so one class is predicted
        let m = blobs();
        let folds = group_folds(&m.authors, 4, 3).unwrap();
        let tiny = ModelSpec::Svm(SvmParams { c: 1e-9, gamma: Gamma::Value(1e3), ..SvmParams::default() });
        let r = grid_search(&[tiny, svm(1.0)], &m, &folds).unwrap();
        assert!(r.rows[0].mean.unwrap() <= 0.6, "{:?}", r.rows[0]);
        assert_eq!(r.best, 1);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let m = blobs();
        let folds = group_folds(&m.authors, 2, 0).unwrap();
        assert!(matches!(grid_search(&[], &m, &folds), Err(LearnError::EmptyGrid)));
    }

    #[test]
    fn single_class_training_folds_are_skipped() {
        let labels: Vec<GenderLabel> = (0..6).map(|i| if i < 2 { Male } else { Female }).collect();
        let rows = (0..6).map(|i| SparseVector::from_dense(&[i as f64])).collect();
        let authors: Vec<String> = vec!["m".into(), "m".into(), "f1".into(), "f1".into(), "f2".into(), "f2".into()];
        let ids = (0..6).map(|i| i.to_string()).collect();
        let m = FeatureMatrix::new(1, rows, labels, authors, ids).unwrap();
        let folds = group_folds(&m.authors, 3, 0).unwrap();
        let r = grid_search(&[ModelSpec::NaiveBayes { alpha: 1.0 }], &m, &folds).unwrap();
        assert_eq!(r.rows[0].fold_accuracies.iter().filter(|a| a.is_none()).count(), 1);
        assert!(r.rows[0].mean.is_some());
    }
}
