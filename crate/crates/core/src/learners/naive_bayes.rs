use serde::{Deserialize, Serialize};

use super::{require_both_classes, LearnError};
use crate::corpus::GenderLabel;
use crate::features::{FeatureMatrix, SparseVector};

/// Multinomial naive Bayes with additive smoothing. Per-class arrays are
/// indexed male first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub dim: usize,
    pub alpha: f64,
    pub log_prior: [f64; 2],
    pub log_likelihood: [Vec<f64>; 2],
}

pub fn train_naive_bayes(m: &FeatureMatrix, alpha: f64) -> Result<NaiveBayesModel, LearnError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LearnError::InvalidHyperparameter(format!("smoothing alpha must be positive, got {alpha}")));
    }
    require_both_classes(m)?;
    let d = m.dim();
    let mut docs = [0usize; 2];
    let mut counts = [vec![0.0; d], vec![0.0; d]];
    for (row, label) in m.rows.iter().zip(&m.labels) {
        let c = label.index();
        docs[c] += 1;
        for (j, v) in row.iter() {
            counts[c][j] += v;
        }
    }
    let n = m.len() as f64;
    let log_prior = [(docs[0] as f64 / n).ln(), (docs[1] as f64 / n).ln()];
    let log_likelihood = counts.map(|class_counts| {
        let total: f64 = class_counts.iter().sum();
        let denom = total + alpha * d as f64;
        class_counts.iter().map(|c| ((c + alpha) / denom).ln()).collect()
    });
    Ok(NaiveBayesModel { dim: d, alpha, log_prior, log_likelihood })
}

impl NaiveBayesModel {
    /// Unnormalized log posteriors `[male, female]`.
    pub fn log_scores(&self, x: &SparseVector) -> Result<[f64; 2], LearnError> {
        if x.dim() != self.dim {
            return Err(LearnError::DimensionMismatch { expected: self.dim, found: x.dim() });
        }
        let score = |c: usize| self.log_prior[c] + x.iter().map(|(j, v)| v * self.log_likelihood[c][j]).sum::<f64>();
        Ok([score(0), score(1)])
    }

    /// Ties go to male.
    pub fn predict(&self, x: &SparseVector) -> Result<GenderLabel, LearnError> {
        let [male, female] = self.log_scores(x)?;
        Ok(if male >= female { GenderLabel::Male } else { GenderLabel::Female })
    }
}
