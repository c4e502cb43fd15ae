use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::features::{chi_square_select, FeatureConfig, FeatureError, FeatureMatrix, FeatureSet, Featurizer, SelectionMask};
use crate::preprocess::ProcessedTweet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub featureset: FeatureSet,
    pub features: FeatureConfig,
    /// Separate Hindi and English vocabularies.
    pub partitioned: bool,
}

impl PipelineConfig {
    pub fn new(featureset: FeatureSet) -> Self {
        PipelineConfig { featureset, features: FeatureConfig::default(), partitioned: false }
    }
}

/// Vocabularies plus the chi-square mask, fit on one set of tweets.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub featurizer: Featurizer,
    pub mask: SelectionMask,
}

impl FittedPipeline {
    /// Fits on `tweets` and returns the selected training matrix alongside.
    pub fn fit(tweets: &[ProcessedTweet], cfg: &PipelineConfig) -> Result<(FittedPipeline, FeatureMatrix), FeatureError> {
        let featurizer = Featurizer::fit(tweets, cfg.featureset, &cfg.features, cfg.partitioned)?;
        let full = featurizer.matrix(tweets);
        let mask = chi_square_select(&full, cfg.features.select_k)?;
        let selected = full.select(&mask)?;
        Ok((FittedPipeline { featurizer, mask }, selected))
    }

    pub fn transform(&self, tweets: &[ProcessedTweet]) -> Result<FeatureMatrix, FeatureError> {
        self.featurizer.matrix(tweets).select(&self.mask)
    }

    /// Dimension before selection.
    pub fn raw_dim(&self) -> usize {
        self.featurizer.dim()
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    /// How many of `ids` each fit artifact saw, summed over artifacts.
    pub fn contributions(&self, ids: &HashSet<&str>) -> usize {
        let seen = |fitted: &[String]| fitted.iter().filter(|id| ids.contains(id.as_str())).count();
        let mut total = seen(&self.mask.fitted_on);
        for v in self.featurizer.vocabularies() {
            total += seen(&v.fitted_on);
            if let Some(table) = v.ref_table() {
                total += seen(&table.fitted_on);
            }
        }
        total
    }
}
