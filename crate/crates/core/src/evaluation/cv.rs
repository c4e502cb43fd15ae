use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::group_folds;
use super::pipeline::{FittedPipeline, PipelineConfig};
use super::{EvalError, FoldAssignment};
use crate::corpus::{Corpus, GenderLabel};
use crate::features::{FeatureConfig, FeatureMatrix, FeatureSet, SparseVector};
use crate::learners::kernel::FULL_GRAM_LIMIT;
use crate::learners::{
    grid_search_with_distances, train, train_svm_with_distances, DistanceMatrix, LearnError, ModelSpec, TrainedModel,
};
use crate::preprocess::{preprocess_tweet, ProcessedTweet, SpellingMap};

/// Anything that labels a vector; lets baselines share the CV harness.
pub trait Classifier: Send + Sync {
    fn classify(&self, x: &SparseVector) -> Result<GenderLabel, LearnError>;
}

impl Classifier for TrainedModel {
    fn classify(&self, x: &SparseVector) -> Result<GenderLabel, LearnError> {
        self.predict(x)
    }
}

/// Fixed hyperparameters, or candidates searched inside each training
/// partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Training {
    Fixed(ModelSpec),
    Grid(Vec<ModelSpec>),
}

impl Training {
    pub fn describe(&self) -> String {
        match self {
            Training::Fixed(spec) => spec.to_string(),
            Training::Grid(specs) => {
                let names: Vec<String> = specs.iter().map(ModelSpec::to_string).collect();
                format!("grid[{}]", names.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub pipeline: PipelineConfig,
    /// Fit vocabularies and selection once on the whole corpus (leaks test
    /// tweets into the features; kept for comparison).
    pub global_fit: bool,
    pub inner_folds: usize,
    pub seed: u64,
}

impl CvConfig {
    pub fn new(featureset: FeatureSet, seed: u64) -> Self {
        CvConfig { pipeline: PipelineConfig::new(featureset), global_fit: false, inner_folds: 3, seed }
    }
}

/// Everything needed to rerun an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub featureset: FeatureSet,
    pub model: String,
    pub seed: u64,
    pub folds: usize,
    pub inner_folds: usize,
    pub partitioned: bool,
    pub global_fit: bool,
    pub thresholds: FeatureConfig,
}

/// Counts indexed by (actual, predicted).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub male_as_male: usize,
    pub male_as_female: usize,
    pub female_as_male: usize,
    pub female_as_female: usize,
}

impl Confusion {
    pub fn record(&mut self, actual: GenderLabel, predicted: GenderLabel) {
        use GenderLabel::{Female, Male};
        match (actual, predicted) {
            (Male, Male) => self.male_as_male += 1,
            (Male, Female) => self.male_as_female += 1,
            (Female, Male) => self.female_as_male += 1,
            (Female, Female) => self.female_as_female += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.male_as_male + self.male_as_female + self.female_as_male + self.female_as_female
    }

    pub fn correct(&self) -> usize {
        self.male_as_male + self.female_as_female
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_tweets: usize,
    pub test_tweets: usize,
    pub test_authors: usize,
    pub accuracy: f64,
    pub confusion: Confusion,
    /// Hyperparameters used for the fold's model.
    pub chosen: Option<ModelSpec>,
    pub raw_dim: usize,
    pub dim: usize,
    /// Test tweets seen while fitting vocabularies, reference tokens or the
    /// selection mask.
    pub leakage: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fingerprint: Fingerprint,
    pub folds: Vec<FoldReport>,
    pub mean: f64,
}

/// Decorrelates per-fold seeds from the run seed.
pub(crate) fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(fold as u64 + 1)
}

pub(crate) fn train_fold(
    training: &Training,
    m: &FeatureMatrix,
    inner_folds: usize,
    seed: u64,
) -> Result<(TrainedModel, Option<ModelSpec>), EvalError> {
    // distances are shared by the inner search and the final SVM fit
    let wants_distances = match training {
        Training::Fixed(_) => false,
        Training::Grid(specs) => specs.iter().any(|s| matches!(s, ModelSpec::Svm(_))) && m.len() <= FULL_GRAM_LIMIT,
    };
    let distances = wants_distances.then(|| DistanceMatrix::new(&m.rows));
    let spec = match training {
        Training::Fixed(spec) => *spec,
        Training::Grid(specs) if specs.len() == 1 => specs[0],
        Training::Grid(specs) => {
            let authors = m.authors.iter().collect::<HashSet<_>>().len();
            let k = inner_folds.min(authors);
            if k < 2 {
                specs.first().copied().ok_or(LearnError::EmptyGrid)?
            } else {
                let folds = group_folds(&m.authors, k, seed)?;
                *grid_search_with_distances(specs, m, &folds, distances.as_ref())?.best_spec()
            }
        }
    };
    let model = match (&spec, &distances) {
        (ModelSpec::Svm(p), Some(d)) => {
            spec.check()?;
            let all: Vec<usize> = (0..m.len()).collect();
            TrainedModel::Svm(train_svm_with_distances(m, d, &all, p)?)
        }
        _ => train(&spec, m)?,
    };
    Ok((model, Some(spec)))
}

/// Grouped k-fold evaluation. Per fold, vocabularies, reference tokens and
/// the selection mask are fit on the training tweets only, the model is
/// trained (after an inner grouped grid search when `training` is a grid)
/// and scored on the held-out authors.
pub fn cross_validate(
    c: &Corpus,
    spelling: &SpellingMap,
    cfg: &CvConfig,
    training: &Training,
    folds: &FoldAssignment,
) -> Result<CvReport, EvalError> {
    cross_validate_with(c, spelling, cfg, folds, &training.describe(), |fold, m| {
        train_fold(training, m, cfg.inner_folds, fold_seed(cfg.seed, fold))
    })
}

/// As [`cross_validate`] with a caller-supplied trainer; `model` names it
/// in the fingerprint.
pub fn cross_validate_with<T, F>(
    c: &Corpus,
    spelling: &SpellingMap,
    cfg: &CvConfig,
    folds: &FoldAssignment,
    model: &str,
    trainer: F,
) -> Result<CvReport, EvalError>
where
    T: Classifier,
    F: Fn(usize, &FeatureMatrix) -> Result<(T, Option<ModelSpec>), EvalError> + Sync,
{
    if folds.len() != c.len() {
        return Err(EvalError::FoldMismatch { expected: folds.len(), found: c.len() });
    }
    let processed: Vec<ProcessedTweet> = c.tweets.iter().map(|t| preprocess_tweet(t, spelling)).collect();
    let by_id = |rows: &mut Vec<usize>| rows.sort_by(|&a, &b| processed[a].id.cmp(&processed[b].id));
    let global = if cfg.global_fit {
        let mut all: Vec<usize> = (0..processed.len()).collect();
        by_id(&mut all);
        let tweets: Vec<ProcessedTweet> = all.iter().map(|&i| processed[i].clone()).collect();
        Some(FittedPipeline::fit(&tweets, &cfg.pipeline)?.0)
    } else {
        None
    };

    let reports: Vec<FoldReport> = (0..folds.k)
        .into_par_iter()
        .map(|fold| {
            let mut train_rows = folds.train_rows(fold);
            let mut test_rows = folds.test_rows(fold);
            by_id(&mut train_rows);
            by_id(&mut test_rows);
            let train_tweets: Vec<ProcessedTweet> = train_rows.iter().map(|&i| processed[i].clone()).collect();
            let test_tweets: Vec<ProcessedTweet> = test_rows.iter().map(|&i| processed[i].clone()).collect();
            let males = train_tweets.iter().filter(|t| t.gender == GenderLabel::Male).count();
            if males == 0 || males == train_tweets.len() {
                return Err(EvalError::SingleClassFold { fold });
            }

            let (pipeline, train_m) = match &global {
                Some(p) => (p.clone(), p.transform(&train_tweets)?),
                None => FittedPipeline::fit(&train_tweets, &cfg.pipeline)?,
            };
            let test_m = pipeline.transform(&test_tweets)?;
            let test_ids: HashSet<&str> = test_tweets.iter().map(|t| t.id.as_str()).collect();
            let leakage = pipeline.contributions(&test_ids);

            let (model, chosen) = trainer(fold, &train_m)?;
            let mut confusion = Confusion::default();
            for (x, y) in test_m.rows.iter().zip(&test_m.labels) {
                confusion.record(*y, model.classify(x)?);
            }
            Ok(FoldReport {
                fold,
                train_tweets: train_tweets.len(),
                test_tweets: test_tweets.len(),
                test_authors: test_tweets.iter().map(|t| &t.author_id).collect::<HashSet<_>>().len(),
                accuracy: confusion.correct() as f64 / confusion.total() as f64,
                confusion,
                chosen,
                raw_dim: pipeline.raw_dim(),
                dim: pipeline.dim(),
                leakage,
            })
        })
        .collect::<Result<_, EvalError>>()?;

    let mean = reports.iter().map(|r| r.accuracy).sum::<f64>() / reports.len() as f64;
    let fingerprint = Fingerprint {
        featureset: cfg.pipeline.featureset,
        model: model.to_owned(),
        seed: cfg.seed,
        folds: folds.k,
        inner_folds: cfg.inner_folds,
        partitioned: cfg.pipeline.partitioned,
        global_fit: cfg.global_fit,
        thresholds: cfg.pipeline.features.clone(),
    };
    Ok(CvReport { fingerprint, folds: reports, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedToken, AnnotatedTweet, LanguageTag};
    use crate::evaluation::make_grouped_folds;

    struct Always(GenderLabel);

    impl Classifier for Always {
        fn classify(&self, _: &SparseVector) -> Result<GenderLabel, LearnError> {
            Ok(self.0)
        }
    }

    /// `authors` authors alternating male/female, `per` tweets each; male
    /// tweets say "karunga", female tweets "karungi".
    fn corpus(authors: usize, per: usize) -> Corpus {
        let mut tweets = Vec::new();
        for a in 0..authors {
            let gender = if a % 2 == 0 { GenderLabel::Male } else { GenderLabel::Female };
            let marker = if gender == GenderLabel::Male { "karunga" } else { "karungi" };
            for t in 0..per {
                let words = [marker, "main", "kal", if t % 2 == 0 { "office" } else { "ghar" }, "jaunga"];
                tweets.push(AnnotatedTweet {
                    id: format!("t{a:02}-{t:02}"),
                    author_id: format!("u{a:02}"),
                    tokens: words.iter().map(|w| AnnotatedToken::new(*w, LanguageTag::Hi)).collect(),
                    gender,
                });
            }
        }
        Corpus::new(tweets)
    }

    fn small_cfg(featureset: FeatureSet) -> CvConfig {
        let mut cfg = CvConfig::new(featureset, 3);
        cfg.pipeline.features.char_min_freq = 2;
        cfg.pipeline.features.word_min_freq = 2;
        cfg
    }

    #[test]
    fn constant_predictor_scores_the_male_share() {
        let c = corpus(8, 4);
        let folds = make_grouped_folds(&c, 4, 11).unwrap();
        let cfg = small_cfg(FeatureSet::BagOfWords);
        let r = cross_validate_with(&c, &SpellingMap::empty(), &cfg, &folds, "always-male", |_, _| {
            Ok((Always(GenderLabel::Male), None))
        })
        .unwrap();
        for f in &r.folds {
            let male = f.confusion.male_as_male + f.confusion.male_as_female;
            assert_eq!(f.accuracy, male as f64 / f.test_tweets as f64);
        }
        let hand = r.folds.iter().map(|f| f.accuracy).sum::<f64>() / 4.0;
        assert_eq!(r.mean, hand);
        assert_eq!(r.fingerprint.model, "always-male");
    }

    #[test]
    fn planted_marker_is_learned_without_leakage() {
        let c = corpus(10, 6);
        let folds = make_grouped_folds(&c, 5, 2).unwrap();
        let r = cross_validate(
            &c,
            &SpellingMap::empty(),
            &small_cfg(FeatureSet::All),
            &Training::Fixed(ModelSpec::NaiveBayes { alpha: 1.0 }),
            &folds,
        )
        .unwrap();
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r.mean, 1.0);
        assert!(r.folds.iter().all(|f| f.leakage == 0 && f.dim <= f.raw_dim));
    }

    #[test]
    fn global_fit_is_reported_as_leakage() {
        let c = corpus(6, 3);
        let folds = make_grouped_folds(&c, 3, 2).unwrap();
        let mut cfg = small_cfg(FeatureSet::RefTokens);
        cfg.global_fit = true;
        let r = cross_validate(&c, &SpellingMap::empty(), &cfg, &Training::Fixed(ModelSpec::NaiveBayes { alpha: 1.0 }), &folds)
            .unwrap();
        // vocabulary, reference table and mask each saw every test tweet
        assert!(r.folds.iter().all(|f| f.leakage == 3 * f.test_tweets));
    }

    #[test]
    fn single_class_training_fold_is_named() {
        let mut c = corpus(4, 2);
        for t in &mut c.tweets {
            if t.author_id != "u01" {
                t.gender = GenderLabel::Male;
            }
        }
        let folds = make_grouped_folds(&c, 4, 0).unwrap();
        let fold = folds.author_fold["u01"];
        let err = cross_validate(
            &c,
            &SpellingMap::empty(),
            &small_cfg(FeatureSet::BagOfWords),
            &Training::Fixed(ModelSpec::NaiveBayes { alpha: 1.0 }),
            &folds,
        )
        .unwrap_err();
        assert!(matches!(err, EvalError::SingleClassFold { fold: f } if f == fold));
    }

    #[test]
    fn row_order_does_not_matter() {
        let c = corpus(8, 3);
        let mut shuffled = c.clone();
        shuffled.tweets.reverse();
        let cfg = small_cfg(FeatureSet::CharNgrams);
        let training = Training::Grid(vec![ModelSpec::NaiveBayes { alpha: 0.1 }, ModelSpec::NaiveBayes { alpha: 1.0 }]);
        let run = |c: &Corpus| {
            let folds = make_grouped_folds(c, 4, 9).unwrap();
            cross_validate(c, &SpellingMap::empty(), &cfg, &training, &folds).unwrap()
        };
        assert_eq!(run(&c), run(&shuffled));
    }
}
