use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvConfig, CvReport, Training};
use super::{EvalError, FoldAssignment};
use crate::corpus::Corpus;
use crate::features::FeatureSet;
use crate::learners::ClassifierKind;
use crate::preprocess::SpellingMap;

/// Mean CV accuracy for every feature set against the chosen classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub classifiers: Vec<ClassifierKind>,
    /// One row per feature set, cells aligned with `classifiers`.
    pub rows: Vec<(FeatureSet, Vec<f64>)>,
    pub reports: Vec<CvReport>,
}

/// Reference accuracies (percent) on the 4015-tweet annotated corpus.
pub fn reference_accuracy(featureset: FeatureSet, kind: ClassifierKind) -> f64 {
    use ClassifierKind::*;
    use FeatureSet::*;
    match (featureset, kind) {
        (CharNgrams, NaiveBayes) => 87.3,
        (CharNgrams, Svm) => 89.7,
        (CharNgrams, RandomForest) => 85.6,
        (BagOfWords, NaiveBayes) => 78.3,
        (BagOfWords, Svm) => 83.6,
        (BagOfWords, RandomForest) => 84.5,
        (RefTokens, NaiveBayes) => 71.0,
        (RefTokens, Svm) => 87.5,
        (RefTokens, RandomForest) => 85.8,
        (TopHashtags, NaiveBayes) => 54.5,
        (TopHashtags, Svm) => 56.4,
        (TopHashtags, RandomForest) => 54.6,
        (All, NaiveBayes) => 85.0,
        (All, Svm) => 89.5,
        (All, RandomForest) => 88.4,
    }
}

/// Runs grouped CV for every (feature set, classifier) cell. `training`
/// supplies the hyperparameters or grid for each classifier.
pub fn run_experiment_table(
    c: &Corpus,
    spelling: &SpellingMap,
    cfg: &CvConfig,
    classifiers: &[ClassifierKind],
    training: impl Fn(ClassifierKind) -> Training,
    folds: &FoldAssignment,
) -> Result<ExperimentTable, EvalError> {
    let mut rows = Vec::with_capacity(FeatureSet::ALL.len());
    let mut reports = Vec::new();
    for featureset in FeatureSet::ALL {
        let mut cell_cfg = cfg.clone();
        cell_cfg.pipeline.featureset = featureset;
        let mut cells = Vec::with_capacity(classifiers.len());
        for &kind in classifiers {
            let report = cross_validate(c, spelling, &cell_cfg, &training(kind), folds)?;
            cells.push(report.mean);
            reports.push(report);
        }
        rows.push((featureset, cells));
    }
    Ok(ExperimentTable { classifiers: classifiers.to_vec(), rows, reports })
}

const LABEL_WIDTH: usize = 20;

impl ExperimentTable {
    pub fn cell(&self, featureset: FeatureSet, kind: ClassifierKind) -> Option<f64> {
        let col = self.classifiers.iter().position(|k| *k == kind)?;
        self.rows.iter().find(|(fs, _)| *fs == featureset).map(|(_, cells)| cells[col])
    }

    /// One accuracy table per classifier, the combined grid and the
    /// reference values.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (col, kind) in self.classifiers.iter().enumerate() {
            writeln!(out, "Accuracy of each feature using {}", kind.title()).unwrap();
            writeln!(out, "{:<LABEL_WIDTH$}{:>10}", "Features", "Accuracy").unwrap();
            for (fs, cells) in &self.rows {
                writeln!(out, "{:<LABEL_WIDTH$}{:>10.1}", fs.title(), 100.0 * cells[col]).unwrap();
            }
            out.push('\n');
        }

        writeln!(out, "All classifiers").unwrap();
        out.push_str(&self.grid_header());
        for (fs, cells) in &self.rows {
            write!(out, "{:<LABEL_WIDTH$}", fs.title()).unwrap();
            for v in cells {
                write!(out, "{:>15.1}", 100.0 * v).unwrap();
            }
            out.push('\n');
        }
        out.push('\n');

        writeln!(out, "Reference accuracies on the 4015-tweet annotated corpus").unwrap();
        writeln!(out, "(that corpus is not distributable, so these are not reproducible here)").unwrap();
        out.push_str(&self.grid_header());
        for (fs, _) in &self.rows {
            write!(out, "{:<LABEL_WIDTH$}", fs.title()).unwrap();
            for kind in &self.classifiers {
                write!(out, "{:>15.1}", reference_accuracy(*fs, *kind)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    fn grid_header(&self) -> String {
        let mut out = format!("{:<LABEL_WIDTH$}", "Features");
        for kind in &self.classifiers {
            write!(out, "{:>15}", kind.title()).unwrap();
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedToken, AnnotatedTweet, GenderLabel, LanguageTag};
    use crate::evaluation::make_grouped_folds;
    use crate::learners::{ForestParams, ModelSpec};

    fn corpus() -> Corpus {
        let mut tweets = Vec::new();
        for a in 0..6 {
            let gender = if a % 2 == 0 { GenderLabel::Male } else { GenderLabel::Female };
            for t in 0..4 {
                let mut tokens: Vec<AnnotatedToken> = ["aaj", "bahut", "garmi", "hai"]
                    .iter()
                    .map(|w| AnnotatedToken::new(*w, LanguageTag::Hi))
                    .collect();
                tokens.push(AnnotatedToken::new(if gender == GenderLabel::Male { "karunga" } else { "karungi" }, LanguageTag::Hi));
                tokens.push(AnnotatedToken::new(if t % 2 == 0 { "#Delhi" } else { "#Mumbai" }, LanguageTag::O));
                tweets.push(AnnotatedTweet { id: format!("{a}-{t}"), author_id: format!("a{a}"), tokens, gender });
            }
        }
        Corpus::new(tweets)
    }

    fn training(kind: ClassifierKind) -> Training {
        match kind {
            ClassifierKind::RandomForest => Training::Fixed(ModelSpec::RandomForest(ForestParams { trees: 5, ..Default::default() })),
            k => Training::Fixed(ModelSpec::default_for(k, 0)),
        }
    }

    #[test]
    fn complete_grid_and_rendering() {
        let c = corpus();
        let folds = make_grouped_folds(&c, 3, 4).unwrap();
        let mut cfg = CvConfig::new(FeatureSet::All, 4);
        cfg.pipeline.features.char_min_freq = 2;
        cfg.pipeline.features.word_min_freq = 2;
        let t = run_experiment_table(&c, &SpellingMap::empty(), &cfg, &ClassifierKind::ALL, training, &folds).unwrap();
        assert_eq!(t.rows.len(), 5);
        assert!(t.rows.iter().all(|(_, cells)| cells.len() == 3 && cells.iter().all(|v| (0.0..=1.0).contains(v))));
        assert_eq!(t.reports.len(), 15);
        let text = t.render();
        assert!(text.contains("Accuracy of each feature using Kernel SVM"));
        assert!(text.contains("89.7"));
        assert_eq!(t.cell(FeatureSet::CharNgrams, ClassifierKind::NaiveBayes), Some(t.rows[0].1[0]));
    }

    #[test]
    fn restricted_columns() {
        let c = corpus();
        let folds = make_grouped_folds(&c, 3, 4).unwrap();
        let cfg = CvConfig::new(FeatureSet::All, 4);
        let t = run_experiment_table(&c, &SpellingMap::empty(), &cfg, &[ClassifierKind::Svm], training, &folds).unwrap();
        assert!(t.rows.iter().all(|(_, cells)| cells.len() == 1));
        assert!(!t.render().contains("Naive Bayes"));
        assert_eq!(t.cell(FeatureSet::All, ClassifierKind::NaiveBayes), None);
    }
}
