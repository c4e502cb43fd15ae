//! A trained model together with everything needed to featurize new tweets.
//!
//! ```text
//! cmgender-bundle 1
//! spelling<TAB>2
//! accha<TAB>acha
//! ...
//! vocabularies<TAB>1        (2 when partitioned: Hindi first, then English)
//! <vocabulary block>...
//! <selection block>
//! model<TAB>{...json...}
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{fold_seed, train_fold, Training};
use super::pipeline::{FittedPipeline, PipelineConfig};
use super::EvalError;
use crate::corpus::{AnnotatedTweet, Corpus, GenderLabel};
use crate::features::{read_selection, read_vocabulary, write_selection, write_vocabulary, FeatureError, Featurizer};
use crate::learners::{accuracy, ModelSpec, TrainedModel};
use crate::preprocess::{preprocess_tweet, ProcessedTweet, SpellingMap};

const BUNDLE_HEADER: &str = "cmgender-bundle 1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub spelling: SpellingMap,
    pub pipeline: FittedPipeline,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub tweets: usize,
    pub authors: usize,
    pub raw_dim: usize,
    pub dim: usize,
    pub chosen: ModelSpec,
    pub training_accuracy: f64,
}

fn bundle_err(line: usize, reason: impl Into<String>) -> EvalError {
    EvalError::Bundle { line, reason: reason.into() }
}

impl ModelBundle {
    /// Fits vocabularies, selection and the model on the whole corpus; a
    /// grid is searched by grouped CV with `inner_folds` folds first.
    pub fn fit(
        c: &Corpus,
        spelling: &SpellingMap,
        cfg: &PipelineConfig,
        training: &Training,
        inner_folds: usize,
        seed: u64,
    ) -> Result<(ModelBundle, TrainSummary), EvalError> {
        let mut tweets: Vec<ProcessedTweet> = c.tweets.iter().map(|t| preprocess_tweet(t, spelling)).collect();
        tweets.sort_by(|a, b| a.id.cmp(&b.id));
        let (pipeline, m) = FittedPipeline::fit(&tweets, cfg)?;
        let (model, chosen) = train_fold(training, &m, inner_folds, fold_seed(seed, 0))?;
        let summary = TrainSummary {
            tweets: m.len(),
            authors: m.authors.iter().collect::<HashSet<_>>().len(),
            raw_dim: pipeline.raw_dim(),
            dim: pipeline.dim(),
            chosen: chosen.expect("trainer reports its hyperparameters"),
            training_accuracy: accuracy(&model, &m)?,
        };
        Ok((ModelBundle { spelling: spelling.clone(), pipeline, model }, summary))
    }

    pub fn predict(&self, tweet: &AnnotatedTweet) -> Result<GenderLabel, EvalError> {
        let processed = preprocess_tweet(tweet, &self.spelling);
        let m = self.pipeline.transform(std::slice::from_ref(&processed))?;
        Ok(self.model.predict(&m.rows[0])?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{BUNDLE_HEADER}").unwrap();
        let entries = self.spelling.entries();
        writeln!(out, "spelling\t{}", entries.len()).unwrap();
        for (variant, canonical) in entries {
            writeln!(out, "{variant}\t{canonical}").unwrap();
        }
        let vocabularies = self.pipeline.featurizer.vocabularies();
        writeln!(out, "vocabularies\t{}", vocabularies.len()).unwrap();
        for v in vocabularies {
            out.push_str(&write_vocabulary(v));
        }
        out.push_str(&write_selection(&self.pipeline.mask));
        writeln!(out, "model\t{}", self.model.to_json()).unwrap();
        out
    }

    pub fn from_text(text: &str) -> Result<ModelBundle, EvalError> {
        let lines: Vec<&str> = text.lines().collect();
        let mut at = 0;
        let line = |at: usize| lines.get(at).copied().ok_or_else(|| bundle_err(at + 1, "unexpected end of file"));
        let count = |at: usize, key: &str| -> Result<usize, EvalError> {
            line(at)?
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('\t'))
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| bundle_err(at + 1, format!("expected `{key}<TAB>count`")))
        };
        // nested blocks report lines relative to themselves
        let shift = |at: usize, e: FeatureError| match e {
            FeatureError::Format { line, reason } => bundle_err(at + line.max(1), reason),
            other => EvalError::Feature(other),
        };
        let rest = |at: usize| lines[at.min(lines.len())..].join("\n");

        if line(at)? != BUNDLE_HEADER {
            return Err(bundle_err(1, format!("expected {BUNDLE_HEADER:?}")));
        }
        at += 1;
        let n_spelling = count(at, "spelling")?;
        at += 1;
        let mut spelling_text = String::new();
        for _ in 0..n_spelling {
            writeln!(spelling_text, "{}", line(at)?).unwrap();
            at += 1;
        }
        let spelling = SpellingMap::parse(&spelling_text)
            .map_err(|e| bundle_err(at - n_spelling + e.line - 1, e.reason))?;

        let n_vocab = count(at, "vocabularies")?;
        at += 1;
        let mut vocabularies = Vec::with_capacity(2);
        for _ in 0..n_vocab {
            let (v, used) = read_vocabulary(&rest(at)).map_err(|e| shift(at, e))?;
            vocabularies.push(v);
            at += used;
        }
        let featurizer = match <[_; 2]>::try_from(vocabularies) {
            Ok([hi, en]) => Featurizer::Partitioned { hi, en },
            Err(mut v) if v.len() == 1 => Featurizer::Joint(v.remove(0)),
            Err(v) => return Err(bundle_err(at, format!("expected 1 or 2 vocabularies, found {}", v.len()))),
        };
        let (mask, used) = read_selection(&rest(at)).map_err(|e| shift(at, e))?;
        if mask.dim != featurizer.dim() {
            return Err(bundle_err(at + 1, format!("selection covers {} columns, vocabularies {}", mask.dim, featurizer.dim())));
        }
        at += used;
        let json = line(at)?.strip_prefix("model\t").ok_or_else(|| bundle_err(at + 1, "expected `model<TAB>json`"))?;
        let model = TrainedModel::from_json(json)?;
        if model.dim() != mask.len() {
            return Err(bundle_err(at + 1, format!("model expects {} inputs, selection keeps {}", model.dim(), mask.len())));
        }
        if lines[at + 1..].iter().any(|l| !l.trim().is_empty()) {
            return Err(bundle_err(at + 2, "trailing content after model"));
        }
        Ok(ModelBundle { spelling, pipeline: FittedPipeline { featurizer, mask }, model })
    }
}
