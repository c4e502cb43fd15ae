//! Feature families, vocabularies, vectorization and chi-square selection.
//!
//! Four families are supported: character n-grams taken inside each token,
//! word n-grams inside each tweet, gender-indicative reference tokens (kept
//! per language) and the most frequent hashtags. Vocabularies are fit on a
//! training partition and frozen; anything unseen at fit time is ignored when
//! vectorizing.

mod io;
mod reftokens;
mod select;
mod sparse;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{GenderLabel, LanguageTag};
use crate::preprocess::ProcessedTweet;

pub use io::{read_selection, read_vocabulary, write_selection, write_vocabulary};
pub use reftokens::{fit_reference_tokens, RefEntry, RefTokenTable};
pub use select::{apply_mask, chi_square_scores, chi_square_select, contingency_tables, Contingency, SelectionMask};
pub use sparse::{FeatureMatrix, SparseVector};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rows, labels, authors and ids must have the same length")]
    Misaligned,
    #[error("feature matrix is empty")]
    EmptyMatrix,
    #[error("only {0} rows present; both classes are required")]
    SingleClass(GenderLabel),
    #[error("selection size must be at least 1")]
    InvalidK,
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
    #[error("duplicate feature {0}")]
    DuplicateFeature(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    CharNgram,
    WordNgram,
    RefToken,
    Hashtag,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::CharNgram => "char",
            FeatureKind::WordNgram => "word",
            FeatureKind::RefToken => "ref",
            FeatureKind::Hashtag => "hashtag",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "char" => Ok(FeatureKind::CharNgram),
            "word" => Ok(FeatureKind::WordNgram),
            "ref" => Ok(FeatureKind::RefToken),
            "hashtag" => Ok(FeatureKind::Hashtag),
            other => Err(format!("unknown feature kind {other:?}")),
        }
    }
}

/// One vocabulary column. Word n-gram payloads join their tokens with a
/// single space; reference tokens also carry the dictionary language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureId {
    pub kind: FeatureKind,
    pub payload: String,
    pub order: usize,
    pub lang: Option<LanguageTag>,
}

impl FeatureId {
    pub fn char_ngram(gram: &str) -> Self {
        FeatureId { kind: FeatureKind::CharNgram, order: gram.chars().count(), payload: gram.to_owned(), lang: None }
    }

    pub fn word_ngram(words: &[&str]) -> Self {
        FeatureId { kind: FeatureKind::WordNgram, order: words.len(), payload: words.join(" "), lang: None }
    }

    pub fn ref_token(lang: LanguageTag, token: &str) -> Self {
        FeatureId { kind: FeatureKind::RefToken, order: 1, payload: token.to_owned(), lang: Some(lang) }
    }

    pub fn hashtag(tag: &str) -> Self {
        FeatureId { kind: FeatureKind::Hashtag, order: 1, payload: tag.to_owned(), lang: None }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lang {
            Some(lang) => write!(f, "{}:{}:{:?}", self.kind.as_str(), lang, self.payload),
            None => write!(f, "{}{}:{:?}", self.kind.as_str(), self.order, self.payload),
        }
    }
}

/// Which feature families make up the vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    CharNgrams,
    BagOfWords,
    RefTokens,
    TopHashtags,
    All,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 5] =
        [FeatureSet::CharNgrams, FeatureSet::BagOfWords, FeatureSet::RefTokens, FeatureSet::TopHashtags, FeatureSet::All];

    pub fn kinds(self) -> &'static [FeatureKind] {
        use FeatureKind::*;
        match self {
            FeatureSet::CharNgrams => &[CharNgram],
            FeatureSet::BagOfWords => &[WordNgram],
            FeatureSet::RefTokens => &[RefToken],
            FeatureSet::TopHashtags => &[Hashtag],
            FeatureSet::All => &[CharNgram, WordNgram, RefToken, Hashtag],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::CharNgrams => "char-ngrams",
            FeatureSet::BagOfWords => "bag-of-words",
            FeatureSet::RefTokens => "ref-tokens",
            FeatureSet::TopHashtags => "top-hashtags",
            FeatureSet::All => "all",
        }
    }

    /// Row label used in experiment tables.
    pub fn title(self) -> &'static str {
        match self {
            FeatureSet::CharNgrams => "Character N grams",
            FeatureSet::BagOfWords => "Bag-of-words",
            FeatureSet::RefTokens => "Reference Tokens",
            FeatureSet::TopHashtags => "Top Hashtags",
            FeatureSet::All => "All features",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureSet::ALL
            .into_iter()
            .find(|fs| fs.as_str() == s)
            .ok_or_else(|| format!("unknown feature set {s:?} (expected char-ngrams, bag-of-words, ref-tokens, top-hashtags or all)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub char_min_n: usize,
    pub char_max_n: usize,
    pub char_min_freq: usize,
    /// Wrap each token in spaces before taking character n-grams.
    pub char_pad: bool,
    pub word_min_n: usize,
    pub word_max_n: usize,
    pub word_min_freq: usize,
    pub ref_min_share: f64,
    pub ref_min_freq: usize,
    pub top_hashtags: usize,
    pub select_k: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            char_min_n: 2,
            char_max_n: 5,
            char_min_freq: 10,
            char_pad: false,
            word_min_n: 1,
            word_max_n: 3,
            word_min_freq: 10,
            ref_min_share: 0.6,
            ref_min_freq: 2,
            top_hashtags: 50,
            select_k: 1000,
        }
    }
}

impl FeatureConfig {
    pub fn check(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::InvalidConfig(m.to_owned()));
        if self.char_min_n == 0 || self.char_min_n > self.char_max_n {
            return bad("character n-gram range must satisfy 1 <= min <= max");
        }
        if self.word_min_n == 0 || self.word_min_n > self.word_max_n {
            return bad("word n-gram range must satisfy 1 <= min <= max");
        }
        if self.char_min_freq == 0 || self.word_min_freq == 0 {
            return bad("minimum n-gram frequency must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.ref_min_share) {
            return bad("reference token share must lie in [0, 1]");
        }
        if self.top_hashtags == 0 {
            return bad("top hashtag count must be at least 1");
        }
        if self.select_k == 0 {
            return bad("selection size must be at least 1");
        }
        Ok(())
    }
}

/// Character windows of length `n` over `token` (optionally space-padded).
pub fn char_ngrams(token: &str, n: usize, pad: bool) -> Vec<String> {
    let chars: Vec<char> = if pad {
        std::iter::once(' ').chain(token.chars()).chain(std::iter::once(' ')).collect()
    } else {
        token.chars().collect()
    };
    if n == 0 || chars.len() < n {
        return Vec::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

fn retain_frequent(counts: HashMap<String, usize>, min_freq: usize) -> Vec<String> {
    let mut kept: Vec<String> = counts.into_iter().filter(|(_, c)| *c >= min_freq).map(|(g, _)| g).collect();
    kept.sort_unstable();
    kept
}

/// Character n-grams occurring at least `min_freq` times over all tokens.
pub fn fit_char_ngrams(
    corpus: &[ProcessedTweet],
    n_min: usize,
    n_max: usize,
    min_freq: usize,
    pad: bool,
) -> Vec<FeatureId> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for tok in corpus.iter().flat_map(|t| &t.tokens) {
        for n in n_min..=n_max {
            for gram in char_ngrams(tok, n, pad) {
                *counts.entry(gram).or_default() += 1;
            }
        }
    }
    let mut out: Vec<FeatureId> = retain_frequent(counts, min_freq).iter().map(|g| FeatureId::char_ngram(g)).collect();
    out.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.payload.cmp(&b.payload)));
    out
}

fn word_ngrams(tokens: &[String], n: usize) -> impl Iterator<Item = String> + '_ {
    tokens.windows(n.max(1)).filter(move |_| n > 0).map(|w| w.join(" "))
}

/// Word n-grams within each tweet occurring at least `min_freq` times.
pub fn fit_word_ngrams(corpus: &[ProcessedTweet], n_min: usize, n_max: usize, min_freq: usize) -> Vec<FeatureId> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for tweet in corpus {
        for n in n_min..=n_max {
            for gram in word_ngrams(&tweet.tokens, n) {
                *counts.entry(gram).or_default() += 1;
            }
        }
    }
    let mut out: Vec<FeatureId> = retain_frequent(counts, min_freq)
        .into_iter()
        .map(|g| {
            let order = g.split(' ').count();
            FeatureId { kind: FeatureKind::WordNgram, payload: g, order, lang: None }
        })
        .collect();
    out.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.payload.cmp(&b.payload)));
    out
}

fn hashtag_key(tag: &str) -> String {
    tag.to_lowercase()
}

/// The `k` most frequent hashtags (case-folded), ties broken lexicographically.
pub fn fit_top_hashtags(corpus: &[ProcessedTweet], k: usize) -> Vec<FeatureId> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for tag in corpus.iter().flat_map(|t| &t.hashtags) {
        *counts.entry(hashtag_key(tag)).or_default() += 1;
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked.into_iter().map(|(tag, _)| FeatureId::hashtag(&tag)).collect()
}

/// Frozen feature → column mapping.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    config: FeatureConfig,
    featureset: FeatureSet,
    features: Vec<FeatureId>,
    chars: HashMap<String, usize>,
    words: HashMap<String, usize>,
    refs_hi: HashMap<String, usize>,
    refs_en: HashMap<String, usize>,
    hashtags: HashMap<String, usize>,
    ref_table: Option<RefTokenTable>,
    /// Ids of the tweets the vocabulary was fit on (empty when loaded from disk).
    pub fitted_on: Vec<String>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.featureset == other.featureset && self.features == other.features
    }
}

impl Vocabulary {
    /// Assigns columns in the given order.
    pub fn from_features(
        config: FeatureConfig,
        featureset: FeatureSet,
        features: Vec<FeatureId>,
    ) -> Result<Self, FeatureError> {
        let mut v = Vocabulary {
            config,
            featureset,
            features: Vec::new(),
            chars: HashMap::new(),
            words: HashMap::new(),
            refs_hi: HashMap::new(),
            refs_en: HashMap::new(),
            hashtags: HashMap::new(),
            ref_table: None,
            fitted_on: Vec::new(),
        };
        for (col, f) in features.iter().enumerate() {
            if f.payload.is_empty() || f.order == 0 {
                return Err(FeatureError::InvalidConfig(format!("malformed feature {f}")));
            }
            let map = match (f.kind, f.lang) {
                (FeatureKind::CharNgram, _) => &mut v.chars,
                (FeatureKind::WordNgram, _) => &mut v.words,
                (FeatureKind::RefToken, Some(LanguageTag::Hi)) => &mut v.refs_hi,
                (FeatureKind::RefToken, Some(LanguageTag::En)) => &mut v.refs_en,
                (FeatureKind::RefToken, _) => {
                    return Err(FeatureError::InvalidConfig(format!("reference token {f} needs Hi or En")))
                }
                (FeatureKind::Hashtag, _) => &mut v.hashtags,
            };
            if map.insert(f.payload.clone(), col).is_some() {
                return Err(FeatureError::DuplicateFeature(f.to_string()));
            }
        }
        v.features = features;
        Ok(v)
    }

    /// Fits every family in `featureset` on `corpus`.
    pub fn fit(corpus: &[ProcessedTweet], featureset: FeatureSet, config: &FeatureConfig) -> Result<Self, FeatureError> {
        config.check()?;
        let mut features = Vec::new();
        let mut ref_table = None;
        for kind in featureset.kinds() {
            match kind {
                FeatureKind::CharNgram => features.extend(fit_char_ngrams(
                    corpus,
                    config.char_min_n,
                    config.char_max_n,
                    config.char_min_freq,
                    config.char_pad,
                )),
                FeatureKind::WordNgram => features.extend(fit_word_ngrams(
                    corpus,
                    config.word_min_n,
                    config.word_max_n,
                    config.word_min_freq,
                )),
                FeatureKind::RefToken => {
                    let table = fit_reference_tokens(corpus, config.ref_min_share, config.ref_min_freq);
                    features.extend(table.entries().map(|(lang, tok, _)| FeatureId::ref_token(lang, tok)));
                    ref_table = Some(table);
                }
                FeatureKind::Hashtag => features.extend(fit_top_hashtags(corpus, config.top_hashtags)),
            }
        }
        let mut v = Vocabulary::from_features(config.clone(), featureset, features)?;
        v.ref_table = ref_table;
        v.fitted_on = corpus.iter().map(|t| t.id.clone()).collect();
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureId] {
        &self.features
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn featureset(&self) -> FeatureSet {
        self.featureset
    }

    /// Reference-token dictionaries with their frequencies, when fit in this process.
    pub fn ref_table(&self) -> Option<&RefTokenTable> {
        self.ref_table.as_ref()
    }

    pub fn column(&self, f: &FeatureId) -> Option<usize> {
        match (f.kind, f.lang) {
            (FeatureKind::CharNgram, _) => self.chars.get(&f.payload),
            (FeatureKind::WordNgram, _) => self.words.get(&f.payload),
            (FeatureKind::RefToken, Some(LanguageTag::Hi)) => self.refs_hi.get(&f.payload),
            (FeatureKind::RefToken, Some(LanguageTag::En)) => self.refs_en.get(&f.payload),
            (FeatureKind::RefToken, _) => None,
            (FeatureKind::Hashtag, _) => self.hashtags.get(&f.payload),
        }
        .copied()
    }

    /// Occurrence counts for n-gram and reference-token columns, 0/1 presence
    /// for hashtag columns. Unknown features are ignored.
    pub fn vectorize(&self, tweet: &ProcessedTweet) -> SparseVector {
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        let cfg = &self.config;
        if !self.chars.is_empty() {
            for tok in &tweet.tokens {
                for n in cfg.char_min_n..=cfg.char_max_n {
                    for gram in char_ngrams(tok, n, cfg.char_pad) {
                        if let Some(&col) = self.chars.get(&gram) {
                            pairs.push((col, 1.0));
                        }
                    }
                }
            }
        }
        if !self.words.is_empty() {
            for n in cfg.word_min_n..=cfg.word_max_n {
                for gram in word_ngrams(&tweet.tokens, n) {
                    if let Some(&col) = self.words.get(&gram) {
                        pairs.push((col, 1.0));
                    }
                }
            }
        }
        if !self.refs_hi.is_empty() || !self.refs_en.is_empty() {
            for (tok, lang) in tweet.tokens.iter().zip(&tweet.langs) {
                let map = match lang {
                    LanguageTag::Hi => &self.refs_hi,
                    LanguageTag::En => &self.refs_en,
                    LanguageTag::O => continue,
                };
                if let Some(&col) = map.get(tok) {
                    pairs.push((col, 1.0));
                }
            }
        }
        if !self.hashtags.is_empty() {
            let mut present: Vec<usize> =
                tweet.hashtags.iter().filter_map(|tag| self.hashtags.get(&hashtag_key(tag)).copied()).collect();
            present.sort_unstable();
            present.dedup();
            pairs.extend(present.into_iter().map(|col| (col, 1.0)));
        }
        SparseVector::from_pairs(self.dim(), pairs).expect("vocabulary columns are in range")
    }
}

/// Vocabularies over Hindi-only and English-only token streams; vectors are
/// the Hindi block followed by the English block.
pub fn fit_partitioned(
    corpus: &[ProcessedTweet],
    featureset: FeatureSet,
    config: &FeatureConfig,
) -> Result<(Vocabulary, Vocabulary), FeatureError> {
    let hi: Vec<ProcessedTweet> = corpus.iter().map(|t| t.restrict_to(LanguageTag::Hi)).collect();
    let en: Vec<ProcessedTweet> = corpus.iter().map(|t| t.restrict_to(LanguageTag::En)).collect();
    Ok((Vocabulary::fit(&hi, featureset, config)?, Vocabulary::fit(&en, featureset, config)?))
}

/// Maps processed tweets to vectors, either with one joint vocabulary or
/// with per-language vocabularies concatenated.
#[derive(Debug, Clone, PartialEq)]
pub enum Featurizer {
    Joint(Vocabulary),
    Partitioned { hi: Vocabulary, en: Vocabulary },
}

impl Featurizer {
    pub fn fit(
        corpus: &[ProcessedTweet],
        featureset: FeatureSet,
        config: &FeatureConfig,
        partitioned: bool,
    ) -> Result<Self, FeatureError> {
        if partitioned {
            let (hi, en) = fit_partitioned(corpus, featureset, config)?;
            Ok(Featurizer::Partitioned { hi, en })
        } else {
            Ok(Featurizer::Joint(Vocabulary::fit(corpus, featureset, config)?))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Featurizer::Joint(v) => v.dim(),
            Featurizer::Partitioned { hi, en } => hi.dim() + en.dim(),
        }
    }

    pub fn vectorize(&self, tweet: &ProcessedTweet) -> SparseVector {
        match self {
            Featurizer::Joint(v) => v.vectorize(tweet),
            Featurizer::Partitioned { hi, en } => hi
                .vectorize(&tweet.restrict_to(LanguageTag::Hi))
                .concat(&en.vectorize(&tweet.restrict_to(LanguageTag::En))),
        }
    }

    pub fn vocabularies(&self) -> Vec<&Vocabulary> {
        match self {
            Featurizer::Joint(v) => vec![v],
            Featurizer::Partitioned { hi, en } => vec![hi, en],
        }
    }

    pub fn matrix(&self, tweets: &[ProcessedTweet]) -> FeatureMatrix {
        FeatureMatrix::new(
            self.dim(),
            tweets.iter().map(|t| self.vectorize(t)).collect(),
            tweets.iter().map(|t| t.gender).collect(),
            tweets.iter().map(|t| t.author_id.clone()).collect(),
            tweets.iter().map(|t| t.id.clone()).collect(),
        )
        .expect("rows built from one featurizer share its dimension")
    }
}
