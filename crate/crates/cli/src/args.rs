use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cmgender_core::features::{FeatureConfig, FeatureSet};
use cmgender_core::learners::ClassifierKind;

/// Seed used when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "cmgender", version, about = "Gender prediction for English-Hindi code-mixed tweets")]
pub struct Cli {
    /// Worker threads for folds, grid search and trees (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an annotation file and list every violation.
    Validate(ValidateArgs),
    /// Corpus statistics (tweets, words per language, per-gender averages).
    Stats(StatsArgs),
    /// Turn raw JSON-lines tweets into annotation skeletons.
    Ingest(IngestArgs),
    /// Fit features and a classifier on a whole corpus and save the model.
    Train(TrainArgs),
    /// Author-grouped k-fold cross-validation of one classifier.
    Evaluate(EvaluateArgs),
    /// Cross-validate every feature set against several classifiers.
    Experiment(ExperimentArgs),
    /// Write a synthetic corpus with planted gender markers.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Annotation file.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Annotation file.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSON-lines file with one raw tweet per line.
    pub raw: PathBuf,
    /// Output annotation file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Warn about and skip malformed lines instead of failing.
    #[arg(long)]
    pub skip_bad: bool,
}

/// Feature extraction thresholds; unset flags keep the defaults.
#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    /// Feature families to extract.
    #[arg(long, value_parser = parse_featureset, default_value = "all")]
    pub featureset: FeatureSet,
    /// Separate Hindi and English vocabularies.
    #[arg(long)]
    pub partitioned: bool,
    /// Shortest character n-gram.
    #[arg(long, value_name = "N")]
    pub char_min_n: Option<usize>,
    /// Longest character n-gram.
    #[arg(long, value_name = "N")]
    pub char_max_n: Option<usize>,
    /// Minimum training frequency of a character n-gram.
    #[arg(long, value_name = "N")]
    pub char_min_freq: Option<usize>,
    /// Pad tokens with spaces before taking character n-grams.
    #[arg(long)]
    pub char_pad: bool,
    /// Longest word n-gram.
    #[arg(long, value_name = "N")]
    pub word_max_n: Option<usize>,
    /// Minimum training frequency of a word n-gram.
    #[arg(long, value_name = "N")]
    pub word_min_freq: Option<usize>,
    /// Minimum share of a reference token's uses by one gender.
    #[arg(long, value_name = "X")]
    pub ref_min_share: Option<f64>,
    /// Minimum training frequency of a reference token.
    #[arg(long, value_name = "N")]
    pub ref_min_freq: Option<usize>,
    /// Number of most frequent hashtags kept.
    #[arg(long, value_name = "N")]
    pub top_hashtags: Option<usize>,
    /// Features kept by chi-square selection.
    #[arg(long, value_name = "K")]
    pub select_k: Option<usize>,
    /// Spelling variants file (`variant<TAB>canonical` lines).
    #[arg(long, value_name = "PATH", conflicts_with = "no_spelling")]
    pub spelling: Option<PathBuf>,
    /// Skip spelling normalization.
    #[arg(long)]
    pub no_spelling: bool,
}

impl FeatureArgs {
    pub fn config(&self) -> FeatureConfig {
        let d = FeatureConfig::default();
        FeatureConfig {
            char_min_n: self.char_min_n.unwrap_or(d.char_min_n),
            char_max_n: self.char_max_n.unwrap_or(d.char_max_n),
            char_min_freq: self.char_min_freq.unwrap_or(d.char_min_freq),
            char_pad: self.char_pad,
            word_min_n: d.word_min_n,
            word_max_n: self.word_max_n.unwrap_or(d.word_max_n),
            word_min_freq: self.word_min_freq.unwrap_or(d.word_min_freq),
            ref_min_share: self.ref_min_share.unwrap_or(d.ref_min_share),
            ref_min_freq: self.ref_min_freq.unwrap_or(d.ref_min_freq),
            top_hashtags: self.top_hashtags.unwrap_or(d.top_hashtags),
            select_k: self.select_k.unwrap_or(d.select_k),
        }
    }
}

/// Hyperparameter search. Lists replace the default candidates.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Train with default hyperparameters instead of searching a grid.
    #[arg(long, conflicts_with_all = ["nb_alpha", "svm_c", "svm_gamma", "rf_trees", "rf_depth"])]
    pub no_grid: bool,
    /// Folds of the inner grid search.
    #[arg(long, default_value_t = 3, value_name = "K")]
    pub inner_folds: usize,
    /// Naive Bayes smoothing candidates.
    #[arg(long, value_delimiter = ',', value_name = "A,..")]
    pub nb_alpha: Vec<f64>,
    /// SVM C candidates.
    #[arg(long, value_delimiter = ',', value_name = "C,..")]
    pub svm_c: Vec<f64>,
    /// SVM gamma candidates; `1/D` means one over the input dimension.
    #[arg(long, value_delimiter = ',', value_name = "G,..")]
    pub svm_gamma: Vec<String>,
    /// Random forest size candidates.
    #[arg(long, value_delimiter = ',', value_name = "N,..")]
    pub rf_trees: Vec<usize>,
    /// Random forest depth candidates; `none` means unlimited.
    #[arg(long, value_delimiter = ',', value_name = "D,..")]
    pub rf_depth: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Annotation file.
    pub corpus: PathBuf,
    /// Where to write the model file.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_parser = parse_classifier, default_value = "svm")]
    pub classifier: ClassifierKind,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Annotation file.
    pub corpus: PathBuf,
    #[arg(long, value_parser = parse_classifier, default_value = "svm")]
    pub classifier: ClassifierKind,
    /// Number of author-grouped folds.
    #[arg(long, default_value_t = 10, value_name = "K")]
    pub folds: usize,
    /// Fit vocabularies and selection on the whole corpus (leaks test
    /// tweets into the features).
    #[arg(long)]
    pub global_fit: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Annotation file.
    pub corpus: PathBuf,
    /// Classifier columns.
    #[arg(long, value_delimiter = ',', value_parser = parse_classifier, default_value = "nb,svm,rf")]
    pub classifiers: Vec<ClassifierKind>,
    /// Number of author-grouped folds.
    #[arg(long, default_value_t = 10, value_name = "K")]
    pub folds: usize,
    /// Fit vocabularies and selection on the whole corpus (leaks test
    /// tweets into the features).
    #[arg(long)]
    pub global_fit: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output annotation file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// JSON generator config; flags given alongside override its fields.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub authors: Option<usize>,
    #[arg(long, value_name = "N")]
    pub tweets_per_author: Option<usize>,
    /// Probability that a marker slot carries the author's own gender.
    #[arg(long, value_name = "P")]
    pub signal: Option<f64>,
    /// Marker slots per tweet.
    #[arg(long, value_name = "N")]
    pub marker_slots: Option<usize>,
    /// Share of authors who are female.
    #[arg(long, value_name = "X")]
    pub female_share: Option<f64>,
    /// Probability that a background word is Hindi.
    #[arg(long, value_name = "X")]
    pub hi_ratio: Option<f64>,
    /// Mean hashtags per male tweet.
    #[arg(long, value_name = "X")]
    pub hashtags_male: Option<f64>,
    /// Mean hashtags per female tweet.
    #[arg(long, value_name = "X")]
    pub hashtags_female: Option<f64>,
    /// Mean punctuation tokens per male tweet.
    #[arg(long, value_name = "X")]
    pub punct_male: Option<f64>,
    /// Mean punctuation tokens per female tweet.
    #[arg(long, value_name = "X")]
    pub punct_female: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

fn parse_featureset(s: &str) -> Result<FeatureSet, String> {
    s.parse()
}

fn parse_classifier(s: &str) -> Result<ClassifierKind, String> {
    s.parse()
}
