use std::fmt::Write as _;

use cmgender_core::corpus::CorpusStats;
use cmgender_core::evaluation::CvReport;
use cmgender_core::features::{FeatureConfig, FeatureSet};

fn avg(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

pub fn stats_table(s: &CorpusStats) -> String {
    let mut out = String::new();
    let rows = [
        ("Tweets included in corpus", s.total_tweets),
        ("Total words", s.total_words),
        ("Words in Hindi", s.words_hi),
        ("Words in English", s.words_en),
        ("Others (hashtags, punctuation, etc)", s.words_other),
        ("Male tweets", s.male_tweets),
        ("Female tweets", s.female_tweets),
    ];
    writeln!(out, "{:<38}{:>10}", "", "Number").unwrap();
    for (label, n) in rows {
        writeln!(out, "{label:<38}{n:>10}").unwrap();
    }
    out.push('\n');
    writeln!(out, "{:<38}{:>10}{:>10}", "Average per tweet", "Male", "Female").unwrap();
    let averages = [
        ("Hashtags", &s.avg_hashtags_per_gender),
        ("Punctuation", &s.avg_punct_per_gender),
        ("Words", &s.avg_words_per_gender),
    ];
    for (label, v) in averages {
        writeln!(out, "{label:<38}{:>10}{:>10}", avg(v.male), avg(v.female)).unwrap();
    }
    out
}

pub fn settings(featureset: FeatureSet, model: &str, seed: u64, partitioned: bool, global_fit: bool) -> String {
    format!(
        "features {}  model {model}  seed {seed}  partitioned {partitioned}  global fit {global_fit}",
        featureset.as_str()
    )
}

pub fn thresholds(c: &FeatureConfig) -> String {
    format!(
        "thresholds: char {}-{} freq>={}{}  word {}-{} freq>={}  ref share>={} freq>={}  hashtags top {}  select k={}",
        c.char_min_n,
        c.char_max_n,
        c.char_min_freq,
        if c.char_pad { " padded" } else { "" },
        c.word_min_n,
        c.word_max_n,
        c.word_min_freq,
        c.ref_min_share,
        c.ref_min_freq,
        c.top_hashtags,
        c.select_k
    )
}

pub fn cv_report(r: &CvReport) -> String {
    let f = &r.fingerprint;
    let mut out = String::new();
    writeln!(out, "{}", settings(f.featureset, &f.model, f.seed, f.partitioned, f.global_fit)).unwrap();
    writeln!(out, "folds {}  inner folds {}", f.folds, f.inner_folds).unwrap();
    writeln!(out, "{}", thresholds(&f.thresholds)).unwrap();
    out.push('\n');
    writeln!(
        out,
        "{:>4} {:>6} {:>5} {:>7} {:>7} {:>5} {:>7} {:>9}  chosen",
        "fold", "train", "test", "authors", "raw dim", "dim", "leakage", "accuracy"
    )
    .unwrap();
    for fold in &r.folds {
        let chosen = fold.chosen.map_or_else(|| "-".to_owned(), |s| s.to_string());
        writeln!(
            out,
            "{:>4} {:>6} {:>5} {:>7} {:>7} {:>5} {:>7} {:>9.4}  {chosen}",
            fold.fold, fold.train_tweets, fold.test_tweets, fold.test_authors, fold.raw_dim, fold.dim, fold.leakage, fold.accuracy
        )
        .unwrap();
    }
    writeln!(out, "mean accuracy {:.4}", r.mean).unwrap();
    out
}
