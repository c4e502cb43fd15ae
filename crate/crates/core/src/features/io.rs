//! Line-oriented text formats for vocabularies and selection masks.
//!
//! ```text
//! cmgender-vocabulary 1
//! featureset<TAB>all
//! config<TAB>{...json...}
//! features<TAB>3
//! 0<TAB>char<TAB>2<TAB>-<TAB>ab
//! 1<TAB>word<TAB>2<TAB>-<TAB>kya baat
//! 2<TAB>ref<TAB>1<TAB>Hi<TAB>likhungi
//! ```
//!
//! ```text
//! cmgender-selection 1
//! dim<TAB>4
//! kept<TAB>2
//! 0<TAB>3.2<TAB>1
//! ...one line per original column: index, score, kept flag
//! ```

use std::fmt::Write as _;

use super::{FeatureConfig, FeatureError, FeatureId, FeatureKind, FeatureSet, SelectionMask, Vocabulary};
use crate::corpus::LanguageTag;

const VOCAB_HEADER: &str = "cmgender-vocabulary 1";
const SELECTION_HEADER: &str = "cmgender-selection 1";

fn format_err(line: usize, reason: impl Into<String>) -> FeatureError {
    FeatureError::Format { line, reason: reason.into() }
}

pub fn write_vocabulary(v: &Vocabulary) -> String {
    let mut out = String::new();
    let config = serde_json::to_string(v.config()).expect("config serializes");
    writeln!(out, "{VOCAB_HEADER}").unwrap();
    writeln!(out, "featureset\t{}", v.featureset()).unwrap();
    writeln!(out, "config\t{config}").unwrap();
    writeln!(out, "features\t{}", v.dim()).unwrap();
    for (col, f) in v.features().iter().enumerate() {
        let lang = f.lang.map_or("-", LanguageTag::as_str);
        writeln!(out, "{col}\t{}\t{}\t{lang}\t{}", f.kind.as_str(), f.order, f.payload).unwrap();
    }
    out
}

/// Reads exactly one vocabulary block from the start of `text`; returns it
/// and the number of lines consumed.
pub fn read_vocabulary(text: &str) -> Result<(Vocabulary, usize), FeatureError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| lines.next().ok_or_else(|| format_err(0, format!("truncated vocabulary: missing {what}")));

    let (n, header) = next("header")?;
    if header != VOCAB_HEADER {
        return Err(format_err(n, format!("expected {VOCAB_HEADER:?}")));
    }
    let (n, line) = next("featureset")?;
    let featureset: FeatureSet = field(line, "featureset", n)?.parse().map_err(|e: String| format_err(n, e))?;
    let (n, line) = next("config")?;
    let config: FeatureConfig =
        serde_json::from_str(field(line, "config", n)?).map_err(|e| format_err(n, e.to_string()))?;
    let (n, line) = next("feature count")?;
    let count: usize = field(line, "features", n)?.parse().map_err(|_| format_err(n, "bad feature count"))?;

    let mut features = Vec::with_capacity(count);
    for col in 0..count {
        let (n, line) = next("feature line")?;
        let parts: Vec<&str> = line.splitn(5, '\t').collect();
        let [idx, kind, order, lang, payload] = parts[..] else {
            return Err(format_err(n, "feature line needs five tab-separated fields"));
        };
        if idx.parse::<usize>().ok() != Some(col) {
            return Err(format_err(n, format!("expected column {col}")));
        }
        let kind: FeatureKind = kind.parse().map_err(|e: String| format_err(n, e))?;
        let order: usize = order.parse().map_err(|_| format_err(n, "bad order"))?;
        let lang = match lang {
            "-" => None,
            other => Some(other.parse::<LanguageTag>().map_err(|e| format_err(n, e))?),
        };
        features.push(FeatureId { kind, payload: payload.to_owned(), order, lang });
    }
    config.check()?;
    Ok((Vocabulary::from_features(config, featureset, features)?, 4 + count))
}

pub fn write_selection(mask: &SelectionMask) -> String {
    let mut out = String::new();
    writeln!(out, "{SELECTION_HEADER}").unwrap();
    writeln!(out, "dim\t{}", mask.dim).unwrap();
    writeln!(out, "kept\t{}", mask.len()).unwrap();
    for (col, score) in mask.scores.iter().enumerate() {
        let kept = u8::from(mask.indices.binary_search(&col).is_ok());
        writeln!(out, "{col}\t{score}\t{kept}").unwrap();
    }
    out
}

/// Reads one selection block from the start of `text`; returns it and the
/// number of lines consumed.
pub fn read_selection(text: &str) -> Result<(SelectionMask, usize), FeatureError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| lines.next().ok_or_else(|| format_err(0, format!("truncated selection: missing {what}")));

    let (n, header) = next("header")?;
    if header != SELECTION_HEADER {
        return Err(format_err(n, format!("expected {SELECTION_HEADER:?}")));
    }
    let (n, line) = next("dim")?;
    let dim: usize = field(line, "dim", n)?.parse().map_err(|_| format_err(n, "bad dim"))?;
    let (n, line) = next("kept")?;
    let kept: usize = field(line, "kept", n)?.parse().map_err(|_| format_err(n, "bad kept count"))?;
    let mut scores = Vec::with_capacity(dim);
    let mut indices = Vec::with_capacity(kept);
    for col in 0..dim {
        let (n, line) = next("column line")?;
        let parts: Vec<&str> = line.split('\t').collect();
        let [idx, score, flag] = parts[..] else {
            return Err(format_err(n, "column line needs three tab-separated fields"));
        };
        if idx.parse::<usize>().ok() != Some(col) {
            return Err(format_err(n, format!("expected column {col}")));
        }
        scores.push(score.parse::<f64>().map_err(|_| format_err(n, "bad score"))?);
        match flag {
            "1" => indices.push(col),
            "0" => {}
            _ => return Err(format_err(n, "kept flag must be 0 or 1")),
        }
    }
    if indices.len() != kept {
        return Err(format_err(3, format!("header says {kept} kept columns, found {}", indices.len())));
    }
    Ok((SelectionMask { dim, indices, scores, fitted_on: Vec::new() }, 3 + dim))
}

fn field<'a>(line: &'a str, key: &str, n: usize) -> Result<&'a str, FeatureError> {
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('\t'))
        .ok_or_else(|| format_err(n, format!("expected `{key}<TAB>...`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::GenderLabel;
    use crate::preprocess::ProcessedTweet;

    fn corpus() -> Vec<ProcessedTweet> {
        (0..12)
            .map(|i| ProcessedTweet {
                id: i.to_string(),
                author_id: i.to_string(),
                gender: if i % 3 == 0 { GenderLabel::Female } else { GenderLabel::Male },
                tokens: vec!["kya".into(), "baat".into(), if i % 3 == 0 { "karungi" } else { "karunga" }.into()],
                langs: vec![LanguageTag::Hi; 3],
                hashtags: vec!["GST".into()],
                mentions_count: 0,
                urls_count: 0,
            })
            .collect()
    }

    #[test]
    fn vocabulary_round_trip() {
        let cfg = FeatureConfig { char_min_freq: 3, word_min_freq: 3, char_pad: true, ..FeatureConfig::default() };
        let v = Vocabulary::fit(&corpus(), FeatureSet::All, &cfg).unwrap();
        assert!(v.features().iter().any(|f| f.kind == FeatureKind::RefToken));
        let text = write_vocabulary(&v);
        let (back, used) = read_vocabulary(&text).unwrap();
        assert_eq!(used, text.lines().count());
        assert_eq!(back, v);
        for t in corpus() {
            assert_eq!(back.vectorize(&t), v.vectorize(&t));
        }
    }

    #[test]
    fn selection_round_trip() {
        let mask = SelectionMask { dim: 4, indices: vec![0, 3], scores: vec![0.1, 0.0, 1.0 / 3.0, 7.5], fitted_on: vec![] };
        let text = write_selection(&mask);
        let (back, used) = read_selection(&text).unwrap();
        assert_eq!(used, 7);
        assert_eq!(back, mask);
    }

    #[test]
    fn corrupt_files_rejected() {
        assert!(read_vocabulary("nope\n").is_err());
        assert!(read_selection("cmgender-selection 1\ndim\t1\nkept\t1\n0\t1.0\t0\n").is_err());
        let v = Vocabulary::fit(&corpus(), FeatureSet::BagOfWords, &FeatureConfig { word_min_freq: 1, ..Default::default() })
            .unwrap();
        let text = write_vocabulary(&v);
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(read_vocabulary(&truncated).is_err());
    }
}
