//! Annotated tweet corpus: domain types, the line-oriented annotation
//! format, raw JSON-lines ingestion, validation and statistics.

mod format;
mod raw;
mod stats;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use format::{
    parse_corpus, scan_corpus, serialize_corpus, write_skeleton, write_tweet, ParseError, ParseErrorKind, Scan,
    GENDER_PLACEHOLDER,
};
pub use raw::{ingest_raw, ingest_raw_lenient, IngestError, RawTweet};
pub use stats::{compute_stats, is_hashtag, is_punctuation, CorpusStats, PerGender};

/// Source language of a single token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LanguageTag {
    En,
    Hi,
    O,
}

impl LanguageTag {
    pub const ALL: [LanguageTag; 3] = [LanguageTag::En, LanguageTag::Hi, LanguageTag::O];

    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::En => "En",
            LanguageTag::Hi => "Hi",
            LanguageTag::O => "O",
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LanguageTag {
    type Err = String;

    /// Exact match only: `En`, `Hi` or `O`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "En" => Ok(LanguageTag::En),
            "Hi" => Ok(LanguageTag::Hi),
            "O" => Ok(LanguageTag::O),
            other => Err(format!("unknown language tag {other:?}")),
        }
    }
}

/// Author gender. `Male` maps to `+1` wherever a signed label is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderLabel {
    Male,
    Female,
}

impl GenderLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Male => "male",
            GenderLabel::Female => "female",
        }
    }

    /// `+1.0` for male, `-1.0` for female.
    pub fn sign(self) -> f64 {
        match self {
            GenderLabel::Male => 1.0,
            GenderLabel::Female => -1.0,
        }
    }

    pub fn other(self) -> GenderLabel {
        match self {
            GenderLabel::Male => GenderLabel::Female,
            GenderLabel::Female => GenderLabel::Male,
        }
    }

    /// Index into two-element per-class arrays (male first).
    pub fn index(self) -> usize {
        match self {
            GenderLabel::Male => 0,
            GenderLabel::Female => 1,
        }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GenderLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("male") {
            Ok(GenderLabel::Male)
        } else if s.eq_ignore_ascii_case("female") {
            Ok(GenderLabel::Female)
        } else {
            Err(format!("unknown gender {s:?}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lang: LanguageTag,
}

impl AnnotatedToken {
    pub fn new(surface: impl Into<String>, lang: LanguageTag) -> Self {
        AnnotatedToken { surface: surface.into(), lang }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTweet {
    pub id: String,
    /// Anonymized author key; all tweets of one author share it.
    pub author_id: String,
    pub tokens: Vec<AnnotatedToken>,
    pub gender: GenderLabel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub tweets: Vec<AnnotatedTweet>,
}

impl Corpus {
    pub fn new(tweets: Vec<AnnotatedTweet>) -> Self {
        Corpus { tweets }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    /// Distinct author ids, sorted.
    pub fn authors(&self) -> Vec<&str> {
        let mut authors: Vec<&str> = self.tweets.iter().map(|t| t.author_id.as_str()).collect();
        authors.sort_unstable();
        authors.dedup();
        authors
    }
}

/// One broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub tweet_id: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tweet {:?}: {}", self.tweet_id, self.rule)
    }
}

/// Checks every corpus and tweet invariant. An empty result means the
/// corpus serializes and parses back unchanged.
pub fn validate(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for tweet in &corpus.tweets {
        let mut push = |rule: String| {
            out.push(Violation { tweet_id: tweet.id.clone(), rule });
        };
        if tweet.id.is_empty() {
            push("empty tweet id".into());
        } else if !is_clean_attr(&tweet.id) {
            push("tweet id contains whitespace or control characters".into());
        }
        if !seen.insert(tweet.id.as_str()) && reported.insert(tweet.id.as_str()) {
            push(format!("duplicate tweet id {:?}", tweet.id));
        }
        if tweet.author_id.is_empty() {
            push("empty author id".into());
        } else if !is_clean_attr(&tweet.author_id) {
            push("author id contains whitespace or control characters".into());
        }
        if tweet.tokens.is_empty() {
            push("empty token list".into());
        }
        for (i, tok) in tweet.tokens.iter().enumerate() {
            if tok.surface.is_empty() {
                push(format!("token {i} has an empty surface"));
            } else if tok.surface.chars().any(|c| c.is_whitespace() || c.is_control()) {
                push(format!("token {i} contains whitespace or control characters"));
            }
        }
    }
    out
}

fn is_clean_attr(s: &str) -> bool {
    !s.chars().any(|c| c.is_whitespace() || c.is_control())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tweet(id: &str, tokens: &[(&str, LanguageTag)]) -> AnnotatedTweet {
        AnnotatedTweet {
            id: id.into(),
            author_id: "a1".into(),
            tokens: tokens.iter().map(|(s, l)| AnnotatedToken::new(*s, *l)).collect(),
            gender: GenderLabel::Male,
        }
    }

    #[test]
    fn gender_parse_is_case_insensitive() {
        assert_eq!("MALE".parse::<GenderLabel>().unwrap(), GenderLabel::Male);
        assert_eq!("Female".parse::<GenderLabel>().unwrap(), GenderLabel::Female);
        assert!("m".parse::<GenderLabel>().is_err());
    }

    #[test]
    fn lang_tag_is_exact() {
        assert_eq!("Hi".parse::<LanguageTag>().unwrap(), LanguageTag::Hi);
        assert!("hi".parse::<LanguageTag>().is_err());
        assert!("EN".parse::<LanguageTag>().is_err());
    }

    #[test]
    fn duplicate_ids_reported_once() {
        let c = Corpus::new(vec![
            tweet("1", &[("a", LanguageTag::En)]),
            tweet("1", &[("b", LanguageTag::En)]),
            tweet("1", &[("c", LanguageTag::En)]),
        ]);
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].tweet_id, "1");
        assert!(v[0].rule.contains("duplicate"));
    }

    #[test]
    fn empty_token_list_is_a_violation() {
        let c = Corpus::new(vec![tweet("1", &[])]);
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "empty token list");
    }

    #[test]
    fn whitespace_in_surface_is_a_violation() {
        let c = Corpus::new(vec![tweet("1", &[("a b", LanguageTag::En)])]);
        assert_eq!(validate(&c).len(), 1);
    }
}
