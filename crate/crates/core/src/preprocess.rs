//! Tokenization, placeholder substitution, hashtag decomposition and
//! spelling normalization.
//!
//! [`preprocess_tweet`] applies the steps in a fixed order: hashtag, mention
//! and url placeholders (hashtags also expand into their component words),
//! then punctuation stripping, then spelling normalization.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{is_hashtag, AnnotatedTweet, GenderLabel, LanguageTag};

pub const HASHTAG: &str = "hashtag";
pub const MENTION: &str = "mention";
pub const URL: &str = "url";

static EDGE_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\p{P}+|\p{P}+$").unwrap());
static TRAILING_PUNCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[\p{P}--_]+$").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedTweet {
    pub id: String,
    pub author_id: String,
    pub gender: GenderLabel,
    /// Lowercase, non-empty tokens.
    pub tokens: Vec<String>,
    /// Aligned with `tokens`; placeholders and hashtag words are `O`.
    pub langs: Vec<LanguageTag>,
    /// Hashtag bodies without `#`, original casing, one per `hashtag` placeholder.
    pub hashtags: Vec<String>,
    pub mentions_count: usize,
    pub urls_count: usize,
}

impl ProcessedTweet {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Restriction to tokens carrying `lang`. Hashtags are kept only when
    /// `lang` is `O`, since they are tagged `O`.
    pub fn restrict_to(&self, lang: LanguageTag) -> ProcessedTweet {
        let (tokens, langs) = self
            .tokens
            .iter()
            .zip(&self.langs)
            .filter(|(_, l)| **l == lang)
            .map(|(t, l)| (t.clone(), *l))
            .unzip();
        ProcessedTweet {
            id: self.id.clone(),
            author_id: self.author_id.clone(),
            gender: self.gender,
            tokens,
            langs,
            hashtags: if lang == LanguageTag::O { self.hashtags.clone() } else { Vec::new() },
            mentions_count: 0,
            urls_count: 0,
        }
    }
}

#[derive(Debug, Error)]
#[error("spelling map line {line}: {reason}")]
pub struct SpellingMapError {
    pub line: usize,
    pub reason: String,
}

/// Variant → canonical spelling. No canonical form is itself a variant, so
/// one application is a fixed point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpellingMap {
    map: HashMap<String, String>,
}

const DEFAULT_SPELLINGS: &str = include_str!("../data/spelling.tsv");

impl SpellingMap {
    pub fn empty() -> Self {
        SpellingMap::default()
    }

    /// The bundled default list.
    pub fn builtin() -> Self {
        SpellingMap::parse(DEFAULT_SPELLINGS).expect("bundled spelling map is valid")
    }

    /// Reads `variant<TAB>canonical` lines; `#` starts a comment line.
    /// Entries are lowercased.
    pub fn parse(text: &str) -> Result<Self, SpellingMapError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(variant), Some(canonical), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(SpellingMapError { line: i + 1, reason: format!("expected two fields, got {line:?}") });
            };
            pairs.push((i + 1, variant.to_lowercase(), canonical.to_lowercase()));
        }
        let mut map = HashMap::new();
        for (line, variant, canonical) in &pairs {
            if variant == canonical {
                return Err(SpellingMapError { line: *line, reason: format!("{variant:?} maps to itself") });
            }
            if map.insert(variant.clone(), canonical.clone()).is_some() {
                return Err(SpellingMapError { line: *line, reason: format!("variant {variant:?} listed twice") });
            }
        }
        for (line, _, canonical) in &pairs {
            if map.contains_key(canonical) {
                return Err(SpellingMapError {
                    line: *line,
                    reason: format!("canonical form {canonical:?} is also listed as a variant"),
                });
            }
        }
        Ok(SpellingMap { map })
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.map.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// `(variant, canonical)` pairs sorted by variant.
    pub fn entries(&self) -> Vec<(&str, &str)> {
        let mut pairs: Vec<(&str, &str)> = self.map.iter().map(|(v, c)| (v.as_str(), c.as_str())).collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn strip_edge_punct(s: &str) -> String {
    EDGE_PUNCT.replace_all(s, "").into_owned()
}

pub fn is_url(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// `@` followed by at least one word character.
pub fn is_mention(token: &str) -> bool {
    token
        .strip_prefix('@')
        .and_then(|rest| rest.chars().next())
        .is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Splits raw text on whitespace and lowercases. Hashtags, mentions and urls
/// are kept whole (hashtags and mentions lose trailing punctuation); every
/// other token loses leading and trailing punctuation and is dropped if
/// nothing remains.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            if is_url(raw) {
                return Some(raw.to_lowercase());
            }
            if is_hashtag(raw) || is_mention(raw) {
                return Some(TRAILING_PUNCT.replace(&raw.to_lowercase(), "").into_owned());
            }
            let tok = strip_edge_punct(&raw.to_lowercase());
            (!tok.is_empty()).then_some(tok)
        })
        .collect()
}

/// Splits whitespace-separated text for annotation, preserving case.
/// Leading and trailing punctuation runs become their own tokens, except on
/// hashtags, mentions and urls.
pub fn split_for_annotation(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        if is_url(raw) || is_hashtag(raw) || is_mention(raw) {
            out.push(raw.to_owned());
            continue;
        }
        let core = EDGE_PUNCT.replace_all(raw, "");
        if core.is_empty() {
            out.push(raw.to_owned());
            continue;
        }
        let start = raw.find(core.as_ref()).expect("stripped core is a substring");
        let (lead, rest) = raw.split_at(start);
        let (mid, trail) = rest.split_at(core.len());
        for part in [lead, mid, trail] {
            if !part.is_empty() {
                out.push(part.to_owned());
            }
        }
    }
    out
}

/// Replaces each token found in `map`; single pass.
pub fn normalize_spelling(tokens: &[String], map: &SpellingMap) -> Vec<String> {
    tokens.iter().map(|t| map.get(t).map_or_else(|| t.clone(), str::to_owned)).collect()
}

/// Splits a hashtag body (no leading `#`) into lowercase words at
/// underscores and other separators, lower→upper camel-case boundaries,
/// acronym ends (`GSTBill` → `gst`, `bill`) and letter/digit changes.
pub fn decompose_hashtag(tag: &str) -> Vec<String> {
    let chars: Vec<char> = tag.chars().collect();
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            flush(&mut current, &mut parts);
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            let digit_change = p.is_numeric() != c.is_numeric();
            let camel = !p.is_uppercase() && !p.is_numeric() && c.is_uppercase();
            let acronym_end =
                p.is_uppercase() && c.is_uppercase() && chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if digit_change || camel || acronym_end {
                flush(&mut current, &mut parts);
            }
        }
        current.push(c);
        prev = Some(c);
    }
    flush(&mut current, &mut parts);
    if parts.is_empty() && !tag.is_empty() {
        parts.push(tag.to_lowercase());
    }
    parts
}

fn flush(current: &mut String, parts: &mut Vec<String>) {
    if !current.is_empty() {
        parts.push(current.to_lowercase());
        current.clear();
    }
}

pub fn preprocess_tweet(tweet: &AnnotatedTweet, map: &SpellingMap) -> ProcessedTweet {
    let mut out = ProcessedTweet {
        id: tweet.id.clone(),
        author_id: tweet.author_id.clone(),
        gender: tweet.gender,
        tokens: Vec::with_capacity(tweet.tokens.len()),
        langs: Vec::with_capacity(tweet.tokens.len()),
        hashtags: Vec::new(),
        mentions_count: 0,
        urls_count: 0,
    };
    let mut placeholder = Vec::with_capacity(tweet.tokens.len());
    let mut push = |out: &mut ProcessedTweet, tok: String, lang, is_placeholder| {
        out.tokens.push(tok);
        out.langs.push(lang);
        placeholder.push(is_placeholder);
    };

    for tok in &tweet.tokens {
        let surface = tok.surface.as_str();
        if is_hashtag(surface) {
            let body = TRAILING_PUNCT.replace(&surface[1..], "").into_owned();
            push(&mut out, HASHTAG.to_owned(), LanguageTag::O, true);
            for word in decompose_hashtag(&body) {
                push(&mut out, word, LanguageTag::O, false);
            }
            out.hashtags.push(body);
            continue;
        }
        if is_mention(surface) {
            push(&mut out, MENTION.to_owned(), LanguageTag::O, true);
            out.mentions_count += 1;
            continue;
        }
        let word = strip_edge_punct(&surface.to_lowercase());
        if is_url(surface) || is_url(&word) {
            push(&mut out, URL.to_owned(), LanguageTag::O, true);
            out.urls_count += 1;
            continue;
        }
        if !word.is_empty() {
            push(&mut out, word, tok.lang, false);
        }
    }

    for (tok, is_placeholder) in out.tokens.iter_mut().zip(placeholder) {
        if !is_placeholder {
            if let Some(canonical) = map.get(tok) {
                *tok = canonical.to_owned();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotatedToken;
    use proptest::prelude::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn annotated(tokens: &[&str]) -> AnnotatedTweet {
        AnnotatedTweet {
            id: "1".into(),
            author_id: "u".into(),
            tokens: tokens.iter().map(|t| AnnotatedToken::new(*t, LanguageTag::Hi)).collect(),
            gender: GenderLabel::Female,
        }
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Jab koi baat"), s(&["jab", "koi", "baat"]));
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("Hello!!  World"), s(&["hello", "world"]));
        assert_eq!(tokenize("..... !! ok"), s(&["ok"]));
        assert_eq!(tokenize("#Wah_Re! @Modi, https://t.co/X"), s(&["#wah_re", "@modi", "https://t.co/x"]));
    }

    #[test]
    fn annotation_split_keeps_case_and_punctuation() {
        assert_eq!(
            split_for_annotation("Hello!! #GST2017 \"kya\" ....."),
            s(&["Hello", "!!", "#GST2017", "\"", "kya", "\"", "....."])
        );
    }

    #[test]
    fn spelling_examples() {
        let map = SpellingMap::parse("dis\tthis\n").unwrap();
        assert_eq!(normalize_spelling(&s(&["dis", "is", "good"]), &map), s(&["this", "is", "good"]));
        assert_eq!(normalize_spelling(&s(&["dis", "x"]), &SpellingMap::empty()), s(&["dis", "x"]));
        assert_eq!(normalize_spelling(&s(&["this"]), &map), s(&["this"]));
    }

    #[test]
    fn builtin_map_has_seed_entry() {
        assert_eq!(SpellingMap::builtin().get("dis"), Some("this"));
    }

    #[test]
    fn spelling_map_rejects_chains_and_junk() {
        assert!(SpellingMap::parse("a\tb\nb\tc\n").is_err());
        assert!(SpellingMap::parse("a\ta\n").is_err());
        assert!(SpellingMap::parse("a b c\n").is_err());
        assert!(SpellingMap::parse("a\tb\na\tc\n").is_err());
        let m = SpellingMap::parse("# comment\n\nDIS this\n").unwrap();
        assert_eq!(m.get("dis"), Some("this"));
    }

    #[test]
    fn hashtag_examples() {
        assert_eq!(decompose_hashtag("wah_re_politics"), s(&["wah", "re", "politics"]));
        assert_eq!(decompose_hashtag("TripleTalaq"), s(&["triple", "talaq"]));
        assert_eq!(decompose_hashtag("gst2017"), s(&["gst", "2017"]));
        assert_eq!(decompose_hashtag("GSTBill"), s(&["gst", "bill"]));
        assert_eq!(decompose_hashtag("TheID2018"), s(&["the", "id", "2018"]));
        assert_eq!(decompose_hashtag("8YearsOf"), s(&["8", "years", "of"]));
        assert_eq!(decompose_hashtag("notebandi"), s(&["notebandi"]));
        assert_eq!(decompose_hashtag("___"), s(&["___"]));
    }

    #[test]
    fn preprocess_expands_hashtags() {
        let t = annotated(&["Congress", "jaisi", "#wah_re_politics"]);
        let p = preprocess_tweet(&t, &SpellingMap::empty());
        assert_eq!(p.tokens, s(&["congress", "jaisi", "hashtag", "wah", "re", "politics"]));
        assert_eq!(p.hashtags, s(&["wah_re_politics"]));
        assert_eq!(
            p.langs,
            [LanguageTag::Hi, LanguageTag::Hi, LanguageTag::O, LanguageTag::O, LanguageTag::O, LanguageTag::O]
        );
        assert_eq!(p.gender, GenderLabel::Female);
        assert_eq!(p.author_id, "u");
    }

    #[test]
    fn punctuation_only_tweet_is_empty() {
        let p = preprocess_tweet(&annotated(&["!!", "....", "?"]), &SpellingMap::empty());
        assert!(p.is_empty());
        assert!(p.langs.is_empty());
    }

    #[test]
    fn mentions_and_urls() {
        let p = preprocess_tweet(&annotated(&["@narendramodi"]), &SpellingMap::empty());
        assert_eq!(p.tokens, s(&["mention"]));
        assert_eq!(p.mentions_count, 1);
        let p = preprocess_tweet(&annotated(&["https://t.co/abc", "(www.x.in)", "@"]), &SpellingMap::empty());
        assert_eq!(p.tokens, s(&["url", "url"]));
        assert_eq!(p.urls_count, 2);
    }

    #[test]
    fn normalization_runs_last_and_skips_placeholders() {
        let map = SpellingMap::parse("dis\tthis\nurl\tlink\n").unwrap();
        let p = preprocess_tweet(&annotated(&["DIS!", "#DisGood", "http://a.b"]), &map);
        assert_eq!(p.tokens, s(&["this", "hashtag", "this", "good", "url"]));
    }

    fn rewrap(p: &ProcessedTweet) -> AnnotatedTweet {
        AnnotatedTweet {
            id: p.id.clone(),
            author_id: p.author_id.clone(),
            tokens: p.tokens.iter().zip(&p.langs).map(|(t, l)| AnnotatedToken::new(t.clone(), *l)).collect(),
            gender: p.gender,
        }
    }

    fn token_strategy() -> impl Strategy<Value = String> {
        prop_oneof![
            "[A-Za-z]{1,8}",
            "[A-Za-z0-9_.!?,:'#@-]{1,10}",
            "#[A-Za-z][A-Za-z0-9_]{0,12}",
            "@[a-z_]{1,6}",
            "(https?://|www\\.)[a-z./]{1,8}",
            "[dD]is",
        ]
    }

    proptest! {
        #[test]
        fn preprocess_is_idempotent(tokens in prop::collection::vec(token_strategy(), 1..12)) {
            let map = SpellingMap::parse("dis\tthis\n").unwrap();
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let once = preprocess_tweet(&annotated(&refs), &map);
            let twice = preprocess_tweet(&rewrap(&once), &map);
            prop_assert_eq!(&once.tokens, &twice.tokens);
            prop_assert_eq!(&once.langs, &twice.langs);
        }

        #[test]
        fn preprocess_output_invariants(tokens in prop::collection::vec(token_strategy(), 1..12)) {
            let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
            let p = preprocess_tweet(&annotated(&refs), &SpellingMap::builtin());
            prop_assert_eq!(p.tokens.len(), p.langs.len());
            for t in &p.tokens {
                prop_assert!(!t.is_empty());
                prop_assert!(!t.chars().any(char::is_uppercase));
            }
            let placeholders = p.tokens.iter().filter(|t| *t == HASHTAG).count();
            prop_assert_eq!(placeholders, p.hashtags.len());
        }

        #[test]
        fn decomposition_never_empty(tag in "[A-Za-z0-9_]{1,20}") {
            let parts = decompose_hashtag(&tag);
            prop_assert!(!parts.is_empty());
            for part in &parts {
                prop_assert!(!part.is_empty());
                prop_assert!(!part.chars().any(char::is_uppercase));
            }
        }
    }
}
