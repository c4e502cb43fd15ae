use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{GenderLabel, LanguageTag};
use crate::preprocess::ProcessedTweet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefEntry {
    pub freq_male: usize,
    pub freq_female: usize,
    /// Larger class share of the token's occurrences.
    pub score: f64,
}

impl RefEntry {
    pub fn new(freq_male: usize, freq_female: usize) -> Self {
        let total = freq_male + freq_female;
        let score = if total == 0 { 0.0 } else { freq_male.max(freq_female) as f64 / total as f64 };
        RefEntry { freq_male, freq_female, score }
    }

    pub fn total(&self) -> usize {
        self.freq_male + self.freq_female
    }

    pub fn leaning(&self) -> GenderLabel {
        if self.freq_male >= self.freq_female {
            GenderLabel::Male
        } else {
            GenderLabel::Female
        }
    }
}

/// Gender-indicative tokens, one dictionary per language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefTokenTable {
    pub hi: BTreeMap<String, RefEntry>,
    pub en: BTreeMap<String, RefEntry>,
    #[serde(skip)]
    pub fitted_on: Vec<String>,
}

impl RefTokenTable {
    pub fn dictionary(&self, lang: LanguageTag) -> Option<&BTreeMap<String, RefEntry>> {
        match lang {
            LanguageTag::Hi => Some(&self.hi),
            LanguageTag::En => Some(&self.en),
            LanguageTag::O => None,
        }
    }

    pub fn len(&self) -> usize {
        self.hi.len() + self.en.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hi.is_empty() && self.en.is_empty()
    }

    /// (language, token) pairs, Hindi first, each dictionary in token order.
    pub fn entries(&self) -> impl Iterator<Item = (LanguageTag, &str, &RefEntry)> {
        let hi = self.hi.iter().map(|(t, e)| (LanguageTag::Hi, t.as_str(), e));
        let en = self.en.iter().map(|(t, e)| (LanguageTag::En, t.as_str(), e));
        hi.chain(en)
    }
}

/// Counts per-gender occurrences of every Hi and En token and keeps those
/// with `score >= min_share` and at least `min_freq` occurrences.
pub fn fit_reference_tokens(corpus: &[ProcessedTweet], min_share: f64, min_freq: usize) -> RefTokenTable {
    let mut counts: HashMap<(LanguageTag, &str), [usize; 2]> = HashMap::new();
    for tweet in corpus {
        for (tok, lang) in tweet.tokens.iter().zip(&tweet.langs) {
            if *lang == LanguageTag::O {
                continue;
            }
            counts.entry((*lang, tok.as_str())).or_default()[tweet.gender.index()] += 1;
        }
    }
    let mut table = RefTokenTable { fitted_on: corpus.iter().map(|t| t.id.clone()).collect(), ..Default::default() };
    for ((lang, tok), [male, female]) in counts {
        let entry = RefEntry::new(male, female);
        if entry.total() >= min_freq && entry.score >= min_share {
            let dict = if lang == LanguageTag::Hi { &mut table.hi } else { &mut table.en };
            dict.insert(tok.to_owned(), entry);
        }
    }
    table
}
