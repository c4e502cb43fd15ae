use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Corpus, GenderLabel, LanguageTag};

static PUNCT_ONLY: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\p{P}--#]+$").unwrap());

/// True when every character is Unicode punctuation other than `#`.
pub fn is_punctuation(surface: &str) -> bool {
    PUNCT_ONLY.is_match(surface)
}

/// `#` followed by a body with at least one letter or digit.
pub fn is_hashtag(surface: &str) -> bool {
    surface.strip_prefix('#').is_some_and(|body| body.chars().any(char::is_alphanumeric))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerGender<T> {
    pub male: T,
    pub female: T,
}

impl<T> PerGender<T> {
    pub fn get(&self, g: GenderLabel) -> &T {
        match g {
            GenderLabel::Male => &self.male,
            GenderLabel::Female => &self.female,
        }
    }

    pub fn get_mut(&mut self, g: GenderLabel) -> &mut T {
        match g {
            GenderLabel::Male => &mut self.male,
            GenderLabel::Female => &mut self.female,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_tweets: usize,
    pub total_words: usize,
    pub words_hi: usize,
    pub words_en: usize,
    pub words_other: usize,
    pub male_tweets: usize,
    pub female_tweets: usize,
    pub hashtags: PerGender<usize>,
    pub punctuation: PerGender<usize>,
    pub words: PerGender<usize>,
    /// Absent when the gender has no tweets.
    pub avg_hashtags_per_gender: PerGender<Option<f64>>,
    pub avg_punct_per_gender: PerGender<Option<f64>>,
    pub avg_words_per_gender: PerGender<Option<f64>>,
}

pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    let mut s = CorpusStats { total_tweets: corpus.len(), ..Default::default() };
    for tweet in &corpus.tweets {
        let g = tweet.gender;
        match g {
            GenderLabel::Male => s.male_tweets += 1,
            GenderLabel::Female => s.female_tweets += 1,
        }
        for tok in &tweet.tokens {
            s.total_words += 1;
            *s.words.get_mut(g) += 1;
            match tok.lang {
                LanguageTag::Hi => s.words_hi += 1,
                LanguageTag::En => s.words_en += 1,
                LanguageTag::O => s.words_other += 1,
            }
            if is_hashtag(&tok.surface) {
                *s.hashtags.get_mut(g) += 1;
            } else if is_punctuation(&tok.surface) {
                *s.punctuation.get_mut(g) += 1;
            }
        }
    }
    let tweets = PerGender { male: s.male_tweets, female: s.female_tweets };
    let avg = |num: &PerGender<usize>| PerGender {
        male: ratio(num.male, tweets.male),
        female: ratio(num.female, tweets.female),
    };
    s.avg_hashtags_per_gender = avg(&s.hashtags);
    s.avg_punct_per_gender = avg(&s.punctuation);
    s.avg_words_per_gender = avg(&s.words);
    s
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}
