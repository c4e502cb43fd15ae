//! Synthetic code-mixed corpora with a planted, tunable gender signal.
//!
//! Every tweet carries `marker_slots` marker tokens. Each slot emits a
//! marker of the author's gender with probability `p_signal` and one of the
//! other gender otherwise, so `p_signal = 0.5` carries no signal at all.
//! Markers are Hindi verb forms that differ only in their gendered ending
//! (`karunga` / `karungi`).

use std::sync::LazyLock;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedToken, AnnotatedTweet, Corpus, GenderLabel, LanguageTag, PerGender};

static HINDI_WORDS: LazyLock<Vec<&'static str>> = LazyLock::new(|| word_list(include_str!("../data/hindi_words.txt")));
static ENGLISH_WORDS: LazyLock<Vec<&'static str>> =
    LazyLock::new(|| word_list(include_str!("../data/english_words.txt")));

fn word_list(text: &'static str) -> Vec<&'static str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

const MARKER_STEMS: [&str; 8] = ["karu", "jau", "khau", "likhu", "dekhu", "aau", "padhu", "sochu"];

const HASHTAGS: [&str; 16] = [
    "#DigitalIndia",
    "#MakeInIndia",
    "#IndVsPak",
    "#MondayMotivation",
    "#BollywoodNews",
    "#SwachhBharat",
    "#Election2019",
    "#MumbaiRains",
    "#DelhiTraffic",
    "#CricketFever",
    "#GST",
    "#ThrowbackThursday",
    "#WorldCup",
    "#Diwali",
    "#FoodLover",
    "#TravelDiaries",
];

const PUNCTUATION: [&str; 6] = ["!", "?", ",", "...", ".", "!!"];

/// Marker tokens of one gender: `karunga`, `jaunga`, ... or `karungi`, ...
pub fn markers(gender: GenderLabel) -> Vec<String> {
    let ending = match gender {
        GenderLabel::Male => "nga",
        GenderLabel::Female => "ngi",
    };
    MARKER_STEMS.iter().map(|stem| format!("{stem}{ending}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_authors: usize,
    pub tweets_per_author: usize,
    /// Inclusive range of background words per tweet; with the defaults a
    /// tweet averages about 19 tokens in all.
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Probability that a background word is Hindi rather than English.
    pub hi_ratio: f64,
    pub marker_slots: usize,
    pub p_signal: f64,
    /// Share of authors who are female, rounded to whole authors.
    pub female_share: f64,
    /// Mean hashtags per tweet (Poisson).
    pub hashtag_rate: PerGender<f64>,
    /// Mean punctuation tokens per tweet (Poisson).
    pub punct_rate: PerGender<f64>,
    pub mention_prob: f64,
    pub url_prob: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_authors: 50,
            tweets_per_author: 20,
            min_tokens: 9,
            max_tokens: 17,
            hi_ratio: 0.55,
            marker_slots: 3,
            p_signal: 0.9,
            female_share: 0.5,
            hashtag_rate: PerGender { male: 1.0, female: 1.0 },
            punct_rate: PerGender { male: 2.0, female: 2.0 },
            mention_prob: 0.2,
            url_prob: 0.1,
            seed: 1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Invalid(String),
}

impl GenConfig {
    /// Female authors implied by `female_share`.
    pub fn female_authors(&self) -> usize {
        (self.female_share * self.n_authors as f64).round() as usize
    }

    pub fn check(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::Invalid(m));
        let probability = |p: f64| (0.0..=1.0).contains(&p);
        for (name, p) in [
            ("hi_ratio", self.hi_ratio),
            ("p_signal", self.p_signal),
            ("female_share", self.female_share),
            ("mention_prob", self.mention_prob),
            ("url_prob", self.url_prob),
        ] {
            if !probability(p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        for (name, rate) in [("hashtag_rate", self.hashtag_rate), ("punct_rate", self.punct_rate)] {
            if !(rate.male >= 0.0 && rate.female >= 0.0 && rate.male.is_finite() && rate.female.is_finite()) {
                return bad(format!("{name} must be non-negative"));
            }
        }
        if self.n_authors < 2 {
            return bad(format!("need at least 2 authors, got {}", self.n_authors));
        }
        if self.tweets_per_author == 0 {
            return bad("tweets_per_author must be at least 1".into());
        }
        if self.min_tokens > self.max_tokens {
            return bad(format!("min_tokens {} exceeds max_tokens {}", self.min_tokens, self.max_tokens));
        }
        if self.min_tokens + self.marker_slots == 0 {
            return bad("tweets would be empty".into());
        }
        let female = self.female_authors();
        if female == 0 || female == self.n_authors {
            return bad("female_share leaves only one gender among the authors".into());
        }
        Ok(())
    }
}

fn poisson(rate: f64, rng: &mut ChaCha8Rng) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    Poisson::new(rate).expect("positive finite rate").sample(rng) as usize
}

fn tweet_tokens(cfg: &GenConfig, gender: GenderLabel, rng: &mut ChaCha8Rng) -> Vec<AnnotatedToken> {
    let own = markers(gender);
    let other = markers(gender.other());
    let n = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
    let mut body: Vec<AnnotatedToken> = (0..n)
        .map(|_| {
            if rng.random_bool(cfg.hi_ratio) {
                AnnotatedToken::new(*HINDI_WORDS.choose(rng).expect("word list"), LanguageTag::Hi)
            } else {
                AnnotatedToken::new(*ENGLISH_WORDS.choose(rng).expect("word list"), LanguageTag::En)
            }
        })
        .collect();
    for _ in 0..cfg.marker_slots {
        let pool = if rng.random_bool(cfg.p_signal) { &own } else { &other };
        let marker = pool.choose(rng).expect("marker list");
        let at = rng.random_range(0..=body.len());
        body.insert(at, AnnotatedToken::new(marker.as_str(), LanguageTag::Hi));
    }
    for _ in 0..poisson(*cfg.punct_rate.get(gender), rng) {
        let at = rng.random_range(1..=body.len());
        body.insert(at, AnnotatedToken::new(*PUNCTUATION.choose(rng).expect("punctuation"), LanguageTag::O));
    }

    let mut tokens = Vec::with_capacity(body.len() + 4);
    if rng.random_bool(cfg.mention_prob) {
        tokens.push(AnnotatedToken::new(format!("@user{}", rng.random_range(0..500)), LanguageTag::O));
    }
    tokens.extend(body);
    for _ in 0..poisson(*cfg.hashtag_rate.get(gender), rng) {
        tokens.push(AnnotatedToken::new(*HASHTAGS.choose(rng).expect("hashtags"), LanguageTag::O));
    }
    if rng.random_bool(cfg.url_prob) {
        let code: String = (0..10).map(|_| rng.sample(rand::distr::Alphanumeric) as char).collect();
        tokens.push(AnnotatedToken::new(format!("https://t.co/{code}"), LanguageTag::O));
    }
    tokens
}

/// Deterministic in `cfg` (including its seed).
pub fn generate(cfg: &GenConfig) -> Result<Corpus, GenError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let female = cfg.female_authors();
    let mut genders: Vec<GenderLabel> =
        (0..cfg.n_authors).map(|a| if a < female { GenderLabel::Female } else { GenderLabel::Male }).collect();
    genders.shuffle(&mut rng);

    let mut tweets = Vec::with_capacity(cfg.n_authors * cfg.tweets_per_author);
    for (a, &gender) in genders.iter().enumerate() {
        let author_id = format!("u{a:04}");
        for t in 0..cfg.tweets_per_author {
            tweets.push(AnnotatedTweet {
                id: format!("{author_id}-{t:04}"),
                author_id: author_id.clone(),
                tokens: tweet_tokens(cfg, gender, &mut rng),
                gender,
            });
        }
    }
    Ok(Corpus::new(tweets))
}
