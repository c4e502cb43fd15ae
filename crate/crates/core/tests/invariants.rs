use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use cmgender_core::corpus::{compute_stats, AnnotatedToken, AnnotatedTweet, Corpus, GenderLabel, LanguageTag};
use cmgender_core::datagen::{generate, GenConfig};
use cmgender_core::evaluation::{group_folds, FittedPipeline, PipelineConfig};
use cmgender_core::features::{chi_square_select, contingency_tables, FeatureMatrix, FeatureSet, SparseVector};
use cmgender_core::learners::{train_naive_bayes, train_random_forest, ForestParams, Mtry};
use cmgender_core::preprocess::{decompose_hashtag, normalize_spelling, preprocess_tweet, SpellingMap};

fn label() -> impl Strategy<Value = GenderLabel> {
    prop_oneof![Just(GenderLabel::Male), Just(GenderLabel::Female)]
}

fn lang() -> impl Strategy<Value = LanguageTag> {
    prop_oneof![Just(LanguageTag::Hi), Just(LanguageTag::En), Just(LanguageTag::O)]
}

/// Count matrix with both classes present.
fn matrix() -> impl Strategy<Value = (FeatureMatrix, usize)> {
    (2usize..30, 1usize..40).prop_flat_map(|(n, dim)| {
        (
            prop::collection::vec(prop::collection::vec(prop_oneof![3 => Just(0.0), 1 => 1.0..4.0f64], dim), n),
            prop::collection::vec(label(), n - 2),
            1..=dim,
        )
            .prop_map(move |(dense, mut labels, k)| {
                labels.extend([GenderLabel::Male, GenderLabel::Female]);
                let rows = dense.iter().map(|r| SparseVector::from_dense(r)).collect();
                (FeatureMatrix::from_rows(dim, rows, labels).unwrap(), k)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stats_partition_the_tokens(
        tweets in prop::collection::vec((prop::collection::vec(("[a-z#!?.]{1,6}", lang()), 0..8), label()), 0..15)
    ) {
        let corpus = Corpus::new(
            tweets
                .into_iter()
                .enumerate()
                .map(|(i, (tokens, gender))| AnnotatedTweet {
                    id: i.to_string(),
                    author_id: format!("u{}", i % 3),
                    tokens: tokens.into_iter().map(|(s, l)| AnnotatedToken::new(s, l)).collect(),
                    gender,
                })
                .collect(),
        );
        let s = compute_stats(&corpus);
        prop_assert_eq!(s.words_hi + s.words_en + s.words_other, s.total_words);
        prop_assert_eq!(s.male_tweets + s.female_tweets, s.total_tweets);
        prop_assert_eq!(s.words.male + s.words.female, s.total_words);
        prop_assert!(s.hashtags.male + s.punctuation.male <= s.words.male);
        prop_assert_eq!(s.avg_words_per_gender.male.is_some(), s.male_tweets > 0);
    }

    #[test]
    fn selection_keeps_the_top_supported_columns((m, k) in matrix()) {
        let tables = contingency_tables(&m);
        let mask = chi_square_select(&m, k).unwrap();
        let supported: Vec<usize> = (0..m.dim()).filter(|&j| tables[j].is_supported()).collect();
        prop_assert_eq!(mask.len(), k.min(supported.len()));
        prop_assert!(mask.indices.windows(2).all(|w| w[0] < w[1]));
        let kept: BTreeSet<usize> = mask.indices.iter().copied().collect();
        let floor = kept.iter().map(|&j| mask.scores[j]).fold(f64::INFINITY, f64::min);
        for &j in supported.iter().filter(|j| !kept.contains(j)) {
            prop_assert!(mask.scores[j] <= floor);
        }
        for t in &tables {
            prop_assert_eq!((t.a + t.c + t.b + t.d) as usize, m.len());
        }
    }

    #[test]
    fn naive_bayes_likelihoods_are_distributions((m, _) in matrix(), alpha in 0.05..3.0f64) {
        let model = train_naive_bayes(&m, alpha).unwrap();
        for class in &model.log_likelihood {
            let total: f64 = class.iter().map(|l| l.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
        let priors: f64 = model.log_prior.iter().map(|l| l.exp()).sum();
        prop_assert!((priors - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_full_tree_fits_distinct_rows((m, _) in matrix()) {
        let params = ForestParams { trees: 1, max_depth: None, mtry: Mtry::All, bootstrap: false, seed: 0 };
        let forest = train_random_forest(&m, &params).unwrap();
        let mut by_row: BTreeMap<Vec<u64>, BTreeSet<GenderLabel>> = BTreeMap::new();
        for (row, l) in m.rows.iter().zip(&m.labels) {
            by_row.entry(row.to_dense().iter().map(|v| v.to_bits()).collect()).or_default().insert(*l);
        }
        for (row, l) in m.rows.iter().zip(&m.labels) {
            let key: Vec<u64> = row.to_dense().iter().map(|v| v.to_bits()).collect();
            if by_row[&key].len() == 1 {
                prop_assert_eq!(forest.predict(row).unwrap(), *l);
            }
        }
    }

    #[test]
    fn sparse_distance_matches_dense(
        a in prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], 1..30),
        seed in any::<u64>(),
    ) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| if (seed >> (i % 64)) & 1 == 1 { 0.0 } else { v * 0.5 + 1.0 }).collect();
        let (x, y) = (SparseVector::from_dense(&a), SparseVector::from_dense(&b));
        let dense: f64 = a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum();
        prop_assert!((x.squared_distance(&y) - dense).abs() < 1e-9);
        prop_assert!((x.squared_distance(&y) - y.squared_distance(&x)).abs() < 1e-12);
        prop_assert_eq!(x.to_dense(), a);
    }

    #[test]
    fn grouped_folds_confine_and_balance_authors(
        authors in prop::collection::vec(0u8..20, 1..120),
        k in 2usize..8,
        seed in any::<u64>(),
    ) {
        let names: Vec<String> = authors.iter().map(|a| format!("author{a}")).collect();
        let distinct: BTreeSet<&String> = names.iter().collect();
        match group_folds(&names, k, seed) {
            Err(_) => prop_assert!(distinct.len() < k),
            Ok(folds) => {
                for (name, fold) in names.iter().zip(&folds.fold_of) {
                    prop_assert_eq!(folds.author_fold[name], *fold);
                }
                let per = folds.authors_per_fold();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
                prop_assert_eq!(per.iter().sum::<usize>(), distinct.len());
            }
        }
    }

    #[test]
    fn builtin_spelling_is_idempotent(tokens in prop::collection::vec("[a-z]{1,6}|dis|plz|pls|bcoz|nhi|accha", 0..12)) {
        let map = SpellingMap::builtin();
        let once = normalize_spelling(&tokens, &map);
        prop_assert_eq!(normalize_spelling(&once, &map), once);
    }

    #[test]
    fn hashtag_parts_are_lowercase_pieces(tag in "[A-Za-z0-9_]{1,16}") {
        let parts = decompose_hashtag(&tag);
        let letters: String = tag.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        prop_assert_eq!(parts.concat(), if letters.is_empty() { tag.to_lowercase() } else { letters });
        prop_assert!(parts.iter().all(|p| !p.is_empty() && *p == p.to_lowercase()));
    }
}

#[test]
fn pipeline_transform_reproduces_training_matrix() {
    let corpus = generate(&GenConfig { n_authors: 10, tweets_per_author: 8, ..GenConfig::default() }).unwrap();
    let spelling = SpellingMap::builtin();
    let tweets: Vec<_> = corpus.tweets.iter().map(|t| preprocess_tweet(t, &spelling)).collect();
    for partitioned in [false, true] {
        let cfg = PipelineConfig { partitioned, ..PipelineConfig::new(FeatureSet::All) };
        let (pipeline, m) = FittedPipeline::fit(&tweets, &cfg).unwrap();
        assert_eq!(pipeline.transform(&tweets).unwrap(), m);
        assert!(m.dim() <= cfg.features.select_k);
    }
}
