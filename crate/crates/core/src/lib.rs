//! Gender prediction for English-Hindi code-mixed tweets.
//!
//! The pipeline runs annotated tweets ([`corpus`]) through token
//! normalization ([`preprocess`]), builds character n-gram, word n-gram,
//! reference-token and hashtag features with chi-square selection
//! ([`features`]), trains one of three classifiers ([`learners`]) and scores
//! them with author-grouped cross-validation ([`evaluation`]). [`datagen`]
//! produces synthetic corpora with a planted gender signal.

pub mod corpus;
pub mod preprocess;
pub mod features;
pub mod learners;
pub mod evaluation;
pub mod datagen;
