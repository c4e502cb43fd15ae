use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;

use cmgender_core::corpus::{
    compute_stats, ingest_raw, ingest_raw_lenient, parse_corpus, scan_corpus, serialize_corpus, validate as check_corpus,
    write_skeleton, Corpus, RawTweet,
};
use cmgender_core::datagen::{generate as generate_corpus, GenConfig};
use cmgender_core::evaluation::{
    cross_validate, make_grouped_folds, run_experiment_table, CvConfig, EvalError, FoldAssignment, ModelBundle,
    PipelineConfig, Training,
};
use cmgender_core::features::{FeatureConfig, FeatureSet};
use cmgender_core::learners::{default_grid, ClassifierKind, ForestParams, Gamma, ModelSpec, SvmParams};
use cmgender_core::preprocess::{split_for_annotation, SpellingMap};

use crate::args::{
    EvaluateArgs, ExperimentArgs, FeatureArgs, Format, GenerateArgs, GridArgs, IngestArgs, StatsArgs, TrainArgs,
    ValidateArgs,
};
use crate::render;
use crate::{Failure, Outcome};

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::input)
}

fn write_text(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).map_err(Failure::input),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn load_corpus(path: &Path) -> Result<Corpus, Failure> {
    let text = read_text(path)?;
    parse_corpus(text.as_bytes()).map_err(|e| Failure::input(anyhow!("{}:{}: {}", path.display(), e.line, e.kind)))
}

fn load_spelling(f: &FeatureArgs) -> Result<SpellingMap, Failure> {
    if f.no_spelling {
        return Ok(SpellingMap::empty());
    }
    match &f.spelling {
        Some(path) => SpellingMap::parse(&read_text(path)?)
            .map_err(|e| Failure::input(anyhow!("{}: {e}", path.display()))),
        None => Ok(SpellingMap::builtin()),
    }
}

fn pipeline_config(f: &FeatureArgs) -> Result<PipelineConfig, Failure> {
    let features = f.config();
    features.check().map_err(Failure::domain)?;
    Ok(PipelineConfig { featureset: f.featureset, features, partitioned: f.partitioned })
}

fn eval_failure(e: EvalError) -> Failure {
    match e {
        EvalError::TooFewAuthors { .. } | EvalError::InvalidK(_) => Failure::domain(anyhow!("{e} (see --folds)")),
        e => Failure::domain(e),
    }
}

fn unique<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn parse_gamma(s: &str) -> Result<Gamma, Failure> {
    if s.eq_ignore_ascii_case("1/d") {
        return Ok(Gamma::InverseDim);
    }
    s.parse().map(Gamma::Value).map_err(|_| Failure::input(anyhow!("invalid gamma {s:?} (expected a number or 1/D)")))
}

fn parse_depth(s: &str) -> Result<Option<usize>, Failure> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Failure::input(anyhow!("invalid depth {s:?} (expected an integer or none)")))
}

/// Default grid for `kind` with any listed values substituted.
fn training(kind: ClassifierKind, g: &GridArgs, seed: u64) -> Result<Training, Failure> {
    if g.no_grid {
        return Ok(Training::Fixed(ModelSpec::default_for(kind, seed)));
    }
    let base = default_grid(kind, seed);
    let specs: Vec<ModelSpec> = match kind {
        ClassifierKind::NaiveBayes => {
            let alphas = if g.nb_alpha.is_empty() {
                unique(base.iter().map(|s| match s {
                    ModelSpec::NaiveBayes { alpha } => *alpha,
                    _ => unreachable!(),
                }))
            } else {
                g.nb_alpha.clone()
            };
            alphas.into_iter().map(|alpha| ModelSpec::NaiveBayes { alpha }).collect()
        }
        ClassifierKind::Svm => {
            let params: Vec<SvmParams> = base
                .iter()
                .map(|s| match s {
                    ModelSpec::Svm(p) => *p,
                    _ => unreachable!(),
                })
                .collect();
            let cs = if g.svm_c.is_empty() { unique(params.iter().map(|p| p.c)) } else { g.svm_c.clone() };
            let gammas = if g.svm_gamma.is_empty() {
                unique(params.iter().map(|p| p.gamma))
            } else {
                g.svm_gamma.iter().map(|s| parse_gamma(s)).collect::<Result<_, _>>()?
            };
            let template = params[0];
            cs.iter()
                .flat_map(|&c| gammas.iter().map(move |&gamma| ModelSpec::Svm(SvmParams { c, gamma, ..template })))
                .collect()
        }
        ClassifierKind::RandomForest => {
            let params: Vec<ForestParams> = base
                .iter()
                .map(|s| match s {
                    ModelSpec::RandomForest(p) => *p,
                    _ => unreachable!(),
                })
                .collect();
            let trees = if g.rf_trees.is_empty() { unique(params.iter().map(|p| p.trees)) } else { g.rf_trees.clone() };
            let depths = if g.rf_depth.is_empty() {
                unique(params.iter().map(|p| p.max_depth))
            } else {
                g.rf_depth.iter().map(|s| parse_depth(s)).collect::<Result<_, _>>()?
            };
            let template = params[0];
            trees
                .iter()
                .flat_map(|&trees| {
                    depths.iter().map(move |&max_depth| ModelSpec::RandomForest(ForestParams { trees, max_depth, ..template }))
                })
                .collect()
        }
    };
    for spec in &specs {
        spec.check().map_err(Failure::domain)?;
    }
    if g.inner_folds < 2 && specs.len() > 1 {
        return Err(Failure::domain(anyhow!("inner grid search needs at least 2 folds (see --inner-folds)")));
    }
    Ok(if specs.len() == 1 { Training::Fixed(specs[0]) } else { Training::Grid(specs) })
}

#[derive(Serialize)]
struct Problem {
    line: Option<usize>,
    tweet_id: Option<String>,
    message: String,
}

pub fn validate(a: &ValidateArgs) -> Outcome {
    let text = read_text(&a.path)?;
    let scan = scan_corpus(text.as_bytes())
        .map_err(|e| Failure::input(anyhow!("{}:{}: {}", a.path.display(), e.line, e.kind)))?;
    let mut problems: Vec<Problem> = scan
        .problems
        .iter()
        .map(|p| Problem { line: Some(p.line), tweet_id: None, message: p.kind.to_string() })
        .collect();
    problems.extend(
        check_corpus(&scan.corpus)
            .into_iter()
            .map(|v| Problem { line: None, tweet_id: Some(v.tweet_id), message: v.rule }),
    );

    match a.format {
        Format::Human => {
            for p in &problems {
                match (&p.line, &p.tweet_id) {
                    (Some(line), _) => println!("{}:{line}: {}", a.path.display(), p.message),
                    (None, Some(id)) => println!("{}: tweet {id:?}: {}", a.path.display(), p.message),
                    (None, None) => println!("{}: {}", a.path.display(), p.message),
                }
            }
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct Report<'a> {
                path: String,
                tweets: usize,
                valid: bool,
                violations: &'a [Problem],
            }
            print_json(&Report {
                path: a.path.display().to_string(),
                tweets: scan.corpus.len(),
                valid: problems.is_empty(),
                violations: &problems,
            });
        }
    }
    if problems.is_empty() {
        eprintln!("{}: {} tweets, no violations", a.path.display(), scan.corpus.len());
        Ok(())
    } else {
        Err(Failure::domain(anyhow!("{} violation(s) in {}", problems.len(), a.path.display())))
    }
}

pub fn stats(a: &StatsArgs) -> Outcome {
    let corpus = load_corpus(&a.path)?;
    let s = compute_stats(&corpus);
    match a.format {
        Format::Human => print!("{}", render::stats_table(&s)),
        Format::Structured => print_json(&s),
    }
    Ok(())
}

/// Stable anonymous author id: FNV-1a of the user name.
fn anonymize(user: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in user.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("a{h:016x}")
}

pub fn ingest(a: &IngestArgs) -> Outcome {
    let text = read_text(&a.raw)?;
    let located = |e: &dyn std::fmt::Display| anyhow!("{}: {e}", a.raw.display());
    let tweets: Vec<RawTweet> = if a.skip_bad {
        let (tweets, skipped) = ingest_raw_lenient(text.as_bytes()).map_err(|e| Failure::input(located(&e)))?;
        for e in &skipped {
            eprintln!("warning: {}: {e} (skipped)", a.raw.display());
        }
        tweets
    } else {
        ingest_raw(text.as_bytes()).map_err(|e| Failure::input(located(&e)))?
    };
    let mut out = String::new();
    for t in &tweets {
        write_skeleton(&mut out, &t.id, &anonymize(&t.user), &split_for_annotation(&t.text)).expect("writing to a string");
        out.push('\n');
    }
    write_text(a.output.as_deref(), &out)?;
    if a.output.is_some() {
        eprintln!("{} skeleton records written", tweets.len());
    }
    Ok(())
}

/// Settings that determine a training run.
#[derive(Serialize)]
struct TrainFingerprint {
    featureset: FeatureSet,
    model: String,
    seed: u64,
    inner_folds: usize,
    partitioned: bool,
    thresholds: FeatureConfig,
}

pub fn train(a: &TrainArgs) -> Outcome {
    let corpus = load_corpus(&a.corpus)?;
    let spelling = load_spelling(&a.features)?;
    let cfg = pipeline_config(&a.features)?;
    let training = training(a.classifier, &a.grid, a.seed)?;
    let (bundle, summary) =
        ModelBundle::fit(&corpus, &spelling, &cfg, &training, a.grid.inner_folds, a.seed).map_err(eval_failure)?;
    write_text(Some(&a.output), &bundle.to_text())?;

    let fingerprint = TrainFingerprint {
        featureset: cfg.featureset,
        model: training.describe(),
        seed: a.seed,
        inner_folds: a.grid.inner_folds,
        partitioned: cfg.partitioned,
        thresholds: cfg.features.clone(),
    };
    match a.format {
        Format::Human => {
            let mut out = String::new();
            writeln!(out, "model written to {}", a.output.display()).unwrap();
            writeln!(out, "{}", render::settings(cfg.featureset, &fingerprint.model, a.seed, cfg.partitioned, false)).unwrap();
            writeln!(out, "{}", render::thresholds(&cfg.features)).unwrap();
            writeln!(out, "tweets {}  authors {}", summary.tweets, summary.authors).unwrap();
            writeln!(out, "features {} extracted, {} after selection", summary.raw_dim, summary.dim).unwrap();
            writeln!(out, "chosen {}", summary.chosen).unwrap();
            writeln!(out, "training accuracy {:.4}", summary.training_accuracy).unwrap();
            print!("{out}");
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct Report<'a> {
                fingerprint: TrainFingerprint,
                output: String,
                summary: &'a cmgender_core::evaluation::TrainSummary,
            }
            print_json(&Report { fingerprint, output: a.output.display().to_string(), summary: &summary });
        }
    }
    Ok(())
}

fn folds_for(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment, Failure> {
    make_grouped_folds(corpus, k, seed).map_err(eval_failure)
}

pub fn evaluate(a: &EvaluateArgs) -> Outcome {
    let corpus = load_corpus(&a.corpus)?;
    let spelling = load_spelling(&a.features)?;
    let cfg = CvConfig {
        pipeline: pipeline_config(&a.features)?,
        global_fit: a.global_fit,
        inner_folds: a.grid.inner_folds,
        seed: a.seed,
    };
    let training = training(a.classifier, &a.grid, a.seed)?;
    let folds = folds_for(&corpus, a.folds, a.seed)?;
    let report = cross_validate(&corpus, &spelling, &cfg, &training, &folds).map_err(eval_failure)?;
    match a.format {
        Format::Human => print!("{}", render::cv_report(&report)),
        Format::Structured => print_json(&report),
    }
    Ok(())
}

pub fn experiment(a: &ExperimentArgs) -> Outcome {
    let corpus = load_corpus(&a.corpus)?;
    let spelling = load_spelling(&a.features)?;
    let cfg = CvConfig {
        pipeline: pipeline_config(&a.features)?,
        global_fit: a.global_fit,
        inner_folds: a.grid.inner_folds,
        seed: a.seed,
    };
    let classifiers = unique(a.classifiers.iter().copied());
    let mut trainings = Vec::new();
    for &kind in &classifiers {
        trainings.push((kind, training(kind, &a.grid, a.seed)?));
    }
    let training_for =
        |kind: ClassifierKind| trainings.iter().find(|(k, _)| *k == kind).map(|(_, t)| t.clone()).expect("known classifier");
    let folds = folds_for(&corpus, a.folds, a.seed)?;
    let table =
        run_experiment_table(&corpus, &spelling, &cfg, &classifiers, training_for, &folds).map_err(eval_failure)?;

    #[derive(Serialize)]
    struct Fingerprint<'a> {
        seed: u64,
        folds: usize,
        inner_folds: usize,
        partitioned: bool,
        global_fit: bool,
        thresholds: &'a FeatureConfig,
        models: Vec<(ClassifierKind, String)>,
    }
    let fingerprint = Fingerprint {
        seed: a.seed,
        folds: folds.k,
        inner_folds: cfg.inner_folds,
        partitioned: cfg.pipeline.partitioned,
        global_fit: cfg.global_fit,
        thresholds: &cfg.pipeline.features,
        models: trainings.iter().map(|(k, t)| (*k, t.describe())).collect(),
    };
    match a.format {
        Format::Human => {
            println!(
                "seed {}  folds {}  inner folds {}  partitioned {}  global fit {}",
                fingerprint.seed, fingerprint.folds, fingerprint.inner_folds, fingerprint.partitioned, fingerprint.global_fit
            );
            println!("{}", render::thresholds(&cfg.pipeline.features));
            for (kind, model) in &fingerprint.models {
                println!("{}: {model}", kind.title());
            }
            println!();
            print!("{}", table.render());
        }
        Format::Structured => {
            #[derive(Serialize)]
            struct Report<'a, T> {
                fingerprint: Fingerprint<'a>,
                table: &'a T,
            }
            print_json(&Report { fingerprint, table: &table });
        }
    }
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Outcome {
    let mut cfg: GenConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_text(path)?)
            .with_context(|| format!("invalid generator config {}", path.display()))
            .map_err(Failure::input)?,
        None => GenConfig::default(),
    };
    macro_rules! set {
        ($($flag:expr => $field:expr),* $(,)?) => {
            $(if let Some(v) = $flag { $field = v; })*
        };
    }
    set! {
        a.authors => cfg.n_authors,
        a.tweets_per_author => cfg.tweets_per_author,
        a.signal => cfg.p_signal,
        a.marker_slots => cfg.marker_slots,
        a.female_share => cfg.female_share,
        a.hi_ratio => cfg.hi_ratio,
        a.hashtags_male => cfg.hashtag_rate.male,
        a.hashtags_female => cfg.hashtag_rate.female,
        a.punct_male => cfg.punct_rate.male,
        a.punct_female => cfg.punct_rate.female,
        a.seed => cfg.seed,
    }
    let corpus = generate_corpus(&cfg).map_err(Failure::domain)?;
    write_text(a.output.as_deref(), &serialize_corpus(&corpus))?;

    let authors = corpus.authors().len();
    let summary = match a.format {
        Format::Human => format!(
            "generated {} tweets from {authors} authors (seed {}, signal {})\n",
            corpus.len(),
            cfg.seed,
            cfg.p_signal
        ),
        Format::Structured => {
            #[derive(Serialize)]
            struct Report<'a> {
                config: &'a GenConfig,
                tweets: usize,
                authors: usize,
            }
            let mut s = serde_json::to_string_pretty(&Report { config: &cfg, tweets: corpus.len(), authors })
                .expect("reports serialize");
            s.push('\n');
            s
        }
    };
    // stdout carries the corpus when no output file is given
    if a.output.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}
