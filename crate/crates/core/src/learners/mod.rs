//! Naive Bayes, RBF-kernel SVM and random forest behind one train/predict
//! facade, plus grouped grid search over hyperparameters.
//!
//! Labels map to signs with male = +1 and female = −1; every tie in every
//! learner resolves to male.

pub mod forest;
pub mod grid;
pub mod kernel;
pub mod naive_bayes;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::GenderLabel;
use crate::features::{FeatureMatrix, SparseVector};

pub use forest::{train_random_forest, DecisionTree, ForestModel, Node};
pub use grid::{grid_search, grid_search_with_distances, GridResult, GridRow};
pub use kernel::{rbf_kernel, DistanceMatrix, KernelCache};
pub use naive_bayes::{train_naive_bayes, NaiveBayesModel};
pub use svm::{
    decisions_with_distances, dual_objective, solve_smo, train_svm_rbf, train_svm_with_distances, SmoSolution, SvmModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("dimension mismatch: model expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("training data is empty")]
    Empty,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("model file: {0}")]
    Format(String),
}

pub(crate) fn require_both_classes(m: &FeatureMatrix) -> Result<(), LearnError> {
    if m.is_empty() {
        return Err(LearnError::Empty);
    }
    match m.class_counts() {
        (0, _) | (_, 0) => Err(LearnError::SingleClass),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    NaiveBayes,
    Svm,
    RandomForest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::NaiveBayes, ClassifierKind::Svm, ClassifierKind::RandomForest];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::Svm => "svm",
            ClassifierKind::RandomForest => "rf",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ClassifierKind::NaiveBayes => "Naive Bayes",
            ClassifierKind::Svm => "Kernel SVM",
            ClassifierKind::RandomForest => "Random Forest",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nb" | "naive-bayes" => Ok(ClassifierKind::NaiveBayes),
            "svm" | "kernel-svm" => Ok(ClassifierKind::Svm),
            "rf" | "random-forest" => Ok(ClassifierKind::RandomForest),
            _ => Err(format!("unknown classifier {s:?} (expected nb, svm or rf)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gamma {
    Value(f64),
    /// 1 / input dimension, resolved at training time.
    InverseDim,
}

impl Gamma {
    pub fn resolve(self, dim: usize) -> f64 {
        match self {
            Gamma::Value(g) => g,
            Gamma::InverseDim => 1.0 / dim.max(1) as f64,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Value(g) => write!(f, "{g}"),
            Gamma::InverseDim => f.write_str("1/D"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: Gamma,
    pub tol: f64,
    /// Iteration cap in units of N pair updates; `None` means 10·N.
    pub max_passes: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, gamma: Gamma::InverseDim, tol: 1e-3, max_passes: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mtry {
    /// ⌈√D⌉
    Sqrt,
    Fixed(usize),
    All,
}

impl Mtry {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            Mtry::Sqrt => (dim as f64).sqrt().ceil() as usize,
            Mtry::Fixed(k) => k,
            Mtry::All => dim,
        }
    }
}

impl fmt::Display for Mtry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mtry::Sqrt => f.write_str("sqrt"),
            Mtry::Fixed(k) => write!(f, "{k}"),
            Mtry::All => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub mtry: Mtry,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { trees: 100, max_depth: None, mtry: Mtry::Sqrt, bootstrap: true, seed: 0 }
    }
}

/// A classifier kind with concrete hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    NaiveBayes { alpha: f64 },
    Svm(SvmParams),
    RandomForest(ForestParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelSpec::NaiveBayes { .. } => ClassifierKind::NaiveBayes,
            ModelSpec::Svm(_) => ClassifierKind::Svm,
            ModelSpec::RandomForest(_) => ClassifierKind::RandomForest,
        }
    }

    /// Hyperparameters used when grid search is switched off.
    pub fn default_for(kind: ClassifierKind, seed: u64) -> ModelSpec {
        match kind {
            ClassifierKind::NaiveBayes => ModelSpec::NaiveBayes { alpha: 1.0 },
            ClassifierKind::Svm => ModelSpec::Svm(SvmParams::default()),
            ClassifierKind::RandomForest => ModelSpec::RandomForest(ForestParams { seed, ..ForestParams::default() }),
        }
    }

    pub fn check(&self) -> Result<(), LearnError> {
        let bad = |msg: String| Err(LearnError::InvalidHyperparameter(msg));
        let positive = |x: f64| x > 0.0 && x.is_finite();
        match *self {
            ModelSpec::NaiveBayes { alpha } if !positive(alpha) => bad(format!("alpha must be positive, got {alpha}")),
            ModelSpec::Svm(p) if !positive(p.c) => bad(format!("C must be positive, got {}", p.c)),
            ModelSpec::Svm(SvmParams { gamma: Gamma::Value(g), .. }) if !positive(g) => {
                bad(format!("gamma must be positive, got {g}"))
            }
            ModelSpec::Svm(p) if !positive(p.tol) => bad(format!("tolerance must be positive, got {}", p.tol)),
            ModelSpec::Svm(SvmParams { max_passes: Some(0), .. }) => bad("max passes must be at least 1".into()),
            ModelSpec::RandomForest(p) if p.trees == 0 => bad("tree count must be at least 1".into()),
            ModelSpec::RandomForest(ForestParams { mtry: Mtry::Fixed(0), .. }) => bad("mtry must be at least 1".into()),
            ModelSpec::RandomForest(ForestParams { max_depth: Some(0), .. }) => bad("max depth must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::NaiveBayes { alpha } => write!(f, "nb(alpha={alpha})"),
            ModelSpec::Svm(p) => write!(f, "svm(C={}, gamma={})", p.c, p.gamma),
            ModelSpec::RandomForest(p) => {
                let depth = p.max_depth.map_or("none".to_string(), |d| d.to_string());
                write!(f, "rf(trees={}, depth={depth}, mtry={})", p.trees, p.mtry)
            }
        }
    }
}

/// Candidate lists searched when no explicit grid is given.
pub fn default_grid(kind: ClassifierKind, seed: u64) -> Vec<ModelSpec> {
    match kind {
        ClassifierKind::NaiveBayes => [0.1, 0.5, 1.0].into_iter().map(|alpha| ModelSpec::NaiveBayes { alpha }).collect(),
        ClassifierKind::Svm => {
            let gammas = [Gamma::Value(0.001), Gamma::Value(0.01), Gamma::Value(0.1), Gamma::InverseDim];
            [0.1, 1.0, 10.0, 100.0]
                .into_iter()
                .flat_map(|c| gammas.map(|gamma| ModelSpec::Svm(SvmParams { c, gamma, ..SvmParams::default() })))
                .collect()
        }
        ClassifierKind::RandomForest => [None, Some(20)]
            .into_iter()
            .map(|max_depth| ModelSpec::RandomForest(ForestParams { max_depth, seed, ..ForestParams::default() }))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainedModel {
    NaiveBayes(NaiveBayesModel),
    Svm(SvmModel),
    RandomForest(ForestModel),
}

pub fn train(spec: &ModelSpec, m: &FeatureMatrix) -> Result<TrainedModel, LearnError> {
    spec.check()?;
    Ok(match spec {
        ModelSpec::NaiveBayes { alpha } => TrainedModel::NaiveBayes(train_naive_bayes(m, *alpha)?),
        ModelSpec::Svm(p) => TrainedModel::Svm(train_svm_rbf(m, p)?),
        ModelSpec::RandomForest(p) => TrainedModel::RandomForest(train_random_forest(m, p)?),
    })
}

const MODEL_FORMAT: &str = "cmgender-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    /// Always +1: male is the positive class.
    male_sign: i8,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            TrainedModel::Svm(_) => ClassifierKind::Svm,
            TrainedModel::RandomForest(_) => ClassifierKind::RandomForest,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.dim,
            TrainedModel::Svm(m) => m.dim,
            TrainedModel::RandomForest(m) => m.dim,
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<GenderLabel, LearnError> {
        match self {
            TrainedModel::NaiveBayes(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::RandomForest(m) => m.predict(x),
        }
    }

    pub fn to_json(&self) -> String {
        let env = Envelope { format: MODEL_FORMAT.into(), version: MODEL_VERSION, male_sign: 1, model: self.clone() };
        serde_json::to_string(&env).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, LearnError> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| LearnError::Format(e.to_string()))?;
        if env.format != MODEL_FORMAT {
            return Err(LearnError::Format(format!("expected format {MODEL_FORMAT:?}, found {:?}", env.format)));
        }
        if env.version != MODEL_VERSION {
            return Err(LearnError::Format(format!("unsupported model version {}", env.version)));
        }
        if env.male_sign != 1 {
            return Err(LearnError::Format("label mapping must have male = +1".into()));
        }
        Ok(env.model)
    }
}

/// Fraction of rows whose prediction matches the label.
pub fn accuracy(model: &TrainedModel, m: &FeatureMatrix) -> Result<f64, LearnError> {
    if m.is_empty() {
        return Err(LearnError::Empty);
    }
    let mut correct = 0usize;
    for (x, y) in m.rows.iter().zip(&m.labels) {
        correct += usize::from(model.predict(x)? == *y);
    }
    Ok(correct as f64 / m.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use GenderLabel::{Female, Male};

    fn toy() -> FeatureMatrix {
        let rows = [[3.0, 0.0, 1.0], [2.0, 1.0, 0.0], [0.0, 2.0, 3.0], [1.0, 0.0, 4.0], [4.0, 1.0, 0.0], [0.0, 3.0, 2.0]];
        FeatureMatrix::from_rows(
            3,
            rows.iter().map(|r| SparseVector::from_dense(r)).collect(),
            vec![Male, Male, Female, Female, Male, Female],
        )
        .unwrap()
    }

    #[test]
    fn default_grid_sizes() {
        assert_eq!(default_grid(ClassifierKind::NaiveBayes, 0).len(), 3);
        assert_eq!(default_grid(ClassifierKind::Svm, 0).len(), 16);
        assert_eq!(default_grid(ClassifierKind::RandomForest, 0).len(), 2);
        for kind in ClassifierKind::ALL {
            assert!(default_grid(kind, 3).iter().all(|s| s.kind() == kind && s.check().is_ok()));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let bad = [
            ModelSpec::NaiveBayes { alpha: 0.0 },
            ModelSpec::Svm(SvmParams { c: -1.0, ..Default::default() }),
            ModelSpec::Svm(SvmParams { gamma: Gamma::Value(0.0), ..Default::default() }),
            ModelSpec::RandomForest(ForestParams { trees: 0, ..Default::default() }),
        ];
        for spec in bad {
            assert!(matches!(train(&spec, &toy()), Err(LearnError::InvalidHyperparameter(_))), "{spec}");
        }
    }

    #[test]
    fn model_files_round_trip() {
        let m = toy();
        let probe: Vec<SparseVector> =
            (0..20).map(|i| SparseVector::from_dense(&[(i % 5) as f64, (i % 3) as f64, (i % 4) as f64])).collect();
        for kind in ClassifierKind::ALL {
            let spec = match ModelSpec::default_for(kind, 5) {
                ModelSpec::RandomForest(p) => ModelSpec::RandomForest(ForestParams { trees: 7, ..p }),
                s => s,
            };
            let model = train(&spec, &m).unwrap();
            let back = TrainedModel::from_json(&model.to_json()).unwrap();
            assert_eq!(back, model);
            for x in &probe {
                assert_eq!(back.predict(x).unwrap(), model.predict(x).unwrap());
            }
        }
    }

    #[test]
    fn model_file_label_mapping_is_checked() {
        let model = train(&ModelSpec::NaiveBayes { alpha: 1.0 }, &toy()).unwrap();
        let flipped = model.to_json().replace("\"male_sign\":1", "\"male_sign\":-1");
        assert!(TrainedModel::from_json(&flipped).is_err());
        assert!(TrainedModel::from_json("{}").is_err());
    }

    #[test]
    fn predict_checks_dimension() {
        for kind in ClassifierKind::ALL {
            let model = train(&ModelSpec::default_for(kind, 0), &toy()).unwrap();
            assert_eq!(model.dim(), 3);
            assert!(matches!(
                model.predict(&SparseVector::zeros(4)),
                Err(LearnError::DimensionMismatch { expected: 3, found: 4 })
            ));
        }
    }

    #[test]
    fn kinds_parse() {
        for kind in ClassifierKind::ALL {
            assert_eq!(kind.as_str().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!("knn".parse::<ClassifierKind>().is_err());
    }
}
