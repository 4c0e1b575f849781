//! Shallow learners implemented from scratch: CART trees, random forests,
//! k-nearest neighbors and an SMO-trained RBF support vector machine.
//!
//! All learners are binary over [`Label`]; wherever a vote or a decision
//! value ties, the result is [`Label::Normal`].

mod forest;
mod io;
mod knn;
mod matrix;
mod scaler;
mod svm;
mod tree;

use std::fmt;
use std::str::FromStr;

pub use forest::{train_forest, train_forest_with, ForestModel, ForestOptions};
pub use io::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use knn::{knn_predict, KnnModel};
pub use matrix::Matrix;
pub use scaler::{standardize, Scaler};
pub use svm::{default_gamma, dual_objective, train_svm_smo, SvmModel, SvmParams};
pub use tree::{train_tree, Node, TreeModel};

use crate::error::{Error, Result};
use crate::ingestion::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Dt,
    Rf,
    Knn,
    Svm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Dt, Variant::Knn, Variant::Rf, Variant::Svm];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dt => "dt",
            Variant::Rf => "rf",
            Variant::Knn => "knn",
            Variant::Svm => "svm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Dt => "DT",
            Variant::Rf => "RF",
            Variant::Knn => "kNN",
            Variant::Svm => "SVM",
        }
    }

    /// Distance and kernel methods are fitted on standardized features.
    pub fn needs_scaling(self) -> bool {
        matches!(self, Variant::Knn | Variant::Svm)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dt" => Ok(Variant::Dt),
            "rf" => Ok(Variant::Rf),
            "knn" => Ok(Variant::Knn),
            "svm" => Ok(Variant::Svm),
            other => Err(Error::Config(format!(
                "unknown classifier `{other}` (known: dt, knn, rf, svm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub variant: Variant,
    /// Forest size.
    pub trees: usize,
    /// Neighbors for kNN.
    pub k: usize,
    /// SVM box constraint.
    pub c: f64,
    /// RBF width; `None` means `1 / (F * var(X))` on the training data.
    pub gamma: Option<f64>,
    /// SMO stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// SMO pair-update cap; `None` means `max(10_000_000, 100 * n)`.
    pub max_iter: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            trees: 100,
            k: 3,
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_iter: None,
            max_depth: None,
            min_leaf: 1,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        if self.k == 0 || self.k % 2 == 0 {
            return Err(Error::Config(format!("kNN k must be odd and >= 1, got {}", self.k)));
        }
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("SVM C must be > 0, got {}", self.c)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::Config(format!("SVM gamma must be > 0, got {g}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("SMO tolerance must be > 0".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained model of any variant.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tree(TreeModel),
    Forest(ForestModel),
    Knn(KnnModel),
    Svm(SvmModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::Tree(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Svm(m) => m.n_features(),
        }
    }

    fn predict_unchecked(&self, x: &Matrix) -> Vec<Label> {
        match self {
            Model::Tree(m) => (0..x.rows()).map(|i| m.predict_row(x.row(i))).collect(),
            Model::Forest(m) => (0..x.rows()).map(|i| m.predict_row(x.row(i))).collect(),
            Model::Knn(m) => m.predict_matrix(x),
            Model::Svm(m) => (0..x.rows()).map(|i| m.predict_row(x.row(i))).collect(),
        }
    }
}

/// Applies the model's decision rule to every row of `x`.
pub fn predict(model: &Model, x: &Matrix) -> Result<Vec<Label>> {
    if x.cols() != model.n_features() {
        return Err(Error::Shape(format!(
            "model expects {} features, got {}",
            model.n_features(),
            x.cols()
        )));
    }
    Ok(model.predict_unchecked(x))
}

/// Fits the raw learner (no feature scaling).
pub fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[Label]) -> Result<Model> {
    spec.validate()?;
    if x.rows() != y.len() {
        return Err(Error::Shape(format!("{} rows but {} labels", x.rows(), y.len())));
    }
    match spec.variant {
        Variant::Dt => {
            let mut rng = crate::rng::SplitMix64::new(spec.seed);
            train_tree(x, y, spec, None, &mut rng).map(Model::Tree)
        }
        Variant::Rf => train_forest(x, y, spec).map(Model::Forest),
        Variant::Knn => KnnModel::fit(x, y, spec.k).map(Model::Knn),
        Variant::Svm => {
            let signs: Vec<f64> = y.iter().map(|&l| label_sign(l)).collect();
            let params = SvmParams::from_spec(spec, x);
            train_svm_smo(x, &signs, &params).map(Model::Svm)
        }
    }
}

/// `Normal → +1`, `Abnormal → −1`.
pub fn label_sign(label: Label) -> f64 {
    match label {
        Label::Normal => 1.0,
        Label::Abnormal => -1.0,
    }
}

/// Learner plus the standardization it was trained under, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub scaler: Option<Scaler>,
    pub model: Model,
}

impl Classifier {
    /// Fits a scaler first when the variant needs one.
    pub fn fit(spec: &ClassifierSpec, x: &Matrix, y: &[Label]) -> Result<Self> {
        if spec.variant.needs_scaling() {
            let scaler = Scaler::fit(x)?;
            let xs = scaler.transform(x)?;
            let model = fit(spec, &xs, y)?;
            Ok(Self {
                scaler: Some(scaler),
                model,
            })
        } else {
            Ok(Self {
                scaler: None,
                model: fit(spec, x, y)?,
            })
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<Label>> {
        match &self.scaler {
            Some(s) => predict(&self.model, &s.transform(x)?),
            None => predict(&self.model, x),
        }
    }

    /// False only for an SVM whose solver hit its iteration cap.
    pub fn converged(&self) -> bool {
        match &self.model {
            Model::Svm(m) => m.converged,
            _ => true,
        }
    }
}

/// Majority label; ties go to Normal.
pub(crate) fn majority(normal: usize, abnormal: usize) -> Label {
    if abnormal > normal {
        Label::Abnormal
    } else {
        Label::Normal
    }
}
