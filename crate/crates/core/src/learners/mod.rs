//! Level-0 generalizers that emit class probabilities.
//!
//! All three learners are also used as level-1 generalizers once the
//! cross-validated predictions have been turned into a [`Dataset`].

mod knn;
mod nb;
mod tree;

use serde::{Deserialize, Serialize};

pub use knn::{train_knn, KnnModel, KnnParams};
pub use nb::{train_nb, NaiveBayesModel, NB_VARIANCE_FLOOR};
pub use tree::{add_errors, leaf_probs, train_tree, TreeModel, TreeParams};

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};

/// Tolerance on the unit-sum invariant of [`ProbVector`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// A model's per-class probability output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates non-negativity and unit sum.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("probability vector must be non-empty"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Numerical(format!("invalid probabilities {probs:?}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::Numerical(format!("probabilities sum to {sum}")));
        }
        Ok(ProbVector(probs))
    }

    /// Normalizes non-negative weights; all-zero weights give the uniform vector.
    pub fn from_weights(mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            for w in &mut weights {
                *w /= sum;
            }
            ProbVector(weights)
        } else {
            ProbVector::uniform(weights.len())
        }
    }

    /// Wraps values already known to satisfy the invariants.
    pub(crate) fn from_raw(probs: Vec<f64>) -> Self {
        ProbVector(probs)
    }

    pub fn one_hot(class: usize, num_classes: usize) -> Self {
        let mut p = vec![0.0; num_classes];
        p[class] = 1.0;
        ProbVector(p)
    }

    pub fn uniform(num_classes: usize) -> Self {
        ProbVector(vec![1.0 / num_classes as f64; num_classes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }
}

/// Index of the largest value, ties to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Predicted class of a probability vector.
pub fn predict_class(probs: &ProbVector) -> usize {
    argmax(probs.as_slice())
}

/// A trained model producing class probabilities.
pub trait Classifier {
    fn num_classes(&self) -> usize;

    fn class_probs(&self, x: &Instance) -> ProbVector;

    fn predict(&self, x: &Instance) -> usize {
        predict_class(&self.class_probs(x))
    }
}

/// Something that can induce a [`Classifier`] from a dataset.
pub trait Learner: Sync {
    type Model: Classifier + Send + Sync;

    fn fit(&self, train: &Dataset) -> Result<Self::Model>;
}

/// The built-in learners, in serializable form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LearnerSpec {
    Tree(TreeParams),
    NaiveBayes,
    Knn(KnnParams),
}

impl LearnerSpec {
    /// Decision tree, naive Bayes and 3-nearest-neighbor.
    pub fn default_trio() -> Vec<LearnerSpec> {
        vec![
            LearnerSpec::Tree(TreeParams::default()),
            LearnerSpec::NaiveBayes,
            LearnerSpec::Knn(KnnParams::default()),
        ]
    }

    pub fn name(&self) -> String {
        match self {
            LearnerSpec::Tree(_) => "tree".into(),
            LearnerSpec::NaiveBayes => "nb".into(),
            LearnerSpec::Knn(k) => format!("knn:p={}", k.p),
        }
    }
}

impl Learner for LearnerSpec {
    type Model = TrainedModel;

    fn fit(&self, train: &Dataset) -> Result<TrainedModel> {
        Ok(match self {
            LearnerSpec::Tree(params) => TrainedModel::Tree(train_tree(train, params)?),
            LearnerSpec::NaiveBayes => TrainedModel::NaiveBayes(train_nb(train)?),
            LearnerSpec::Knn(params) => TrainedModel::Knn(train_knn(train, params)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Tree(TreeModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
}

impl Classifier for TrainedModel {
    fn num_classes(&self) -> usize {
        match self {
            TrainedModel::Tree(m) => m.num_classes(),
            TrainedModel::NaiveBayes(m) => m.num_classes(),
            TrainedModel::Knn(m) => m.num_classes(),
        }
    }

    fn class_probs(&self, x: &Instance) -> ProbVector {
        match self {
            TrainedModel::Tree(m) => m.class_probs(x),
            TrainedModel::NaiveBayes(m) => m.class_probs(x),
            TrainedModel::Knn(m) => m.class_probs(x),
        }
    }
}
