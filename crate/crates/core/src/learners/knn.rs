//! Distance-weighted p-nearest-neighbor classifier.
//!
//! Per-attribute differences: continuous attributes are min-max scaled with
//! ranges from the training data (query values clamped into range);
//! nominal attributes use the modified value-difference metric with exponent
//! one, halved so that each attribute contributes at most 1. The overall
//! distance is the Euclidean norm of these differences. A missing cell
//! contributes the maximal difference 1.

use serde::{Deserialize, Serialize};

use super::{Classifier, ProbVector};
use crate::data::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub p: usize,
    /// Min-max scale continuous attributes. Disabled for level-1 probability features.
    pub scale: bool,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { p: 3, scale: true }
    }
}

impl KnnParams {
    pub fn with_p(p: usize) -> Self {
        KnnParams { p, ..KnnParams::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum AttrMetric {
    Continuous {
        min: f64,
        max: f64,
    },
    Nominal {
        /// `conditional[value][class]` = P(class | value) on the training data.
        conditional: Vec<Vec<f64>>,
        /// Halved MVDM distance for every value pair, row-major.
        pair: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    p: usize,
    scale: bool,
    num_classes: usize,
    metrics: Vec<AttrMetric>,
    stored: Vec<Instance>,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn train_knn(train: &Dataset, params: &KnnParams) -> Result<KnnModel> {
    if params.p < 1 {
        return Err(Error::param("neighbor count p must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = train.num_classes();
    let priors: Vec<f64> = {
        let n = train.len() as f64;
        train.class_counts().iter().map(|&c| c as f64 / n).collect()
    };
    let metrics = train
        .schema()
        .attributes()
        .iter()
        .enumerate()
        .map(|(a, attr)| match &attr.kind {
            AttributeKind::Continuous => {
                let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
                for inst in train.instances() {
                    if let Value::Continuous(x) = inst.values[a] {
                        min = min.min(x);
                        max = max.max(x);
                    }
                }
                if min > max {
                    (min, max) = (0.0, 0.0);
                }
                AttrMetric::Continuous { min, max }
            }
            kind => {
                let arity = kind.arity();
                let mut counts = vec![vec![0usize; classes]; arity];
                for inst in train.instances() {
                    if let Value::Nominal(v) = inst.values[a] {
                        counts[v][inst.class.expect("labeled")] += 1;
                    }
                }
                let conditional: Vec<Vec<f64>> = counts
                    .iter()
                    .map(|row| {
                        let total: usize = row.iter().sum();
                        if total == 0 {
                            priors.clone()
                        } else {
                            row.iter().map(|&c| c as f64 / total as f64).collect()
                        }
                    })
                    .collect();
                let mut pair = vec![0.0; arity * arity];
                for i in 0..arity {
                    for j in 0..arity {
                        pair[i * arity + j] = 0.5 * l1(&conditional[i], &conditional[j]);
                    }
                }
                AttrMetric::Nominal { conditional, pair }
            }
        })
        .collect();
    Ok(KnnModel {
        p: params.p,
        scale: params.scale,
        num_classes: classes,
        metrics,
        stored: train.instances().to_vec(),
    })
}

impl KnnModel {
    pub fn p(&self) -> usize {
        self.p
    }

    /// P(class | value) row of a nominal attribute.
    pub fn conditional(&self, attribute: usize, value: usize) -> Option<&[f64]> {
        match &self.metrics[attribute] {
            AttrMetric::Nominal { conditional, .. } => conditional.get(value).map(Vec::as_slice),
            AttrMetric::Continuous { .. } => None,
        }
    }

    /// Min-max scaling of a continuous value, clamped into [0, 1].
    pub fn scaled(&self, attribute: usize, x: f64) -> Option<f64> {
        match self.metrics[attribute] {
            AttrMetric::Continuous { min, max } => Some(if max > min {
                ((x - min) / (max - min)).clamp(0.0, 1.0)
            } else {
                0.0
            }),
            AttrMetric::Nominal { .. } => None,
        }
    }

    /// Unhalved value-difference distance `Σ_c |P(c|v1) − P(c|v2)|`.
    pub fn mvdm_distance(&self, attribute: usize, v1: usize, v2: usize) -> Result<f64> {
        match &self.metrics[attribute] {
            AttrMetric::Nominal { conditional, .. } => {
                let (Some(a), Some(b)) = (conditional.get(v1), conditional.get(v2)) else {
                    return Err(Error::param(format!("value index out of range for attribute {attribute}")));
                };
                Ok(l1(a, b))
            }
            AttrMetric::Continuous { .. } => Err(Error::param(format!(
                "attribute {attribute} is continuous; MVDM applies to nominal attributes"
            ))),
        }
    }

    fn attribute_difference(&self, attribute: usize, a: &Value, b: &Value) -> f64 {
        match (&self.metrics[attribute], a, b) {
            (AttrMetric::Continuous { .. }, Value::Continuous(x), Value::Continuous(y)) => {
                if self.scale {
                    self.scaled(attribute, *x).expect("continuous") - self.scaled(attribute, *y).expect("continuous")
                } else {
                    x - y
                }
            }
            (AttrMetric::Nominal { pair, conditional }, Value::Nominal(i), Value::Nominal(j)) => {
                let arity = conditional.len();
                if *i < arity && *j < arity {
                    pair[i * arity + j]
                } else {
                    1.0
                }
            }
            _ => 1.0,
        }
    }

    /// Mixed distance between two instances.
    pub fn distance(&self, x: &Instance, y: &Instance) -> f64 {
        x.values
            .iter()
            .zip(&y.values)
            .enumerate()
            .map(|(a, (u, v))| self.attribute_difference(a, u, v).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// The `min(p, N)` nearest stored instances as `(index, distance)`,
    /// nearest first, ties by storage order.
    pub fn neighbors(&self, x: &Instance) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = self
            .stored
            .iter()
            .enumerate()
            .map(|(i, s)| (i, self.distance(x, s)))
            .collect();
        let k = self.p.min(all.len());
        let order = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        if k < all.len() {
            all.select_nth_unstable_by(k - 1, order);
            all.truncate(k);
        }
        all.sort_by(order);
        all
    }
}

/// Distance-weighted vote: `P_i = Σ f_i(y_s)/d_s / Σ 1/d_s`. If any
/// neighbor is at distance zero, the result is the class distribution of the
/// zero-distance neighbors alone.
pub(crate) fn weighted_vote(neighbors: &[(usize, f64)], num_classes: usize) -> ProbVector {
    let mut weights = vec![0.0; num_classes];
    let exact: Vec<usize> = neighbors.iter().filter(|n| n.1 == 0.0).map(|n| n.0).collect();
    if exact.is_empty() {
        for &(class, d) in neighbors {
            weights[class] += 1.0 / d;
        }
    } else {
        for class in exact {
            weights[class] += 1.0;
        }
    }
    ProbVector::from_weights(weights)
}

impl Classifier for KnnModel {
    fn num_classes(&self) -> usize {
        self.num_classes
    }

    fn class_probs(&self, x: &Instance) -> ProbVector {
        let labeled: Vec<(usize, f64)> = self
            .neighbors(x)
            .into_iter()
            .map(|(i, d)| (self.stored[i].class.expect("labeled"), d))
            .collect();
        weighted_vote(&labeled, self.num_classes)
    }
}
