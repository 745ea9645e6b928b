use serde::{Deserialize, Serialize};

use super::{Classifier, ProbVector};
use crate::data::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Lower bound on per-class Gaussian variances, in raw attribute units.
pub const NB_VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Conditional {
    /// `table[class][value]`, Laplace smoothed.
    Discrete(Vec<Vec<f64>>),
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    priors: Vec<f64>,
    conditionals: Vec<Conditional>,
}

impl NaiveBayesModel {
    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Smoothed `P(value | class)` of a discrete attribute.
    pub fn conditional(&self, attribute: usize, class: usize, value: usize) -> Option<f64> {
        match &self.conditionals[attribute] {
            Conditional::Discrete(t) => t[class].get(value).copied(),
            Conditional::Gaussian { .. } => None,
        }
    }

    /// Per-class `(mean, variance)` of a continuous attribute.
    pub fn gaussian(&self, attribute: usize, class: usize) -> Option<(f64, f64)> {
        match &self.conditionals[attribute] {
            Conditional::Gaussian { mean, variance } => Some((mean[class], variance[class])),
            Conditional::Discrete(_) => None,
        }
    }
}

pub fn train_nb(train: &Dataset) -> Result<NaiveBayesModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let classes = train.num_classes();
    let class_counts = train.class_counts();
    if let Some(c) = class_counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(train.schema().class_values()[c].clone()));
    }
    let n = train.len() as f64;
    let priors = class_counts.iter().map(|&c| c as f64 / n).collect();

    let conditionals = train
        .schema()
        .attributes()
        .iter()
        .enumerate()
        .map(|(a, attr)| match &attr.kind {
            AttributeKind::Continuous => {
                let mut sum = vec![0.0; classes];
                let mut seen = vec![0usize; classes];
                for inst in train.instances() {
                    if let Value::Continuous(x) = inst.values[a] {
                        let c = inst.class.expect("labeled");
                        sum[c] += x;
                        seen[c] += 1;
                    }
                }
                let mean: Vec<f64> = (0..classes)
                    .map(|c| if seen[c] > 0 { sum[c] / seen[c] as f64 } else { 0.0 })
                    .collect();
                let mut ss = vec![0.0; classes];
                for inst in train.instances() {
                    if let Value::Continuous(x) = inst.values[a] {
                        let c = inst.class.expect("labeled");
                        ss[c] += (x - mean[c]).powi(2);
                    }
                }
                let variance = (0..classes)
                    .map(|c| {
                        let v = if seen[c] > 1 { ss[c] / (seen[c] - 1) as f64 } else { 0.0 };
                        v.max(NB_VARIANCE_FLOOR)
                    })
                    .collect();
                Conditional::Gaussian { mean, variance }
            }
            kind => {
                let arity = kind.arity();
                let mut counts = vec![vec![0usize; arity]; classes];
                let mut known = vec![0usize; classes];
                for inst in train.instances() {
                    if let Value::Nominal(v) = inst.values[a] {
                        let c = inst.class.expect("labeled");
                        counts[c][v] += 1;
                        known[c] += 1;
                    }
                }
                let table = counts
                    .iter()
                    .zip(&known)
                    .map(|(row, &k)| {
                        row.iter()
                            .map(|&m| (m as f64 + 1.0) / (k as f64 + arity as f64))
                            .collect()
                    })
                    .collect();
                Conditional::Discrete(table)
            }
        })
        .collect();
    Ok(NaiveBayesModel { priors, conditionals })
}

impl Classifier for NaiveBayesModel {
    fn num_classes(&self) -> usize {
        self.priors.len()
    }

    /// Log joint per class, shifted by its maximum, exponentiated and normalized.
    /// Each attribute's log-likelihoods are centered on their largest value
    /// before summing, so a term shared by all classes (such as a far-out
    /// value on a near-constant Gaussian) cannot swamp the differences.
    fn class_probs(&self, x: &Instance) -> ProbVector {
        let classes = self.priors.len();
        let mut log_joint: Vec<f64> = self.priors.iter().map(|p| p.ln()).collect();
        let mut term = vec![0.0; classes];
        for (cond, value) in self.conditionals.iter().zip(&x.values) {
            match (cond, value) {
                (Conditional::Discrete(table), Value::Nominal(v)) => {
                    if table.iter().any(|row| row.get(*v).is_none()) {
                        continue;
                    }
                    for (t, row) in term.iter_mut().zip(table) {
                        *t = row[*v].ln();
                    }
                }
                (Conditional::Gaussian { mean, variance }, Value::Continuous(v)) => {
                    for (c, t) in term.iter_mut().enumerate() {
                        let var = variance[c];
                        *t = -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (v - mean[c]).powi(2) / (2.0 * var);
                    }
                }
                _ => continue,
            }
            let top = term.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (lj, t) in log_joint.iter_mut().zip(&term) {
                *lj += t - top;
            }
        }
        let max = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ProbVector::from_weights(log_joint.iter().map(|lj| (lj - max).exp()).collect())
    }
}
