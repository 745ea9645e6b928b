//! Comparison methods: cross-validated model selection, majority vote,
//! probability averaging and bagging.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::learners::{argmax, predict_class, Classifier, Learner, ProbVector, TrainedModel};
use crate::rng::child_rng;
use crate::stacking::{build_level1_data, Representation};

/// Outcome of picking the learner with the lowest cross-validation error.
#[derive(Clone, Debug)]
pub struct SelectionResult<M = TrainedModel> {
    pub chosen: usize,
    /// Per-learner error fraction in [0, 1].
    pub cv_errors: Vec<f64>,
    /// The chosen learner refit on all the training data.
    pub model: M,
}

/// `folds`-fold cross-validation error of every learner on a shared fold plan.
pub fn cv_errors<L: Learner>(train: &Dataset, learners: &[L], folds: usize, seed: u64) -> Result<Vec<f64>> {
    let level1 = build_level1_data(train, learners, folds, Representation::ClassLabels, seed)?;
    let n = level1.len() as f64;
    Ok((0..learners.len())
        .map(|k| {
            let wrong = level1
                .features()
                .iter()
                .zip(level1.labels())
                .filter(|(row, &y)| row[k] as usize != y)
                .count();
            wrong as f64 / n
        })
        .collect())
}

pub fn best_cv<L: Learner>(train: &Dataset, learners: &[L], folds: usize, seed: u64) -> Result<SelectionResult<L::Model>> {
    let cv_errors = cv_errors(train, learners, folds, seed)?;
    let chosen = argmax(&cv_errors.iter().map(|e| -e).collect::<Vec<_>>());
    let model = learners[chosen]
        .fit(train)
        .map_err(|e| e.context(format!("refitting selected learner {chosen}")))?;
    Ok(SelectionResult {
        chosen,
        cv_errors,
        model,
    })
}

/// Plurality vote. Ties go to the tied class with the largest summed
/// probability when confidences are supplied, then to the lowest index.
pub fn majority_vote(predictions: &[usize], confidences: Option<&[ProbVector]>) -> usize {
    let classes = predictions
        .iter()
        .map(|&p| p + 1)
        .chain(confidences.into_iter().flatten().map(ProbVector::len))
        .max()
        .unwrap_or(1);
    let mut votes = vec![0usize; classes];
    for &p in predictions {
        votes[p] += 1;
    }
    let top = votes.iter().copied().max().unwrap_or(0);
    let tied: Vec<usize> = (0..classes).filter(|&c| votes[c] == top).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    match confidences {
        Some(conf) => {
            let mass: Vec<f64> = tied
                .iter()
                .map(|&c| conf.iter().map(|p| p.as_slice().get(c).copied().unwrap_or(0.0)).sum())
                .collect();
            tied[argmax(&mass)]
        }
        None => tied[0],
    }
}

/// Per-class mean of the probability vectors and its argmax.
pub fn average_probs(probs: &[ProbVector]) -> Result<(ProbVector, usize)> {
    let Some(first) = probs.first() else {
        return Err(Error::param("averaging needs at least one probability vector"));
    };
    let classes = first.len();
    if let Some(p) = probs.iter().find(|p| p.len() != classes) {
        return Err(Error::Shape {
            what: "probability vector length",
            got: p.len(),
            expected: classes,
        });
    }
    if probs.iter().all(|p| p == first) {
        return Ok((first.clone(), argmax(first.as_slice())));
    }
    // Summing before dividing keeps ties between equal vote counts exact.
    let mut mean = vec![0.0; classes];
    for p in probs {
        for (m, &v) in mean.iter_mut().zip(p.as_slice()) {
            *m += v;
        }
    }
    let count = probs.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    let class = argmax(&mean);
    Ok((ProbVector::from_raw(mean), class))
}

/// `n` indices drawn uniformly with replacement.
pub fn bootstrap_sample<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Fraction of `0..n` absent from `sample`.
pub fn out_of_bag_fraction(sample: &[usize], n: usize) -> f64 {
    let mut seen = vec![false; n];
    for &i in sample {
        seen[i] = true;
    }
    seen.iter().filter(|s| !**s).count() as f64 / n as f64
}

#[derive(Clone, Debug)]
pub struct BaggedEnsemble<M = TrainedModel> {
    pub members: Vec<M>,
    /// Bootstrap indices each member was trained on.
    pub samples: Vec<Vec<usize>>,
    pub seed: u64,
}

impl<M> BaggedEnsemble<M> {
    /// Whether member `m`'s training sample contained instance `n`.
    pub fn in_bag(&self, m: usize, n: usize) -> bool {
        self.samples[m].contains(&n)
    }
}

/// Default ensemble size.
pub const DEFAULT_BAG_SIZE: usize = 50;

pub fn fit_bagging<L: Learner>(train: &Dataset, base: &L, members: usize, seed: u64) -> Result<BaggedEnsemble<L::Model>> {
    if members < 1 {
        return Err(Error::param("bagging needs at least one member"));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let samples: Vec<Vec<usize>> = (0..members)
        .map(|m| bootstrap_sample(train.len(), &mut child_rng(seed, "bootstrap", m as u64)))
        .collect();
    let models = samples
        .par_iter()
        .enumerate()
        .map(|(m, s)| base.fit(&train.subset(s)).map_err(|e| e.context(format!("bagging member {m}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedEnsemble {
        members: models,
        samples,
        seed,
    })
}

pub fn bagged_predict<M: Classifier>(ensemble: &BaggedEnsemble<M>, x: &Instance) -> usize {
    let probs: Vec<ProbVector> = ensemble.members.iter().map(|m| m.class_probs(x)).collect();
    let votes: Vec<usize> = probs.iter().map(predict_class).collect();
    majority_vote(&votes, Some(&probs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn plurality_and_unanimity() {
        assert_eq!(majority_vote(&[0, 0, 1], None), 0);
        assert_eq!(majority_vote(&[1, 1, 1], None), 1);
        assert_eq!(majority_vote(&[1, 0], None), 0);
    }

    #[test]
    fn tie_broken_by_confidence() {
        let conf = [pv(&[0.9, 0.1]), pv(&[0.4, 0.6])];
        assert_eq!(majority_vote(&[0, 1], Some(&conf)), 0);
        let conf = [pv(&[0.6, 0.4]), pv(&[0.1, 0.9])];
        assert_eq!(majority_vote(&[0, 1], Some(&conf)), 1);
    }

    #[test]
    fn averaging() {
        let (mean, class) = average_probs(&[pv(&[0.6, 0.4]), pv(&[0.2, 0.8])]).unwrap();
        assert!((mean.get(0) - 0.4).abs() < 1e-15 && (mean.get(1) - 0.6).abs() < 1e-15);
        assert_eq!(class, 1);
        let same = pv(&[0.1, 0.3, 0.6]);
        let (mean, _) = average_probs(&[same.clone(), same.clone(), same.clone()]).unwrap();
        assert_eq!(mean, same);
        assert!(average_probs(&[]).is_err());
        assert!(average_probs(&[pv(&[1.0, 0.0]), pv(&[0.2, 0.3, 0.5])]).is_err());
    }

    #[test]
    fn out_of_bag_counting() {
        assert_eq!(out_of_bag_fraction(&[0, 0, 1, 1], 4), 0.5);
        assert_eq!(out_of_bag_fraction(&[0, 1, 2], 3), 0.0);
    }
}
