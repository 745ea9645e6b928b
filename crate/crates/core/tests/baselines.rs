mod common;

use common::{id_dataset, mixed_dataset, LeakLearner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackgen::baselines::{
    average_probs, bagged_predict, best_cv, bootstrap_sample, cv_errors, fit_bagging, majority_vote,
    out_of_bag_fraction,
};
use stackgen::data::{Attribute, Dataset, Instance, Schema};
use stackgen::error::Result;
use stackgen::learners::{
    predict_class, Classifier, KnnParams, Learner, LearnerSpec, ProbVector, TrainedModel, TreeParams,
};
use stackgen::rng::child_rng;

#[test]
fn out_of_bag_fraction_near_e_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mean = (0..200).map(|_| out_of_bag_fraction(&bootstrap_sample(1000, &mut rng), 1000)).sum::<f64>() / 200.0;
    assert!((mean - 0.368).abs() <= 0.01, "{mean}");
}

#[test]
fn single_member_bag_is_the_base_learner_on_its_resample() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ds = mixed_dataset(&mut rng, 120, 3);
    let base = LearnerSpec::Tree(TreeParams::default());
    let bag = fit_bagging(&ds, &base, 1, 44).unwrap();
    let direct = base.fit(&ds.subset(&bag.samples[0])).unwrap();
    for x in ds.instances() {
        assert_eq!(bagged_predict(&bag, x), direct.predict(x));
    }
}

#[test]
fn bootstrap_resamples_are_reproducible() {
    let ds = id_dataset(50, 2);
    let a = fit_bagging(&ds, &LearnerSpec::NaiveBayes, 5, 9).unwrap();
    let b = fit_bagging(&ds, &LearnerSpec::NaiveBayes, 5, 9).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.samples[3], bootstrap_sample(50, &mut child_rng(9, "bootstrap", 3)));
    assert_ne!(a.samples[0], a.samples[1]);
}

#[test]
fn members_never_see_out_of_bag_instances() {
    let ds = id_dataset(60, 3);
    let bag = fit_bagging(&ds, &LeakLearner::default(), 8, 5).unwrap();
    for (m, model) in bag.members.iter().enumerate() {
        for (n, x) in ds.instances().iter().enumerate() {
            assert_eq!(model.saw(x), bag.in_bag(m, n));
        }
    }
}

#[test]
fn ensemble_votes() {
    let one_hot = |c| ProbVector::one_hot(c, 3);
    // unanimous
    assert_eq!(majority_vote(&[2, 2, 2, 2, 2], None), 2);
    // 3/2 split
    assert_eq!(majority_vote(&[1, 0, 1, 0, 1], None), 1);
    // h=2 tie: confidence decides, then the lower index
    assert_eq!(
        majority_vote(&[2, 1], Some(&[ProbVector::new(vec![0.0, 0.2, 0.8]).unwrap(), ProbVector::new(vec![0.1, 0.5, 0.4]).unwrap()])),
        2
    );
    assert_eq!(majority_vote(&[2, 1], Some(&[one_hot(2), one_hot(1)])), 1);
}

#[test]
fn one_hot_average_equals_vote_for_three_models() {
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let probs = [ProbVector::one_hot(a, 3), ProbVector::one_hot(b, 3), ProbVector::one_hot(c, 3)];
                let (_, avg) = average_probs(&probs).unwrap();
                assert_eq!(avg, majority_vote(&[a, b, c], Some(&probs)), "{a}{b}{c}");
                assert_eq!(avg, majority_vote(&[a, b, c], None), "{a}{b}{c}");
            }
        }
    }
}

#[test]
fn average_is_a_distribution() {
    let probs = [
        ProbVector::new(vec![0.1, 0.2, 0.7]).unwrap(),
        ProbVector::new(vec![0.25, 0.25, 0.5]).unwrap(),
        ProbVector::uniform(3),
    ];
    let (mean, _) = average_probs(&probs).unwrap();
    assert!((mean.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

/// Either always predicts class 0 or defers to 1-nearest-neighbor.
enum Choice {
    Constant,
    Nearest,
}

enum ChoiceModel {
    Constant(usize),
    Nearest(TrainedModel),
}

impl Classifier for ChoiceModel {
    fn num_classes(&self) -> usize {
        match self {
            ChoiceModel::Constant(n) => *n,
            ChoiceModel::Nearest(m) => m.num_classes(),
        }
    }

    fn class_probs(&self, x: &Instance) -> ProbVector {
        match self {
            ChoiceModel::Constant(n) => ProbVector::one_hot(0, *n),
            ChoiceModel::Nearest(m) => m.class_probs(x),
        }
    }
}

impl Learner for Choice {
    type Model = ChoiceModel;

    fn fit(&self, train: &Dataset) -> Result<ChoiceModel> {
        Ok(match self {
            Choice::Constant => ChoiceModel::Constant(train.num_classes()),
            Choice::Nearest => ChoiceModel::Nearest(LearnerSpec::Knn(KnnParams::with_p(1)).fit(train)?),
        })
    }
}

/// Four points per class in three well separated clusters.
fn clusters() -> Dataset {
    let schema = Schema::new(
        vec![Attribute::continuous("x"), Attribute::continuous("y")],
        vec!["a".into(), "b".into(), "c".into()],
    )
    .unwrap();
    let mut instances = Vec::new();
    for c in 0..3 {
        for i in 0..4 {
            instances.push(Instance::continuous(&[c as f64 * 10.0 + i as f64 * 0.1, (i % 2) as f64 * 0.1], c));
        }
    }
    Dataset::new(schema, instances).unwrap()
}

#[test]
fn best_cv_prefers_nearest_neighbor_over_constant() {
    let ds = clusters();
    let errors = cv_errors(&ds, &[Choice::Constant, Choice::Nearest], ds.len(), 0).unwrap();
    assert!((errors[0] - 2.0 / 3.0).abs() < 1e-12, "{errors:?}");
    assert_eq!(errors[1], 0.0);
    let chosen = best_cv(&ds, &[Choice::Constant, Choice::Nearest], ds.len(), 0).unwrap();
    assert_eq!(chosen.chosen, 1);
    for x in ds.instances() {
        assert_eq!(chosen.model.predict(x), x.class.unwrap());
    }
}

#[test]
fn best_cv_ties_go_to_the_first_learner() {
    let ds = clusters();
    let chosen = best_cv(&ds, &[Choice::Nearest, Choice::Nearest], 4, 3).unwrap();
    assert_eq!(chosen.chosen, 0);
}

#[test]
fn best_cv_reports_fractions_and_picks_the_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ds = mixed_dataset(&mut rng, 150, 3);
    let result = best_cv(&ds, &LearnerSpec::default_trio(), 10, 1).unwrap();
    assert!(result.cv_errors.iter().all(|e| (0.0..=1.0).contains(e)));
    let min = result.cv_errors.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(result.cv_errors[result.chosen], min);
    let direct = LearnerSpec::default_trio()[result.chosen].fit(&ds).unwrap();
    assert_eq!(predict_class(&direct.class_probs(ds.instance(0))), result.model.predict(ds.instance(0)));
}
