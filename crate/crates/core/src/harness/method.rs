use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{average_probs, bagged_predict, best_cv, fit_bagging, majority_vote, DEFAULT_BAG_SIZE};
use crate::data::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::learners::{predict_class, Classifier, KnnParams, Learner, LearnerSpec, TreeParams};
use crate::mlr::{FeatureScope, MlrConfig, MlrVariant, WeightMatrix};
use crate::stacking::{fit_stacked, stacked_predict, Level1Generalizer, Representation, DEFAULT_FOLDS};

/// One column of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MethodSpec {
    Level0(LearnerSpec),
    BestCv,
    MajorityVote,
    AverageProbs,
    Bagging { members: usize, base: LearnerSpec },
    Stacked { representation: Representation, level1: Level1Generalizer },
}

impl MethodSpec {
    /// Stacking over class probabilities with non-negative MLR.
    pub fn default_stack() -> Self {
        MethodSpec::Stacked {
            representation: Representation::ClassProbs,
            level1: Level1Generalizer::default(),
        }
    }
}

fn parse_uint(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::param(format!("{key} must be a non-negative integer, got {value:?}")))
}

fn parse_level0(text: &str) -> Result<LearnerSpec> {
    match text {
        "tree" => Ok(LearnerSpec::Tree(TreeParams::default())),
        "nb" => Ok(LearnerSpec::NaiveBayes),
        "knn" => Ok(LearnerSpec::Knn(KnnParams::default())),
        _ => match text.strip_prefix("knn:p=") {
            Some(p) => {
                let p = parse_uint("p", p)?;
                if p == 0 {
                    return Err(Error::param("knn needs p >= 1"));
                }
                Ok(LearnerSpec::Knn(KnnParams::with_p(p)))
            }
            None => Err(Error::param(format!("unknown learner {text:?}"))),
        },
    }
}

/// Parses a comma-separated learner list such as `tree,nb,knn:p=3`.
pub fn parse_learners(text: &str) -> Result<Vec<LearnerSpec>> {
    let learners = text
        .split(',')
        .map(|s| parse_level0(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if learners.is_empty() {
        return Err(Error::param("at least one learner is required"));
    }
    Ok(learners)
}

fn parse_level1(text: &str) -> Result<Level1Generalizer> {
    let mlr = |variant, scope| Level1Generalizer::Mlr(MlrConfig { variant, scope });
    match text {
        "mlr" | "mlr(iii)" => Ok(mlr(MlrVariant::NoInterceptNonNegative, FeatureScope::PerClass)),
        "mlr(i)" => Ok(mlr(MlrVariant::InterceptUnconstrained, FeatureScope::PerClass)),
        "mlr(ii)" => Ok(mlr(MlrVariant::NoInterceptUnconstrained, FeatureScope::PerClass)),
        "mlr(full)" => Ok(mlr(MlrVariant::NoInterceptNonNegative, FeatureScope::Full)),
        "tree" => Ok(Level1Generalizer::Tree(TreeParams::default())),
        "nb" => Ok(Level1Generalizer::NaiveBayes),
        "knn" => Ok(Level1Generalizer::default_knn()),
        _ => match parse_level0(text) {
            Ok(LearnerSpec::Knn(k)) => Ok(Level1Generalizer::Knn(KnnParams { scale: false, ..k })),
            _ => Err(Error::param(format!("unknown level-1 generalizer {text:?}"))),
        },
    }
}

/// Splits `key=value` pairs on commas outside parentheses. A bare `base=knn:p=5`
/// keeps everything after the first `=`.
fn key_values(text: &str) -> Result<Vec<(&str, &str)>> {
    split_top_level(text)
        .into_iter()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got {kv:?}")))
        })
        .collect()
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

const PARAM_KEYS: [&str; 4] = ["h", "base", "repr", "l1"];

/// Splits a `--methods` list. Tokens like `base=nb` that start with a method
/// parameter key are glued back onto the preceding method.
pub fn parse_method_list(text: &str) -> Result<Vec<MethodSpec>> {
    let mut specs: Vec<String> = Vec::new();
    for token in split_top_level(text) {
        let continues = token
            .split_once('=')
            .is_some_and(|(k, _)| PARAM_KEYS.contains(&k));
        match specs.last_mut() {
            Some(prev) if continues => {
                prev.push(',');
                prev.push_str(token);
            }
            _ => specs.push(token.to_string()),
        }
    }
    specs.iter().map(|s| s.parse()).collect()
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, params) = match text.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (text, None),
        };
        match (head, params) {
            ("bestcv", None) => Ok(MethodSpec::BestCv),
            ("vote", None) => Ok(MethodSpec::MajorityVote),
            ("avg", None) => Ok(MethodSpec::AverageProbs),
            ("bag", params) => {
                let mut members = DEFAULT_BAG_SIZE;
                let mut base = LearnerSpec::Tree(TreeParams::default());
                for (k, v) in params.map(key_values).transpose()?.unwrap_or_default() {
                    match k {
                        "h" => members = parse_uint("h", v)?,
                        "base" => base = parse_level0(v)?,
                        _ => return Err(Error::param(format!("unknown bagging parameter {k:?}"))),
                    }
                }
                if members == 0 {
                    return Err(Error::param("bagging needs h >= 1"));
                }
                Ok(MethodSpec::Bagging { members, base })
            }
            ("stack", params) => {
                let mut representation = Representation::ClassProbs;
                let mut level1 = Level1Generalizer::default();
                for (k, v) in params.map(key_values).transpose()?.unwrap_or_default() {
                    match k {
                        "repr" => {
                            representation = match v {
                                "probs" => Representation::ClassProbs,
                                "labels" => Representation::ClassLabels,
                                _ => return Err(Error::param(format!("repr must be probs or labels, got {v:?}"))),
                            }
                        }
                        "l1" => level1 = parse_level1(v)?,
                        _ => return Err(Error::param(format!("unknown stacking parameter {k:?}"))),
                    }
                }
                Ok(MethodSpec::Stacked { representation, level1 })
            }
            _ => parse_level0(text).map(MethodSpec::Level0),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Level0(l) => write!(f, "{}", l.name()),
            MethodSpec::BestCv => write!(f, "bestcv"),
            MethodSpec::MajorityVote => write!(f, "vote"),
            MethodSpec::AverageProbs => write!(f, "avg"),
            MethodSpec::Bagging { members, base } => write!(f, "bag:h={members},base={}", base.name()),
            MethodSpec::Stacked { representation, level1 } => {
                write!(f, "stack:repr={},l1={}", representation.name(), level1.name())
            }
        }
    }
}

/// Anything the evaluation protocols can train and test.
pub trait Method: Sync {
    fn label(&self) -> String;

    /// Trains on `train` and predicts a class for each test instance.
    fn fit_predict(&self, train: &Dataset, test: &[Instance], seed: u64) -> Result<Vec<usize>>;
}

/// A method together with the level-0 learner set and internal fold count
/// used by the combiners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfiguredMethod {
    pub spec: MethodSpec,
    pub learners: Vec<LearnerSpec>,
    pub folds: usize,
}

impl ConfiguredMethod {
    pub fn new(spec: MethodSpec, learners: Vec<LearnerSpec>, folds: usize) -> Result<Self> {
        if learners.is_empty() {
            return Err(Error::param("at least one level-0 learner is required"));
        }
        if folds < 2 {
            return Err(Error::param(format!("internal folds must be >= 2, got {folds}")));
        }
        Ok(ConfiguredMethod { spec, learners, folds })
    }

    /// The default learner trio with 10 internal folds.
    pub fn with_defaults(spec: MethodSpec) -> Self {
        ConfiguredMethod {
            spec,
            learners: LearnerSpec::default_trio(),
            folds: DEFAULT_FOLDS,
        }
    }

    /// Level-1 weights of an MLR-stacked method trained on `train`; `None`
    /// for any other method.
    pub fn fitted_weights(&self, train: &Dataset, seed: u64) -> Result<Option<WeightMatrix>> {
        match &self.spec {
            MethodSpec::Stacked {
                representation,
                level1: level1 @ Level1Generalizer::Mlr(_),
            } => {
                let model = fit_stacked(train, &self.learners, level1, self.folds, *representation, seed)?;
                Ok(model.weights().cloned())
            }
            _ => Ok(None),
        }
    }
}

fn predict_all<F>(test: &[Instance], f: F) -> Result<Vec<usize>>
where
    F: Fn(&Instance) -> Result<usize> + Sync + Send,
{
    test.par_iter().map(f).collect()
}

impl Method for ConfiguredMethod {
    fn label(&self) -> String {
        self.spec.to_string()
    }

    fn fit_predict(&self, train: &Dataset, test: &[Instance], seed: u64) -> Result<Vec<usize>> {
        match &self.spec {
            MethodSpec::Level0(learner) => {
                let model = learner.fit(train)?;
                predict_all(test, |x| Ok(model.predict(x)))
            }
            MethodSpec::BestCv => {
                let selected = best_cv(train, &self.learners, self.folds, seed)?;
                predict_all(test, |x| Ok(selected.model.predict(x)))
            }
            MethodSpec::MajorityVote | MethodSpec::AverageProbs => {
                let models = self
                    .learners
                    .par_iter()
                    .map(|l| l.fit(train))
                    .collect::<Result<Vec<_>>>()?;
                let vote = matches!(self.spec, MethodSpec::MajorityVote);
                predict_all(test, |x| {
                    let probs: Vec<_> = models.iter().map(|m| m.class_probs(x)).collect();
                    if vote {
                        let classes: Vec<usize> = probs.iter().map(predict_class).collect();
                        Ok(majority_vote(&classes, Some(&probs)))
                    } else {
                        Ok(average_probs(&probs)?.1)
                    }
                })
            }
            MethodSpec::Bagging { members, base } => {
                let ensemble = fit_bagging(train, base, *members, seed)?;
                predict_all(test, |x| Ok(bagged_predict(&ensemble, x)))
            }
            MethodSpec::Stacked { representation, level1 } => {
                let model = fit_stacked(train, &self.learners, level1, self.folds, *representation, seed)?;
                predict_all(test, |x| stacked_predict(&model, x).map(|(c, _)| c))
            }
        }
    }
}
