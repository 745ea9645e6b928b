//! Stacked generalization: cross-validated level-1 data, final level-0
//! refit on all the data, and the two-stage prediction path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{stratified_folds, Attribute, Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};
use crate::learners::{
    predict_class, Classifier, KnnParams, Learner, LearnerSpec, ProbVector, TrainedModel, TreeParams,
};
use crate::mlr::{fit_mlr, mlr_predict, MlrConfig, WeightMatrix};

/// Version written into serialized model files.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Default internal fold count.
pub const DEFAULT_FOLDS: usize = 10;

/// What each level-0 model contributes to a level-1 row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    /// The predicted class of each model.
    ClassLabels,
    /// The full class-probability vector of each model.
    ClassProbs,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::ClassLabels => "labels",
            Representation::ClassProbs => "probs",
        }
    }
}

/// Where a level-1 row came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub instance: usize,
    pub fold: usize,
    /// Per model: the training set of the model that produced this row excluded the instance.
    pub trained_without_instance: Vec<bool>,
}

/// Cross-validated level-1 data, one row per training instance in original order.
#[derive(Clone, Debug, PartialEq)]
pub struct Level1Dataset {
    representation: Representation,
    num_models: usize,
    class_values: Vec<String>,
    /// Width `K·I` (probabilities, model-major) or `K` (predicted class indices).
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    provenance: Vec<Provenance>,
}

impl Level1Dataset {
    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn num_models(&self) -> usize {
        self.num_models
    }

    pub fn num_classes(&self) -> usize {
        self.class_values.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        level1_width(self.representation, self.num_models, self.num_classes())
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    /// Number of (row, model) pairs whose model saw the row's instance during training.
    pub fn leaked_pairs(&self) -> usize {
        self.provenance
            .iter()
            .map(|p| p.trained_without_instance.iter().filter(|ok| !**ok).count())
            .sum()
    }

    /// Rows as regressors for MLR: class labels become `K·I` indicators.
    pub fn regression_rows(&self) -> Vec<Vec<f64>> {
        let classes = self.num_classes();
        match self.representation {
            Representation::ClassProbs => self.features.clone(),
            Representation::ClassLabels => self
                .features
                .iter()
                .map(|row| expand_labels(row, classes))
                .collect(),
        }
    }

    pub fn regression_labels(&self) -> Vec<String> {
        let classes = self.num_classes();
        (0..self.num_models * classes)
            .map(|c| format!("m{}_p{}", c / classes, c % classes))
            .collect()
    }

    /// The level-1 data as an ordinary dataset for tree, naive Bayes or kNN.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let schema = level1_schema(self.representation, self.num_models, &self.class_values)?;
        let instances = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(row, &y)| {
                let mut inst = features_to_instance(self.representation, row);
                inst.class = Some(y);
                inst
            })
            .collect();
        Dataset::new(schema, instances)
    }
}

fn level1_width(repr: Representation, models: usize, classes: usize) -> usize {
    match repr {
        Representation::ClassProbs => models * classes,
        Representation::ClassLabels => models,
    }
}

fn expand_labels(row: &[f64], classes: usize) -> Vec<f64> {
    let mut out = vec![0.0; row.len() * classes];
    for (k, &z) in row.iter().enumerate() {
        out[k * classes + z as usize] = 1.0;
    }
    out
}

fn level1_schema(repr: Representation, models: usize, class_values: &[String]) -> Result<Schema> {
    let classes = class_values.len();
    let attributes = match repr {
        Representation::ClassProbs => (0..models * classes)
            .map(|c| Attribute::continuous(format!("m{}_p{}", c / classes, c % classes)))
            .collect(),
        Representation::ClassLabels => (0..models)
            .map(|k| Attribute::nominal(format!("m{k}"), class_values.iter().cloned()))
            .collect(),
    };
    Schema::new(attributes, class_values.to_vec())
}

fn features_to_instance(repr: Representation, row: &[f64]) -> Instance {
    let values = match repr {
        Representation::ClassProbs => row.iter().map(|&p| Value::Continuous(p)).collect(),
        Representation::ClassLabels => row.iter().map(|&z| Value::Nominal(z as usize)).collect(),
    };
    Instance::unlabeled(values)
}

/// Level-1 features of `x` under `repr` given the level-0 models.
pub fn level0_features<M: Classifier>(models: &[M], x: &Instance, repr: Representation) -> Vec<f64> {
    let mut out = Vec::new();
    for m in models {
        let p = m.class_probs(x);
        match repr {
            Representation::ClassProbs => out.extend_from_slice(p.as_slice()),
            Representation::ClassLabels => out.push(predict_class(&p) as f64),
        }
    }
    out
}

/// Builds level-1 data by `folds`-fold cross-validation: for each fold `j`
/// every learner is fit on the other folds and evaluated on fold `j`. One
/// fold plan, drawn from `seed`, is shared by all learners.
pub fn build_level1_data<L: Learner>(
    train: &Dataset,
    learners: &[L],
    folds: usize,
    repr: Representation,
    seed: u64,
) -> Result<Level1Dataset> {
    if learners.is_empty() {
        return Err(Error::param("at least one level-0 learner is required"));
    }
    let plan = stratified_folds(train, folds, seed)?;
    let train_sets: Vec<Vec<usize>> = (0..folds).map(|j| plan.train_indices(j)).collect();
    let test_sets: Vec<Vec<usize>> = (0..folds).map(|j| plan.test_indices(j)).collect();
    let k_count = learners.len();

    // Task (j, k) yields model k's probabilities on fold j's test set.
    let outputs: Vec<Vec<ProbVector>> = (0..folds * k_count)
        .into_par_iter()
        .map(|task| {
            let (j, k) = (task / k_count, task % k_count);
            let model = learners[k]
                .fit(&train.subset(&train_sets[j]))
                .map_err(|e| Error::Learner {
                    learner: k,
                    fold: j,
                    source: Box::new(e),
                })?;
            Ok(test_sets[j].iter().map(|&n| model.class_probs(train.instance(n))).collect())
        })
        .collect::<Result<_>>()?;

    let mut position = vec![0; train.len()];
    for test in &test_sets {
        for (pos, &n) in test.iter().enumerate() {
            position[n] = pos;
        }
    }
    let mut features = Vec::with_capacity(train.len());
    let mut provenance = Vec::with_capacity(train.len());
    for n in 0..train.len() {
        let j = plan.assignment()[n];
        let mut row = Vec::new();
        for k in 0..k_count {
            let p = &outputs[j * k_count + k][position[n]];
            match repr {
                Representation::ClassProbs => row.extend_from_slice(p.as_slice()),
                Representation::ClassLabels => row.push(predict_class(p) as f64),
            }
        }
        features.push(row);
        provenance.push(Provenance {
            instance: n,
            fold: j,
            trained_without_instance: vec![train_sets[j].binary_search(&n).is_err(); k_count],
        });
    }
    Ok(Level1Dataset {
        representation: repr,
        num_models: k_count,
        class_values: train.schema().class_values().to_vec(),
        features,
        labels: train.labels(),
        provenance,
    })
}

/// The algorithm that learns to combine level-0 outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Level1Generalizer {
    Mlr(MlrConfig),
    Tree(TreeParams),
    NaiveBayes,
    /// Unscaled Euclidean distance over probability features.
    Knn(KnnParams),
}

impl Level1Generalizer {
    /// kNN with 21 neighbors and no feature rescaling.
    pub fn default_knn() -> Self {
        Level1Generalizer::Knn(KnnParams { p: 21, scale: false })
    }

    pub fn name(&self) -> String {
        match self {
            Level1Generalizer::Mlr(c) => match c.scope {
                crate::mlr::FeatureScope::PerClass => format!("mlr({})", c.variant.roman()),
                crate::mlr::FeatureScope::Full => "mlr(full)".into(),
            },
            Level1Generalizer::Tree(_) => "tree".into(),
            Level1Generalizer::NaiveBayes => "nb".into(),
            Level1Generalizer::Knn(k) => format!("knn:p={}", k.p),
        }
    }
}

impl Default for Level1Generalizer {
    fn default() -> Self {
        Level1Generalizer::Mlr(MlrConfig::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Level1Model {
    Mlr(WeightMatrix),
    Learner(TrainedModel),
}

/// Final level-0 models trained on all the data plus the level-1 model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedModel<M = TrainedModel> {
    pub schema: Schema,
    pub representation: Representation,
    pub level0: Vec<M>,
    pub level1: Level1Model,
}

pub fn fit_level1(level1_data: &Level1Dataset, generalizer: &Level1Generalizer) -> Result<Level1Model> {
    Ok(match generalizer {
        Level1Generalizer::Mlr(config) => Level1Model::Mlr(fit_mlr(level1_data, config)?),
        Level1Generalizer::Tree(params) => {
            Level1Model::Learner(LearnerSpec::Tree(params.clone()).fit(&level1_data.to_dataset()?)?)
        }
        Level1Generalizer::NaiveBayes => Level1Model::Learner(LearnerSpec::NaiveBayes.fit(&level1_data.to_dataset()?)?),
        Level1Generalizer::Knn(params) => {
            let params = KnnParams { scale: false, ..params.clone() };
            Level1Model::Learner(LearnerSpec::Knn(params).fit(&level1_data.to_dataset()?)?)
        }
    })
}

pub fn fit_stacked<L: Learner>(
    train: &Dataset,
    learners: &[L],
    generalizer: &Level1Generalizer,
    folds: usize,
    repr: Representation,
    seed: u64,
) -> Result<StackedModel<L::Model>> {
    let level1_data = build_level1_data(train, learners, folds, repr, seed)?;
    let level1 = fit_level1(&level1_data, generalizer).map_err(|e| e.context("level-1 training"))?;
    let level0 = learners
        .par_iter()
        .enumerate()
        .map(|(k, l)| l.fit(train).map_err(|e| e.context(format!("final level-0 model {k}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(StackedModel {
        schema: train.schema().clone(),
        representation: repr,
        level0,
        level1,
    })
}

impl<M: Classifier> StackedModel<M> {
    pub fn num_classes(&self) -> usize {
        self.schema.num_classes()
    }

    pub fn level1_width(&self) -> usize {
        level1_width(self.representation, self.level0.len(), self.num_classes())
    }

    /// Level-1 model output for a level-1 feature vector.
    pub fn level1_predict(&self, features: &[f64]) -> Result<usize> {
        if features.len() != self.level1_width() {
            return Err(Error::Shape {
                what: "level-1 feature width",
                got: features.len(),
                expected: self.level1_width(),
            });
        }
        match &self.level1 {
            Level1Model::Mlr(w) => match self.representation {
                Representation::ClassProbs => mlr_predict(w, features),
                Representation::ClassLabels => mlr_predict(w, &expand_labels(features, self.num_classes())),
            },
            Level1Model::Learner(m) => Ok(m.predict(&features_to_instance(self.representation, features))),
        }
    }

    /// Class probabilities of a learner-based level-1 model; `None` for MLR.
    pub fn level1_probs(&self, features: &[f64]) -> Option<ProbVector> {
        match &self.level1 {
            Level1Model::Learner(m) => Some(m.class_probs(&features_to_instance(self.representation, features))),
            Level1Model::Mlr(_) => None,
        }
    }

    pub fn weights(&self) -> Option<&WeightMatrix> {
        match &self.level1 {
            Level1Model::Mlr(w) => Some(w),
            Level1Model::Learner(_) => None,
        }
    }
}

/// Runs the final level-0 models, then the level-1 model. Returns the class
/// and the intermediate level-1 feature vector.
pub fn stacked_predict<M: Classifier>(model: &StackedModel<M>, x: &Instance) -> Result<(usize, Vec<f64>)> {
    model.schema.check_instance(x)?;
    let features = level0_features(&model.level0, x, model.representation);
    let class = model.level1_predict(&features)?;
    Ok((class, features))
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: StackedModel,
}

impl StackedModel {
    /// Versioned JSON model file; floats round-trip bit-exactly.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: "stackgen-model".into(),
            version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<StackedModel> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if file.format != "stackgen-model" || file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported model file {} version {}",
                file.format, file.version
            )));
        }
        Ok(file.model)
    }
}
