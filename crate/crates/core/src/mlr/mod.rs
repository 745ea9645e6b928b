//! Multi-response linear regression as a level-1 generalizer.
//!
//! An `I`-class problem becomes `I` regressions on 0/1 responses. Level-1
//! features are laid out model-major: column `k·I + i` holds model `k`'s
//! probability for class `i`. With [`FeatureScope::PerClass`] the regression
//! for class `ℓ` uses only the `K` columns `k·I + ℓ`; with
//! [`FeatureScope::Full`] it uses all `K·I` columns. Prediction is the class
//! with the largest regression output, ties to the lowest index.

mod nnls;
mod ols;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use nnls::{nnls, NNLS_DUAL_TOLERANCE};
pub use ols::{ols, OLS_RIDGE};

use crate::error::{Error, Result};
use crate::learners::argmax;
use crate::stacking::Level1Dataset;

/// Rectangular, finite regressor matrix with per-column provenance labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    labels: Vec<String>,
}

impl DesignMatrix {
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<String>) -> Result<Self> {
        let width = labels.len();
        for row in rows {
            if row.len() != width {
                return Err(Error::Shape {
                    what: "design matrix row width",
                    got: row.len(),
                    expected: width,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical("non-finite design matrix entry".into()));
            }
        }
        let matrix = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
        Ok(DesignMatrix { matrix, labels })
    }

    /// Unlabeled design matrix; columns are named `c0, c1, ...`.
    pub fn from_unlabeled_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        DesignMatrix::from_rows(rows, (0..width).map(|j| format!("c{j}")).collect())
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    fn select_columns(&self, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows(), cols.len(), |i, j| self.matrix[(i, cols[j])])
    }
}

/// One 0/1 response column per class; each row is one-hot.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMatrix(DMatrix<f64>);

impl ResponseMatrix {
    pub fn column(&self, class: usize) -> DVector<f64> {
        self.0.column(class).into_owned()
    }

    pub fn row(&self, n: usize) -> Vec<f64> {
        self.0.row(n).iter().copied().collect()
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }
}

pub fn one_hot_responses(labels: &[usize], num_classes: usize) -> Result<ResponseMatrix> {
    if num_classes < 2 {
        return Err(Error::param(format!("at least 2 classes required, got {num_classes}")));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(Error::param(format!("label {bad} out of range for {num_classes} classes")));
    }
    Ok(ResponseMatrix(DMatrix::from_fn(labels.len(), num_classes, |n, l| {
        f64::from(u8::from(labels[n] == l))
    })))
}

/// Unconstrained least squares; with `intercept` the result is `[α_0, α_1, ...]`.
pub fn solve_ols(a: &DesignMatrix, b: &[f64], intercept: bool) -> Result<Vec<f64>> {
    Ok(ols(&a.matrix, &DVector::from_column_slice(b), intercept)?.as_slice().to_vec())
}

/// Least squares with every coefficient constrained to be non-negative.
pub fn solve_nnls(a: &DesignMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(nnls(&a.matrix, &DVector::from_column_slice(b))?.as_slice().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MlrVariant {
    /// (i) intercept, no constraints.
    InterceptUnconstrained,
    /// (ii) no intercept, no constraints.
    NoInterceptUnconstrained,
    /// (iii) no intercept, non-negative coefficients.
    NoInterceptNonNegative,
}

impl MlrVariant {
    pub const ALL: [MlrVariant; 3] = [
        MlrVariant::InterceptUnconstrained,
        MlrVariant::NoInterceptUnconstrained,
        MlrVariant::NoInterceptNonNegative,
    ];

    pub fn has_intercept(self) -> bool {
        matches!(self, MlrVariant::InterceptUnconstrained)
    }

    pub fn roman(self) -> &'static str {
        match self {
            MlrVariant::InterceptUnconstrained => "i",
            MlrVariant::NoInterceptUnconstrained => "ii",
            MlrVariant::NoInterceptNonNegative => "iii",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureScope {
    /// `K` regressors per class: every model's probability for that class.
    PerClass,
    /// All `K·I` probabilities as regressors for every class.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlrConfig {
    pub variant: MlrVariant,
    pub scope: FeatureScope,
}

impl Default for MlrConfig {
    fn default() -> Self {
        MlrConfig {
            variant: MlrVariant::NoInterceptNonNegative,
            scope: FeatureScope::PerClass,
        }
    }
}

/// Fitted per-class coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub config: MlrConfig,
    pub num_models: usize,
    pub num_classes: usize,
    /// `weights[ℓ]` has `K` entries (per-class scope) or `K·I` entries (full scope).
    pub weights: Vec<Vec<f64>>,
    /// Present only for variant (i).
    pub intercepts: Option<Vec<f64>>,
}

impl WeightMatrix {
    pub fn feature_width(&self) -> usize {
        self.num_models * self.num_classes
    }

    fn scope_columns(scope: FeatureScope, class: usize, num_models: usize, num_classes: usize) -> Vec<usize> {
        match scope {
            FeatureScope::PerClass => (0..num_models).map(|k| k * num_classes + class).collect(),
            FeatureScope::Full => (0..num_models * num_classes).collect(),
        }
    }

    /// Regression outputs `LR_ℓ` for every class.
    pub fn lr_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.feature_width() {
            return Err(Error::Shape {
                what: "level-1 feature width",
                got: features.len(),
                expected: self.feature_width(),
            });
        }
        Ok((0..self.num_classes)
            .map(|l| {
                let cols = Self::scope_columns(self.config.scope, l, self.num_models, self.num_classes);
                let dot: f64 = cols.iter().zip(&self.weights[l]).map(|(&c, w)| w * features[c]).sum();
                dot + self.intercepts.as_ref().map_or(0.0, |b| b[l])
            })
            .collect())
    }

    /// Same weights with every coefficient and intercept multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightMatrix {
        let mut out = self.clone();
        out.weights.iter_mut().flatten().for_each(|w| *w *= factor);
        if let Some(b) = out.intercepts.as_mut() {
            b.iter_mut().for_each(|w| *w *= factor);
        }
        out
    }
}

/// Fits one regression per class on model-major level-1 features.
pub fn fit_mlr_features(
    features: &DesignMatrix,
    labels: &[usize],
    num_models: usize,
    num_classes: usize,
    config: &MlrConfig,
) -> Result<WeightMatrix> {
    if features.ncols() != num_models * num_classes {
        return Err(Error::Shape {
            what: "level-1 feature width for MLR",
            got: features.ncols(),
            expected: num_models * num_classes,
        });
    }
    if features.nrows() != labels.len() {
        return Err(Error::Shape {
            what: "level-1 label count",
            got: labels.len(),
            expected: features.nrows(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let responses = one_hot_responses(labels, num_classes)?;
    let fits: Vec<(Vec<f64>, f64)> = (0..num_classes)
        .into_par_iter()
        .map(|l| {
            let cols = WeightMatrix::scope_columns(config.scope, l, num_models, num_classes);
            let a = features.select_columns(&cols);
            let b = responses.column(l);
            match config.variant {
                MlrVariant::InterceptUnconstrained => {
                    let w = ols(&a, &b, true)?;
                    Ok((w.as_slice()[1..].to_vec(), w[0]))
                }
                MlrVariant::NoInterceptUnconstrained => Ok((ols(&a, &b, false)?.as_slice().to_vec(), 0.0)),
                MlrVariant::NoInterceptNonNegative => Ok((nnls(&a, &b)?.as_slice().to_vec(), 0.0)),
            }
        })
        .collect::<Result<_>>()?;
    let (weights, intercepts): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
    Ok(WeightMatrix {
        config: *config,
        num_models,
        num_classes,
        weights,
        intercepts: config.variant.has_intercept().then_some(intercepts),
    })
}

/// Fits MLR on level-1 data; class-label features are expanded to indicators.
pub fn fit_mlr(level1: &Level1Dataset, config: &MlrConfig) -> Result<WeightMatrix> {
    let design = DesignMatrix::from_rows(&level1.regression_rows(), level1.regression_labels())?;
    fit_mlr_features(&design, level1.labels(), level1.num_models(), level1.num_classes(), config)
}

/// Class with the greatest regression output (ties to the lowest index).
pub fn mlr_predict(weights: &WeightMatrix, features: &[f64]) -> Result<usize> {
    Ok(argmax(&weights.lr_values(features)?))
}
