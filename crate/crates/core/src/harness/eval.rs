use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split, stratified_folds, Dataset};
use crate::error::{Error, Result};
use crate::harness::method::Method;
use crate::rng::child_seed;
use crate::synth::{gen_led24, gen_waveform, Led24Params, WaveformParams, WaveformVariant};

/// Which synthetic task a trial draws from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GenSpec {
    Led24 { noise: f64 },
    Waveform { variant: WaveformVariant },
}

impl GenSpec {
    pub fn generate(&self, n: usize, seed: u64) -> Result<Dataset> {
        match *self {
            GenSpec::Led24 { noise } => gen_led24(&Led24Params { n, noise, seed }),
            GenSpec::Waveform { variant } => gen_waveform(&WaveformParams { n, variant, seed }),
        }
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    /// `led24`, `led24:noise=F`, `waveform` (40 attributes) or `waveform:width=21|40`.
    fn from_str(text: &str) -> Result<Self> {
        let (head, param) = match text.trim().split_once(':') {
            Some((h, p)) => (h, Some(p.split_once('=').unwrap_or((p, "")))),
            None => (text.trim(), None),
        };
        match (head, param) {
            ("led24", None) => Ok(GenSpec::Led24 { noise: 0.1 }),
            ("led24", Some(("noise", v))) => {
                let noise: f64 = v
                    .parse()
                    .map_err(|_| Error::param(format!("noise must be a number, got {v:?}")))?;
                if !(0.0..=1.0).contains(&noise) {
                    return Err(Error::param(format!("noise must lie in [0, 1], got {noise}")));
                }
                Ok(GenSpec::Led24 { noise })
            }
            ("waveform", None) => Ok(GenSpec::Waveform {
                variant: WaveformVariant::Noisy40,
            }),
            ("waveform", Some(("width", v))) => {
                let width = v
                    .parse()
                    .map_err(|_| Error::param(format!("width must be 21 or 40, got {v:?}")))?;
                Ok(GenSpec::Waveform {
                    variant: WaveformVariant::from_width(width)?,
                })
            }
            _ => Err(Error::param(format!("unknown generator {text:?}"))),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Led24 { noise } => write!(f, "led24:noise={noise}"),
            GenSpec::Waveform { variant } => write!(f, "waveform:width={}", variant.width()),
        }
    }
}

/// Error rates of one method under one protocol, in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub method: String,
    /// `cv` for outer cross-validation, `trials` for repeated synthetic trials.
    pub protocol: String,
    pub mean: f64,
    /// Sample standard deviation of `errors` over the square root of `runs`.
    pub se: f64,
    /// Per-fold or per-trial error rates.
    pub errors: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
}

/// Mean and standard error of per-run error rates. One run has SE 0.
pub fn mean_and_se(errors: &[f64]) -> (f64, f64) {
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    if errors.len() < 2 {
        return (mean, 0.0);
    }
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn error_percent(predicted: &[usize], actual: &Dataset) -> f64 {
    let wrong = predicted
        .iter()
        .zip(actual.instances())
        .filter(|(p, x)| Some(**p) != x.class)
        .count();
    100.0 * wrong as f64 / actual.len() as f64
}

fn result(method: &dyn Method, protocol: &str, errors: Vec<f64>, seed: u64) -> EvalResult {
    let (mean, se) = mean_and_se(&errors);
    EvalResult {
        method: method.label(),
        protocol: protocol.into(),
        mean,
        se,
        runs: errors.len(),
        errors,
        seed,
    }
}

/// Stratified `outer_folds`-fold cross-validation of `method` on `dataset`.
pub fn outer_cv_eval<M: Method>(dataset: &Dataset, method: &M, outer_folds: usize, seed: u64) -> Result<EvalResult> {
    let plan = stratified_folds(dataset, outer_folds, child_seed(seed, "outer-folds", 0))?;
    let errors = (0..outer_folds)
        .into_par_iter()
        .map(|w| {
            let (train, test) = split(dataset, &plan, w)?;
            let predicted = method.fit_predict(&train, test.instances(), child_seed(seed, "outer-fit", w as u64))?;
            Ok(error_percent(&predicted, &test))
        })
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| e.context(format!("outer cross-validation of {}", method.label())))?;
    Ok(result(method, "cv", errors, seed))
}

/// Fresh train and test sets per trial; the data depend only on `seed` and
/// the trial index, so every method sees the same draws.
pub fn repeated_trials_eval<M: Method>(
    gen: &GenSpec,
    train_n: usize,
    test_n: usize,
    method: &M,
    trials: usize,
    seed: u64,
) -> Result<EvalResult> {
    if trials == 0 {
        return Err(Error::param("trials must be >= 1"));
    }
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| {
            let t = t as u64;
            let train = gen.generate(train_n, child_seed(seed, "train-data", t))?;
            let test = gen.generate(test_n, child_seed(seed, "test-data", t))?;
            let predicted = method
                .fit_predict(&train, test.instances(), child_seed(seed, "trial-fit", t))
                .map_err(|e| e.context(format!("trial {t}")))?;
            Ok(error_percent(&predicted, &test))
        })
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| e.context(format!("repeated trials of {}", method.label())))?;
    Ok(result(method, "trials", errors, seed))
}

/// Standard errors of BestCV separating it from the worst level-0 learner.
pub fn se_count(best_cv_error: f64, worst_level0_error: f64, best_cv_se: f64) -> Result<f64> {
    if best_cv_se.is_nan() || best_cv_se <= 0.0 {
        return Err(Error::param(format!("standard error must be positive, got {best_cv_se}")));
    }
    Ok((worst_level0_error - best_cv_error) / best_cv_se)
}
