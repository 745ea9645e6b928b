//! Stacked generalization for classification.
//!
//! Level-0 learners are trained under J-fold cross-validation to build
//! level-1 data from their class predictions or class-probability vectors.
//! A level-1 generalizer, by default multi-response linear regression with
//! non-negative weights, then learns how to combine them.
//!
//! ```no_run
//! use stackgen::learners::LearnerSpec;
//! use stackgen::stacking::{fit_stacked, stacked_predict, Level1Generalizer, Representation};
//! use stackgen::synth::{gen_led24, Led24Params};
//!
//! let train = gen_led24(&Led24Params::new(200, 1)).unwrap();
//! let model = fit_stacked(
//!     &train,
//!     &LearnerSpec::default_trio(),
//!     &Level1Generalizer::default(),
//!     10,
//!     Representation::ClassProbs,
//!     7,
//! )
//! .unwrap();
//! let (class, _scores) = stacked_predict(&model, train.instance(0)).unwrap();
//! println!("predicted {}", train.schema().class_values()[class]);
//! ```

pub mod baselines;
pub mod data;
pub mod error;
pub mod harness;
pub mod learners;
pub mod mlr;
pub mod rng;
pub mod stacking;
pub mod synth;

pub use error::{Error, Result};
