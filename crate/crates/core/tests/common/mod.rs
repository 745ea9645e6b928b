#![allow(dead_code)]

use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use stackgen::data::{Attribute, Dataset, Instance, Schema, Value};
use stackgen::error::Result;
use stackgen::learners::{Classifier, Learner, ProbVector};

pub fn objective(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * (a * x - b).norm_squared()
}

/// Accelerated projected gradient on `½‖Ax − b‖²` over `x ≥ 0`, with
/// function-value restarts, iterated until the iterates stop moving.
pub fn projected_gradient(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let gram = a.transpose() * a;
    let atb = a.transpose() * b;
    let lipschitz = gram.symmetric_eigenvalues().max().max(1e-300);
    let step = 1.0 / lipschitz;
    let project = |v: DVector<f64>| v.map(|t| t.max(0.0));
    let f = |x: &DVector<f64>| 0.5 * x.dot(&(&gram * x)) - x.dot(&atb);

    let mut x = DVector::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = f(&x);
    for _ in 0..2_000_000 {
        let grad = &gram * &y - &atb;
        let next = project(&y - grad * step);
        let f_next = f(&next);
        if f_next > fx {
            if t == 1.0 {
                // a plain gradient step no longer descends
                break;
            }
            y = x.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let moved = (&next - &x).norm();
        y = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        fx = f_next;
        t = t_next;
        if moved <= 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DVector<f64>) {
    let m = rng.random_range(1..=20);
    let n = rng.random_range(1..=8);
    let mut a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    if n >= 2 && rng.random_bool(0.25) {
        // an exactly collinear column
        let c = rng.random_range(0.5..2.0);
        let col = a.column(0) * c;
        a.set_column(n - 1, &col);
    }
    if rng.random_bool(0.25) {
        // probability-like non-negative design
        a = a.map(f64::abs);
    }
    let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
    (a, b)
}

/// Largest violation of the NNLS optimality conditions at `x`.
pub fn kkt_violation(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let grad = a.transpose() * (a * x - b);
    let mut worst = 0.0f64;
    for j in 0..x.len() {
        worst = worst.max(-x[j]);
        worst = worst.max(-grad[j]);
        if x[j] > 0.0 {
            worst = worst.max(grad[j].abs());
        }
        worst = worst.max((x[j] * grad[j]).abs());
    }
    worst
}

/// Instances carry a unique id in attribute 0 so membership is observable.
pub fn id_dataset(n: usize, classes: usize) -> Dataset {
    let schema = Schema::new(
        vec![Attribute::continuous("id"), Attribute::continuous("x")],
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .unwrap();
    let instances = (0..n)
        .map(|i| Instance::continuous(&[i as f64, (i * 7 % 5) as f64], i % classes))
        .collect();
    Dataset::new(schema, instances).unwrap()
}

/// Outputs one-hot class 0 exactly when the query was in its training set,
/// one-hot of the last class otherwise. Records every training-set size.
#[derive(Default)]
pub struct LeakLearner {
    pub train_sizes: Mutex<Vec<usize>>,
}

pub struct LeakModel {
    seen: Vec<Vec<Value>>,
    classes: usize,
}

impl LeakModel {
    pub fn saw(&self, x: &Instance) -> bool {
        self.seen.contains(&x.values)
    }
}

impl Classifier for LeakModel {
    fn num_classes(&self) -> usize {
        self.classes
    }

    fn class_probs(&self, x: &Instance) -> ProbVector {
        let class = if self.saw(x) { 0 } else { self.classes - 1 };
        ProbVector::one_hot(class, self.classes)
    }
}

impl Learner for LeakLearner {
    type Model = LeakModel;

    fn fit(&self, train: &Dataset) -> Result<LeakModel> {
        self.train_sizes.lock().unwrap().push(train.len());
        Ok(LeakModel {
            seen: train.instances().iter().map(|x| x.values.clone()).collect(),
            classes: train.num_classes(),
        })
    }
}

/// Mixed continuous, nominal and binary attributes with class-dependent
/// structure plus noise.
pub fn mixed_dataset(rng: &mut ChaCha8Rng, n: usize, classes: usize) -> Dataset {
    let schema = Schema::new(
        vec![
            Attribute::continuous("c0"),
            Attribute::nominal("n0", ["a", "b", "c", "d"]),
            Attribute::binary("b0", ["no", "yes"]),
            Attribute::continuous("c1"),
            Attribute::continuous("const"),
            Attribute::nominal("n1", ["u", "v", "w"]),
        ],
        (0..classes).map(|c| format!("k{c}")).collect(),
    )
    .unwrap();
    let instances = (0..n)
        .map(|_| {
            let class = rng.random_range(0..classes);
            let values = vec![
                Value::Continuous(class as f64 + rng.random_range(-1.5..1.5)),
                Value::Nominal(if rng.random_bool(0.6) { class % 4 } else { rng.random_range(0..4) }),
                Value::Nominal(usize::from(rng.random_bool(if class == 0 { 0.8 } else { 0.3 }))),
                Value::Continuous(rng.random_range(-100.0..100.0)),
                Value::Continuous(3.0),
                Value::Nominal(rng.random_range(0..3)),
            ];
            Instance::new(values, class)
        })
        .collect();
    Dataset::new(schema, instances).unwrap()
}

/// Queries, some outside the training range or with missing cells.
pub fn fuzz_queries(rng: &mut ChaCha8Rng, ds: &Dataset, n: usize) -> Vec<Instance> {
    (0..n)
        .map(|_| {
            let values = ds
                .schema()
                .attributes()
                .iter()
                .map(|attr| {
                    if rng.random_bool(0.05) {
                        return Value::Missing;
                    }
                    match attr.kind.values() {
                        Some(v) => Value::Nominal(rng.random_range(0..v.len())),
                        None => Value::Continuous(rng.random_range(-500.0..500.0)),
                    }
                })
                .collect();
            Instance::unlabeled(values)
        })
        .collect()
}

pub fn assert_valid_probs(p: &ProbVector, classes: usize) {
    assert_eq!(p.len(), classes);
    assert!(p.as_slice().iter().all(|&v| v >= 0.0 && v.is_finite()), "{p:?}");
    let sum: f64 = p.as_slice().iter().sum();
    assert!((sum - 1.0).abs() <= 1e-9, "sum {sum}");
}
