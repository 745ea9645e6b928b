mod common;

use common::{kkt_violation, objective, projected_gradient, random_problem};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackgen::mlr::{
    fit_mlr_features, mlr_predict, nnls, ols, DesignMatrix, FeatureScope, MlrConfig, MlrVariant,
};

fn rel_gap(ours: f64, oracle: f64, b: &DVector<f64>) -> f64 {
    // scale floor for problems with a (near-)exact fit
    let scale = oracle.max(1e-6 * 0.5 * b.norm_squared()).max(1e-300);
    (ours - oracle).abs() / scale
}

#[test]
fn matches_projected_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let (a, b) = random_problem(&mut rng);
        let x = nnls(&a, &b).unwrap();
        let oracle = projected_gradient(&a, &b);
        let (fo, fx) = (objective(&a, &b, &oracle), objective(&a, &b, &x));
        assert!(rel_gap(fx, fo, &b) <= 1e-8, "case {case}: nnls {fx} oracle {fo}");
        assert!(kkt_violation(&a, &b, &x) <= 1e-8, "case {case}: kkt {}", kkt_violation(&a, &b, &x));
    }
}

#[test]
fn agrees_with_ols_when_constraints_inactive() {
    let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0]);
    let b = DVector::from_vec(vec![1.0, 2.0, 3.1, 4.0]);
    let unconstrained = ols(&a, &b, false).unwrap();
    assert!(unconstrained.iter().all(|&w| w > 0.0));
    let x = nnls(&a, &b).unwrap();
    assert!((objective(&a, &b, &x) - objective(&a, &b, &unconstrained)).abs() <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn non_negative_and_not_beaten_by_perturbations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_problem(&mut rng);
        let x = nnls(&a, &b).unwrap();
        prop_assert!(x.iter().all(|&v| v >= 0.0));
        let best = objective(&a, &b, &x);
        for _ in 0..1000 {
            let y = x.map(|v| (v + rng.random_range(-0.1..0.1)).max(0.0));
            prop_assert!(objective(&a, &b, &y) >= best - 1e-12 * (1.0 + best));
        }
    }

    #[test]
    fn argmax_invariant_under_positive_scaling(seed in any::<u64>(), factor in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rows, labels) = level1_rows(&mut rng, 60, 3, 3);
        for variant in MlrVariant::ALL {
            let config = MlrConfig { variant, scope: FeatureScope::PerClass };
            let w = fit_mlr_features(&DesignMatrix::from_unlabeled_rows(&rows).unwrap(), &labels, 3, 3, &config).unwrap();
            let scaled = w.scaled(factor);
            for row in &rows {
                prop_assert_eq!(mlr_predict(&w, row).unwrap(), mlr_predict(&scaled, row).unwrap());
            }
        }
    }
}

/// Noisy probability vectors from `models` models that lean toward the true class.
fn level1_rows(rng: &mut ChaCha8Rng, n: usize, models: usize, classes: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let y = rng.random_range(0..classes);
        let mut row = Vec::new();
        for k in 0..models {
            let mut p: Vec<f64> = (0..classes).map(|_| rng.random::<f64>()).collect();
            p[y] += k as f64 * 0.5 + 0.3;
            let s: f64 = p.iter().sum();
            row.extend(p.iter().map(|v| v / s));
        }
        rows.push(row);
        labels.push(y);
    }
    (rows, labels)
}

#[test]
fn duplicated_model_matches_single_model_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (rows, labels) = level1_rows(&mut rng, 80, 1, 3);
    let doubled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().chain(r).copied().collect()).collect();
    for variant in MlrVariant::ALL {
        let config = MlrConfig { variant, scope: FeatureScope::PerClass };
        let one = fit_mlr_features(&DesignMatrix::from_unlabeled_rows(&rows).unwrap(), &labels, 1, 3, &config).unwrap();
        let two = fit_mlr_features(&DesignMatrix::from_unlabeled_rows(&doubled).unwrap(), &labels, 2, 3, &config).unwrap();
        for (r, d) in rows.iter().zip(&doubled) {
            let a = one.lr_values(r).unwrap();
            let b = two.lr_values(d).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-8, "{variant:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn weight_rows_need_not_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (rows, labels) = level1_rows(&mut rng, 100, 3, 3);
    let w = fit_mlr_features(&DesignMatrix::from_unlabeled_rows(&rows).unwrap(), &labels, 3, 3, &MlrConfig::default()).unwrap();
    assert!(w.weights.iter().flatten().all(|&v| v >= 0.0));
    assert!(w.weights.iter().any(|row| (row.iter().sum::<f64>() - 1.0).abs() > 1e-3), "{:?}", w.weights);
}

/// Model B is model A plus twice A's noise, so B's column is nearly
/// redundant and an unconstrained fit uses it to cancel the noise.
#[test]
fn collinear_fixture_sign_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..200 {
        let y = rng.random_range(0..2usize);
        let e = rng.random_range(-0.1..0.1);
        let pa = 0.2 + 0.6 * y as f64 + e;
        let pb = 0.2 + 0.6 * y as f64 + 2.0 * e;
        // class 0 probability first
        rows.push(vec![1.0 - pa, pa, 1.0 - pb, pb]);
        labels.push(1 - y);
    }
    let design = DesignMatrix::from_unlabeled_rows(&rows).unwrap();
    let fit = |variant| {
        fit_mlr_features(&design, &labels, 2, 2, &MlrConfig { variant, scope: FeatureScope::PerClass }).unwrap()
    };
    let iii = fit(MlrVariant::NoInterceptNonNegative);
    assert!(iii.weights.iter().flatten().all(|&w| w >= 0.0));
    assert!(iii.weights.iter().any(|row| row.contains(&0.0)), "{:?}", iii.weights);
    for variant in [MlrVariant::InterceptUnconstrained, MlrVariant::NoInterceptUnconstrained] {
        let w = fit(variant);
        assert!(w.weights.iter().flatten().any(|&v| v < 0.0), "{variant:?}: {:?}", w.weights);
    }
}
