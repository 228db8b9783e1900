mod common;

use common::*;
use lagshap_core::explain::{
    explanation_stability, kernel_width_sweep, lime_explain, permutation_importance, seasonal_background,
    BackgroundStrategy, LimeSettings, StabilitySettings,
};
use lagshap_core::gbt::{fit_gbt, GbtHyperParams};
use lagshap_core::rng;
use lagshap_core::supervise::Standardizer;
use lagshap_core::FeatureMatrix;
use rand::Rng;

fn dataset(n: usize, seed: u64) -> FeatureMatrix {
    let mut g = rng::stream(seed, &[]);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![g.gen_range(0.0..10.0), g.gen_range(-5.0..5.0), g.gen_range(100.0..200.0), 1.0]).collect();
    let y = rows.iter().map(|r| 2.0 * r[0] + (r[1]).sin()).collect();
    matrix(rows, y)
}

#[test]
fn lime_recovers_linear_weights() {
    let train = dataset(120, 1);
    let sd = Standardizer::fit(&train).unwrap();
    let w = [1.25, -3.0, 0.02, 7.0];
    let f = |x: &[f64]| 4.0 + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    for i in [0, 17, 99] {
        let e = lime_explain(f, &train.rows[i], &train, &sd, &LimeSettings { seed: i as u64, ..Default::default() }).unwrap();
        // Column 3 is constant, so only the intercept sees its weight.
        for j in 0..3 {
            assert!((e.coefficients[j] - w[j]).abs() < 1e-6, "{j}: {}", e.coefficients[j]);
        }
        assert!((e.intercept + e.coefficients[3] - 11.0).abs() < 1e-6);
        assert!(e.surrogate_r2 >= 0.999);
        assert_eq!(e.coefficients.len(), 4);
    }
}

#[test]
fn lime_sweep_on_linear_model() {
    let train = dataset(80, 2);
    let sd = Standardizer::fit(&train).unwrap();
    let f = |x: &[f64]| x[0] - 2.0 * x[1];
    let r = kernel_width_sweep(f, &train.rows[..6], &train, &sd, &[0.5, 0.75, 1.0], 1000, 3).unwrap();
    assert!(r.factors.iter().all(|s| s.median_r2 >= 0.999));
    assert_eq!(r.explanations.len(), 6);
}

#[test]
fn importance_of_unused_feature_is_zero() {
    let train = dataset(100, 3);
    let m = fit_gbt(&train, &GbtHyperParams { n_trees: 50, ..Default::default() }).unwrap();
    let used: std::collections::BTreeSet<usize> = m.trees.iter().flat_map(|t| t.split_features()).collect();
    let imp = permutation_importance(|r| m.predict_unchecked(r), &dataset(30, 4), 10, 5).unwrap();
    for e in &imp {
        let j: usize = e.feature[1..].parse().unwrap();
        if !used.contains(&j) {
            assert_eq!(e.mean_increase, 0.0);
        }
    }
    assert_eq!(imp[0].feature, "f0");
    assert!(imp[0].mean_increase > 0.0);
}

#[test]
fn seasonal_background_whole_train_when_single_month() {
    let fm = dataset(10, 5);
    let times = (0..10).map(|i| fm.times[2].add_months(12 * i)).collect();
    let fm = FeatureMatrix::new(times, fm.columns.clone(), fm.rows.clone(), fm.target.clone()).unwrap();
    assert_eq!(seasonal_background(&fm, 3).unwrap().rows, fm.rows);
}

#[test]
fn stability_trivial_cases() {
    let all = dataset(60, 6);
    let (train, test) = (all.slice(0..48), all.slice(48..60));
    let fit = |fm: &FeatureMatrix| fit_gbt(fm, &GbtHyperParams { n_trees: 30, ..Default::default() });
    let same = StabilitySettings { n_bootstrap: 3, block_length: 48, seed: 1 };
    let r = explanation_stability(fit, &train, &test, BackgroundStrategy::GlobalMean, &same).unwrap();
    assert_eq!(r.pairwise.len(), 3);
    assert!((r.mean_spearman - 1.0).abs() < 1e-12);
    let two = StabilitySettings { n_bootstrap: 2, block_length: 12, seed: 2 };
    let r = explanation_stability(fit, &train, &test, BackgroundStrategy::GlobalMean, &two).unwrap();
    assert_eq!(r.pairwise.len(), 1);
    assert!(explanation_stability(fit, &train, &test, BackgroundStrategy::GlobalMean, &StabilitySettings { n_bootstrap: 1, ..two }).is_err());
}
