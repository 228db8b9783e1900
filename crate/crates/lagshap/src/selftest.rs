//! Oracle checks runnable from the command line.

use lagshap_core::explain::{lime_explain, permutation_shap, tree_shap, Background, LimeSettings};
use lagshap_core::oracle::{interventional_shapley, random_row, random_unit_ensemble};
use lagshap_core::rng;
use lagshap_core::stats::dm_test;
use lagshap_core::supervise::Standardizer;
use lagshap_core::{FeatureMatrix, YearMonth};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    /// Worst observed deviation from the reference.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, cases: usize, max_deviation: f64, tolerance: f64) -> Self {
        Self { name: name.into(), cases, max_deviation, tolerance, passed: max_deviation < tolerance }
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("f{i}")).collect()
}

/// TreeSHAP against 2^p subset enumeration on random ensembles
/// (p <= 8, depth <= 3, one background row). Additivity gaps count too.
pub fn tree_shap_oracle(seed: u64, cases: usize) -> Check {
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let mut g = rng::stream(seed, &[1, case as u64]);
        let p = 1 + case % 8;
        let model = random_unit_ensemble(&mut g, p, 1 + case % 5, 1 + case % 3);
        let x = random_row(&mut g, p);
        let r = random_row(&mut g, p);
        let bg = Background::explicit(vec![r.clone()]).expect("one row");
        let got = tree_shap(&model, &x, &bg).expect("dimensions agree");
        let want = interventional_shapley(|row| model.predict_unchecked(row), &x, &r);
        worst = worst.max(max_abs_diff(&got.phi, &want)).max(got.additivity_gap());
    }
    Check::new("tree_shap_vs_enumeration", cases, worst, 1e-9)
}

/// Permutation SHAP with `m` permutations against enumeration on the same
/// kind of ensembles.
pub fn permutation_shap_oracle(seed: u64, cases: usize, m: usize) -> Check {
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let mut g = rng::stream(seed, &[2, case as u64]);
        let p = 1 + case % 8;
        let model = random_unit_ensemble(&mut g, p, 1 + case % 5, 1 + case % 3);
        let x = random_row(&mut g, p);
        let r = random_row(&mut g, p);
        let bg = Background::explicit(vec![r.clone()]).expect("one row");
        let predict = |row: &[f64]| model.predict_unchecked(row);
        let got = permutation_shap(predict, &names(p), &x, &bg, m, rng::derive_seed(seed, &[3, case as u64]))
            .expect("dimensions agree");
        let want = interventional_shapley(predict, &x, &r);
        worst = worst.max(max_abs_diff(&got.phi, &want));
    }
    Check::new("permutation_shap_vs_enumeration", cases, worst, 0.02)
}

/// Diebold-Mariano statistic and p-value on a fixed pair of error vectors,
/// against values evaluated independently by hand.
pub fn dm_oracle() -> Check {
    let e_a = [3.0, -1.0, 2.0, 4.0, -2.0, 5.0, 1.0, -3.0];
    let e_b = [1.0, 2.0, -1.0, 3.0, 1.0, -2.0, 2.0, 1.0];
    let dev = match dm_test(&e_a, &e_b, 1, true) {
        Ok(r) => (r.statistic - 2.0277205146264348).abs().max((r.p_value - 0.08218875368716569).abs()),
        Err(_) => f64::INFINITY,
    };
    Check::new("diebold_mariano_hand_values", 1, dev, 1e-9)
}

/// LIME on an exactly linear black box must return its weights.
pub fn lime_linear_oracle(seed: u64) -> Check {
    let mut g = rng::stream(seed, &[4]);
    let start = YearMonth::new(2000, 1).expect("valid month");
    let rows: Vec<Vec<f64>> = (0..60).map(|_| random_row(&mut g, 3).iter().map(|v| 5.0 * v).collect()).collect();
    let w = [1.5, -2.0, 0.25];
    let f = |x: &[f64]| 3.0 + x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let target = rows.iter().map(|r| f(r)).collect();
    let times = (0..60).map(|i| start.add_months(i)).collect();
    let train = FeatureMatrix::new(times, names(3), rows, target).expect("well formed");
    let sd = Standardizer::fit(&train).expect("non-constant columns");
    let mut worst: f64 = 0.0;
    for i in [0, 30, 59] {
        let settings = LimeSettings { seed: rng::derive_seed(seed, &[5, i as u64]), ..Default::default() };
        match lime_explain(f, &train.rows[i], &train, &sd, &settings) {
            Ok(e) => worst = worst.max(max_abs_diff(&e.coefficients, &w)).max((e.intercept - 3.0).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    Check::new("lime_linear_recovery", 3, worst, 1e-6)
}

/// The full suite as run by `lagshap selftest`.
pub fn run_selftest(seed: u64) -> Vec<Check> {
    vec![
        tree_shap_oracle(seed, 200),
        permutation_shap_oracle(seed, 100, 2000),
        dm_oracle(),
        lime_linear_oracle(seed),
    ]
}
