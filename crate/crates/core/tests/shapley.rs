mod common;

use common::*;
use lagshap_core::gbt::TreeNode;
use lagshap_core::explain::{permutation_shap, tree_shap, tree_shap_tree, Background};
use lagshap_core::oracle::{interventional_shapley, interventional_shapley_multi, shapley_by_enumeration};
use lagshap_core::rng;
use rand::Rng;

#[test]
fn tree_shap_matches_subset_enumeration_on_random_ensembles() {
    let mut g = rng::stream(2024, &[]);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let p = 1 + case % 8;
        let n_trees = g.gen_range(1..6);
        let model = random_model(&mut g, p, n_trees, 1 + case % 3);
        let x = random_row(&mut g, p);
        let r = random_row(&mut g, p);
        let got = tree_shap(&model, &x, &Background::explicit(vec![r.clone()]).unwrap()).unwrap();
        let want = interventional_shapley(|row| model.predict_unchecked(row), &x, &r);
        worst = worst.max(max_abs_diff(&got.phi, &want));
        assert!(got.additivity_gap() < 1e-9);
    }
    assert!(worst < 1e-9, "max deviation {worst}");
}

#[test]
fn tree_shap_multi_row_background_matches_averaged_oracle() {
    let mut g = rng::stream(7, &[]);
    for _ in 0..30 {
        let p = g.gen_range(2..7);
        let model = random_model(&mut g, p, 4, 3);
        let x = random_row(&mut g, p);
        let bg: Vec<Vec<f64>> = (0..5).map(|_| random_row(&mut g, p)).collect();
        let got = tree_shap(&model, &x, &Background::explicit(bg.clone()).unwrap()).unwrap();
        let want = interventional_shapley_multi(|row| model.predict_unchecked(row), &x, &bg);
        assert!(max_abs_diff(&got.phi, &want) < 1e-9);
        let mean_pred = bg.iter().map(|r| model.predict_unchecked(r)).sum::<f64>() / 5.0;
        assert!((got.baseline_value - mean_pred).abs() < 1e-12);
        assert!(got.additivity_gap() < 1e-9);
    }
}

#[test]
fn tree_shap_is_additive_over_trees() {
    let mut g = rng::stream(8, &[]);
    for _ in 0..50 {
        let p = 5;
        let model = random_model(&mut g, p, 2, 3);
        let x = random_row(&mut g, p);
        let r = random_row(&mut g, p);
        let whole = tree_shap(&model, &x, &Background::explicit(vec![r.clone()]).unwrap()).unwrap();
        let mut parts = vec![0.0; p];
        for t in &model.trees {
            tree_shap_tree(t, &x, &r, model.learning_rate, &mut parts);
        }
        assert!(max_abs_diff(&whole.phi, &parts) < 1e-9);
    }
}

#[test]
fn dummy_feature_gets_zero() {
    let mut g = rng::stream(9, &[]);
    for _ in 0..50 {
        let p = 6;
        let model = random_model(&mut g, p, 3, 3);
        let mut x = random_row(&mut g, p);
        let bg: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let mut r = random_row(&mut g, p);
                r[2] = 0.25;
                r
            })
            .collect();
        x[2] = 0.25;
        let a = tree_shap(&model, &x, &Background::explicit(bg).unwrap()).unwrap();
        assert_eq!(a.phi[2], 0.0);
    }
}

#[test]
fn oracle_symmetry_for_interchangeable_features() {
    // v depends on features 1 and 3 only through their sum.
    let f = |x: &[f64]| (x[1] + x[3]).powi(2) + x[0] * x[2] - x[4];
    let x = [0.3, 1.0, -0.7, 1.0, 0.2];
    let r = [0.0, -0.5, 0.4, -0.5, 1.0];
    let phi = interventional_shapley(f, &x, &r);
    assert!((phi[1] - phi[3]).abs() < 1e-9);
}

#[test]
fn enumeration_matches_closed_form_games() {
    // Glove game: players 0,1 own left gloves, player 2 a right glove.
    let v = |m: u32| {
        let left = (m & 1 != 0) as u32 + (m & 2 != 0) as u32;
        let right = (m & 4 != 0) as u32;
        left.min(right) as f64
    };
    let phi = shapley_by_enumeration(3, v);
    assert!((phi[0] - 1.0 / 6.0).abs() < 1e-12);
    assert!((phi[1] - 1.0 / 6.0).abs() < 1e-12);
    assert!((phi[2] - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn permutation_shap_converges_to_oracle() {
    let f = |x: &[f64]| x[0] * x[1] + (x[2] - x[3]).abs() + 0.5 * x[4] * x[4] * x[5] + x[5].sin();
    let x = [1.2, -0.8, 0.5, -1.1, 0.9, 1.4];
    let b = [0.1, 0.3, -0.2, 0.4, -0.5, 0.0];
    let bg = Background::explicit(vec![b.to_vec()]).unwrap();
    let a = permutation_shap(f, &names(6), &x, &bg, 2000, 31).unwrap();
    let want = interventional_shapley(f, &x, &b);
    let dev = max_abs_diff(&a.phi, &want);
    assert!(dev < 0.02, "max deviation {dev}");
    assert!(a.additivity_gap() < 1e-9);
}

#[test]
fn permutation_shap_on_random_ensembles() {
    // Leaves in [-1, 1] and lr = 1 / n_trees keep every output within a unit
    // band around the base score, so 0.02 is an absolute tolerance on a fixed scale.
    let mut g = rng::stream(77, &[]);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let p = 2 + case % 7;
        let mut model = random_model(&mut g, p, 3, 3);
        model.learning_rate = 1.0 / 3.0;
        for t in &mut model.trees {
            for node in &mut t.nodes {
                if let TreeNode::Leaf { value, .. } = node {
                    *value /= 3.0;
                }
            }
        }
        let x = random_row(&mut g, p);
        let r = random_row(&mut g, p);
        let bg = Background::explicit(vec![r.clone()]).unwrap();
        let a = permutation_shap(|row| model.predict_unchecked(row), &names(p), &x, &bg, 2000, case as u64).unwrap();
        let want = interventional_shapley(|row| model.predict_unchecked(row), &x, &r);
        worst = worst.max(max_abs_diff(&a.phi, &want));
    }
    assert!(worst < 0.02, "max deviation {worst}");
}
