#![allow(dead_code)]

use lagshap_core::gbt::{GbtHyperParams, GbtModel, Tree, MODEL_FORMAT_VERSION};
use lagshap_core::oracle;
use lagshap_core::{FeatureMatrix, YearMonth};
use rand::Rng;

/// Random tree of depth <= `max_depth` over `p` features with leaves in [-3, 3].
pub fn random_tree<R: Rng>(rng: &mut R, p: usize, max_depth: usize) -> Tree {
    oracle::random_tree(rng, p, max_depth, 3.0)
}

pub fn random_model<R: Rng>(rng: &mut R, p: usize, n_trees: usize, max_depth: usize) -> GbtModel {
    GbtModel {
        format_version: MODEL_FORMAT_VERSION,
        base_score: rng.gen_range(-1.0..1.0),
        learning_rate: rng.gen_range(0.05..1.0),
        columns: names(p),
        trees: (0..n_trees).map(|_| random_tree(rng, p, max_depth)).collect(),
        params: GbtHyperParams::default(),
    }
}

pub fn random_row<R: Rng>(rng: &mut R, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("f{i}")).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn matrix(rows: Vec<Vec<f64>>, target: Vec<f64>) -> FeatureMatrix {
    let start = YearMonth::new(2000, 1).unwrap();
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    FeatureMatrix::new((0..n as i64).map(|i| start.add_months(i)).collect(), names(p), rows, target).unwrap()
}
