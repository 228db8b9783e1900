//! Brute-force reference computations.
//!
//! These are deliberately naive: they enumerate every coalition and share no
//! code with the production explainers, so they can serve as independent
//! checks in tests and in the command-line self test.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::gbt::{GbtHyperParams, GbtModel, Tree, TreeNode, MODEL_FORMAT_VERSION};

/// Exact Shapley values of a `p`-player game given by `value(mask)`, where bit
/// `i` of `mask` set means player `i` is present. Intended for `p <= 16`.
pub fn shapley_by_enumeration<F: FnMut(u32) -> f64>(p: usize, mut value: F) -> Vec<f64> {
    assert!(p <= 20, "enumeration over 2^{p} coalitions is not supported");
    let n_masks = 1u32 << p;
    let values: Vec<f64> = (0..n_masks).map(&mut value).collect();
    // factorials up to p
    let mut fact = alloc::vec![1.0f64; p + 1];
    for k in 1..=p {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut phi = alloc::vec![0.0; p];
    for (i, out) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        let mut acc = 0.0;
        for mask in 0..n_masks {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = fact[s] * fact[p - s - 1] / fact[p];
            acc += weight * (values[(mask | bit) as usize] - values[mask as usize]);
        }
        *out = acc;
    }
    phi
}

/// Interventional Shapley values of `predict` at `instance` against a single
/// background row: absent features take the background value.
pub fn interventional_shapley<F: Fn(&[f64]) -> f64>(predict: F, instance: &[f64], background: &[f64]) -> Vec<f64> {
    let p = instance.len();
    let mut buf = alloc::vec![0.0; p];
    shapley_by_enumeration(p, |mask| {
        for j in 0..p {
            buf[j] = if mask & (1 << j) != 0 { instance[j] } else { background[j] };
        }
        predict(&buf)
    })
}

/// Average of [`interventional_shapley`] over several background rows.
pub fn interventional_shapley_multi<F: Fn(&[f64]) -> f64>(predict: F, instance: &[f64], background: &[Vec<f64>]) -> Vec<f64> {
    let mut phi = alloc::vec![0.0; instance.len()];
    for r in background {
        for (a, b) in phi.iter_mut().zip(interventional_shapley(&predict, instance, r)) {
            *a += b / background.len() as f64;
        }
    }
    phi
}

/// Random tree of depth `<= max_depth` over `p` features. Thresholds lie in
/// (-0.8, 0.8) so rows drawn from [-1, 1] reach both sides; leaves lie in
/// `[-leaf_bound, leaf_bound]`.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, p: usize, max_depth: usize, leaf_bound: f64) -> Tree {
    let mut nodes = Vec::new();
    grow(rng, p, max_depth, leaf_bound, &mut nodes);
    Tree { nodes }
}

fn grow<R: Rng + ?Sized>(rng: &mut R, p: usize, depth_left: usize, leaf_bound: f64, nodes: &mut Vec<TreeNode>) -> usize {
    let id = nodes.len();
    if depth_left == 0 || rng.gen_bool(0.2) {
        nodes.push(TreeNode::Leaf { value: rng.gen_range(-leaf_bound..leaf_bound), cover: 1.0 });
        return id;
    }
    nodes.push(TreeNode::Leaf { value: 0.0, cover: 0.0 });
    let feature = rng.gen_range(0..p);
    let threshold = rng.gen_range(-0.8..0.8);
    let left = grow(rng, p, depth_left - 1, leaf_bound, nodes);
    let right = grow(rng, p, depth_left - 1, leaf_bound, nodes);
    let cover = nodes[left].cover() + nodes[right].cover();
    nodes[id] = TreeNode::Split { feature, threshold, left, right, cover };
    id
}

/// Ensemble of `n_trees` random trees with unit leaves and learning rate
/// `1 / n_trees`: every prediction lies within 1 of the base score.
pub fn random_unit_ensemble<R: Rng + ?Sized>(rng: &mut R, p: usize, n_trees: usize, max_depth: usize) -> GbtModel {
    let n_trees = n_trees.max(1);
    GbtModel {
        format_version: MODEL_FORMAT_VERSION,
        base_score: rng.gen_range(-1.0..1.0),
        learning_rate: 1.0 / n_trees as f64,
        columns: (0..p).map(|i| format!("f{i}")).collect(),
        trees: (0..n_trees).map(|_| random_tree(rng, p, max_depth, 1.0)).collect(),
        params: GbtHyperParams::default(),
    }
}

/// Row with entries uniform in [-1, 1].
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
