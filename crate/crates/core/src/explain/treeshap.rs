//! Exact interventional TreeSHAP by path enumeration.
//!
//! For one instance `x` and one background row `r`, a tree is walked
//! following both rows at once. Where they disagree at a split on a feature
//! not yet fixed on the path, the walk branches: one branch fixes the feature
//! to `x` (set A), the other to `r` (set B). A leaf with value `v` reached
//! with sets A and B of sizes a and b contributes
//!
//! ```text
//! +v (a-1)! b! / (a+b)!   to each feature in A
//! -v a! (b-1)! / (a+b)!   to each feature in B
//! ```
//!
//! which are the Shapley values of the game `v * [A in S and B disjoint S]`.

use alloc::vec::Vec;

use super::{Attribution, Background};
use crate::error::{Error, Result};
use crate::gbt::{GbtModel, Tree, TreeNode};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Free,
    Instance,
    Reference,
}

struct Walk<'a> {
    tree: &'a Tree,
    x: &'a [f64],
    r: &'a [f64],
    side: Vec<Side>,
    from_x: Vec<usize>,
    from_r: Vec<usize>,
    phi: &'a mut [f64],
    scale: f64,
}

/// (a-1)! b! / (a+b)!  for a >= 1.
fn weight(a: usize, b: usize) -> f64 {
    // 1 / (a * C(a+b, b))
    let mut c = 1.0;
    for k in 1..=b {
        c = c * (a + k) as f64 / k as f64;
    }
    1.0 / (a as f64 * c)
}

impl Walk<'_> {
    fn go(&mut self, node: usize) {
        match self.tree.nodes[node] {
            TreeNode::Leaf { value, .. } => {
                let (a, b) = (self.from_x.len(), self.from_r.len());
                if a + b == 0 {
                    return;
                }
                let v = value * self.scale;
                if a > 0 {
                    let w = v * weight(a, b);
                    for &i in &self.from_x {
                        self.phi[i] += w;
                    }
                }
                if b > 0 {
                    let w = v * weight(b, a);
                    for &i in &self.from_r {
                        self.phi[i] -= w;
                    }
                }
            }
            TreeNode::Split { feature, threshold, left, right, .. } => {
                let x_child = if self.x[feature] < threshold { left } else { right };
                let r_child = if self.r[feature] < threshold { left } else { right };
                match self.side[feature] {
                    Side::Instance => self.go(x_child),
                    Side::Reference => self.go(r_child),
                    Side::Free if x_child == r_child => self.go(x_child),
                    Side::Free => {
                        self.side[feature] = Side::Instance;
                        self.from_x.push(feature);
                        self.go(x_child);
                        self.from_x.pop();

                        self.side[feature] = Side::Reference;
                        self.from_r.push(feature);
                        self.go(r_child);
                        self.from_r.pop();

                        self.side[feature] = Side::Free;
                    }
                }
            }
        }
    }
}

/// Adds `scale` times the interventional Shapley values of one tree, for
/// instance `x` against background row `r`, into `phi`.
pub fn tree_shap_tree(tree: &Tree, x: &[f64], r: &[f64], scale: f64, phi: &mut [f64]) {
    let mut walk = Walk {
        tree,
        x,
        r,
        side: alloc::vec![Side::Free; x.len()],
        from_x: Vec::new(),
        from_r: Vec::new(),
        phi,
        scale,
    };
    walk.go(0);
}

/// Exact interventional Shapley values of the ensemble, averaged over the
/// background rows.
pub fn tree_shap(model: &GbtModel, instance: &[f64], background: &Background) -> Result<Attribution> {
    let p = model.n_features();
    if instance.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: instance.len() });
    }
    background.check_dim(p)?;
    let n_bg = background.rows.len() as f64;
    let mut phi = alloc::vec![0.0; p];
    let scale = model.learning_rate / n_bg;
    for r in &background.rows {
        for tree in &model.trees {
            tree_shap_tree(tree, instance, r, scale, &mut phi);
        }
    }
    let baseline_value = background.rows.iter().map(|r| model.predict_unchecked(r)).sum::<f64>() / n_bg;
    Ok(Attribution {
        features: model.columns.clone(),
        phi,
        baseline_value,
        prediction: model.predict_unchecked(instance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbt::{GbtHyperParams, MODEL_FORMAT_VERSION};
    use alloc::vec;

    fn stump_model(feature: usize, p: usize) -> GbtModel {
        GbtModel {
            format_version: MODEL_FORMAT_VERSION,
            base_score: 1.0,
            learning_rate: 1.0,
            columns: (0..p).map(|i| alloc::format!("f{i}")).collect(),
            trees: vec![Tree {
                nodes: vec![
                    TreeNode::Split { feature, threshold: 0.0, left: 1, right: 2, cover: 2.0 },
                    TreeNode::Leaf { value: -4.0, cover: 1.0 },
                    TreeNode::Leaf { value: 6.0, cover: 1.0 },
                ],
            }],
            params: GbtHyperParams::default(),
        }
    }

    #[test]
    fn stump_credits_only_its_feature() {
        let m = stump_model(1, 3);
        let bg = Background::explicit(vec![vec![0.0, -1.0, 0.0]]).unwrap();
        let a = tree_shap(&m, &[5.0, 1.0, -5.0], &bg).unwrap();
        assert_eq!(a.phi, vec![0.0, 10.0, 0.0]);
        assert_eq!(a.baseline_value, -3.0);
        assert_eq!(a.prediction, 7.0);
    }

    #[test]
    fn shapley_weights() {
        assert_eq!(weight(1, 0), 1.0);
        assert_eq!(weight(1, 1), 0.5);
        assert!((weight(2, 1) - 1.0 / 6.0).abs() < 1e-15);
        assert!((weight(1, 2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn repeated_feature_on_path() {
        // x0 < 0 then x0 < 1 on the right branch: same feature twice on a path.
        let m = GbtModel {
            trees: vec![Tree {
                nodes: vec![
                    TreeNode::Split { feature: 0, threshold: 0.0, left: 1, right: 2, cover: 3.0 },
                    TreeNode::Leaf { value: 1.0, cover: 1.0 },
                    TreeNode::Split { feature: 0, threshold: 1.0, left: 3, right: 4, cover: 2.0 },
                    TreeNode::Leaf { value: 2.0, cover: 1.0 },
                    TreeNode::Leaf { value: 3.0, cover: 1.0 },
                ],
            }],
            ..stump_model(0, 2)
        };
        let bg = Background::explicit(vec![vec![-1.0, 0.0]]).unwrap();
        let a = tree_shap(&m, &[2.0, 0.0], &bg).unwrap();
        assert!((a.phi[0] - 2.0).abs() < 1e-15);
        assert_eq!(a.phi[1], 0.0);
        assert!(a.additivity_gap() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let m = stump_model(0, 2);
        let bg = Background::explicit(vec![vec![0.0, 0.0, 0.0]]).unwrap();
        assert!(tree_shap(&m, &[0.0, 0.0], &bg).is_err());
        let bg = Background::explicit(vec![vec![0.0, 0.0]]).unwrap();
        assert!(tree_shap(&m, &[0.0], &bg).is_err());
    }
}
