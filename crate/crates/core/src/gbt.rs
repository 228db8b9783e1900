//! Gradient-boosted regression trees for squared-error loss.
//!
//! Each round fits a depth-limited binary tree to the gradients
//! `g_i = yhat_i - y_i` (hessians are 1) by exact greedy search over the
//! split gain
//!
//! ```text
//! gain = 1/2 [ G_L^2/(H_L+l) + G_R^2/(H_R+l) - (G_L+G_R)^2/(H_L+H_R+l) ]
//! ```
//!
//! with leaf weights `-G/(H+l)`, where `l` is the L2 leaf penalty. Thresholds
//! sit at midpoints between consecutive distinct values; rows with
//! `value < threshold` go left, everything else (ties included) goes right.
//! Among equal gains the lowest feature index wins, then the lowest threshold.

use alloc::string::String;
use alloc::vec::Vec;

use libm::sqrt;
use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::supervise::FeatureMatrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtHyperParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub row_subsample: f64,
    pub col_subsample: f64,
    pub l2_leaf: f64,
    pub min_split_gain: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GbtHyperParams {
    fn default() -> Self {
        Self {
            n_trees: 600,
            max_depth: 3,
            learning_rate: 0.05,
            row_subsample: 0.9,
            col_subsample: 0.9,
            l2_leaf: 1.0,
            min_split_gain: 0.0,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl GbtHyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(alloc::format!("learning_rate must be >= 0, got {}", self.learning_rate));
        }
        if !(self.row_subsample > 0.0 && self.row_subsample <= 1.0) {
            return bad(alloc::format!("row_subsample must be in (0, 1], got {}", self.row_subsample));
        }
        if !(self.col_subsample > 0.0 && self.col_subsample <= 1.0) {
            return bad(alloc::format!("col_subsample must be in (0, 1], got {}", self.col_subsample));
        }
        if !(self.l2_leaf >= 0.0) {
            return bad(alloc::format!("l2_leaf must be >= 0, got {}", self.l2_leaf));
        }
        if !(self.min_split_gain >= 0.0) {
            return bad(alloc::format!("min_split_gain must be >= 0, got {}", self.min_split_gain));
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize, cover: f64 },
    Leaf { value: f64, cover: f64 },
}

impl TreeNode {
    pub fn cover(&self) -> f64 {
        match *self {
            TreeNode::Split { cover, .. } | TreeNode::Leaf { cover, .. } => cover,
        }
    }
}

/// A binary tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Raw leaf value reached by `row` (not scaled by the learning rate).
    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value, .. } => return value,
                TreeNode::Split { feature, threshold, left, right, .. } => {
                    i = if row[feature] < threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Split { feature, .. } => Some(*feature),
            TreeNode::Leaf { .. } => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub format_version: u32,
    pub base_score: f64,
    pub learning_rate: f64,
    pub columns: Vec<String>,
    pub trees: Vec<Tree>,
    pub params: GbtHyperParams,
}

impl GbtModel {
    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), got: row.len() });
        }
        Ok(self.predict_unchecked(row))
    }

    /// Prediction without the dimension check; panics on short rows.
    pub fn predict_unchecked(&self, row: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn predict_batch(&self, fm: &FeatureMatrix) -> Result<Vec<f64>> {
        fm.rows.iter().map(|r| self.predict(r)).collect()
    }
}

/// Training RMSE before boosting and after every round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    pub initial: f64,
    pub rounds: Vec<f64>,
}

pub fn fit_gbt(train: &FeatureMatrix, hp: &GbtHyperParams) -> Result<GbtModel> {
    fit_gbt_with_curve(train, hp).map(|(m, _)| m)
}

struct Builder<'a> {
    columns: &'a [Vec<f64>],
    grad: &'a [f64],
    hp: &'a GbtHyperParams,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
    n_left: usize,
}

impl Builder<'_> {
    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        let denom = h + self.hp.l2_leaf;
        if denom > 0.0 {
            -g / denom
        } else {
            0.0
        }
    }

    fn best_split(&self, rows: &[usize], features: &[usize]) -> Option<BestSplit> {
        let lambda = self.hp.l2_leaf;
        let min_leaf = self.hp.min_samples_leaf;
        let n = rows.len();
        if n < 2 * min_leaf {
            return None;
        }
        let g_total: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h_total = n as f64;
        let parent = g_total * g_total / (h_total + lambda);
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for &f in features {
            let col = &self.columns[f];
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let mut gl = 0.0;
            for k in 0..n - 1 {
                gl += self.grad[order[k]];
                let (lo, hi) = (col[order[k]], col[order[k + 1]]);
                if !(lo < hi) {
                    continue;
                }
                let nl = k + 1;
                if nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let hl = nl as f64;
                let hr = h_total - hl;
                let gr = g_total - gl;
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold <= lo {
                        threshold = hi;
                    }
                    best = Some(BestSplit { gain, feature: f, threshold, n_left: nl });
                }
            }
        }
        best
    }

    /// Grows a subtree over `rows` and returns its arena index.
    fn grow(&mut self, rows: &[usize], features: &[usize], depth: usize) -> usize {
        let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h = rows.len() as f64;
        let split = if depth < self.hp.max_depth { self.best_split(rows, features) } else { None };
        match split {
            Some(s) if s.gain > self.hp.min_split_gain => {
                let col = &self.columns[s.feature];
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| col[i] < s.threshold);
                debug_assert_eq!(left_rows.len(), s.n_left);
                let id = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { value: 0.0, cover: h });
                let left = self.grow(&left_rows, features, depth + 1);
                let right = self.grow(&right_rows, features, depth + 1);
                self.nodes[id] = TreeNode::Split { feature: s.feature, threshold: s.threshold, left, right, cover: h };
                id
            }
            _ => {
                let id = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { value: self.leaf_value(g, h), cover: h });
                id
            }
        }
    }
}

fn subsample(rng: &mut StreamRng, n: usize, ratio: f64) -> Vec<usize> {
    let k = ((ratio * n as f64) + 0.5) as usize;
    let k = k.clamp(1, n);
    if k == n {
        return (0..n).collect();
    }
    let mut idx = index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

fn rmse_of(pred: &[f64], y: &[f64]) -> f64 {
    let sse: f64 = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum();
    sqrt(sse / y.len() as f64)
}

/// Fits the ensemble and records the training RMSE after each round.
///
/// Rounds whose tree cannot split at the root add nothing to the model.
pub fn fit_gbt_with_curve(train: &FeatureMatrix, hp: &GbtHyperParams) -> Result<(GbtModel, TrainingCurve)> {
    hp.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training matrix"));
    }
    if train.n_cols() == 0 {
        return Err(Error::Empty("feature columns"));
    }
    let n = train.n_rows();
    let p = train.n_cols();
    let y = &train.target;
    let base_score = crate::stats::mean(y);
    let columns: Vec<Vec<f64>> = (0..p).map(|j| train.column(j)).collect();
    let mut pred = alloc::vec![base_score; n];
    let initial = rmse_of(&pred, y);
    let mut model = GbtModel {
        format_version: MODEL_FORMAT_VERSION,
        base_score,
        learning_rate: hp.learning_rate,
        columns: train.columns.clone(),
        trees: Vec::new(),
        params: hp.clone(),
    };
    let mut curve = TrainingCurve { initial, rounds: Vec::with_capacity(hp.n_trees) };
    let distinct = y.iter().any(|v| *v != y[0]);
    if !distinct {
        curve.rounds.resize(hp.n_trees, initial);
        return Ok((model, curve));
    }
    let mut rng = rng::stream(hp.seed, &[]);
    let mut grad = alloc::vec![0.0; n];
    for _ in 0..hp.n_trees {
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let rows = subsample(&mut rng, n, hp.row_subsample);
        let features = subsample(&mut rng, p, hp.col_subsample);
        let mut builder = Builder { columns: &columns, grad: &grad, hp, nodes: Vec::new() };
        builder.grow(&rows, &features, 0);
        let tree = Tree { nodes: builder.nodes };
        if tree.nodes.len() > 1 {
            for (p, row) in pred.iter_mut().zip(&train.rows) {
                *p += hp.learning_rate * tree.eval(row);
            }
            model.trees.push(tree);
        }
        curve.rounds.push(rmse_of(&pred, y));
    }
    Ok((model, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::YearMonth;
    use alloc::vec;

    fn matrix(rows: Vec<Vec<f64>>, target: Vec<f64>) -> FeatureMatrix {
        let p = rows[0].len();
        let start = YearMonth::new(2000, 1).unwrap();
        FeatureMatrix::new(
            (0..rows.len()).map(|i| start.add_months(i as i64)).collect(),
            (0..p).map(|j| alloc::format!("x{j}")).collect(),
            rows,
            target,
        )
        .unwrap()
    }

    fn toy() -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![f64::from(i), f64::from((i * 7) % 11), f64::from(i % 3)]).collect();
        let target = rows.iter().map(|r| r[0] * 0.5 + if r[1] > 5.0 { 3.0 } else { -1.0 } + r[2]).collect();
        matrix(rows, target)
    }

    #[test]
    fn depth_zero_predicts_base_score() {
        let fm = toy();
        let hp = GbtHyperParams { max_depth: 0, n_trees: 20, ..Default::default() };
        let m = fit_gbt(&fm, &hp).unwrap();
        let mean = crate::stats::mean(&fm.target);
        for r in &fm.rows {
            assert_eq!(m.predict(r).unwrap(), mean);
        }
        let hp = GbtHyperParams { min_split_gain: 1e12, n_trees: 5, ..Default::default() };
        let m = fit_gbt(&fm, &hp).unwrap();
        assert!(m.trees.is_empty());
    }

    #[test]
    fn single_deep_tree_memorizes() {
        let fm = toy();
        let hp = GbtHyperParams {
            n_trees: 1,
            max_depth: 20,
            learning_rate: 1.0,
            row_subsample: 1.0,
            col_subsample: 1.0,
            l2_leaf: 0.0,
            ..Default::default()
        };
        let m = fit_gbt(&fm, &hp).unwrap();
        for (r, y) in fm.rows.iter().zip(&fm.target) {
            assert!((m.predict(r).unwrap() - y).abs() < 1e-9);
        }
    }

    #[test]
    fn single_leaf_round_leaves_prediction_unchanged() {
        let fm = toy();
        let hp = GbtHyperParams { n_trees: 1, max_depth: 0, l2_leaf: 0.0, row_subsample: 1.0, col_subsample: 1.0, ..Default::default() };
        let (m, curve) = fit_gbt_with_curve(&fm, &hp).unwrap();
        assert_eq!(curve.rounds[0], curve.initial);
        assert_eq!(m.predict(&fm.rows[0]).unwrap(), m.base_score);
    }

    #[test]
    fn hand_built_stump() {
        let m = GbtModel {
            format_version: MODEL_FORMAT_VERSION,
            base_score: 200.0,
            learning_rate: 1.0,
            columns: vec!["lag_12".into()],
            trees: vec![Tree {
                nodes: vec![
                    TreeNode::Split { feature: 0, threshold: 300.0, left: 1, right: 2, cover: 2.0 },
                    TreeNode::Leaf { value: -10.0, cover: 1.0 },
                    TreeNode::Leaf { value: 10.0, cover: 1.0 },
                ],
            }],
            params: GbtHyperParams::default(),
        };
        assert_eq!(m.predict(&[250.0]).unwrap(), 190.0);
        assert_eq!(m.predict(&[300.0]).unwrap(), 210.0);
        assert!(m.predict(&[1.0, 2.0]).is_err());
        let empty = GbtModel { trees: vec![], ..m };
        assert_eq!(empty.predict(&[0.0]).unwrap(), 200.0);
    }

    #[test]
    fn curve_monotone_without_subsampling() {
        let fm = toy();
        let hp = GbtHyperParams { n_trees: 50, row_subsample: 1.0, col_subsample: 1.0, ..Default::default() };
        let (_, curve) = fit_gbt_with_curve(&fm, &hp).unwrap();
        let mut prev = curve.initial;
        for &r in &curve.rounds {
            assert!(r <= prev + 1e-12);
            prev = r;
        }
        assert!(curve.rounds.last().unwrap() < &curve.initial);
    }

    #[test]
    fn zero_learning_rate_is_flat() {
        let fm = toy();
        let hp = GbtHyperParams { n_trees: 10, learning_rate: 0.0, ..Default::default() };
        let (_, curve) = fit_gbt_with_curve(&fm, &hp).unwrap();
        assert!(curve.rounds.iter().all(|&r| r == curve.initial));
    }

    #[test]
    fn cover_is_consistent() {
        let m = fit_gbt(&toy(), &GbtHyperParams { n_trees: 30, ..Default::default() }).unwrap();
        for t in &m.trees {
            for node in &t.nodes {
                if let TreeNode::Split { left, right, cover, .. } = node {
                    assert_eq!(*cover, t.nodes[*left].cover() + t.nodes[*right].cover());
                }
            }
            assert!(t.depth() <= 3);
        }
    }

    #[test]
    fn rejects_bad_params_and_empty() {
        let fm = toy();
        assert!(fit_gbt(&fm, &GbtHyperParams { row_subsample: 0.0, ..Default::default() }).is_err());
        assert!(fit_gbt(&fm, &GbtHyperParams { min_samples_leaf: 0, ..Default::default() }).is_err());
        let empty = fm.slice(0..0);
        assert!(matches!(fit_gbt(&empty, &GbtHyperParams::default()), Err(Error::Empty(_))));
    }

    #[test]
    fn constant_target_gives_base_model() {
        let fm = matrix(vec![vec![1.0], vec![2.0], vec![3.0]], vec![4.0; 3]);
        let m = fit_gbt(&fm, &GbtHyperParams { n_trees: 5, ..Default::default() }).unwrap();
        assert!(m.trees.is_empty());
        assert_eq!(m.base_score, 4.0);
    }
}
