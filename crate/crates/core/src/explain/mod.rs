//! Post-hoc explanations for fitted forecasters.
//!
//! Shapley-style attributions satisfy `baseline_value + sum(phi) = prediction`.
//! "Absent" features take values from a [`Background`].

mod importance;
mod lime;
mod permutation;
mod stability;
mod treeshap;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::supervise::FeatureMatrix;

pub use importance::{permutation_importance, ImportanceEntry};
pub use lime::{kernel_width_sweep, lime_explain, FactorSummary, LimeExplanation, LimeSettings, SweepReport};
pub use permutation::permutation_shap;
pub use stability::{explain_rows, explanation_stability, BackgroundStrategy, StabilityReport, StabilitySettings};
pub use treeshap::{tree_shap, tree_shap_tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub features: Vec<String>,
    pub phi: Vec<f64>,
    pub baseline_value: f64,
    pub prediction: f64,
}

impl Attribution {
    /// `|baseline + sum(phi) - prediction|`.
    pub fn additivity_gap(&self) -> f64 {
        libm::fabs(self.baseline_value + self.phi.iter().sum::<f64>() - self.prediction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundMode {
    GlobalMean,
    SeasonalMonth,
    Explicit,
}

/// Reference rows defining "feature absent".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub mode: BackgroundMode,
    pub rows: Vec<Vec<f64>>,
}

impl Background {
    /// A single row of training column means.
    pub fn global_mean(train: &FeatureMatrix) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("background source"));
        }
        Ok(Self { mode: BackgroundMode::GlobalMean, rows: alloc::vec![train.column_means()] })
    }

    pub fn explicit(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_mode(BackgroundMode::Explicit, rows)
    }

    fn with_mode(mode: BackgroundMode, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("background rows"));
        }
        let p = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch { expected: p, got: r.len() });
        }
        Ok(Self { mode, rows })
    }

    pub fn n_features(&self) -> usize {
        self.rows[0].len()
    }

    pub fn check_dim(&self, p: usize) -> Result<()> {
        if self.n_features() != p {
            return Err(Error::DimensionMismatch { expected: p, got: self.n_features() });
        }
        Ok(())
    }

    /// Column-wise average of the background rows.
    pub fn mean_row(&self) -> Vec<f64> {
        let n = self.rows.len() as f64;
        (0..self.n_features())
            .map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }
}

/// All training rows whose calendar month equals `month`.
pub fn seasonal_background(train: &FeatureMatrix, month: u8) -> Result<Background> {
    if !(1..=12).contains(&month) {
        return Err(Error::InvalidParameter(alloc::format!("month must be in 1..=12, got {month}")));
    }
    let rows: Vec<Vec<f64>> = train
        .times
        .iter()
        .zip(&train.rows)
        .filter(|(t, _)| t.month() == month)
        .map(|(_, r)| r.clone())
        .collect();
    if rows.is_empty() {
        return Err(Error::Degenerate(alloc::format!("no training rows for month {month}")));
    }
    Background::with_mode(BackgroundMode::SeasonalMonth, rows)
}

/// Mean |phi| per feature, in feature order.
pub fn mean_abs_phi(attributions: &[Attribution]) -> Result<Vec<f64>> {
    let first = attributions.first().ok_or(Error::Empty("attributions"))?;
    let p = first.features.len();
    let mut acc = alloc::vec![0.0; p];
    for a in attributions {
        if a.features != first.features {
            return Err(Error::InvalidParameter("attributions have inconsistent feature sets".into()));
        }
        for (s, v) in acc.iter_mut().zip(&a.phi) {
            *s += libm::fabs(*v);
        }
    }
    let n = attributions.len() as f64;
    Ok(acc.into_iter().map(|s| s / n).collect())
}

/// Features ranked by mean |phi|, descending; ties broken by name.
pub fn shap_global_summary(attributions: &[Attribution]) -> Result<Vec<(String, f64)>> {
    let means = mean_abs_phi(attributions)?;
    let mut ranked: Vec<(String, f64)> = attributions[0].features.iter().cloned().zip(means).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencePoint {
    pub time: YearMonth,
    pub value: f64,
    pub phi: f64,
    pub color: f64,
}

/// (feature value, attribution, colour feature value) per explained row.
///
/// `attributions[i]` must explain `rows.rows[i]`.
pub fn dependence_data(
    attributions: &[Attribution],
    rows: &FeatureMatrix,
    feature: &str,
    color_feature: &str,
) -> Result<Vec<DependencePoint>> {
    let j = rows.column_index(feature)?;
    let c = rows.column_index(color_feature)?;
    if attributions.is_empty() {
        return Ok(Vec::new());
    }
    if attributions.len() != rows.n_rows() {
        return Err(Error::DimensionMismatch { expected: rows.n_rows(), got: attributions.len() });
    }
    let mut pts: Vec<DependencePoint> = attributions
        .iter()
        .zip(rows.times.iter().zip(&rows.rows))
        .map(|(a, (t, r))| DependencePoint { time: *t, value: r[j], phi: a.phi[j], color: r[c] })
        .collect();
    pts.sort_by_key(|p| p.time);
    Ok(pts)
}
