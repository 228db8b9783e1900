use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{mean_abs_phi, seasonal_background, tree_shap, Attribution, Background};
use crate::error::{Error, Result};
use crate::gbt::GbtModel;
use crate::rng;
use crate::stats::{mean, moving_block_indices, spearman};
use crate::supervise::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundStrategy {
    /// One row of training column means.
    GlobalMean,
    /// Training rows from the calendar month of each explained row.
    SeasonalMonth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilitySettings {
    pub n_bootstrap: usize,
    pub block_length: usize,
    pub seed: u64,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        Self { n_bootstrap: 20, block_length: 12, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub strategy: BackgroundStrategy,
    pub mean_spearman: f64,
    /// Spearman correlation for every pair of replicates, in (i, j), i < j order.
    pub pairwise: Vec<f64>,
    /// Mean |phi| per feature for each replicate.
    pub importances: Vec<Vec<f64>>,
}

/// TreeSHAP attributions for every row of `test` with backgrounds built from `train`.
pub fn explain_rows(
    model: &GbtModel,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    strategy: BackgroundStrategy,
) -> Result<Vec<Attribution>> {
    let global = match strategy {
        BackgroundStrategy::GlobalMean => Some(Background::global_mean(train)?),
        BackgroundStrategy::SeasonalMonth => None,
    };
    let mut out = Vec::with_capacity(test.n_rows());
    for (t, row) in test.times.iter().zip(&test.rows) {
        let a = match &global {
            Some(bg) => tree_shap(model, row, bg)?,
            None => tree_shap(model, row, &seasonal_background(train, t.month())?)?,
        };
        out.push(a);
    }
    Ok(out)
}

/// Refits on moving-block resamples of `train` and compares the global
/// attribution rankings on the fixed `test` rows.
///
/// Replicate `b` resamples with stream `(seed, b)`. The same resamples are
/// used for every strategy given the same settings.
pub fn explanation_stability<F: Fn(&FeatureMatrix) -> Result<GbtModel>>(
    fit: F,
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    strategy: BackgroundStrategy,
    settings: &StabilitySettings,
) -> Result<StabilityReport> {
    if settings.n_bootstrap < 2 {
        return Err(Error::InvalidParameter("stability needs at least two bootstrap replicates".into()));
    }
    let n = train.n_rows();
    let l = settings.block_length;
    if l == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    if n < l {
        return Err(Error::TooShort { needed: l, have: n });
    }
    if test.is_empty() {
        return Err(Error::Empty("stability test rows"));
    }
    let mut importances = Vec::with_capacity(settings.n_bootstrap);
    for b in 0..settings.n_bootstrap {
        let idx = moving_block_indices(n, l, &mut rng::stream(settings.seed, &[b as u64]));
        let sample = train.select(&idx);
        let model = fit(&sample)?;
        let attrs = explain_rows(&model, &sample, test, strategy)?;
        importances.push(mean_abs_phi(&attrs)?);
    }
    let mut pairwise = Vec::new();
    for i in 0..importances.len() {
        for j in i + 1..importances.len() {
            pairwise.push(spearman(&importances[i], &importances[j])?);
        }
    }
    Ok(StabilityReport { strategy, mean_spearman: mean(&pairwise), pairwise, importances })
}
