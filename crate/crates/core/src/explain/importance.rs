use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{mean, rmse, sample_std};
use crate::supervise::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    /// Mean RMSE increase over the unpermuted RMSE.
    pub mean_increase: f64,
    pub std_increase: f64,
}

/// RMSE increase when each column of `test` is shuffled, ranked descending.
///
/// Feature `j`, repeat `r` shuffles with stream `(seed, j, r)`.
pub fn permutation_importance<F: Fn(&[f64]) -> f64>(
    predict: F,
    test: &FeatureMatrix,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<ImportanceEntry>> {
    let n = test.n_rows();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, have: n });
    }
    if n_repeats == 0 {
        return Err(Error::InvalidParameter("n_repeats must be positive".into()));
    }
    let base_pred: Vec<f64> = test.rows.iter().map(|r| predict(r)).collect();
    let base = rmse(&test.target, &base_pred)?;
    let mut out = Vec::with_capacity(test.n_cols());
    let mut rows = test.rows.clone();
    let mut pred = alloc::vec![0.0; n];
    for j in 0..test.n_cols() {
        let original = test.column(j);
        let mut increases = Vec::with_capacity(n_repeats);
        for r in 0..n_repeats {
            let mut col = original.clone();
            col.shuffle(&mut rng::stream(seed, &[j as u64, r as u64]));
            for (row, v) in rows.iter_mut().zip(&col) {
                row[j] = *v;
            }
            for (p, row) in pred.iter_mut().zip(&rows) {
                *p = predict(row);
            }
            increases.push(rmse(&test.target, &pred)? - base);
        }
        for (row, v) in rows.iter_mut().zip(&original) {
            row[j] = *v;
        }
        out.push(ImportanceEntry {
            feature: test.columns[j].clone(),
            mean_increase: mean(&increases),
            std_increase: if n_repeats > 1 { sample_std(&increases) } else { 0.0 },
        });
    }
    out.sort_by(|a, b| b.mean_increase.total_cmp(&a.mean_increase).then_with(|| a.feature.cmp(&b.feature)));
    Ok(out)
}
