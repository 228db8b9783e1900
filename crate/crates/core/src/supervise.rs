//! Supervised framing of a monthly series without look-ahead.
//!
//! Every feature of the row dated `t` is a function of observations strictly
//! before `t`. Warm-up rows whose lags or windows would reach before the start
//! of the series are dropped.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use libm::{cos, sin};
use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::stats::{mean, sample_std};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RollingWindow {
    pub window: usize,
    pub mean: bool,
    pub std: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub lags: Vec<usize>,
    pub rolling: Vec<RollingWindow>,
    pub cyclic_month: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            lags: (1..=12).collect(),
            rolling: alloc::vec![RollingWindow { window: 12, mean: true, std: true }],
            cyclic_month: true,
        }
    }
}

impl FeatureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lags.is_empty() {
            return Err(Error::InvalidParameter("at least one lag is required".into()));
        }
        if self.lags.contains(&0) {
            return Err(Error::InvalidParameter("lags must be positive".into()));
        }
        if let Some(w) = self.rolling.iter().find(|w| w.window < 2) {
            return Err(Error::InvalidParameter(alloc::format!("rolling window {} is shorter than 2", w.window)));
        }
        Ok(())
    }

    /// Number of leading observations consumed before the first usable row.
    pub fn warm_up(&self) -> usize {
        let max_lag = self.lags.iter().copied().max().unwrap_or(0);
        let max_window = self.rolling.iter().map(|w| w.window).max().unwrap_or(0);
        max_lag.max(max_window)
    }

    fn sorted_lags(&self) -> Vec<usize> {
        let mut lags = self.lags.clone();
        lags.sort_unstable();
        lags.dedup();
        lags
    }

    fn sorted_windows(&self) -> Vec<RollingWindow> {
        let mut w = self.rolling.clone();
        w.sort_by_key(|w| w.window);
        w
    }

    /// Column names in matrix order: lags ascending, rolling statistics, cyclic pair.
    pub fn column_names(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.sorted_lags().iter().map(|k| alloc::format!("lag_{k}")).collect();
        for w in self.sorted_windows() {
            if w.mean {
                cols.push(alloc::format!("rollmean_{}", w.window));
            }
            if w.std {
                cols.push(alloc::format!("rollstd_{}", w.window));
            }
        }
        if self.cyclic_month {
            cols.push("month_sin".to_string());
            cols.push("month_cos".to_string());
        }
        cols
    }
}

/// `(sin(2 pi m / 12), cos(2 pi m / 12))` for a 1-based month.
pub fn month_encoding(month: u8) -> (f64, f64) {
    let angle = 2.0 * PI * f64::from(month) / 12.0;
    (sin(angle), cos(angle))
}

/// Feature rows aligned with their target values and row months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub times: Vec<YearMonth>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(times: Vec<YearMonth>, columns: Vec<String>, rows: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        if rows.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: rows.len() });
        }
        if target.len() != times.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: target.len() });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::DimensionMismatch { expected: columns.len(), got: r.len() });
        }
        Ok(Self { times, columns, rows, target })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn slice(&self, range: Range<usize>) -> FeatureMatrix {
        FeatureMatrix {
            times: self.times[range.clone()].to_vec(),
            columns: self.columns.clone(),
            rows: self.rows[range.clone()].to_vec(),
            target: self.target[range].to_vec(),
        }
    }

    /// Rows picked by index, in the given order (duplicates allowed).
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            times: indices.iter().map(|&i| self.times[i]).collect(),
            columns: self.columns.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
        }
    }

    pub fn row_for(&self, t: YearMonth) -> Option<usize> {
        self.times.iter().position(|&x| x == t)
    }

    /// Per-column means.
    pub fn column_means(&self) -> Vec<f64> {
        (0..self.n_cols()).map(|j| mean(&self.column(j))).collect()
    }
}

pub fn build_feature_matrix(ts: &TimeSeries, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    spec.validate()?;
    let warm_up = spec.warm_up();
    let y = ts.values();
    if y.len() <= warm_up {
        return Err(Error::TooShort { needed: warm_up + 1, have: y.len() });
    }
    let lags = spec.sorted_lags();
    let windows = spec.sorted_windows();
    let columns = spec.column_names();
    let n = y.len() - warm_up;
    let mut times = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for t in warm_up..y.len() {
        let mut row = Vec::with_capacity(columns.len());
        row.extend(lags.iter().map(|&k| y[t - k]));
        for w in &windows {
            let past = &y[t - w.window..t];
            if w.mean {
                row.push(mean(past));
            }
            if w.std {
                row.push(sample_std(past));
            }
        }
        let time = ts.time(t);
        if spec.cyclic_month {
            let (s, c) = month_encoding(time.month());
            row.push(s);
            row.push(c);
        }
        times.push(time);
        rows.push(row);
        target.push(y[t]);
    }
    FeatureMatrix::new(times, columns, rows, target)
}

/// Splits off the final `test_months` rows as the test set.
pub fn chronological_split(fm: &FeatureMatrix, test_months: usize) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if test_months == 0 {
        return Err(Error::InvalidParameter("test_months must be positive".into()));
    }
    if test_months >= fm.n_rows() {
        return Err(Error::InvalidParameter(alloc::format!(
            "test_months {test_months} leaves no training rows out of {}",
            fm.n_rows()
        )));
    }
    let cut = fm.n_rows() - test_months;
    Ok((fm.slice(0..cut), fm.slice(cut..fm.n_rows())))
}

/// Per-column z-scoring fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Zero-variance columns, left untouched.
    pub passthrough: Vec<bool>,
}

impl Standardizer {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("training matrix"));
        }
        let mut means = Vec::with_capacity(train.n_cols());
        let mut scales = Vec::with_capacity(train.n_cols());
        let mut passthrough = Vec::with_capacity(train.n_cols());
        for j in 0..train.n_cols() {
            let col = train.column(j);
            let s = sample_std(&col);
            let constant = !(s > 0.0 && s.is_finite());
            means.push(mean(&col));
            scales.push(if constant { 1.0 } else { s });
            passthrough.push(constant);
        }
        Ok(Self { means, scales, passthrough })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, x)| if self.passthrough[j] { *x } else { (x - self.means[j]) / self.scales[j] })
            .collect()
    }

    pub fn apply(&self, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
        if fm.n_cols() != self.means.len() {
            return Err(Error::DimensionMismatch { expected: self.means.len(), got: fm.n_cols() });
        }
        let rows = fm.rows.iter().map(|r| self.transform_row(r)).collect();
        Ok(FeatureMatrix { rows, ..fm.clone() })
    }
}

pub fn fit_standardizer(train: &FeatureMatrix) -> Result<Standardizer> {
    Standardizer::fit(train)
}

pub fn apply_standardizer(sd: &Standardizer, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
    sd.apply(fm)
}

/// Chronological folds: each trains on every row before its test block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvFolds {
    pub folds: Vec<(Range<usize>, Range<usize>)>,
}

/// `k` expanding-window folds whose test blocks tile the final
/// `max(k, n / (k + 1))` rows in near-equal consecutive blocks.
pub fn expanding_cv_folds(n_rows: usize, k: usize) -> Result<CvFolds> {
    if k == 0 {
        return Err(Error::InvalidParameter("fold count must be positive".into()));
    }
    if n_rows < 2 * k {
        return Err(Error::TooShort { needed: 2 * k, have: n_rows });
    }
    let tail = (n_rows / (k + 1)).max(k);
    let base = tail / k;
    let extra = tail % k;
    let mut start = n_rows - tail;
    let mut folds = Vec::with_capacity(k);
    for i in 0..k {
        // Later blocks absorb the remainder.
        let len = base + usize::from(i >= k - extra);
        folds.push((0..start, start..start + len));
        start += len;
    }
    debug_assert_eq!(start, n_rows);
    Ok(CvFolds { folds })
}
