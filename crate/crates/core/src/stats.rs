//! Accuracy metrics, forecast comparison and resampling statistics.

use alloc::vec::Vec;

use libm::{fabs, sqrt};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::student_t_two_sided;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    sqrt(ss / (xs.len() - 1) as f64)
}

/// Linear-interpolation quantile of an ascending slice, `q` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub(crate) fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    /// Percent.
    pub mape: f64,
    /// Percent, in [0, 200].
    pub smape: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rmse,
    Mape,
    Smape,
    R2,
}

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch { expected: y.len(), got: yhat.len() });
    }
    if y.is_empty() {
        return Err(Error::Empty("metric inputs"));
    }
    Ok(())
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sqrt(sse / y.len() as f64))
}

pub fn mape(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mut acc = 0.0;
    for (i, (a, b)) in y.iter().zip(yhat).enumerate() {
        if *a == 0.0 {
            return Err(Error::Degenerate(alloc::format!("MAPE undefined: actual is zero at index {i}")));
        }
        acc += fabs((a - b) / a);
    }
    Ok(100.0 * acc / y.len() as f64)
}

pub fn smape(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mut acc = 0.0;
    for (i, (a, b)) in y.iter().zip(yhat).enumerate() {
        let denom = fabs(*a) + fabs(*b);
        if denom == 0.0 {
            return Err(Error::Degenerate(alloc::format!("sMAPE undefined: |y| + |yhat| is zero at index {i}")));
        }
        acc += 2.0 * fabs(a - b) / denom;
    }
    Ok(100.0 * acc / y.len() as f64)
}

/// Coefficient of determination against the mean of `y` itself.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let m = mean(y);
    let sse: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    let sst: f64 = y.iter().map(|a| (a - m) * (a - m)).sum();
    if sst == 0.0 {
        return Ok(if sse == 0.0 { 1.0 } else { f64::NEG_INFINITY });
    }
    Ok(1.0 - sse / sst)
}

pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<MetricReport> {
    Ok(MetricReport {
        rmse: rmse(y, yhat)?,
        mape: mape(y, yhat)?,
        smape: smape(y, yhat)?,
        r2: r2(y, yhat)?,
    })
}

impl Metric {
    pub fn evaluate(self, y: &[f64], yhat: &[f64]) -> Result<f64> {
        match self {
            Metric::Rmse => rmse(y, yhat),
            Metric::Mape => mape(y, yhat),
            Metric::Smape => smape(y, yhat),
            Metric::R2 => r2(y, yhat),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DmLoss {
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub horizon: usize,
    pub loss: DmLoss,
    pub small_sample_corrected: bool,
    pub two_sided: bool,
    /// Set when the loss differential has zero variance.
    pub indeterminate: bool,
}

/// Diebold-Mariano test of equal squared-error accuracy.
///
/// Positive statistics mean forecast `a` has the larger loss. The
/// Harvey-Leybourne-Newbold correction is applied and the p-value uses a
/// Student-t reference with n - 1 degrees of freedom.
pub fn dm_test(e_a: &[f64], e_b: &[f64], horizon: usize, two_sided: bool) -> Result<DmResult> {
    if e_a.len() != e_b.len() {
        return Err(Error::DimensionMismatch { expected: e_a.len(), got: e_b.len() });
    }
    let n = e_a.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, have: n });
    }
    if horizon == 0 || horizon >= n {
        return Err(Error::InvalidParameter(alloc::format!("DM horizon must be in 1..{n}, got {horizon}")));
    }
    let d: Vec<f64> = e_a.iter().zip(e_b).map(|(a, b)| a * a - b * b).collect();
    let indeterminate = DmResult {
        statistic: 0.0,
        p_value: 1.0,
        n,
        horizon,
        loss: DmLoss::Squared,
        small_sample_corrected: true,
        two_sided,
        indeterminate: true,
    };
    let dbar = mean(&d);
    let nf = n as f64;
    let autocov = |k: usize| -> f64 {
        (k..n).map(|t| (d[t] - dbar) * (d[t - k] - dbar)).sum::<f64>() / nf
    };
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 || d.iter().all(|&x| x == d[0]) {
        return Ok(indeterminate);
    }
    let long_run = gamma0 + 2.0 * (1..horizon).map(autocov).sum::<f64>();
    if long_run <= 0.0 {
        return Ok(indeterminate);
    }
    let h = horizon as f64;
    let raw = dbar / sqrt(long_run / nf);
    let hln = sqrt((nf + 1.0 - 2.0 * h + h * (h - 1.0) / nf) / nf);
    let statistic = raw * hln;
    let df = nf - 1.0;
    let p_value = if two_sided {
        student_t_two_sided(statistic, df)
    } else {
        1.0 - crate::special::student_t_cdf(statistic, df)
    };
    Ok(DmResult {
        statistic,
        p_value,
        n,
        horizon,
        loss: DmLoss::Squared,
        small_sample_corrected: true,
        two_sided,
        indeterminate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub block_length: usize,
    pub n_resamples: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub block_length: usize,
    pub n_resamples: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self { block_length: 12, n_resamples: 1000, alpha: 0.05, seed: 0 }
    }
}

/// Index sequence of one moving-block resample of length `n`.
pub fn moving_block_indices<R: Rng>(n: usize, block_length: usize, rng: &mut R) -> Vec<usize> {
    let n_starts = n - block_length + 1;
    let n_blocks = n.div_ceil(block_length);
    let mut idx = Vec::with_capacity(n_blocks * block_length);
    for _ in 0..n_blocks {
        let start = rng.gen_range(0..n_starts);
        idx.extend(start..start + block_length);
    }
    idx.truncate(n);
    idx
}

/// Moving-block bootstrap percentile interval for a metric of paired (y, yhat).
pub fn block_bootstrap_ci(y: &[f64], yhat: &[f64], metric: Metric, settings: &BootstrapSettings) -> Result<BootstrapCi> {
    check_pair(y, yhat)?;
    let n = y.len();
    let l = settings.block_length;
    if l == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    if n < l {
        return Err(Error::TooShort { needed: l, have: n });
    }
    if settings.n_resamples == 0 {
        return Err(Error::InvalidParameter("n_resamples must be positive".into()));
    }
    if !(settings.alpha > 0.0 && settings.alpha < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("alpha must be in (0, 1), got {}", settings.alpha)));
    }
    let point = metric.evaluate(y, yhat)?;
    let mut stats = Vec::with_capacity(settings.n_resamples);
    let mut ys = Vec::with_capacity(n);
    let mut hs = Vec::with_capacity(n);
    for r in 0..settings.n_resamples {
        let mut g = rng::stream(settings.seed, &[r as u64]);
        let idx = moving_block_indices(n, l, &mut g);
        ys.clear();
        hs.clear();
        ys.extend(idx.iter().map(|&i| y[i]));
        hs.extend(idx.iter().map(|&i| yhat[i]));
        stats.push(metric.evaluate(&ys, &hs)?);
    }
    stats.sort_by(f64::total_cmp);
    Ok(BootstrapCi {
        point,
        lower: quantile_sorted(&stats, settings.alpha / 2.0),
        upper: quantile_sorted(&stats, 1.0 - settings.alpha / 2.0),
        block_length: l,
        n_resamples: settings.n_resamples,
        alpha: settings.alpha,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, have: x.len() });
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("pearson correlation"));
    }
    Ok((sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties assigned their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = alloc::vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}
