//! Monthly time series: validation, summaries, transforms and autocorrelation.

use alloc::vec::Vec;

use libm::{exp, log};
use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::stats::{self, mean, quantile_sorted, sample_std};

/// Ordered monthly observations starting at `start`, one per month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: YearMonth,
    values: Vec<f64>,
    log: bool,
}

impl TimeSeries {
    pub fn new(start: YearMonth, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("time series"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Degenerate(alloc::format!("missing or non-finite value at index {i}")));
        }
        Ok(Self { start, values, log: false })
    }

    pub fn start(&self) -> YearMonth {
        self.start
    }

    pub fn end(&self) -> YearMonth {
        self.time(self.values.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_log(&self) -> bool {
        self.log
    }

    pub fn time(&self, index: usize) -> YearMonth {
        self.start.add_months(index as i64)
    }

    pub fn times(&self) -> impl Iterator<Item = YearMonth> + '_ {
        (0..self.values.len()).map(|i| self.time(i))
    }

    /// Index of `t`, if it falls inside the series.
    pub fn index_of(&self, t: YearMonth) -> Option<usize> {
        let k = self.start.months_until(t);
        (k >= 0 && (k as usize) < self.values.len()).then_some(k as usize)
    }

    /// Sub-series over the inclusive month range.
    pub fn window(&self, from: YearMonth, to: YearMonth) -> Result<TimeSeries> {
        let a = self.index_of(from).ok_or_else(|| Error::InvalidParameter(alloc::format!("{from} outside series")))?;
        let b = self.index_of(to).ok_or_else(|| Error::InvalidParameter(alloc::format!("{to} outside series")))?;
        if b < a {
            return Err(Error::InvalidParameter(alloc::format!("window {from}..{to} is reversed")));
        }
        Ok(TimeSeries { start: from, values: self.values[a..=b].to_vec(), log: self.log })
    }

    /// The first `n` observations.
    pub fn head(&self, n: usize) -> Result<TimeSeries> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter(alloc::format!("head length {n} outside 1..={}", self.len())));
        }
        Ok(TimeSeries { start: self.start, values: self.values[..n].to_vec(), log: self.log })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Mean, n-1 standard deviation and linearly interpolated quartiles.
pub fn descriptive_stats(ts: &TimeSeries) -> StatsSummary {
    let v = ts.values();
    let sorted = stats::sorted_copy(v);
    StatsSummary {
        n: v.len(),
        mean: mean(v),
        std_dev: sample_std(v),
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

/// Pearson correlation between `y_t` and `y_{t-k}` for k in 1..=max_lag.
pub fn lag_correlations(ts: &TimeSeries, max_lag: usize) -> Result<Vec<(usize, f64)>> {
    let v = ts.values();
    if max_lag == 0 {
        return Err(Error::InvalidParameter("max_lag must be positive".into()));
    }
    if v.len() <= max_lag + 2 {
        return Err(Error::TooShort { needed: max_lag + 3, have: v.len() });
    }
    (1..=max_lag)
        .map(|k| Ok((k, stats::pearson(&v[k..], &v[..v.len() - k])?)))
        .collect()
}

pub fn log_transform(ts: &TimeSeries) -> Result<TimeSeries> {
    if let Some((index, &value)) = ts.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositive { index, value });
    }
    Ok(TimeSeries { start: ts.start, values: ts.values.iter().map(|&v| log(v)).collect(), log: true })
}

pub fn exp_transform(ts: &TimeSeries) -> TimeSeries {
    TimeSeries { start: ts.start, values: ts.values.iter().map(|&v| exp(v)).collect(), log: false }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `(1 - B)^d (1 - B^s)^D` in ascending powers of B.
pub fn differencing_polynomial(d: usize, seasonal_d: usize, period: usize) -> Vec<f64> {
    let mut poly = alloc::vec![1.0];
    for _ in 0..d {
        poly = poly_mul(&poly, &[1.0, -1.0]);
    }
    let mut seasonal = alloc::vec![0.0; period + 1];
    seasonal[0] = 1.0;
    seasonal[period] = -1.0;
    for _ in 0..seasonal_d {
        poly = poly_mul(&poly, &seasonal);
    }
    poly
}

/// A differenced series plus the consumed prefix needed to undo it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Differenced {
    pub series: TimeSeries,
    pub d: usize,
    pub seasonal_d: usize,
    pub period: usize,
    /// The first `d + D*s` values of the input, in input order.
    pub prefix: Vec<f64>,
}

/// Applies `(1 - B)^d (1 - B^s)^D`, shortening the series by `d + D*s`.
pub fn difference(ts: &TimeSeries, d: usize, seasonal_d: usize, period: usize) -> Result<Differenced> {
    if period == 0 {
        return Err(Error::InvalidParameter("seasonal period must be positive".into()));
    }
    let lost = d + seasonal_d * period;
    if ts.len() <= lost {
        return Err(Error::TooShort { needed: lost + 1, have: ts.len() });
    }
    let mut values = ts.values.clone();
    for _ in 0..d {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    for _ in 0..seasonal_d {
        values = (period..values.len()).map(|t| values[t] - values[t - period]).collect();
    }
    Ok(Differenced {
        series: TimeSeries { start: ts.start.add_months(lost as i64), values, log: ts.log },
        d,
        seasonal_d,
        period,
        prefix: ts.values[..lost].to_vec(),
    })
}

/// Rebuilds levels from differenced values by running the recursion
/// `z_t = w_t - sum_{k>=1} p_k z_{t-k}` forward from `history`, where `p`
/// is the differencing polynomial.
///
/// `history` must hold at least `d + D*s` levels immediately preceding the
/// first element of `diffs`. Returns only the reconstructed levels.
pub fn integrate(history: &[f64], diffs: &[f64], d: usize, seasonal_d: usize, period: usize) -> Result<Vec<f64>> {
    let poly = differencing_polynomial(d, seasonal_d, period);
    let order = poly.len() - 1;
    if history.len() < order {
        return Err(Error::TooShort { needed: order, have: history.len() });
    }
    let mut levels: Vec<f64> = history[history.len() - order..].to_vec();
    for &w in diffs {
        let t = levels.len();
        let mut z = w;
        for k in 1..=order {
            z -= poly[k] * levels[t - k];
        }
        levels.push(z);
    }
    Ok(levels.split_off(order))
}

impl Differenced {
    /// Reconstructs the original series from the stored prefix.
    pub fn inverse(&self) -> TimeSeries {
        self.invert_values(self.series.values()).expect("prefix length matches differencing order")
    }

    /// Reconstructs levels for replacement differenced values aligned with `series`.
    pub fn invert_values(&self, diffs: &[f64]) -> Result<TimeSeries> {
        let tail = integrate(&self.prefix, diffs, self.d, self.seasonal_d, self.period)?;
        let mut values = self.prefix.clone();
        values.extend(tail);
        Ok(TimeSeries { start: self.series.start.add_months(-(self.prefix.len() as i64)), values, log: self.series.log })
    }
}

/// How the level series is re-expressed before supervised framing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesTransform {
    Level,
    Log,
    Difference,
    LogDifference,
}

impl SeriesTransform {
    pub fn uses_log(self) -> bool {
        matches!(self, SeriesTransform::Log | SeriesTransform::LogDifference)
    }

    pub fn differences(self) -> bool {
        matches!(self, SeriesTransform::Difference | SeriesTransform::LogDifference)
    }

    pub fn apply(self, ts: &TimeSeries) -> Result<TimeSeries> {
        let base = if self.uses_log() { log_transform(ts)? } else { ts.clone() };
        if self.differences() {
            Ok(difference(&base, 1, 0, 1)?.series)
        } else {
            Ok(base)
        }
    }

    /// Maps a one-step prediction on the transformed scale for month `t`
    /// back to a level, using the observed level at `t - 1`.
    pub fn invert_one_step(self, levels: &TimeSeries, t: YearMonth, prediction: f64) -> Result<f64> {
        let z = if self.differences() {
            let prev = t.add_months(-1);
            let i = levels
                .index_of(prev)
                .ok_or_else(|| Error::InvalidParameter(alloc::format!("no observation at {prev} to undo differencing")))?;
            let p = levels.values()[i];
            let p = if self.uses_log() { log(p) } else { p };
            p + prediction
        } else {
            prediction
        };
        Ok(if self.uses_log() { exp(z) } else { z })
    }
}

fn demeaned(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    xs.iter().map(|x| x - m).collect()
}

/// Autocorrelations r_0..=r_max_lag with the biased (1/n) estimator.
pub fn acf(ts: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let x = demeaned(ts.values());
    let n = x.len();
    if n <= max_lag {
        return Err(Error::TooShort { needed: max_lag + 1, have: n });
    }
    let c0: f64 = x.iter().map(|v| v * v).sum();
    if c0 == 0.0 {
        return Err(Error::ZeroVariance("autocorrelation"));
    }
    Ok((0..=max_lag)
        .map(|k| (k..n).map(|t| x[t] * x[t - k]).sum::<f64>() / c0)
        .collect())
}

/// Partial autocorrelations for lags 1..=max_lag via Durbin-Levinson.
pub fn pacf(ts: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let r = acf(ts, max_lag)?;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let a = if v > 0.0 { num / v } else { 0.0 };
        let mut next = phi.clone();
        for j in 1..k {
            next[j - 1] = phi[j - 1] - a * phi[k - j - 1];
        }
        next.push(a);
        phi = next;
        v *= 1.0 - a * a;
        out.push(a);
    }
    Ok(out)
}

/// Deviation of each value from the mean of the preceding `window` values.
pub fn trailing_mean_residual(ts: &TimeSeries, window: usize) -> Result<TimeSeries> {
    if window == 0 || ts.len() <= window {
        return Err(Error::TooShort { needed: window + 1, have: ts.len() });
    }
    let v = ts.values();
    let values = (window..v.len()).map(|t| v[t] - mean(&v[t - window..t])).collect();
    Ok(TimeSeries { start: ts.time(window), values, log: ts.log })
}
