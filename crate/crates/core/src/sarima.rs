//! Seasonal ARIMA fitted by conditional sum of squares (CSS).
//!
//! The differenced (and optionally logged) series `w_t` follows
//!
//! ```text
//! phi(B) PHI(B^s) w_t = c + theta(B) THETA(B^s) e_t
//! ```
//!
//! with `phi(B) = 1 - sum phi_i B^i`, `theta(B) = 1 - sum theta_i B^i` and the
//! seasonal polynomials built the same way. Innovations are recovered by
//! running the recursion forward with pre-sample values fixed at zero, and the
//! CSS objective is minimized by Nelder-Mead from the zero vector plus seeded
//! random restarts. The search is confined to stationary AR and invertible
//! MA factors, which keeps one-step residual recursions bounded out of sample.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, fabs, log};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calendar::YearMonth;
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::rng;
use crate::series::{difference, integrate, log_transform, TimeSeries};
use crate::stats::mean;

const MAX_ORDER: usize = 5;
/// Innovations beyond this magnitude mark a divergent recursion.
const DIVERGENCE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    #[serde(rename = "seasonal_p")]
    pub sp: usize,
    #[serde(rename = "seasonal_d")]
    pub sd: usize,
    #[serde(rename = "seasonal_q")]
    pub sq: usize,
    pub period: usize,
    pub use_log: bool,
}

impl ArimaSpec {
    pub fn new(order: (usize, usize, usize), seasonal: (usize, usize, usize), period: usize, use_log: bool) -> Self {
        Self { p: order.0, d: order.1, q: order.2, sp: seasonal.0, sd: seasonal.1, sq: seasonal.2, period, use_log }
    }

    /// ARIMA(2,1,2) with one seasonal difference at period 12 on the log scale.
    pub fn airline_default() -> Self {
        Self::new((2, 1, 2), (0, 1, 0), 12, true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.period == 0 {
            return Err(Error::InvalidParameter("seasonal period must be >= 1".into()));
        }
        let orders = [self.p, self.d, self.q, self.sp, self.sd, self.sq];
        if orders.iter().any(|&o| o > MAX_ORDER) {
            return Err(Error::InvalidParameter(alloc::format!("orders must be <= {MAX_ORDER}, got {self:?}")));
        }
        Ok(())
    }

    /// Coefficient count excluding the intercept.
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q + self.sp + self.sq
    }

    /// Estimated parameters including the intercept.
    pub fn n_params(&self) -> usize {
        self.n_coefficients() + 1
    }

    pub fn differencing_loss(&self) -> usize {
        self.d + self.sd * self.period
    }
}

impl core::fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "SARIMA({},{},{})x({},{},{})_{}", self.p, self.d, self.q, self.sp, self.sd, self.sq, self.period)?;
        if self.use_log {
            f.write_str(" log")?;
        }
        Ok(())
    }
}

/// Parameter vector view: `[c, phi.., theta.., PHI.., THETA..]`.
struct Params<'a> {
    c: f64,
    phi: &'a [f64],
    theta: &'a [f64],
    sphi: &'a [f64],
    stheta: &'a [f64],
}

fn split_params<'a>(params: &'a [f64], spec: &ArimaSpec) -> Params<'a> {
    let (c, rest) = params.split_first().expect("intercept present");
    let (phi, rest) = rest.split_at(spec.p);
    let (theta, rest) = rest.split_at(spec.q);
    let (sphi, stheta) = rest.split_at(spec.sp);
    Params { c: *c, phi, theta, sphi, stheta }
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

/// `1 - sum coefs_i B^(i*step)` as ascending coefficients.
fn lag_polynomial(coefs: &[f64], step: usize) -> Vec<f64> {
    let mut poly = alloc::vec![0.0; coefs.len() * step + 1];
    poly[0] = 1.0;
    for (i, c) in coefs.iter().enumerate() {
        poly[(i + 1) * step] = -c;
    }
    poly
}

/// Expanded lag weights `a_k` (k >= 1) with `1 - sum a_k B^k = f(B) g(B)`.
pub fn expanded_weights(nonseasonal: &[f64], seasonal: &[f64], period: usize) -> Vec<f64> {
    let poly = poly_mul(&lag_polynomial(nonseasonal, 1), &lag_polynomial(seasonal, period));
    poly[1..].iter().map(|x| -x).collect()
}

/// Innovations `e_t = w_t - c - sum a_k w_{t-k} + sum b_k e_{t-k}` with zero
/// pre-sample values; `None` when the recursion diverges.
pub fn css_residuals(c: f64, ar: &[f64], ma: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let mut e = Vec::with_capacity(w.len());
    for t in 0..w.len() {
        let mut v = w[t] - c;
        for (k, a) in ar.iter().enumerate() {
            if let Some(i) = t.checked_sub(k + 1) {
                v -= a * w[i];
            }
        }
        for (k, b) in ma.iter().enumerate() {
            if let Some(i) = t.checked_sub(k + 1) {
                v += b * e[i];
            }
        }
        if !v.is_finite() || fabs(v) > DIVERGENCE {
            return None;
        }
        e.push(v);
    }
    Some(e)
}

/// True when `1 - sum coefs_i B^i` has every root outside the unit circle,
/// checked by stepping the coefficients down to partial autocorrelations.
pub fn is_stable(coefs: &[f64]) -> bool {
    let mut a = coefs.to_vec();
    for k in (1..=a.len()).rev() {
        let kappa = a[k - 1];
        if !(fabs(kappa) < 1.0) {
            return false;
        }
        let prev: Vec<f64> = (0..k - 1).map(|i| (a[i] + kappa * a[k - 2 - i]) / (1.0 - kappa * kappa)).collect();
        a = prev;
    }
    true
}

/// Conditional sum of squares for `params = [c, phi.., theta.., PHI.., THETA..]`
/// on a differenced, mean-adjusted series. Non-stationary AR factors,
/// non-invertible MA factors and divergent recursions give `+inf`.
pub fn css_loss(params: &[f64], w: &[f64], spec: &ArimaSpec) -> f64 {
    if params.len() != spec.n_params() {
        return f64::INFINITY;
    }
    let p = split_params(params, spec);
    if ![p.phi, p.theta, p.sphi, p.stheta].iter().all(|f| is_stable(f)) {
        return f64::INFINITY;
    }
    let ar = expanded_weights(p.phi, p.sphi, spec.period);
    let ma = expanded_weights(p.theta, p.stheta, spec.period);
    match css_residuals(p.c, &ar, &ma, w) {
        Some(e) => e.iter().map(|x| x * x).sum(),
        None => f64::INFINITY,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Additional starting points tried alongside the defaults.
    #[serde(default)]
    pub extra_starts: Vec<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { restarts: 5, seed: 0, max_iter: 20_000, extra_starts: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    /// Constant of the differenced-scale equation before mean adjustment.
    pub intercept: f64,
    /// Mean of the differenced series, removed before estimation.
    pub diff_mean: f64,
    pub sigma2: f64,
    pub css: f64,
    pub aic: f64,
    pub n_eff: usize,
    pub converged: bool,
    /// Fewer than ten observations per parameter after differencing.
    pub short_sample: bool,
    /// Training observations on the modelling scale (logged if `use_log`).
    pub levels: Vec<f64>,
    pub start: YearMonth,
}

impl ArimaModel {
    /// Full parameter vector on the mean-adjusted scale.
    pub fn params(&self) -> Vec<f64> {
        let mut v = alloc::vec![self.adjusted_intercept()];
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&self.theta);
        v.extend_from_slice(&self.seasonal_phi);
        v.extend_from_slice(&self.seasonal_theta);
        v
    }

    fn ar_weights(&self) -> Vec<f64> {
        expanded_weights(&self.phi, &self.seasonal_phi, self.spec.period)
    }

    fn ma_weights(&self) -> Vec<f64> {
        expanded_weights(&self.theta, &self.seasonal_theta, self.spec.period)
    }

    fn adjusted_intercept(&self) -> f64 {
        self.intercept - self.diff_mean * (1.0 - self.ar_weights().iter().sum::<f64>())
    }

    fn adjusted_diffs(&self) -> Vec<f64> {
        let ts = TimeSeries::new(self.start, self.levels.clone()).expect("stored levels are valid");
        let w = difference(&ts, self.spec.d, self.spec.sd, self.spec.period).expect("stored levels are long enough");
        w.series.values().iter().map(|x| x - self.diff_mean).collect()
    }

    /// One-step in-sample fit on the differenced scale.
    pub fn in_sample(&self) -> InSample {
        let w = self.adjusted_diffs();
        let e = css_residuals(self.adjusted_intercept(), &self.ar_weights(), &self.ma_weights(), &w)
            .expect("fitted parameters give a finite recursion");
        let fitted = w.iter().zip(&e).map(|(x, r)| x - r + self.diff_mean).collect();
        InSample { fitted_diffs: fitted, residuals: e }
    }

    /// Last training month.
    pub fn end(&self) -> YearMonth {
        self.start.add_months(self.levels.len() as i64 - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InSample {
    pub fitted_diffs: Vec<f64>,
    pub residuals: Vec<f64>,
}

fn modelling_scale(ts: &TimeSeries, spec: &ArimaSpec) -> Result<TimeSeries> {
    if spec.use_log {
        log_transform(ts)
    } else {
        Ok(ts.clone())
    }
}

pub fn fit_sarima(ts: &TimeSeries, spec: &ArimaSpec) -> Result<ArimaModel> {
    fit_sarima_with(ts, spec, &FitOptions::default())
}

pub fn fit_sarima_with(ts: &TimeSeries, spec: &ArimaSpec, opts: &FitOptions) -> Result<ArimaModel> {
    spec.validate()?;
    let z = modelling_scale(ts, spec)?;
    let diffed = difference(&z, spec.d, spec.sd, spec.period)?;
    let w = diffed.series.values();
    let k = spec.n_params();
    if w.len() <= k {
        return Err(Error::TooShort { needed: spec.differencing_loss() + k + 1, have: ts.len() });
    }
    let diff_mean = mean(w);
    let wc: Vec<f64> = w.iter().map(|x| x - diff_mean).collect();
    if spec.n_coefficients() > 0 && wc.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("differenced series is constant".into()));
    }

    let mut starts: Vec<Vec<f64>> = alloc::vec![alloc::vec![0.0; k]];
    for r in 0..opts.restarts {
        let mut g = rng::stream(opts.seed, &[r as u64]);
        starts.push((0..k).map(|_| g.gen_range(-0.5..0.5)).collect());
    }
    for s in &opts.extra_starts {
        if s.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: s.len() });
        }
        starts.push(s.clone());
    }
    let nm = NelderMeadOptions { max_iter: opts.max_iter, ..Default::default() };
    let mut best: Option<crate::optim::Minimum> = None;
    for s in starts.iter().filter(|s| css_loss(s, &wc, spec).is_finite()) {
        let m = nelder_mead(|x| css_loss(x, &wc, spec), s, &nm);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = match best {
        Some(b) if b.value.is_finite() => b,
        _ => return Err(Error::Numerical("no starting point gave a finite conditional sum of squares".into())),
    };
    let n_eff = w.len();
    let sigma2 = best.value / n_eff as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::Degenerate("zero innovation variance".into()));
    }
    let aic = n_eff as f64 * log(sigma2) + 2.0 * k as f64;
    let p = split_params(&best.x, spec);
    let ar_sum: f64 = expanded_weights(p.phi, p.sphi, spec.period).iter().sum();
    Ok(ArimaModel {
        spec: *spec,
        phi: p.phi.to_vec(),
        theta: p.theta.to_vec(),
        seasonal_phi: p.sphi.to_vec(),
        seasonal_theta: p.stheta.to_vec(),
        intercept: p.c + diff_mean * (1.0 - ar_sum),
        diff_mean,
        sigma2,
        css: best.value,
        aic,
        n_eff,
        converged: best.converged,
        short_sample: n_eff < 10 * k,
        levels: z.values().to_vec(),
        start: z.start(),
    })
}

/// Multi-step forecast on the original scale with future innovations at zero.
pub fn forecast(model: &ArimaModel, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let mut w = model.adjusted_diffs();
    let ar = model.ar_weights();
    let ma = model.ma_weights();
    let c = model.adjusted_intercept();
    let mut e = css_residuals(c, &ar, &ma, &w)
        .ok_or_else(|| Error::Numerical("in-sample recursion diverged".into()))?;
    let n = w.len();
    for t in n..n + horizon {
        let mut v = c;
        for (k, a) in ar.iter().enumerate() {
            if let Some(i) = t.checked_sub(k + 1) {
                v += a * w[i];
            }
        }
        for (k, b) in ma.iter().enumerate() {
            if let Some(i) = t.checked_sub(k + 1) {
                v -= b * e[i];
            }
        }
        w.push(v);
        e.push(0.0);
    }
    let future: Vec<f64> = w[n..].iter().map(|x| x + model.diff_mean).collect();
    let z = integrate(&model.levels, &future, model.spec.d, model.spec.sd, model.spec.period)?;
    Ok(if model.spec.use_log { z.into_iter().map(exp).collect() } else { z })
}

/// One-step-ahead forecasts for the observations of `actual` beyond the
/// training sample, with parameters held at their fitted values.
///
/// `actual` must start where the training data started. The forecast for
/// month `t` conditions on observations up to `t - 1` only.
pub fn one_step_forecasts(model: &ArimaModel, actual: &TimeSeries) -> Result<Vec<f64>> {
    if actual.start() != model.start {
        return Err(Error::InvalidParameter(alloc::format!(
            "series starts at {}, model was fitted from {}",
            actual.start(),
            model.start
        )));
    }
    let n_train = model.levels.len();
    if actual.len() <= n_train {
        return Err(Error::TooShort { needed: n_train + 1, have: actual.len() });
    }
    let z = modelling_scale(actual, &model.spec)?;
    let diffed = difference(&z, model.spec.d, model.spec.sd, model.spec.period)?;
    let w: Vec<f64> = diffed.series.values().iter().map(|x| x - model.diff_mean).collect();
    let e = css_residuals(model.adjusted_intercept(), &model.ar_weights(), &model.ma_weights(), &w)
        .ok_or_else(|| Error::Numerical("one-step recursion diverged".into()))?;
    let loss = model.spec.differencing_loss();
    // z_t - e_t is the prediction: the differencing terms other than w_t are observed history.
    Ok(z.values()[n_train..]
        .iter()
        .zip(&e[n_train - loss..])
        .map(|(zt, et)| {
            let pred = zt - et;
            if model.spec.use_log {
                exp(pred)
            } else {
                pred
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    /// Successful fits, ascending AIC (ties: fewer parameters first).
    pub ranked: Vec<ArimaModel>,
    pub skipped: Vec<(ArimaSpec, String)>,
}

pub fn select_order(ts: &TimeSeries, candidates: &[ArimaSpec], opts: &FitOptions) -> Result<OrderSelection> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate specifications".into()));
    }
    let mut ranked = Vec::new();
    let mut skipped = Vec::new();
    for spec in candidates {
        match fit_sarima_with(ts, spec, opts) {
            Ok(m) => ranked.push(m),
            Err(e) => skipped.push((*spec, alloc::format!("{e}"))),
        }
    }
    if ranked.is_empty() {
        let reasons: Vec<String> = skipped.iter().map(|(s, e)| alloc::format!("{s}: {e}")).collect();
        return Err(Error::Numerical(alloc::format!("all candidates failed: {}", reasons.join("; "))));
    }
    ranked.sort_by(|a, b| a.aic.total_cmp(&b.aic).then(a.spec.n_params().cmp(&b.spec.n_params())));
    Ok(OrderSelection { ranked, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::standard_normal;
    use alloc::vec;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(YearMonth::new(2000, 1).unwrap(), v).unwrap()
    }

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut g = rng::stream(seed, &[]);
        (0..n).map(|_| 3.0 + standard_normal(&mut g)).collect()
    }

    #[test]
    fn white_noise_loss_and_fit() {
        let w = [1.0, 2.0, 4.0];
        let spec = ArimaSpec::new((0, 0, 0), (0, 0, 0), 12, false);
        assert_eq!(css_loss(&[1.0], &w, &spec), 0.0 + 1.0 + 9.0);

        let x = white_noise(500, 4);
        let m = fit_sarima(&ts(x.clone()), &spec).unwrap();
        let mu = mean(&x);
        let var = x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / x.len() as f64;
        assert!((m.intercept - mu).abs() < 1e-6);
        assert!((m.sigma2 - var).abs() < 1e-6);
        let f = forecast(&m, 3).unwrap();
        for v in f {
            assert!((v - m.intercept).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_ma_reduces_to_pure_ar() {
        let w = white_noise(50, 1);
        let arma = ArimaSpec::new((1, 0, 2), (0, 0, 0), 12, false);
        let ar = ArimaSpec::new((1, 0, 0), (0, 0, 0), 12, false);
        assert_eq!(css_loss(&[0.1, 0.4, 0.0, 0.0], &w, &arma), css_loss(&[0.1, 0.4], &w, &ar));
    }

    #[test]
    fn random_walk_forecast_repeats_last_value() {
        // Increments alternate +1/-1, so their mean is exactly zero.
        let v: Vec<f64> = (0..41).map(|i| 10.0 + f64::from(i % 2)).collect();
        let spec = ArimaSpec::new((0, 1, 0), (0, 0, 0), 12, false);
        let m = fit_sarima(&ts(v.clone()), &spec).unwrap();
        for f in forecast(&m, 5).unwrap() {
            assert!((f - v[40]).abs() < 1e-6, "{f}");
        }
    }

    #[test]
    fn divergent_parameters_are_rejected() {
        let w = white_noise(400, 2);
        let spec = ArimaSpec::new((0, 0, 1), (0, 0, 0), 12, false);
        assert_eq!(css_loss(&[0.0, 50.0], &w, &spec), f64::INFINITY);
    }

    #[test]
    fn stability_region() {
        assert!(is_stable(&[]));
        assert!(is_stable(&[0.9]));
        assert!(!is_stable(&[1.0]));
        assert!(!is_stable(&[-1.2]));
        // AR(2) triangle: phi2 < 1, phi2 + phi1 < 1, phi2 - phi1 < 1
        assert!(is_stable(&[0.5, 0.3]));
        assert!(!is_stable(&[0.65, 0.46]));
        assert!(!is_stable(&[1.058, 0.158]));
        assert!(is_stable(&[-0.5, 0.4]));
        assert!(!is_stable(&[0.2, -1.1]));
        // 1 - 0.25 B^2 ... as (1-0.5B)(1+0.5B)(1-0.5B)
        assert!(is_stable(&[0.5, 0.25, -0.125]));
        assert!(!is_stable(&[1.5, -0.25, -0.25]));
    }

    #[test]
    fn spec_validation() {
        assert!(ArimaSpec::new((6, 0, 0), (0, 0, 0), 12, false).validate().is_err());
        assert!(ArimaSpec::new((1, 0, 0), (0, 0, 0), 0, false).validate().is_err());
        let short = ts(vec![1.0, 2.0, 3.0]);
        assert!(fit_sarima(&short, &ArimaSpec::new((1, 1, 1), (0, 0, 0), 12, false)).is_err());
        assert!(forecast(&fit_sarima(&ts(white_noise(30, 3)), &ArimaSpec::new((0, 0, 0), (0, 0, 0), 12, false)).unwrap(), 0).is_err());
    }

    #[test]
    fn empty_candidate_list_and_total_failure() {
        let s = ts(vec![1.0, 2.0]);
        assert!(select_order(&s, &[], &FitOptions::default()).is_err());
        let err = select_order(&s, &[ArimaSpec::new((1, 1, 0), (0, 0, 0), 12, false)], &FitOptions::default()).unwrap_err();
        assert!(alloc::format!("{err}").contains("all candidates failed"));
    }
}
