//! LIME local surrogates.
//!
//! Perturbations draw every feature independently from its training column,
//! so the neighbourhood ignores the joint structure of lagged features. The
//! surrogate is fitted in standardized space; coefficients are reported both
//! per standardized unit and per raw unit.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::{quantile_sorted, sorted_copy};
use crate::supervise::{FeatureMatrix, Standardizer};

const RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimeSettings {
    pub n_samples: usize,
    /// Kernel width is `factor * sqrt(p)` in standardized units.
    pub kernel_width_factor: f64,
    pub seed: u64,
}

impl Default for LimeSettings {
    fn default() -> Self {
        Self { n_samples: 5000, kernel_width_factor: 0.75, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeExplanation {
    pub features: Vec<String>,
    /// Surrogate intercept on the raw feature scale.
    pub intercept: f64,
    /// Change in prediction per raw unit of each feature.
    pub coefficients: Vec<f64>,
    /// Change in prediction per training standard deviation.
    pub scaled_coefficients: Vec<f64>,
    pub kernel_width: f64,
    pub surrogate_r2: f64,
    pub n_samples: usize,
}

impl LimeExplanation {
    /// Index of the largest |scaled coefficient|; lowest index on ties.
    pub fn top_feature(&self) -> usize {
        let mut best = 0;
        for (j, c) in self.scaled_coefficients.iter().enumerate() {
            if libm::fabs(*c) > libm::fabs(self.scaled_coefficients[best]) {
                best = j;
            }
        }
        best
    }
}

struct Neighbourhood {
    /// Standardized perturbations, one row per sample.
    z: Vec<Vec<f64>>,
    /// Squared distance to the standardized instance.
    d2: Vec<f64>,
    y: Vec<f64>,
}

fn check_inputs(instance: &[f64], train: &FeatureMatrix, sd: &Standardizer, n_samples: usize) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Empty("LIME training matrix"));
    }
    let p = train.n_cols();
    if instance.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: instance.len() });
    }
    if sd.means.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: sd.means.len() });
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("LIME needs at least two samples".into()));
    }
    Ok(())
}

fn sample<F: Fn(&[f64]) -> f64>(
    predict: &F,
    instance: &[f64],
    train: &FeatureMatrix,
    sd: &Standardizer,
    n_samples: usize,
    seed: u64,
) -> Neighbourhood {
    let p = instance.len();
    let n_train = train.n_rows();
    let centre = sd.transform_row(instance);
    let mut g = rng::stream(seed, &[]);
    let mut z = Vec::with_capacity(n_samples);
    let mut d2 = Vec::with_capacity(n_samples);
    let mut y = Vec::with_capacity(n_samples);
    let mut raw = alloc::vec![0.0; p];
    for _ in 0..n_samples {
        for (j, v) in raw.iter_mut().enumerate() {
            *v = train.rows[g.gen_range(0..n_train)][j];
        }
        y.push(predict(&raw));
        let zi = sd.transform_row(&raw);
        d2.push(zi.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum());
        z.push(zi);
    }
    Neighbourhood { z, d2, y }
}

/// Solves the symmetric positive definite system `a x = b` in place.
fn cholesky_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<()> {
    let n = b.len();
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Degenerate("LIME design is singular".into()));
        }
        let d = libm::sqrt(d);
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i][k] * b[k];
        }
        b[i] = s / a[i][i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k][i] * b[k];
        }
        b[i] = s / a[i][i];
    }
    Ok(())
}

fn fit_surrogate(nb: &Neighbourhood, train: &FeatureMatrix, sd: &Standardizer, factor: f64) -> Result<LimeExplanation> {
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!("kernel width factor must be positive, got {factor}")));
    }
    let p = train.n_cols();
    let sigma = factor * libm::sqrt(p as f64);
    let s2 = sigma * sigma;
    // Shifting by the nearest distance rescales all weights equally and keeps
    // them from underflowing.
    let d2_min = nb.d2.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = nb.d2.iter().map(|d| libm::exp(-(d - d2_min) / s2)).collect();

    let k = p + 1;
    let mut xtx = alloc::vec![alloc::vec![0.0; k]; k];
    let mut xty = alloc::vec![0.0; k];
    let mut design = alloc::vec![0.0; k];
    for ((zi, &yi), &wi) in nb.z.iter().zip(&nb.y).zip(&w) {
        design[0] = 1.0;
        design[1..].copy_from_slice(zi);
        for a in 0..k {
            let wa = wi * design[a];
            xty[a] += wa * yi;
            for b in 0..=a {
                xtx[a][b] += wa * design[b];
            }
        }
    }
    for a in 0..k {
        xtx[a][a] += RIDGE;
        for b in a + 1..k {
            xtx[a][b] = xtx[b][a];
        }
    }
    let mut beta = xty;
    cholesky_solve(&mut xtx, &mut beta)?;

    let w_sum: f64 = w.iter().sum();
    let y_bar = nb.y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / w_sum;
    let (mut sse, mut sst) = (0.0, 0.0);
    for ((zi, &yi), &wi) in nb.z.iter().zip(&nb.y).zip(&w) {
        let fit = beta[0] + zi.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>();
        sse += wi * (yi - fit) * (yi - fit);
        sst += wi * (yi - y_bar) * (yi - y_bar);
    }
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 };

    let scaled = beta[1..].to_vec();
    let mut intercept = beta[0];
    let mut coefficients = Vec::with_capacity(p);
    for j in 0..p {
        if sd.passthrough[j] {
            coefficients.push(scaled[j]);
        } else {
            let c = scaled[j] / sd.scales[j];
            intercept -= c * sd.means[j];
            coefficients.push(c);
        }
    }
    if coefficients.iter().any(|c| !c.is_finite()) || !intercept.is_finite() {
        return Err(Error::Numerical("LIME coefficients are not finite".into()));
    }
    Ok(LimeExplanation {
        features: train.columns.clone(),
        intercept,
        coefficients,
        scaled_coefficients: scaled,
        kernel_width: sigma,
        surrogate_r2: r2,
        n_samples: nb.y.len(),
    })
}

/// Weighted linear surrogate of `predict` around `instance`.
pub fn lime_explain<F: Fn(&[f64]) -> f64>(
    predict: F,
    instance: &[f64],
    train: &FeatureMatrix,
    standardizer: &Standardizer,
    settings: &LimeSettings,
) -> Result<LimeExplanation> {
    check_inputs(instance, train, standardizer, settings.n_samples)?;
    let nb = sample(&predict, instance, train, standardizer, settings.n_samples, settings.seed);
    fit_surrogate(&nb, train, standardizer, settings.kernel_width_factor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub factor: f64,
    pub kernel_width: f64,
    pub median_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub factors: Vec<FactorSummary>,
    /// Fraction of instances whose top feature is the same at every factor.
    pub top_feature_agreement: f64,
    /// `explanations[i][f]` explains instance `i` at factor `f`.
    pub explanations: Vec<Vec<LimeExplanation>>,
}

/// Runs LIME for each instance at each kernel width factor.
///
/// Instance `i` reuses one perturbation sample across factors, drawn from
/// the stream `(seed, i)`.
pub fn kernel_width_sweep<F: Fn(&[f64]) -> f64>(
    predict: F,
    instances: &[Vec<f64>],
    train: &FeatureMatrix,
    standardizer: &Standardizer,
    factors: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<SweepReport> {
    if factors.is_empty() {
        return Err(Error::Empty("kernel width factors"));
    }
    if instances.is_empty() {
        return Err(Error::Empty("LIME instances"));
    }
    let mut explanations = Vec::with_capacity(instances.len());
    for (i, x) in instances.iter().enumerate() {
        check_inputs(x, train, standardizer, n_samples)?;
        let nb = sample(&predict, x, train, standardizer, n_samples, rng::derive_seed(seed, &[i as u64]));
        let per = factors
            .iter()
            .map(|&f| fit_surrogate(&nb, train, standardizer, f))
            .collect::<Result<Vec<_>>>()?;
        explanations.push(per);
    }
    let mut summaries = Vec::with_capacity(factors.len());
    for (f, &factor) in factors.iter().enumerate() {
        let r2: Vec<f64> = explanations.iter().map(|e| e[f].surrogate_r2).collect();
        summaries.push(FactorSummary {
            factor,
            kernel_width: explanations[0][f].kernel_width,
            median_r2: quantile_sorted(&sorted_copy(&r2), 0.5),
        });
    }
    let agree = explanations
        .iter()
        .filter(|e| {
            let top = e[0].top_feature();
            e.iter().all(|x| x.top_feature() == top)
        })
        .count();
    Ok(SweepReport {
        factors: summaries,
        top_feature_agreement: agree as f64 / instances.len() as f64,
        explanations,
    })
}
