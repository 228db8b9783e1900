//! The report bundle: every table and figure input of a pipeline run.

use lagshap_core::explain::{Attribution, DependencePoint, FactorSummary, ImportanceEntry, LimeExplanation};
use lagshap_core::explain::{BackgroundMode, BackgroundStrategy};
use lagshap_core::sarima::ArimaSpec;
use lagshap_core::series::{SeriesTransform, StatsSummary};
use lagshap_core::stats::{BootstrapCi, DmResult, MetricReport};
use lagshap_core::YearMonth;
use serde::{Deserialize, Serialize};

use crate::config::ForecastMode;

/// Bumped whenever the JSON layout changes; matches `schema/report.schema.json`.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub data: DataSection,
    pub setup: Setup,
    pub forecasts: Vec<ForecastRow>,
    pub metrics: Vec<ModelMetrics>,
    /// ARIMA errors as forecast `a`, tree-model errors as forecast `b`.
    pub diebold_mariano: DmResult,
    pub arima: ArimaSummary,
    pub gbt: GbtSummary,
    pub shap: ShapSection,
    pub dependence: DependenceSection,
    pub lime: LimeSection,
    pub permutation_importance: Vec<ImportanceEntry>,
    pub stability: Vec<StabilitySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSection {
    pub start: YearMonth,
    pub end: YearMonth,
    /// Observed levels from `start` to `end`.
    pub observed: Vec<f64>,
    pub full: StatsSummary,
    pub train: StatsSummary,
    /// Lag correlations of the training window on the modelling scale.
    pub lag_correlations: Vec<LagCorrelation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    pub pearson: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub transform: SeriesTransform,
    pub arima_evaluation: ForecastMode,
    pub columns: Vec<String>,
    pub train_start: YearMonth,
    pub train_end: YearMonth,
    pub test_start: YearMonth,
    pub test_end: YearMonth,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub time: YearMonth,
    pub actual: f64,
    pub gbt: f64,
    /// ARIMA forecast used for scoring (see `Setup::arima_evaluation`).
    pub arima: f64,
    pub arima_multi_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub model: String,
    pub point: MetricReport,
    pub rmse_ci: BootstrapCi,
    pub mape_ci: BootstrapCi,
    pub smape_ci: BootstrapCi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaSummary {
    pub spec: ArimaSpec,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub seasonal_phi: Vec<f64>,
    pub seasonal_theta: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    pub aic: f64,
    pub converged: bool,
    pub short_sample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtSummary {
    pub n_trees: usize,
    pub base_score: f64,
    pub train_rmse_initial: f64,
    pub train_rmse_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceAttribution {
    pub time: YearMonth,
    #[serde(flatten)]
    pub attribution: Attribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: String,
    pub mean_abs_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSection {
    pub background: BackgroundMode,
    pub permutations: usize,
    pub tree: Vec<InstanceAttribution>,
    pub permutation: Vec<InstanceAttribution>,
    pub global_tree: Vec<RankedFeature>,
    pub global_permutation: Vec<RankedFeature>,
    /// Pearson correlation of all (instance, feature) phi pairs.
    pub tree_permutation_pearson: f64,
    pub max_additivity_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceSection {
    pub feature: String,
    pub color_feature: String,
    pub points: Vec<DependencePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeSection {
    pub instance_time: YearMonth,
    /// Explanations of `instance_time`, one per kernel width factor.
    pub instance: Vec<LimeExplanation>,
    pub sweep: Vec<FactorSummary>,
    pub top_feature_agreement: f64,
    pub rows: Vec<LimeRow>,
}

/// Per test row: surrogate R² and top feature at each factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeRow {
    pub time: YearMonth,
    pub surrogate_r2: Vec<f64>,
    pub top_feature: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub strategy: BackgroundStrategy,
    pub n_bootstrap: usize,
    pub block_length: usize,
    pub mean_spearman: f64,
    pub pairwise: Vec<f64>,
}

impl ReportBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn metrics_for(&self, model: &str) -> Option<&ModelMetrics> {
        self.metrics.iter().find(|m| m.model == model)
    }

    pub fn stability_for(&self, strategy: BackgroundStrategy) -> Option<&StabilitySummary> {
        self.stability.iter().find(|s| s.strategy == strategy)
    }
}
