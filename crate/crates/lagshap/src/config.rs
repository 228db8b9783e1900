//! Pipeline configuration, read from TOML.
//!
//! Every field has a default, so an empty document reproduces the standard
//! run on the bundled fixture.

use std::path::{Path, PathBuf};

use lagshap_core::explain::BackgroundMode;
use lagshap_core::gbt::GbtHyperParams;
use lagshap_core::sarima::ArimaSpec;
use lagshap_core::series::SeriesTransform;
use lagshap_core::supervise::{FeatureSpec, RollingWindow};
use lagshap_core::YearMonth;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::BUILTIN_AIRPASSENGERS;
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// CSV path or `builtin:airpassengers`.
    pub input: String,
    pub test_months: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub features: FeatureConfig,
    pub gbt: GbtConfig,
    pub arima: ArimaConfig,
    pub explain: ExplainConfig,
    pub bootstrap: BootstrapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub lags: Vec<usize>,
    pub rolling_windows: Vec<usize>,
    pub rolling_mean: bool,
    pub rolling_std: bool,
    pub cyclic_month: bool,
    /// Scale the tree model is trained on; forecasts are mapped back to levels.
    pub transform: SeriesTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub row_subsample: f64,
    pub col_subsample: f64,
    pub l2_leaf: f64,
    pub min_split_gain: f64,
    pub min_samples_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArimaConfig {
    pub order: [usize; 3],
    pub seasonal_order: [usize; 3],
    pub period: usize,
    pub use_log: bool,
    pub restarts: usize,
    pub max_iter: usize,
    /// Forecasts scored against the hold-out window.
    pub evaluation: ForecastMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMode {
    /// Each month from observations up to the previous month, as the tree model does.
    OneStep,
    /// The whole window from the end of training.
    MultiStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub permutations: usize,
    pub background: BackgroundChoice,
    pub lime_samples: usize,
    pub kernel_factors: Vec<f64>,
    /// Row shown in the local-explanation figure.
    pub lime_instance: YearMonth,
    pub importance_repeats: usize,
    pub stability_bootstrap: usize,
    pub stability_block: usize,
    pub dependence_feature: String,
    pub dependence_color: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundChoice {
    GlobalMean,
    SeasonalMonth,
}

impl From<BackgroundChoice> for BackgroundMode {
    fn from(b: BackgroundChoice) -> Self {
        match b {
            BackgroundChoice::GlobalMean => BackgroundMode::GlobalMean,
            BackgroundChoice::SeasonalMonth => BackgroundMode::SeasonalMonth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub block_length: usize,
    pub n_resamples: usize,
    pub alpha: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: BUILTIN_AIRPASSENGERS.into(),
            test_months: 24,
            seed: 0,
            output_dir: PathBuf::from("report"),
            features: FeatureConfig::default(),
            gbt: GbtConfig::default(),
            arima: ArimaConfig::default(),
            explain: ExplainConfig::default(),
            bootstrap: BootstrapConfig::default(),
        }
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            lags: (1..=12).collect(),
            rolling_windows: vec![12],
            rolling_mean: true,
            rolling_std: true,
            cyclic_month: true,
            transform: SeriesTransform::LogDifference,
        }
    }
}

impl Default for GbtConfig {
    fn default() -> Self {
        let hp = GbtHyperParams::default();
        Self {
            n_trees: hp.n_trees,
            max_depth: hp.max_depth,
            learning_rate: hp.learning_rate,
            row_subsample: hp.row_subsample,
            col_subsample: hp.col_subsample,
            l2_leaf: hp.l2_leaf,
            min_split_gain: hp.min_split_gain,
            min_samples_leaf: hp.min_samples_leaf,
        }
    }
}

impl Default for ArimaConfig {
    fn default() -> Self {
        Self { order: [2, 1, 2], seasonal_order: [0, 1, 0], period: 12, use_log: true, restarts: 5, max_iter: 20_000, evaluation: ForecastMode::OneStep }
    }
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            permutations: 50,
            background: BackgroundChoice::GlobalMean,
            lime_samples: 5000,
            kernel_factors: vec![0.5, 0.75, 1.0],
            lime_instance: YearMonth::new(1959, 7).expect("valid month"),
            importance_repeats: 10,
            stability_bootstrap: 20,
            stability_block: 12,
            dependence_feature: "lag_12".into(),
            dependence_color: "lag_1".into(),
        }
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { block_length: 12, n_resamples: 1000, alpha: 0.05 }
    }
}

impl FeatureConfig {
    pub fn spec(&self) -> FeatureSpec {
        FeatureSpec {
            lags: self.lags.clone(),
            rolling: self
                .rolling_windows
                .iter()
                .map(|&window| RollingWindow { window, mean: self.rolling_mean, std: self.rolling_std })
                .collect(),
            cyclic_month: self.cyclic_month,
        }
    }
}

impl GbtConfig {
    pub fn hyper_params(&self, seed: u64) -> GbtHyperParams {
        GbtHyperParams {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            row_subsample: self.row_subsample,
            col_subsample: self.col_subsample,
            l2_leaf: self.l2_leaf,
            min_split_gain: self.min_split_gain,
            min_samples_leaf: self.min_samples_leaf,
            seed,
        }
    }
}

impl ArimaConfig {
    pub fn spec(&self) -> ArimaSpec {
        let [p, d, q] = self.order;
        let [sp, sd, sq] = self.seasonal_order;
        ArimaSpec::new((p, d, q), (sp, sd, sq), self.period, self.use_log)
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> AppResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> AppResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| AppError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: impl AsRef<Path>) -> AppResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: String| Err(AppError::Config(m));
        if self.input.is_empty() {
            return bad("input must name a file or builtin:airpassengers".into());
        }
        if self.test_months == 0 {
            return bad("test_months must be at least 1".into());
        }
        self.features.spec().validate().map_err(|e| AppError::Config(format!("features: {e}")))?;
        self.gbt.hyper_params(0).validate().map_err(|e| AppError::Config(format!("gbt: {e}")))?;
        self.arima.spec().validate().map_err(|e| AppError::Config(format!("arima: {e}")))?;
        if self.arima.max_iter == 0 {
            return bad("arima.max_iter must be at least 1".into());
        }
        let ex = &self.explain;
        if ex.permutations == 0 {
            return bad("explain.permutations must be at least 1".into());
        }
        if ex.lime_samples < 2 {
            return bad("explain.lime_samples must be at least 2".into());
        }
        if ex.kernel_factors.is_empty() || ex.kernel_factors.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return bad("explain.kernel_factors must be a non-empty list of positive numbers".into());
        }
        if ex.importance_repeats == 0 {
            return bad("explain.importance_repeats must be at least 1".into());
        }
        if ex.stability_bootstrap < 2 {
            return bad("explain.stability_bootstrap must be at least 2".into());
        }
        if ex.stability_block == 0 {
            return bad("explain.stability_block must be at least 1".into());
        }
        let bs = &self.bootstrap;
        if bs.block_length == 0 || bs.n_resamples == 0 {
            return bad("bootstrap.block_length and bootstrap.n_resamples must be at least 1".into());
        }
        if !(bs.alpha > 0.0 && bs.alpha < 1.0) {
            return bad(format!("bootstrap.alpha must be in (0, 1), got {}", bs.alpha));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded. The output directory
    /// does not affect results and is left out.
    pub fn hash(&self) -> String {
        let canonical = Self { output_dir: PathBuf::new(), ..self.clone() };
        let json = serde_json::to_vec(&canonical).expect("configuration serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
