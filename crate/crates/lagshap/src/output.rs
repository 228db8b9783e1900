//! Report directory layout.
//!
//! ```text
//! report.json            the bundle
//! config.toml            resolved configuration
//! forecasts.csv metrics.csv importance.csv features.csv
//! shap_tree.csv shap_permutation.csv
//! gbt_model.json arima_model.json
//! figures/*.svg figures/manifest.json
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{AppError, AppResult};
use crate::io::{write_attributions_csv, write_feature_matrix_csv, write_records_csv};
use crate::pipeline::Run;
use crate::report::ModelMetrics;
use crate::svg::emit_figures;

/// One flat row of the metrics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub model: String,
    pub rmse: f64,
    pub rmse_lower: f64,
    pub rmse_upper: f64,
    pub mape: f64,
    pub mape_lower: f64,
    pub mape_upper: f64,
    pub smape: f64,
    pub smape_lower: f64,
    pub smape_upper: f64,
    pub r2: f64,
}

impl From<&ModelMetrics> for MetricRow {
    fn from(m: &ModelMetrics) -> Self {
        Self {
            model: m.model.clone(),
            rmse: m.point.rmse,
            rmse_lower: m.rmse_ci.lower,
            rmse_upper: m.rmse_ci.upper,
            mape: m.point.mape,
            mape_lower: m.mape_ci.lower,
            mape_upper: m.mape_ci.upper,
            smape: m.point.smape,
            smape_lower: m.smape_ci.lower,
            smape_upper: m.smape_ci.upper,
            r2: m.point.r2,
        }
    }
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| AppError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> AppResult<()> {
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub(crate) fn json_pretty<T: Serialize>(value: &T) -> AppResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the full report directory and returns the files written, in order.
pub fn write_report(run: &Run, cfg: &PipelineConfig, dir: &Path) -> AppResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let b = &run.bundle;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    write_text(&path("report.json"), &b.to_json())?;
    write_text(&path("config.toml"), &cfg.to_toml_string())?;
    write_records_csv(&b.forecasts, create(&path("forecasts.csv"))?)?;
    let metrics: Vec<MetricRow> = b.metrics.iter().map(MetricRow::from).collect();
    write_records_csv(&metrics, create(&path("metrics.csv"))?)?;
    write_records_csv(&b.permutation_importance, create(&path("importance.csv"))?)?;
    write_feature_matrix_csv(&run.prepared.features, create(&path("features.csv"))?)?;
    let times = &run.prepared.test.times;
    write_attributions_csv(times, &run.tree_attributions, create(&path("shap_tree.csv"))?)?;
    write_attributions_csv(times, &run.permutation_attributions, create(&path("shap_permutation.csv"))?)?;
    write_text(&path("gbt_model.json"), &json_pretty(&run.fitted.gbt)?)?;
    write_text(&path("arima_model.json"), &json_pretty(&run.fitted.arima)?)?;

    let fig_dir = dir.join("figures");
    let manifest = emit_figures(b, &fig_dir)?;
    written.extend(manifest.figures.iter().map(|f| fig_dir.join(&f.file)));
    written.push(fig_dir.join("manifest.json"));
    Ok(written)
}
