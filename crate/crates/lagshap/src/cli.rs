//! Subcommands behind the `lagshap` binary.
//!
//! Each command returns the text it would print; with `--out` the text goes
//! to `<out>/<command>.<json|csv>` instead (and `report` writes the whole
//! report directory).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{AppError, AppResult};
use crate::io::{write_attributions_csv, write_feature_matrix_csv, write_records_csv};
use crate::output::{json_pretty, write_report, MetricRow};
use crate::pipeline::{
    arima_summary, data_section, evaluate, explain_all, fit_models, forecast_test, gbt_summary, prepare, run,
};
use crate::report::{
    ArimaSummary, DataSection, DependenceSection, ForecastRow, GbtSummary, LimeSection, ModelMetrics, ShapSection,
    StabilitySummary,
};
use crate::selftest::run_selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lagshap", version, about = "Monthly series forecasting with tree-model attributions")]
pub struct Cli {
    /// Pipeline configuration (TOML, or JSON by extension); defaults apply without it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Summary statistics and lag correlations of the input series.
    Stats,
    /// Supervised feature matrix.
    Featurize,
    /// Fit both models; with --out also writes the fitted models.
    Train,
    /// Hold-out forecasts of both models.
    Forecast,
    /// Attributions, LIME, permutation importance and stability.
    Explain,
    /// Hold-out metrics with bootstrap intervals and the Diebold-Mariano test.
    Evaluate,
    /// Full pipeline; writes the report directory.
    Report,
    /// Brute-force oracle checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Stats => "stats",
            Command::Featurize => "featurize",
            Command::Train => "train",
            Command::Forecast => "forecast",
            Command::Explain => "explain",
            Command::Evaluate => "evaluate",
            Command::Report => "report",
            Command::Selftest => "selftest",
        }
    }
}

/// What a command produced: text for stdout or `--out`, and whether it
/// should be treated as a failure (only `selftest` can fail this way).
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

impl Cli {
    pub fn resolve_config(&self) -> AppResult<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn execute(&self) -> AppResult<Outcome> {
        let cfg = self.resolve_config()?;
        let outcome = dispatch(self.command, &cfg, self.format, self.out.as_deref())?;
        if let (Some(dir), false) = (&self.out, self.command == Command::Report) {
            fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
            let path = dir.join(format!("{}.{}", self.command.name(), self.format.extension()));
            fs::write(&path, &outcome.text).map_err(|e| AppError::io(&path, e))?;
            return Ok(Outcome { text: format!("{}\n", path.display()), failed: outcome.failed });
        }
        Ok(outcome)
    }
}

fn csv_text(f: impl FnOnce(&mut Vec<u8>) -> AppResult<()>) -> AppResult<String> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn records<T: Serialize>(format: Format, json: &impl Serialize, rows: &[T]) -> AppResult<String> {
    match format {
        Format::Json => json_pretty(json),
        Format::Csv => csv_text(|b| write_records_csv(rows, b)),
    }
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    gbt: GbtSummary,
    training_rmse: &'a [f64],
    arima: ArimaSummary,
}

#[derive(Serialize)]
struct CurveRow {
    round: usize,
    train_rmse: f64,
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    metrics: &'a [ModelMetrics],
    diebold_mariano: &'a lagshap_core::stats::DmResult,
}

#[derive(Serialize)]
struct ExplainOutput<'a> {
    shap: &'a ShapSection,
    dependence: &'a DependenceSection,
    lime: &'a LimeSection,
    permutation_importance: &'a [lagshap_core::explain::ImportanceEntry],
    stability: &'a [StabilitySummary],
}

#[derive(Serialize)]
struct SummaryRow {
    series: &'static str,
    n: usize,
    mean: f64,
    std_dev: f64,
    min: f64,
    q25: f64,
    median: f64,
    q75: f64,
    max: f64,
}

fn summary_rows(d: &DataSection) -> Vec<SummaryRow> {
    [("full", &d.full), ("train", &d.train)]
        .into_iter()
        .map(|(series, s)| SummaryRow {
            series,
            n: s.n,
            mean: s.mean,
            std_dev: s.std_dev,
            min: s.min,
            q25: s.q25,
            median: s.median,
            q75: s.q75,
            max: s.max,
        })
        .collect()
}

pub fn dispatch(command: Command, cfg: &PipelineConfig, format: Format, out: Option<&Path>) -> AppResult<Outcome> {
    let ok = |text: String| Ok(Outcome { text, failed: false });
    match command {
        Command::Stats => {
            let d = data_section(&prepare(cfg)?)?;
            ok(records(format, &d, &summary_rows(&d))?)
        }
        Command::Featurize => {
            let prep = prepare(cfg)?;
            match format {
                Format::Json => ok(json_pretty(&prep.features)?),
                Format::Csv => ok(csv_text(|b| write_feature_matrix_csv(&prep.features, b))?),
            }
        }
        Command::Train => {
            let prep = prepare(cfg)?;
            let fitted = fit_models(cfg, &prep)?;
            if let Some(dir) = out {
                write_models(dir, &fitted)?;
            }
            let out = TrainOutput { gbt: gbt_summary(&fitted), training_rmse: &fitted.curve.rounds, arima: arima_summary(&fitted.arima) };
            let rows: Vec<CurveRow> =
                fitted.curve.rounds.iter().enumerate().map(|(i, r)| CurveRow { round: i + 1, train_rmse: *r }).collect();
            ok(records(format, &out, &rows)?)
        }
        Command::Forecast => {
            let prep = prepare(cfg)?;
            let rows: Vec<ForecastRow> = forecast_test(cfg, &prep, &fit_models(cfg, &prep)?)?;
            ok(records(format, &rows, &rows)?)
        }
        Command::Evaluate => {
            let prep = prepare(cfg)?;
            let rows = forecast_test(cfg, &prep, &fit_models(cfg, &prep)?)?;
            let eval = evaluate(cfg, &rows)?;
            let table: Vec<MetricRow> = eval.metrics.iter().map(MetricRow::from).collect();
            ok(records(format, &EvaluateOutput { metrics: &eval.metrics, diebold_mariano: &eval.dm }, &table)?)
        }
        Command::Explain => {
            let prep = prepare(cfg)?;
            let fitted = fit_models(cfg, &prep)?;
            let ex = explain_all(cfg, &prep, &fitted.gbt)?;
            match format {
                Format::Json => ok(json_pretty(&ExplainOutput {
                    shap: &ex.shap.section,
                    dependence: &ex.dependence,
                    lime: &ex.lime,
                    permutation_importance: &ex.importance,
                    stability: &ex.stability,
                })?),
                Format::Csv => ok(csv_text(|b| write_attributions_csv(&prep.test.times, &ex.shap.tree, b))?),
            }
        }
        Command::Report => {
            let r = run(cfg)?;
            let files = write_report(&r, cfg, &cfg.output_dir)?;
            let mut text = String::new();
            for f in files {
                text.push_str(&format!("{}\n", f.display()));
            }
            ok(text)
        }
        Command::Selftest => {
            let checks = run_selftest(cfg.seed);
            let failed = checks.iter().any(|c| !c.passed);
            Ok(Outcome { text: records(format, &checks, &checks)?, failed })
        }
    }
}

fn write_models(dir: &Path, fitted: &crate::pipeline::Fitted) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    for (name, text) in [("gbt_model.json", json_pretty(&fitted.gbt)?), ("arima_model.json", json_pretty(&fitted.arima)?)] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
    }
    Ok(())
}
