use std::path::PathBuf;

use lagshap::config::{BackgroundChoice, ForecastMode};
use lagshap::{AppError, PipelineConfig};
use lagshap_core::series::SeriesTransform;

#[test]
fn defaults_are_valid() {
    let cfg = PipelineConfig::default();
    cfg.validate().unwrap();
    assert_eq!(cfg.input, "builtin:airpassengers");
    assert_eq!(cfg.test_months, 24);
    assert_eq!(cfg.features.transform, SeriesTransform::LogDifference);
    assert_eq!(cfg.arima.evaluation, ForecastMode::OneStep);
    assert_eq!(cfg.explain.background, BackgroundChoice::GlobalMean);
}

#[test]
fn zero_test_months_is_a_validation_error() {
    let err = PipelineConfig::from_toml_str("test_months = 0\n").unwrap_err();
    assert!(matches!(err, AppError::Config(_)));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn invalid_fields_are_rejected() {
    for text in [
        "no_such_field = 1\n",
        "[gbt]\nlearning_rate = -0.1\n",
        "[gbt]\nrow_subsample = 0.0\n",
        "[explain]\nkernel_factors = []\n",
        "[bootstrap]\nalpha = 1.5\n",
        "[arima]\norder = [9, 1, 0]\n",
        "[features]\nlags = []\nrolling_windows = []\ncyclic_month = false\n",
    ] {
        let err = PipelineConfig::from_toml_str(text).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{text}");
    }
}

#[test]
fn partial_documents_fill_defaults() {
    let cfg = PipelineConfig::from_toml_str("seed = 9\n[arima]\nevaluation = \"multi_step\"\n").unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.arima.evaluation, ForecastMode::MultiStep);
    assert_eq!(cfg.test_months, 24);
}

#[test]
fn toml_and_json_round_trip() {
    let cfg = PipelineConfig { seed: 42, test_months: 12, ..Default::default() };
    assert_eq!(PipelineConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(PipelineConfig::from_json_str(&json).unwrap(), cfg);

    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("c.toml");
    let json_path = dir.path().join("c.json");
    std::fs::write(&toml_path, cfg.to_toml_string()).unwrap();
    std::fs::write(&json_path, json).unwrap();
    assert_eq!(PipelineConfig::load(&toml_path).unwrap(), cfg);
    assert_eq!(PipelineConfig::load(&json_path).unwrap(), cfg);
}

#[test]
fn hash_tracks_inputs_but_not_output_dir() {
    let a = PipelineConfig::default();
    let b = PipelineConfig { output_dir: PathBuf::from("/elsewhere"), ..a.clone() };
    let c = PipelineConfig { seed: 1, ..a.clone() };
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}
