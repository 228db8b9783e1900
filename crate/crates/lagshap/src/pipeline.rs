//! End-to-end run: load, featurize, split, fit, forecast, evaluate, explain.
//!
//! Every random stream is derived from the master seed and a fixed stage
//! path, so stages can be run alone (as the subcommands do) and still agree
//! with the full report.

use lagshap_core::explain::{
    dependence_data, explanation_stability, kernel_width_sweep, lime_explain, permutation_importance,
    permutation_shap, seasonal_background, shap_global_summary, Attribution, Background, BackgroundStrategy,
    ImportanceEntry, LimeSettings, StabilitySettings,
};
use lagshap_core::gbt::{fit_gbt, fit_gbt_with_curve, GbtModel, TrainingCurve};
use lagshap_core::rng::derive_seed;
use lagshap_core::sarima::{fit_sarima_with, forecast, one_step_forecasts, ArimaModel, FitOptions};
use lagshap_core::series::{descriptive_stats, lag_correlations, TimeSeries};
use lagshap_core::stats::{block_bootstrap_ci, dm_test, metrics, pearson, BootstrapSettings, Metric};
use lagshap_core::supervise::{build_feature_matrix, chronological_split, Standardizer};
use lagshap_core::FeatureMatrix;

use crate::config::{BackgroundChoice, ForecastMode, PipelineConfig};
use crate::data::load_series;
use crate::error::{AppError, AppResult, StageExt};
use crate::report::*;

/// Stream paths below the master seed.
pub mod stage {
    pub const GBT: u64 = 1;
    pub const ARIMA: u64 = 2;
    pub const PERMUTATION_SHAP: u64 = 3;
    pub const LIME: u64 = 4;
    pub const IMPORTANCE: u64 = 5;
    pub const STABILITY: u64 = 6;
    pub const BOOTSTRAP: u64 = 7;
}

/// The series and its supervised framing.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub levels: TimeSeries,
    /// Series on the tree model's scale.
    pub transformed: TimeSeries,
    pub features: FeatureMatrix,
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Observed levels up to the month before the first test row.
    pub train_levels: TimeSeries,
}

pub fn prepare(cfg: &PipelineConfig) -> AppResult<Prepared> {
    cfg.validate()?;
    let levels = load_series(&cfg.input)?;
    let (transformed, features) = featurize(cfg, &levels)?;
    let (train, test) = chronological_split(&features, cfg.test_months).stage("split")?;
    let train_levels = levels.window(levels.start(), test.times[0].add_months(-1)).stage("split")?;
    Ok(Prepared { levels, transformed, features, train, test, train_levels })
}

/// Transform then lag features, exactly as the pipeline does for `levels`.
pub fn featurize(cfg: &PipelineConfig, levels: &TimeSeries) -> AppResult<(TimeSeries, FeatureMatrix)> {
    let transformed = cfg.features.transform.apply(levels).stage("transform")?;
    let features = build_feature_matrix(&transformed, &cfg.features.spec()).stage("featurize")?;
    Ok((transformed, features))
}

#[derive(Debug, Clone)]
pub struct Fitted {
    pub gbt: GbtModel,
    pub curve: TrainingCurve,
    pub arima: ArimaModel,
}

pub fn fit_tree_model(cfg: &PipelineConfig, train: &FeatureMatrix) -> lagshap_core::Result<GbtModel> {
    fit_gbt(train, &cfg.gbt.hyper_params(derive_seed(cfg.seed, &[stage::GBT])))
}

pub fn fit_models(cfg: &PipelineConfig, prep: &Prepared) -> AppResult<Fitted> {
    let hp = cfg.gbt.hyper_params(derive_seed(cfg.seed, &[stage::GBT]));
    let (gbt, curve) = fit_gbt_with_curve(&prep.train, &hp).stage("fit gbt")?;
    let opts = FitOptions {
        restarts: cfg.arima.restarts,
        seed: derive_seed(cfg.seed, &[stage::ARIMA]),
        max_iter: cfg.arima.max_iter,
        extra_starts: Vec::new(),
    };
    let arima = fit_sarima_with(&prep.train_levels, &cfg.arima.spec(), &opts).stage("fit arima")?;
    Ok(Fitted { gbt, curve, arima })
}

/// Hold-out forecasts on the level scale. The tree model forecasts one step
/// ahead from observed lags. ARIMA is scored one step ahead with fixed
/// parameters or over the whole window, per `arima.evaluation`.
pub fn forecast_test(cfg: &PipelineConfig, prep: &Prepared, fitted: &Fitted) -> AppResult<Vec<ForecastRow>> {
    let h = prep.test.n_rows();
    let multi = forecast(&fitted.arima, h).stage("forecast arima")?;
    let through_test = prep.levels.window(prep.levels.start(), *prep.test.times.last().unwrap()).stage("forecast arima")?;
    let one = one_step_forecasts(&fitted.arima, &through_test).stage("forecast arima")?;
    let scored = match cfg.arima.evaluation {
        ForecastMode::OneStep => &one,
        ForecastMode::MultiStep => &multi,
    };
    let mut rows = Vec::with_capacity(h);
    for (((t, x), a), m) in prep.test.times.iter().zip(&prep.test.rows).zip(scored).zip(&multi) {
        let z = fitted.gbt.predict(x).stage("forecast gbt")?;
        let gbt = cfg.features.transform.invert_one_step(&prep.levels, *t, z).stage("forecast gbt")?;
        let i = prep.levels.index_of(*t).expect("test rows lie inside the series");
        rows.push(ForecastRow { time: *t, actual: prep.levels.values()[i], gbt, arima: *a, arima_multi_step: *m });
    }
    Ok(rows)
}

pub struct Evaluation {
    pub metrics: Vec<ModelMetrics>,
    pub dm: lagshap_core::stats::DmResult,
}

pub fn evaluate(cfg: &PipelineConfig, rows: &[ForecastRow]) -> AppResult<Evaluation> {
    let y: Vec<f64> = rows.iter().map(|r| r.actual).collect();
    let gbt: Vec<f64> = rows.iter().map(|r| r.gbt).collect();
    let arima: Vec<f64> = rows.iter().map(|r| r.arima).collect();
    let mut out = Vec::new();
    for (m, (name, yhat)) in [("gbt", &gbt), ("arima", &arima)].into_iter().enumerate() {
        let ci = |k: u64, metric: Metric| {
            let s = BootstrapSettings {
                block_length: cfg.bootstrap.block_length,
                n_resamples: cfg.bootstrap.n_resamples,
                alpha: cfg.bootstrap.alpha,
                seed: derive_seed(cfg.seed, &[stage::BOOTSTRAP, m as u64, k]),
            };
            block_bootstrap_ci(&y, yhat, metric, &s).stage("bootstrap")
        };
        out.push(ModelMetrics {
            model: name.into(),
            point: metrics(&y, yhat).stage("metrics")?,
            rmse_ci: ci(0, Metric::Rmse)?,
            mape_ci: ci(1, Metric::Mape)?,
            smape_ci: ci(2, Metric::Smape)?,
        });
    }
    let err = |f: &[f64]| -> Vec<f64> { y.iter().zip(f).map(|(a, b)| a - b).collect() };
    let dm = dm_test(&err(&arima), &err(&gbt), 1, true).stage("diebold-mariano")?;
    Ok(Evaluation { metrics: out, dm })
}

/// Background for one explained row.
fn background_for(cfg: &PipelineConfig, train: &FeatureMatrix, t: lagshap_core::YearMonth) -> AppResult<Background> {
    match cfg.explain.background {
        BackgroundChoice::GlobalMean => Background::global_mean(train).stage("background"),
        BackgroundChoice::SeasonalMonth => seasonal_background(train, t.month()).stage("background"),
    }
}

pub struct ShapOutput {
    pub tree: Vec<Attribution>,
    pub permutation: Vec<Attribution>,
    pub section: ShapSection,
}

pub fn shap(cfg: &PipelineConfig, prep: &Prepared, model: &GbtModel) -> AppResult<ShapOutput> {
    let predict = |r: &[f64]| model.predict_unchecked(r);
    let mut tree = Vec::new();
    let mut perm = Vec::new();
    for (i, (t, x)) in prep.test.times.iter().zip(&prep.test.rows).enumerate() {
        let bg = background_for(cfg, &prep.train, *t)?;
        tree.push(lagshap_core::explain::tree_shap(model, x, &bg).stage("tree shap")?);
        let seed = derive_seed(cfg.seed, &[stage::PERMUTATION_SHAP, i as u64]);
        perm.push(
            permutation_shap(predict, &prep.test.columns, x, &bg, cfg.explain.permutations, seed)
                .stage("permutation shap")?,
        );
    }
    let ranked = |a: &[Attribution]| -> AppResult<Vec<RankedFeature>> {
        Ok(shap_global_summary(a)
            .stage("shap summary")?
            .into_iter()
            .map(|(feature, mean_abs_phi)| RankedFeature { feature, mean_abs_phi })
            .collect())
    };
    let flat = |a: &[Attribution]| -> Vec<f64> { a.iter().flat_map(|x| x.phi.iter().copied()).collect() };
    let with_time = |a: &[Attribution]| -> Vec<InstanceAttribution> {
        prep.test.times.iter().zip(a).map(|(t, x)| InstanceAttribution { time: *t, attribution: x.clone() }).collect()
    };
    let gap = tree.iter().chain(&perm).map(Attribution::additivity_gap).fold(0.0, f64::max);
    let section = ShapSection {
        background: cfg.explain.background.into(),
        permutations: cfg.explain.permutations,
        tree: with_time(&tree),
        permutation: with_time(&perm),
        global_tree: ranked(&tree)?,
        global_permutation: ranked(&perm)?,
        tree_permutation_pearson: pearson(&flat(&tree), &flat(&perm)).stage("shap comparison")?,
        max_additivity_gap: gap,
    };
    Ok(ShapOutput { tree, permutation: perm, section })
}

pub fn lime(cfg: &PipelineConfig, prep: &Prepared, model: &GbtModel) -> AppResult<LimeSection> {
    let predict = |r: &[f64]| model.predict_unchecked(r);
    let sd = Standardizer::fit(&prep.train).stage("lime")?;
    let ex = &cfg.explain;
    let sweep = kernel_width_sweep(
        predict,
        &prep.test.rows,
        &prep.train,
        &sd,
        &ex.kernel_factors,
        ex.lime_samples,
        derive_seed(cfg.seed, &[stage::LIME, 0]),
    )
    .stage("lime")?;
    let row = prep.features.row_for(ex.lime_instance).ok_or_else(|| {
        AppError::Config(format!("explain.lime_instance {} has no feature row", ex.lime_instance))
    })?;
    let instance = ex
        .kernel_factors
        .iter()
        .map(|&f| {
            let s = LimeSettings {
                n_samples: ex.lime_samples,
                kernel_width_factor: f,
                seed: derive_seed(cfg.seed, &[stage::LIME, 1]),
            };
            lime_explain(predict, &prep.features.rows[row], &prep.train, &sd, &s).stage("lime")
        })
        .collect::<AppResult<Vec<_>>>()?;
    let rows = prep
        .test
        .times
        .iter()
        .zip(&sweep.explanations)
        .map(|(t, e)| LimeRow {
            time: *t,
            surrogate_r2: e.iter().map(|x| x.surrogate_r2).collect(),
            top_feature: e.iter().map(|x| x.features[x.top_feature()].clone()).collect(),
        })
        .collect();
    Ok(LimeSection {
        instance_time: ex.lime_instance,
        instance,
        sweep: sweep.factors,
        top_feature_agreement: sweep.top_feature_agreement,
        rows,
    })
}

pub fn stability(cfg: &PipelineConfig, prep: &Prepared) -> AppResult<Vec<StabilitySummary>> {
    let settings = StabilitySettings {
        n_bootstrap: cfg.explain.stability_bootstrap,
        block_length: cfg.explain.stability_block,
        seed: derive_seed(cfg.seed, &[stage::STABILITY]),
    };
    let fit = |fm: &FeatureMatrix| fit_tree_model(cfg, fm);
    [BackgroundStrategy::GlobalMean, BackgroundStrategy::SeasonalMonth]
        .into_iter()
        .map(|strategy| {
            let r = explanation_stability(fit, &prep.train, &prep.test, strategy, &settings).stage("stability")?;
            Ok(StabilitySummary {
                strategy,
                n_bootstrap: settings.n_bootstrap,
                block_length: settings.block_length,
                mean_spearman: r.mean_spearman,
                pairwise: r.pairwise,
            })
        })
        .collect()
}

/// Everything a run produces, including the fitted models.
/// Everything downstream of the fitted tree model.
pub struct Explained {
    pub shap: ShapOutput,
    pub dependence: DependenceSection,
    pub lime: LimeSection,
    pub importance: Vec<ImportanceEntry>,
    pub stability: Vec<StabilitySummary>,
}

pub fn explain_all(cfg: &PipelineConfig, prep: &Prepared, model: &GbtModel) -> AppResult<Explained> {
    let shap = shap(cfg, prep, model)?;
    let dependence = DependenceSection {
        feature: cfg.explain.dependence_feature.clone(),
        color_feature: cfg.explain.dependence_color.clone(),
        points: dependence_data(&shap.tree, &prep.test, &cfg.explain.dependence_feature, &cfg.explain.dependence_color)
            .stage("dependence")?,
    };
    let lime = lime(cfg, prep, model)?;
    let importance = permutation_importance(
        |r: &[f64]| model.predict_unchecked(r),
        &prep.test,
        cfg.explain.importance_repeats,
        derive_seed(cfg.seed, &[stage::IMPORTANCE]),
    )
    .stage("permutation importance")?;
    let stability = stability(cfg, prep)?;
    Ok(Explained { shap, dependence, lime, importance, stability })
}

pub fn provenance(cfg: &PipelineConfig) -> Provenance {
    Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        input: cfg.input.clone(),
    }
}

/// Level summaries plus lag correlations of the transformed training window.
pub fn data_section(prep: &Prepared) -> AppResult<DataSection> {
    let train_end = *prep.train.times.last().expect("split leaves training rows");
    let train_z = prep.transformed.window(prep.transformed.start(), train_end).stage("summary")?;
    let lag_correlations = lag_correlations(&train_z, 12)
        .stage("summary")?
        .into_iter()
        .map(|(lag, pearson)| LagCorrelation { lag, pearson })
        .collect();
    Ok(DataSection {
        start: prep.levels.start(),
        end: prep.levels.end(),
        observed: prep.levels.values().to_vec(),
        full: descriptive_stats(&prep.levels),
        train: descriptive_stats(&prep.train_levels),
        lag_correlations,
    })
}

pub fn setup(cfg: &PipelineConfig, prep: &Prepared) -> Setup {
    Setup {
        transform: cfg.features.transform,
        arima_evaluation: cfg.arima.evaluation,
        columns: prep.features.columns.clone(),
        train_start: prep.train.times[0],
        train_end: *prep.train.times.last().unwrap(),
        test_start: prep.test.times[0],
        test_end: *prep.test.times.last().unwrap(),
        n_train: prep.train.n_rows(),
        n_test: prep.test.n_rows(),
    }
}

pub fn arima_summary(a: &ArimaModel) -> ArimaSummary {
    ArimaSummary {
        spec: a.spec,
        phi: a.phi.clone(),
        theta: a.theta.clone(),
        seasonal_phi: a.seasonal_phi.clone(),
        seasonal_theta: a.seasonal_theta.clone(),
        intercept: a.intercept,
        sigma2: a.sigma2,
        aic: a.aic,
        converged: a.converged,
        short_sample: a.short_sample,
    }
}

pub fn gbt_summary(fitted: &Fitted) -> GbtSummary {
    GbtSummary {
        n_trees: fitted.gbt.trees.len(),
        base_score: fitted.gbt.base_score,
        train_rmse_initial: fitted.curve.initial,
        train_rmse_final: fitted.curve.rounds.last().copied().unwrap_or(fitted.curve.initial),
    }
}

pub struct Run {
    pub bundle: ReportBundle,
    pub prepared: Prepared,
    pub fitted: Fitted,
    pub tree_attributions: Vec<Attribution>,
    pub permutation_attributions: Vec<Attribution>,
}

pub fn run(cfg: &PipelineConfig) -> AppResult<Run> {
    let prep = prepare(cfg)?;
    let fitted = fit_models(cfg, &prep)?;
    let forecasts = forecast_test(cfg, &prep, &fitted)?;
    let eval = evaluate(cfg, &forecasts)?;
    let ex = explain_all(cfg, &prep, &fitted.gbt)?;

    let bundle = ReportBundle {
        schema_version: REPORT_SCHEMA_VERSION,
        provenance: provenance(cfg),
        data: data_section(&prep)?,
        setup: setup(cfg, &prep),
        forecasts,
        metrics: eval.metrics,
        diebold_mariano: eval.dm,
        arima: arima_summary(&fitted.arima),
        gbt: gbt_summary(&fitted),
        shap: ex.shap.section,
        dependence: ex.dependence,
        lime: ex.lime,
        permutation_importance: ex.importance,
        stability: ex.stability,
    };
    Ok(Run {
        bundle,
        prepared: prep,
        fitted,
        tree_attributions: ex.shap.tree,
        permutation_attributions: ex.shap.permutation,
    })
}

pub fn run_pipeline(cfg: &PipelineConfig) -> AppResult<ReportBundle> {
    run(cfg).map(|r| r.bundle)
}
