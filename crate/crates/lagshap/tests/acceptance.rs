//! Acceptance checks on the bundled fixture. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use lagshap::data::airpassengers;
use lagshap::output::write_report;
use lagshap::pipeline::{featurize, run, Run};
use lagshap::selftest::{dm_oracle, lime_linear_oracle, permutation_shap_oracle, tree_shap_oracle};
use lagshap::PipelineConfig;
use lagshap_core::explain::BackgroundStrategy;
use lagshap_core::oracle::random_row;
use lagshap_core::rng::{derive_seed, stream};
use lagshap_core::supervise::expanding_cv_folds;
use lagshap_core::TimeSeries;

const MAX_RUNTIME: Duration = Duration::from_secs(60);
const GBT_MAX_MAPE: f64 = 8.0;
const GBT_MAX_RMSE: f64 = 20.0;
const ARIMA_MAX_MAPE: f64 = 10.0;
const MIN_TOP3_OVERLAP: usize = 2;
const MIN_SHAP_PEARSON: f64 = 0.90;
const ORACLE_CASES: usize = 200;
const PERMUTATION_CASES: usize = 100;
const PERMUTATIONS: usize = 2000;
const LOCAL_ACCURACY_TOL: f64 = 1e-6;
const MIN_LIME_MEDIAN_R2: f64 = 0.8;
const MIN_DM_P: f64 = 0.05;
const LEAKAGE_PERTURBATIONS: usize = 1000;
const CV_FOLDS: usize = 5;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        println!("{} [{id:>2}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failures += 1;
        }
    }
}

fn top3(names: impl Iterator<Item = String>) -> Vec<String> {
    names.take(3).collect()
}

fn leakage(cfg: &PipelineConfig) -> (bool, String) {
    let levels = airpassengers();
    let (_, base) = featurize(cfg, &levels).expect("fixture featurizes");
    let n = levels.len();
    let mut rows_checked = 0usize;
    for k in 0..LEAKAGE_PERTURBATIONS {
        // perturb every value from a random cut onwards, keeping levels positive
        let cut = 1 + (derive_seed(cfg.seed, &[99, k as u64]) % (n as u64 - 1)) as usize;
        let noise = random_row(&mut stream(cfg.seed, &[99, k as u64]), n - cut);
        let mut values = levels.values().to_vec();
        for (v, e) in values[cut..].iter_mut().zip(noise) {
            *v *= (2.0 * e).exp();
        }
        let perturbed = TimeSeries::new(levels.start(), values).expect("same length");
        let (_, fm) = featurize(cfg, &perturbed).expect("perturbed series featurizes");
        let cut_time = levels.start().add_months(cut as i64);
        for (i, t) in base.times.iter().enumerate().filter(|(_, t)| **t <= cut_time) {
            let same = base.rows[i].iter().zip(&fm.rows[i]).all(|(a, b)| a.to_bits() == b.to_bits());
            if fm.times[i] != *t || !same {
                return (false, format!("row {t} changed when values from {cut_time} were perturbed"));
            }
            rows_checked += 1;
        }
    }
    (true, format!("{LEAKAGE_PERTURBATIONS} perturbations, {rows_checked} rows bit-identical"))
}

fn cv_ordering(run: &Run) -> (bool, String) {
    let train = &run.prepared.train;
    let folds = expanding_cv_folds(train.n_rows(), CV_FOLDS).expect("enough rows for the folds");
    let ok = folds.folds.iter().all(|(tr, te)| {
        !tr.is_empty() && !te.is_empty() && tr.end <= te.start && train.times[tr.end - 1] < train.times[te.start]
    });
    (ok, format!("{} expanding folds, train strictly before test", folds.folds.len()))
}

fn files_identical(a: &Path, b: &Path) -> Result<usize, String> {
    let mut n = 0;
    for entry in walk(a) {
        let rel = entry.strip_prefix(a).unwrap();
        let (x, y) = (std::fs::read(&entry).unwrap(), std::fs::read(b.join(rel)).map_err(|e| format!("{}: {e}", rel.display()))?);
        if x != y {
            return Err(format!("{} differs", rel.display()));
        }
        n += 1;
    }
    Ok(n)
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn main() {
    let cfg = PipelineConfig::default();
    let mut r = Report { failures: 0 };

    let t0 = Instant::now();
    let first = run(&cfg).expect("default pipeline runs");
    let elapsed = t0.elapsed();
    let b = &first.bundle;
    let gbt = b.metrics_for("gbt").unwrap().point;
    let arima = b.metrics_for("arima").unwrap().point;

    r.check(
        1,
        "end-to-end run, tree-model accuracy",
        elapsed < MAX_RUNTIME && gbt.mape <= GBT_MAX_MAPE && gbt.rmse <= GBT_MAX_RMSE,
        format!(
            "{:.1} s (< {} s), MAPE {:.2}% (<= {GBT_MAX_MAPE}), RMSE {:.2} (<= {GBT_MAX_RMSE})",
            elapsed.as_secs_f64(),
            MAX_RUNTIME.as_secs(),
            gbt.mape,
            gbt.rmse
        ),
    );

    r.check(
        2,
        "ARIMA accuracy",
        arima.mape <= ARIMA_MAX_MAPE,
        format!("{:?} MAPE {:.2}% (<= {ARIMA_MAX_MAPE}), RMSE {:.2}", b.setup.arima_evaluation, arima.mape, arima.rmse),
    );

    let shap3 = top3(b.shap.global_tree.iter().map(|f| f.feature.clone()));
    let imp3 = top3(b.permutation_importance.iter().map(|e| e.feature.clone()));
    let overlap = shap3.iter().filter(|f| imp3.contains(f)).count();
    r.check(
        3,
        "global ranking",
        shap3[0] == "lag_12" && overlap >= MIN_TOP3_OVERLAP,
        format!("SHAP top-3 {shap3:?}, importance top-3 {imp3:?}, overlap {overlap} (>= {MIN_TOP3_OVERLAP})"),
    );

    let pearson = b.shap.tree_permutation_pearson;
    r.check(
        4,
        "permutation SHAP vs TreeSHAP",
        pearson >= MIN_SHAP_PEARSON,
        format!("pearson {pearson:.4} over {} rows (>= {MIN_SHAP_PEARSON})", b.shap.tree.len()),
    );

    let tree = tree_shap_oracle(cfg.seed, ORACLE_CASES);
    let perm = permutation_shap_oracle(cfg.seed, PERMUTATION_CASES, PERMUTATIONS);
    r.check(
        5,
        "oracle equivalence",
        tree.passed && perm.passed,
        format!(
            "TreeSHAP max dev {:.2e} over {} cases (< {:e}); permutation m={PERMUTATIONS} max dev {:.4} over {} cases (< {})",
            tree.max_deviation, tree.cases, tree.tolerance, perm.max_deviation, perm.cases, perm.tolerance
        ),
    );

    let gaps = b.shap.tree.iter().chain(&b.shap.permutation).map(|a| a.attribution.additivity_gap());
    let (count, worst) = gaps.fold((0, 0.0f64), |(n, w), g| (n + 1, w.max(g)));
    r.check(
        6,
        "local accuracy",
        worst < LOCAL_ACCURACY_TOL,
        format!("max |baseline + sum(phi) - prediction| {worst:.2e} over {count} explanations (< {LOCAL_ACCURACY_TOL:e})"),
    );

    let lime_lin = lime_linear_oracle(cfg.seed);
    let in_range: Vec<_> = b.lime.sweep.iter().filter(|s| (0.5..=1.0).contains(&s.factor)).collect();
    let lime_ok = !in_range.is_empty() && in_range.iter().all(|s| s.median_r2 >= MIN_LIME_MEDIAN_R2) && lime_lin.passed;
    let medians: Vec<String> = in_range.iter().map(|s| format!("{}: {:.3}", s.factor, s.median_r2)).collect();
    r.check(
        7,
        "LIME fidelity",
        lime_ok,
        format!(
            "median R2 by factor [{}] (>= {MIN_LIME_MEDIAN_R2}); linear recovery dev {:.1e} (< {:e})",
            medians.join(", "),
            lime_lin.max_deviation,
            lime_lin.tolerance
        ),
    );

    let dm = &b.diebold_mariano;
    let dm_hand = dm_oracle();
    r.check(
        8,
        "Diebold-Mariano",
        dm.p_value > MIN_DM_P && dm_hand.passed,
        format!(
            "statistic {:.3}, p {:.3} (> {MIN_DM_P}); hand oracle dev {:.1e} (< {:e})",
            dm.statistic, dm.p_value, dm_hand.max_deviation, dm_hand.tolerance
        ),
    );

    let global = b.stability_for(BackgroundStrategy::GlobalMean).unwrap();
    let seasonal = b.stability_for(BackgroundStrategy::SeasonalMonth).unwrap();
    r.check(
        9,
        "explanation stability",
        seasonal.mean_spearman >= global.mean_spearman,
        format!(
            "seasonal {:.3} >= global {:.3} over {} refits",
            seasonal.mean_spearman, global.mean_spearman, seasonal.n_bootstrap
        ),
    );

    let (leak_ok, leak_detail) = leakage(&cfg);
    let (cv_ok, cv_detail) = cv_ordering(&first);
    r.check(10, "leakage", leak_ok && cv_ok, format!("{leak_detail}; {cv_detail}"));

    let second = run(&cfg).expect("default pipeline runs");
    let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_report(&first, &cfg, dirs.0.path()).unwrap();
    write_report(&second, &cfg, dirs.1.path()).unwrap();
    let same_json = first.bundle.to_json() == second.bundle.to_json();
    let (det_ok, det_detail) = match files_identical(dirs.0.path(), dirs.1.path()) {
        Ok(n) => (same_json, format!("report.json identical: {same_json}; {n} emitted files byte-identical")),
        Err(e) => (false, e),
    };
    r.check(11, "determinism", det_ok, det_detail);

    println!("{} of 11 criteria passed", 11 - r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
