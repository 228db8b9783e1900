use lagshap_core::rng;
use lagshap_core::stats::{
    block_bootstrap_ci, dm_test, mape, metrics, pearson, rmse, smape, spearman, BootstrapSettings, Metric,
};
use proptest::prelude::*;

const E_A: [f64; 8] = [3.0, -1.0, 2.0, 4.0, -2.0, 5.0, 1.0, -3.0];
const E_B: [f64; 8] = [1.0, 2.0, -1.0, 3.0, 1.0, -2.0, 2.0, 1.0];

#[test]
fn dm_hand_oracle() {
    // d = [8, -3, 3, 7, 3, 21, -3, 8]; reference values from an independent
    // numpy/scipy evaluation of the same formulas.
    let r = dm_test(&E_A, &E_B, 1, true).unwrap();
    assert!((r.statistic - 2.0277205146264348).abs() < 1e-9);
    assert!((r.p_value - 0.08218875368716569).abs() < 1e-9);
    assert!(r.small_sample_corrected && !r.indeterminate);
    let one = dm_test(&E_A, &E_B, 1, false).unwrap();
    assert!((one.p_value - 0.041094376843582844).abs() < 1e-9);
    let h2 = dm_test(&E_A, &E_B, 2, true).unwrap();
    assert!((h2.statistic - 9.701088140570166).abs() < 1e-9);
    assert!((h2.p_value - 2.6123138781849047e-05).abs() < 1e-9);
}

#[test]
fn dm_antisymmetric_and_guarded() {
    let a = dm_test(&E_A, &E_B, 1, true).unwrap();
    let b = dm_test(&E_B, &E_A, 1, true).unwrap();
    assert_eq!(a.statistic, -b.statistic);
    assert_eq!(a.p_value, b.p_value);
    let same = dm_test(&E_A, &E_A, 1, true).unwrap();
    assert!(same.indeterminate);
    assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
    assert!(dm_test(&E_A[..3], &E_B[..3], 1, true).is_err());
    assert!(dm_test(&E_A, &E_B[..7], 1, true).is_err());
}

#[test]
fn hand_metrics() {
    let m = metrics(&[100.0, 200.0], &[110.0, 190.0]).unwrap();
    assert!((m.rmse - 10.0).abs() < 1e-12);
    assert!((m.mape - 7.5).abs() < 1e-12);
    let p = metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!((p.rmse, p.mape, p.smape, p.r2), (0.0, 0.0, 0.0, 1.0));
    assert!(metrics(&[5.0, 5.0], &[4.0, 6.0]).unwrap().r2 < 0.0);
    assert!(mape(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
}

fn pairs(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut g = rng::stream(seed, &[]);
    let y: Vec<f64> = (0..n).map(|i| 300.0 + 50.0 * (i as f64 / 2.0).sin() + i as f64).collect();
    let yhat = y.iter().map(|v| v + 20.0 * rng::standard_normal(&mut g)).collect();
    (y, yhat)
}

#[test]
fn bootstrap_alpha_monotone_and_deterministic() {
    let (y, yhat) = pairs(24, 1);
    let s = |alpha| BootstrapSettings { alpha, seed: 5, ..BootstrapSettings::default() };
    let mut prev_width = 0.0;
    for alpha in [0.5, 0.2, 0.1, 0.05, 0.01] {
        let ci = block_bootstrap_ci(&y, &yhat, Metric::Rmse, &s(alpha)).unwrap();
        assert!(ci.lower <= ci.point && ci.point <= ci.upper);
        assert!(ci.upper - ci.lower >= prev_width);
        prev_width = ci.upper - ci.lower;
    }
    assert!(prev_width > 0.0);
    let a = block_bootstrap_ci(&y, &yhat, Metric::Mape, &s(0.05)).unwrap();
    let b = block_bootstrap_ci(&y, &yhat, Metric::Mape, &s(0.05)).unwrap();
    assert_eq!(a, b);
    assert!(block_bootstrap_ci(&y[..10], &yhat[..10], Metric::Rmse, &s(0.05)).is_err());
}

#[test]
fn correlations() {
    let x = [1.0, 4.0, 2.0, 8.0, 5.0];
    assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let sorted = [1.0, 2.0, 4.0, 5.0, 8.0];
    let sorted_rev: Vec<f64> = sorted.iter().rev().copied().collect();
    assert_eq!(spearman(&sorted, &sorted_rev).unwrap(), -1.0);
    let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 7.0).collect();
    assert!((pearson(&x, &rev).unwrap() - pearson(&y, &rev).unwrap()).abs() < 1e-12);
    assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
}

proptest! {
    #[test]
    fn rmse_bounds_mean_error(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..50)) {
        let (y, yhat): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let me = y.iter().zip(&yhat).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64;
        prop_assert!(rmse(&y, &yhat).unwrap() >= me.abs() - 1e-9);
    }

    #[test]
    fn smape_symmetric(v in prop::collection::vec((0.1f64..1e3, 0.1f64..1e3), 1..50)) {
        let (y, yhat): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let a = smape(&y, &yhat).unwrap();
        prop_assert!((a - smape(&yhat, &y).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=200.0).contains(&a));
    }
}
