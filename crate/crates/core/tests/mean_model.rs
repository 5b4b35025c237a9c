mod common;

use bmom::densities::LaplaceDist;
use bmom::mean_model::{fit_mean, mean_maxent, theta_interval, Sample};
use bmom::regression::{build_design, fit_regression};
use common::simpson;
use proptest::prelude::*;

fn sample(v: &[f64]) -> Sample {
    Sample::new(v.to_vec()).unwrap()
}

fn variance_by_quadrature(d: &LaplaceDist) -> f64 {
    let m = d.location();
    2.0 * simpson(|x| x * x * d.pdf(m + x), 0.0, 40.0 * d.scale(), 200_000)
}

#[test]
fn marginal_variances_by_quadrature() {
    let data = [0.3, 1.7, -0.4, 2.2, 0.9, 1.1];
    let post = fit_mean(&sample(&data)).unwrap();
    let set = mean_maxent(&post, None).unwrap();
    let n = data.len() as f64;
    let v_theta = variance_by_quadrature(&set.theta_marginal);
    assert!((v_theta - post.s2 / n).abs() < 1e-8);
    let v_pred = variance_by_quadrature(&set.predictive_marginal);
    assert!((v_pred - (1.0 + 1.0 / n) * post.s2).abs() < 1e-8);
}

#[test]
fn residuals_sum_to_zero_and_errors_follow_residuals() {
    let data = [10.0, 10.5, 9.25, 11.0, 9.75];
    let post = fit_mean(&sample(&data)).unwrap();
    assert!(post.residuals.iter().sum::<f64>().abs() < 1e-12);
    let set = mean_maxent(&post, None).unwrap();
    for (i, u) in post.residuals.iter().enumerate() {
        assert_eq!(set.error_conditional[i].mean(), *u);
        assert_eq!(set.error_marginal[i].location(), *u);
    }
}

#[test]
fn intercept_only_regression_agrees() {
    let data = [2.5, -1.0, 0.25, 4.0, 3.0, 1.5, 0.0];
    let post = fit_mean(&sample(&data)).unwrap();
    let fit = fit_regression(&build_design(&data, &[], true).unwrap()).unwrap();
    let set = mean_maxent(&post, None).unwrap();
    assert!((post.ybar - fit.beta_hat[0]).abs() < 1e-12);
    assert!((post.s2 - fit.s2).abs() < 1e-12);
    let cm = fit.coefficient_marginal(0).unwrap();
    assert!((cm.scale() - set.theta_marginal.scale()).abs() < 1e-12);
    let pp = fit.predictive_point(&[1.0]).unwrap().marginal().unwrap();
    assert!((pp.scale() - set.predictive_marginal.scale()).abs() < 1e-12);
    for i in 0..data.len() {
        let e = fit.realized_error_marginal(i, None).unwrap();
        assert!((e.marginal.location() - set.error_marginal[i].location()).abs() < 1e-12);
        assert!((e.marginal.scale() - set.error_marginal[i].scale()).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn shift_invariance(
        data in prop::collection::vec(-100f64..100.0, 2..40),
        c in -1e3f64..1e3,
    ) {
        prop_assume!(data.iter().any(|v| (v - data[0]).abs() > 1e-3));
        let a = fit_mean(&sample(&data)).unwrap();
        let shifted: Vec<f64> = data.iter().map(|v| v + c).collect();
        let b = fit_mean(&sample(&shifted)).unwrap();
        let tol = 1e-10 * (1.0 + c.abs() + a.ybar.abs());
        prop_assert!((b.ybar - (a.ybar + c)).abs() < tol);
        prop_assert!((b.s2 - a.s2).abs() < 1e-9 * a.s2.max(1.0) * (1.0 + c.abs()));
        let ia = theta_interval(&a, 0.95).unwrap();
        let ib = theta_interval(&b, 0.95).unwrap();
        prop_assert!((ib.lower - (ia.lower + c)).abs() < tol * 10.0);
        prop_assert!((ib.width() - ia.width()).abs() < 1e-8 * ia.width().max(1.0));
    }

    #[test]
    fn scale_invariance(
        data in prop::collection::vec(-100f64..100.0, 2..40),
        k in 1e-3f64..1e3,
    ) {
        prop_assume!(data.iter().any(|v| (v - data[0]).abs() > 1e-3));
        let a = fit_mean(&sample(&data)).unwrap();
        let scaled: Vec<f64> = data.iter().map(|v| v * k).collect();
        let b = fit_mean(&sample(&scaled)).unwrap();
        prop_assert!((b.ybar - k * a.ybar).abs() <= 1e-12 * k * (1.0 + a.ybar.abs()) * 100.0);
        prop_assert!((b.s2 / (k * k * a.s2) - 1.0).abs() < 1e-12);
        // standardized endpoints stay at ±ln(20)/√2
        let n = data.len() as f64;
        let i = theta_interval(&b, 0.95).unwrap();
        let z = (i.upper - b.ybar) / (b.s2 / n).sqrt();
        prop_assert!((z - 20f64.ln() / 2f64.sqrt()).abs() < 1e-9);
    }
}
