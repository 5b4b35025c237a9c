use bmom::regression::{build_design, fit_regression, LeastSquaresFit};
use bmom::sampler::{draw_joint, draw_predictive, summarize_draws, summarize_values, DrawConfig};

fn fixture() -> LeastSquaresFit {
    let cols = vec![("x".to_string(), vec![0.0, 1.0, 2.0])];
    fit_regression(&build_design(&[1.0, 2.0, 4.0], &cols, true).unwrap()).unwrap()
}

fn moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, m2, m4 / (m2 * m2) - 3.0)
}

#[test]
fn predictive_draws_match_laplace_moments() {
    let fit = fixture();
    let draws = draw_predictive(&fit, &[1.0, 3.0], &DrawConfig::new(99, 200_000).unwrap()).unwrap();
    let (mean, var, _) = moments(&draws);
    let se = (5.0f64 / 9.0 / draws.len() as f64).sqrt();
    assert!(((mean - 16.0 / 3.0) / se).abs() < 4.0, "mean {mean}");
    assert!((var / (5.0 / 9.0) - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn predictive_excess_kurtosis_with_a_million_draws() {
    let fit = fixture();
    let draws =
        draw_predictive(&fit, &[1.0, 3.0], &DrawConfig::new(7, 1_000_000).unwrap()).unwrap();
    let (_, _, excess) = moments(&draws);
    assert!((excess - 3.0).abs() < 0.15, "excess {excess}");
}

#[test]
fn coefficient_marginals_match_laplace() {
    let fit = fixture();
    let draws = draw_joint(&fit, &DrawConfig::new(2024, 200_000).unwrap()).unwrap();
    for i in 0..fit.k() {
        let beta: Vec<f64> = draws.iter().map(|d| d.beta[i]).collect();
        let (mean, var, excess) = moments(&beta);
        let marginal = fit.coefficient_marginal(i).unwrap();
        let se = (marginal.variance() / beta.len() as f64).sqrt();
        assert!(((mean - marginal.location()) / se).abs() < 4.0);
        assert!((var / marginal.variance() - 1.0).abs() < 0.05);
        assert!(
            (2.5..=3.5).contains(&excess),
            "coefficient {i}: excess {excess}"
        );
    }
}

#[test]
fn sigma2_mean_across_seeds() {
    let fit = fixture();
    for seed in [1, 2, 3, 4, 5] {
        let draws = draw_joint(&fit, &DrawConfig::new(seed, 200_000).unwrap()).unwrap();
        assert!(draws.iter().all(|d| d.sigma2 > 0.0));
        let s: Vec<f64> = draws.iter().map(|d| d.sigma2).collect();
        let (mean, var, _) = moments(&s);
        let z = (mean - fit.s2) / (fit.s2 / (s.len() as f64).sqrt());
        assert!(z.abs() < 4.0, "seed {seed}: z = {z}");
        assert!((var / (fit.s2 * fit.s2) - 1.0).abs() < 0.05);
    }
}

#[test]
fn streams_are_prefix_stable_and_seed_dependent() {
    let fit = fixture();
    let long = draw_joint(&fit, &DrawConfig::new(11, 50_000).unwrap()).unwrap();
    let short = draw_joint(&fit, &DrawConfig::new(11, 9_000).unwrap()).unwrap();
    assert_eq!(&long[..9_000], &short[..]);
    let other = draw_joint(&fit, &DrawConfig::new(12, 9_000).unwrap()).unwrap();
    assert_ne!(short, other);
    let p1 = draw_predictive(&fit, &[1.0, 3.0], &DrawConfig::new(11, 1).unwrap()).unwrap();
    let p2 = draw_predictive(&fit, &[1.0, 3.0], &DrawConfig::new(11, 1).unwrap()).unwrap();
    assert_eq!(p1.len(), 1);
    assert_eq!(p1[0].to_bits(), p2[0].to_bits());
}

#[test]
fn standardized_draws_reproduce_z_moments() {
    let fit = fit_regression(&build_design(&[0.5, 1.5, 1.0, 2.0], &[], true).unwrap()).unwrap();
    let sd = fit.coefficient_marginal(0).unwrap().std_dev();
    let draws = draw_joint(&fit, &DrawConfig::new(5, 1_000_000).unwrap()).unwrap();
    let z: Vec<f64> = draws
        .iter()
        .map(|d| (d.beta[0] - fit.beta_hat[0]) / sd)
        .collect();
    let s = summarize_values(&z, &[0.95]).unwrap();
    let ez2 = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
    let ez4 = z.iter().map(|v| v.powi(4)).sum::<f64>() / z.len() as f64;
    assert!((ez2 - 1.0).abs() < 0.01, "Ez2 {ez2}");
    assert!((ez4 - 6.0).abs() < 0.15, "Ez4 {ez4}");
    assert!((s.excess_kurtosis[0] - 3.0).abs() < 0.15);
    // empirical 95% interval against ±ln(20)/√2
    let c = 20f64.ln() / 2f64.sqrt();
    assert!((s.intervals[0][0].upper - c).abs() < 0.02);
    assert!((s.intervals[0][0].lower + c).abs() < 0.02);
}

#[test]
fn summary_covariance_uses_unbiased_divisor() {
    let rows = vec![vec![0.0, 1.0], vec![2.0, 5.0]];
    let s = summarize_draws(&rows, &[0.5]).unwrap();
    assert_eq!(s.mean, vec![1.0, 3.0]);
    assert_eq!(s.covariance, vec![vec![2.0, 4.0], vec![4.0, 8.0]]);
    assert!(summarize_draws(&rows[..1], &[0.5]).is_err());
}
