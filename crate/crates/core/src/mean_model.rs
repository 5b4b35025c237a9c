//! The scalar mean process `y_i = θ + u_i`.
//!
//! `E(θ|D) = ȳ`, `E(u_i|D) = y_i − ȳ`, `E(σ²|D) = s² = Σû_i²/(n−1)`.

use nalgebra::DVector;
use serde::Serialize;

use crate::densities::{
    central_interval, IntervalEstimate, LaplaceDist, NormalDist, ScaledExponentialDist,
};
use crate::error::{BmomError, Result};
use crate::regression::is_zero_variance;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(BmomError::InsufficientData {
                needed: 1,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(BmomError::domain(
                "sample",
                format!("value {i} is not finite"),
            ));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanPosterior {
    pub ybar: f64,
    pub residuals: Vec<f64>,
    pub s2: f64,
    pub n: usize,
}

impl MeanPosterior {
    /// Moments without the positive-variance check.
    pub fn moments(sample: &Sample) -> MeanPosterior {
        let y = sample.values();
        let nf = y.len() as f64;
        let mut ybar = y.iter().sum::<f64>() / nf;
        // One correction pass so the residuals sum to zero to rounding.
        ybar += y.iter().map(|v| v - ybar).sum::<f64>() / nf;
        let residuals: Vec<f64> = y.iter().map(|v| v - ybar).collect();
        let s2 = residuals.iter().map(|u| u * u).sum::<f64>() / (nf - 1.0);
        MeanPosterior {
            ybar,
            residuals,
            s2,
            n: y.len(),
        }
    }

    pub fn s(&self) -> f64 {
        self.s2.sqrt()
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

pub fn fit_mean(sample: &Sample) -> Result<MeanPosterior> {
    let post = MeanPosterior::moments(sample);
    let rss: f64 = post.residuals.iter().map(|u| u * u).sum();
    if is_zero_variance(rss, &DVector::from_column_slice(sample.values())) {
        return Err(BmomError::ZeroVariance);
    }
    Ok(post)
}

/// The maximum-entropy densities for the mean model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxentSet {
    /// `θ | σ², D ~ N(ȳ, σ²/n)`
    pub theta_conditional: NormalDist,
    /// `σ² | D`, exponential with mean `s²`
    pub sigma2_density: ScaledExponentialDist,
    /// Laplace with variance `s²/n`
    pub theta_marginal: LaplaceDist,
    /// Laplace with variance `(1 + 1/n) s²`
    pub predictive_marginal: LaplaceDist,
    /// `y_{n+1} | σ², D ~ N(ȳ, (1 + 1/n) σ²)`
    pub predictive_conditional: NormalDist,
    pub error_conditional: Vec<NormalDist>,
    pub error_marginal: Vec<LaplaceDist>,
}

/// Builds every density of the mean model. Conditional members use
/// `sigma2` when given and `s²` otherwise.
pub fn mean_maxent(post: &MeanPosterior, sigma2: Option<f64>) -> Result<MaxentSet> {
    let sigma2 = match sigma2 {
        Some(v) if !(v > 0.0 && v.is_finite()) => {
            return Err(BmomError::domain("sigma2", format!("{v} must be positive")))
        }
        Some(v) => v,
        None => post.s2,
    };
    let nf = post.nf();
    let inflation = 1.0 + 1.0 / nf;
    let theta_var = post.s2 / nf;
    let error_conditional = post
        .residuals
        .iter()
        .map(|&u| NormalDist::new(u, sigma2 / nf))
        .collect::<Result<Vec<_>>>()?;
    let error_marginal = post
        .residuals
        .iter()
        .map(|&u| LaplaceDist::from_mean_var(u, theta_var))
        .collect::<Result<Vec<_>>>()?;
    Ok(MaxentSet {
        theta_conditional: NormalDist::new(post.ybar, sigma2 / nf)?,
        sigma2_density: ScaledExponentialDist::new(post.s2)?,
        theta_marginal: LaplaceDist::from_mean_var(post.ybar, theta_var)?,
        predictive_marginal: LaplaceDist::from_mean_var(post.ybar, inflation * post.s2)?,
        predictive_conditional: NormalDist::new(post.ybar, inflation * sigma2)?,
        error_conditional,
        error_marginal,
    })
}

/// Exponential density for a strictly positive mean, e.g. times to failure.
pub fn positive_mean_density(post: &MeanPosterior) -> Result<ScaledExponentialDist> {
    if !(post.ybar > 0.0) {
        return Err(BmomError::PositivityViolation {
            what: "ybar",
            value: post.ybar,
        });
    }
    ScaledExponentialDist::new(post.ybar)
}

/// Equal-tail interval for `θ` from its Laplace marginal.
pub fn theta_interval(post: &MeanPosterior, level: f64) -> Result<IntervalEstimate> {
    let marginal = LaplaceDist::from_mean_var(post.ybar, post.s2 / post.nf())?;
    central_interval(&marginal, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post123() -> MeanPosterior {
        fit_mean(&Sample::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap()
    }

    #[test]
    fn fit_examples() {
        let p = post123();
        assert_eq!(p.ybar, 2.0);
        assert_eq!(p.residuals, vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.s2, 1.0);
        let flat = Sample::new(vec![5.0; 4]).unwrap();
        assert_eq!(fit_mean(&flat).unwrap_err(), BmomError::ZeroVariance);
        assert_eq!(MeanPosterior::moments(&flat).ybar, 5.0);
        assert!(matches!(
            Sample::new(vec![3.0]),
            Err(BmomError::InsufficientData { .. })
        ));
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn maxent_examples() {
        let p = post123();
        let set = mean_maxent(&p, None).unwrap();
        assert!((set.theta_marginal.scale() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((set.theta_marginal.pdf(2.0) - 1.5f64.sqrt()).abs() < 1e-14);
        assert!((set.predictive_marginal.variance() - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(set.theta_conditional.mean(), set.theta_marginal.location());
        assert!((set.theta_conditional.variance() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(set.sigma2_density.mean(), 1.0);
        assert_eq!(set.error_marginal.len(), 3);
        assert_eq!(set.error_conditional[2].mean(), 1.0);
        let with = mean_maxent(&p, Some(4.0)).unwrap();
        assert!((with.theta_conditional.variance() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(with.theta_marginal, set.theta_marginal);
        assert!(mean_maxent(&p, Some(0.0)).is_err());
    }

    #[test]
    fn positive_mean() {
        let p = fit_mean(&Sample::new(vec![1.0, 3.0]).unwrap()).unwrap();
        let d = positive_mean_density(&p).unwrap();
        assert_eq!(d.eval(0.0).unwrap().pdf, 0.5);
        let p = fit_mean(&Sample::new(vec![0.5, 1.5]).unwrap()).unwrap();
        assert_eq!(positive_mean_density(&p).unwrap().mean(), 1.0);
        let p = fit_mean(&Sample::new(vec![-1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(matches!(
            positive_mean_density(&p),
            Err(BmomError::PositivityViolation { .. })
        ));
    }

    #[test]
    fn interval_examples() {
        let p = post123();
        let i = theta_interval(&p, 0.95).unwrap();
        let hw = 20f64.ln() / 2f64.sqrt() / 3f64.sqrt();
        assert!((i.half_width() - hw).abs() < 1e-14);
        assert!((hw - 1.2230).abs() < 5e-5);
        let tiny = theta_interval(&p, 1e-12).unwrap();
        assert!(tiny.width() < 1e-11);
        assert!(theta_interval(&p, 1.5).is_err());
    }
}
