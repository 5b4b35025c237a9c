//! The traditional diffuse-prior normal-likelihood analysis, used as the
//! comparison column: the standardized mean is Student-t with `ν = n − 1`
//! (`n − k` for regression) and `E(σ²|D) = νs²/(ν−2)`.

use serde::Serialize;

use crate::densities::{
    central_interval, IntervalEstimate, IntervalMethod, LaplaceDist, NormalDist,
};
use crate::error::{check_probability, BmomError, Result};
use crate::mean_model::MeanPosterior;
use crate::regression::LeastSquaresFit;
use crate::special::student_t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudentPosterior {
    pub center: f64,
    pub scale: f64,
    pub nu: f64,
}

impl StudentPosterior {
    pub fn new(center: f64, scale: f64, nu: f64) -> Result<Self> {
        if !(nu >= 1.0 && nu.is_finite()) {
            return Err(BmomError::domain(
                "degrees of freedom",
                format!("nu = {nu} must be >= 1"),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(BmomError::DegenerateSpread {
                variance: scale * scale,
            });
        }
        Ok(StudentPosterior { center, scale, nu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TMoments {
    pub m2: f64,
    pub m4: f64,
    pub excess: f64,
}

/// `Ez² = ν/(ν−2)`, defined for `ν > 2`.
pub fn t_second_moment(nu: f64) -> Result<f64> {
    if !(nu > 2.0) {
        return Err(BmomError::MomentUndefined {
            moment: "second moment",
            threshold: 2.0,
            nu,
        });
    }
    Ok(nu / (nu - 2.0))
}

/// `Ez⁴ = 3ν²/((ν−2)(ν−4))`, defined for `ν > 4`.
pub fn t_fourth_moment(nu: f64) -> Result<f64> {
    if !(nu > 4.0) {
        return Err(BmomError::MomentUndefined {
            moment: "fourth moment",
            threshold: 4.0,
            nu,
        });
    }
    Ok(3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0)))
}

/// Excess kurtosis `6/(ν−4)`, defined for `ν > 4`.
pub fn t_excess_kurtosis(nu: f64) -> Result<f64> {
    if !(nu > 4.0) {
        return Err(BmomError::MomentUndefined {
            moment: "excess kurtosis",
            threshold: 4.0,
            nu,
        });
    }
    Ok(6.0 / (nu - 4.0))
}

pub fn t_moments(nu: f64) -> Result<TMoments> {
    let m2 = t_second_moment(nu)?;
    let m4 = t_fourth_moment(nu)?;
    let excess = t_excess_kurtosis(nu)?;
    let implied = m4 / (m2 * m2) - 3.0;
    if (implied - excess).abs() > 1e-9 * excess.abs().max(1.0) {
        return Err(BmomError::Internal(format!(
            "t excess kurtosis mismatch at nu = {nu}: {implied} vs {excess}"
        )));
    }
    Ok(TMoments { m2, m4, excess })
}

/// Traditional posterior mean of `σ²`, `νs²/(ν−2)`.
pub fn t_sigma2_mean(s2: f64, nu: f64) -> Result<f64> {
    if !(s2 > 0.0) {
        return Err(BmomError::DegenerateSpread { variance: s2 });
    }
    if !(nu > 2.0) {
        return Err(BmomError::MomentUndefined {
            moment: "posterior mean of sigma2",
            threshold: 2.0,
            nu,
        });
    }
    Ok(nu * s2 / (nu - 2.0))
}

pub fn t_interval(post: &StudentPosterior, level: f64) -> Result<IntervalEstimate> {
    check_probability("interval level", level)?;
    let multiplier = student_t_quantile(0.5 * (1.0 + level), post.nu)?;
    Ok(IntervalEstimate::symmetric(
        post.center,
        multiplier * post.scale,
        level,
        IntervalMethod::StudentT,
    ))
}

/// Whether the Laplace marginal (excess 3) has heavier tails than the
/// Student-t (`6/(ν−4)`). For `ν ≤ 4` the t excess is unbounded.
pub fn bmom_more_leptokurtic(nu: f64) -> bool {
    nu > 4.0 && 3.0 > 6.0 / (nu - 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ByMethod<T> {
    pub laplace: T,
    pub normal: T,
    pub student_t: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Paired {
    pub bmom: f64,
    /// `None` where the traditional moment does not exist.
    pub traditional: Option<f64>,
}

/// Side-by-side method-of-moments and traditional figures for one target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub target: String,
    pub level: f64,
    pub nu: f64,
    pub posterior_mean: ByMethod<f64>,
    pub sigma2_mean: Paired,
    pub variance: Paired,
    pub intervals: ByMethod<IntervalEstimate>,
    pub width_ratio_laplace_normal: f64,
    pub width_ratio_student_normal: f64,
    pub excess_kurtosis: Paired,
}

/// Comparison for a target with posterior mean `center`, conditional
/// variance `factor · σ²` and degrees of freedom `nu`.
pub fn compare_moments(
    target: &str,
    center: f64,
    s2: f64,
    factor: f64,
    nu: f64,
    level: f64,
) -> Result<ComparisonReport> {
    check_probability("interval level", level)?;
    let var = factor * s2;
    let laplace = central_interval(&LaplaceDist::from_mean_var(center, var)?, level)?;
    let normal = central_interval(&NormalDist::new(center, var)?, level)?;
    let student = t_interval(&StudentPosterior::new(center, var.sqrt(), nu)?, level)?;
    let traditional_sigma2 = t_sigma2_mean(s2, nu).ok();
    Ok(ComparisonReport {
        target: target.to_string(),
        level,
        nu,
        posterior_mean: ByMethod {
            laplace: center,
            normal: center,
            student_t: center,
        },
        sigma2_mean: Paired {
            bmom: s2,
            traditional: traditional_sigma2,
        },
        variance: Paired {
            bmom: var,
            traditional: traditional_sigma2.map(|t| factor * t),
        },
        width_ratio_laplace_normal: laplace.width() / normal.width(),
        width_ratio_student_normal: student.width() / normal.width(),
        intervals: ByMethod {
            laplace,
            normal,
            student_t: student,
        },
        excess_kurtosis: Paired {
            bmom: 3.0,
            traditional: t_excess_kurtosis(nu).ok(),
        },
    })
}

pub fn compare_mean(post: &MeanPosterior, level: f64) -> Result<ComparisonReport> {
    let n = post.n as f64;
    compare_moments("theta", post.ybar, post.s2, 1.0 / n, n - 1.0, level)
}

pub fn compare_coefficient(
    fit: &LeastSquaresFit,
    i: usize,
    level: f64,
) -> Result<ComparisonReport> {
    if i >= fit.k() {
        return Err(BmomError::IndexOutOfRange {
            what: "coefficients",
            index: i,
            len: fit.k(),
        });
    }
    fit.require_spread()?;
    compare_moments(
        &fit.names[i],
        fit.beta_hat[i],
        fit.s2,
        fit.xtx_inv[(i, i)],
        fit.dof as f64,
        level,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mean_model::{fit_mean, Sample};

    #[test]
    fn moments_at_eight() {
        let m = t_moments(8.0).unwrap();
        assert!((m.m2 - 4.0 / 3.0).abs() < 1e-15);
        assert!((m.m4 - 8.0).abs() < 1e-14);
        assert!((m.excess - 1.5).abs() < 1e-15);
        assert!(t_excess_kurtosis(1e12).unwrap() < 1e-11);
        assert_eq!(
            t_moments(4.0).unwrap_err(),
            BmomError::MomentUndefined {
                moment: "fourth moment",
                threshold: 4.0,
                nu: 4.0
            }
        );
        assert!(t_second_moment(2.0).is_err());
    }

    #[test]
    fn sigma2_mean() {
        assert_eq!(t_sigma2_mean(1.0, 4.0).unwrap(), 2.0);
        assert!((t_sigma2_mean(1.3, 1e9).unwrap() - 1.3).abs() < 1e-8);
        for nu in [2.5, 3.0, 10.0, 100.0] {
            assert!(t_sigma2_mean(0.7, nu).unwrap() > 0.7);
        }
        assert!(t_sigma2_mean(1.0, 2.0).is_err());
    }

    #[test]
    fn t_interval_cases() {
        let wide = t_interval(&StudentPosterior::new(0.0, 1.0, 1e9).unwrap(), 0.95).unwrap();
        assert!((wide.upper - 1.96).abs() < 2e-3);
        let cauchy = t_interval(&StudentPosterior::new(3.0, 1.0, 1.0).unwrap(), 0.5).unwrap();
        assert!((cauchy.half_width() - 1.0).abs() < 1e-10);
        let tiny = t_interval(&StudentPosterior::new(3.0, 1.0, 5.0).unwrap(), 1e-12).unwrap();
        assert!(tiny.width() < 1e-10 && (tiny.midpoint() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn report_for_small_sample() {
        let post = fit_mean(&Sample::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        let r = compare_mean(&post, 0.95).unwrap();
        assert_eq!(r.posterior_mean.laplace, 2.0);
        assert_eq!(r.posterior_mean.normal, 2.0);
        assert_eq!(r.posterior_mean.student_t, 2.0);
        assert!((r.width_ratio_laplace_normal - 1.0808).abs() < 1e-3);
        assert_eq!(r.excess_kurtosis.bmom, 3.0);
        assert_eq!(r.excess_kurtosis.traditional, None);
        assert_eq!(r.sigma2_mean.traditional, None);
    }

    #[test]
    fn crossover() {
        assert!(!bmom_more_leptokurtic(6.0));
        assert!(bmom_more_leptokurtic(6.5));
        assert!(!bmom_more_leptokurtic(5.5));
    }
}
