//! Bayesian method-of-moments analysis of location and linear regression
//! models.
//!
//! Given only the first two moments of the parameters, the maximum-entropy
//! posteriors are normal conditionally on `σ²`, exponential for `σ²`, and
//! Laplace for the location/coefficients marginally. This crate computes
//! those densities, their intervals and moments, predictive and realized
//! error densities, the conceptual-sample prior, a seeded posterior sampler,
//! and the comparison with the diffuse-prior Student-t analysis.

// Guards are written `!(x > 0.0)` so that NaN is rejected with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod densities;
pub mod error;
pub mod linalg;
pub mod mean_model;
pub mod prior;
pub mod quadrature;
pub mod regression;
pub mod report;
pub mod sampler;
pub mod special;

pub use densities::{
    central_interval, Density, IntervalEstimate, IntervalMethod, LaplaceDist, NormalDist,
    ScaledExponentialDist,
};
pub use error::{BmomError, Result};
pub use mean_model::{fit_mean, mean_maxent, MeanPosterior, Sample};
pub use prior::{fit_with_prior, ConceptualSample};
pub use regression::{
    build_ar_design, build_design, fit_regression, LeastSquaresFit, RegressionProblem,
};
pub use sampler::{draw_joint, draw_predictive, DrawConfig, JointDraw};
