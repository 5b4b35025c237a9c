//! Method-of-moments analysis of `y = Xβ + u`.
//!
//! With nothing systematic left in the realized errors (`Xᵀ E(u|D) = 0`), the
//! posterior mean of `β` is the least-squares `β̂` and the posterior mean of
//! `σ²` is `s² = ûᵀû/(n−k)`. Conditional on `σ²` the coefficients have
//! covariance `(XᵀX)⁻¹σ²`; the maximum-entropy marginals obtained by mixing
//! over the exponential `σ²` density are Laplace laws.
//!
//! Indices in this module are zero-based.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::densities::{LaplaceDist, NormalDist, ScaledExponentialDist};
use crate::error::{BmomError, Result};
use crate::linalg::PivotedQr;

/// Largest supported number of regressors.
pub const MAX_REGRESSORS: usize = 100;

pub const INTERCEPT_NAME: &str = "intercept";

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    y: DVector<f64>,
    x: DMatrix<f64>,
    names: Vec<String>,
    intercept: bool,
}

impl RegressionProblem {
    /// Validates shape, finiteness, `n > k`, `k ≤ 100` and full column rank.
    pub fn new(
        y: DVector<f64>,
        x: DMatrix<f64>,
        names: Vec<String>,
        intercept: bool,
    ) -> Result<Self> {
        let (n, k) = x.shape();
        if y.len() != n {
            return Err(BmomError::DimensionMismatch {
                what: "response length",
                expected: n,
                got: y.len(),
            });
        }
        if names.len() != k {
            return Err(BmomError::DimensionMismatch {
                what: "column names",
                expected: k,
                got: names.len(),
            });
        }
        if k == 0 {
            return Err(BmomError::IllPosedDesign {
                reason: "design has no columns".into(),
                columns: vec![],
            });
        }
        if k > MAX_REGRESSORS {
            return Err(BmomError::IllPosedDesign {
                reason: format!("{k} regressors exceeds the supported maximum {MAX_REGRESSORS}"),
                columns: vec![],
            });
        }
        if n <= k {
            return Err(BmomError::InsufficientData { needed: k, got: n });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(BmomError::domain(
                "response",
                format!("row {i} is not finite"),
            ));
        }
        if let Some((idx, _)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let col = idx / n;
            return Err(BmomError::domain(
                "design",
                format!("column {} row {} is not finite", names[col], idx % n),
            ));
        }
        let qr = PivotedQr::factor(&x);
        if !qr.is_full_rank() {
            return Err(rank_error(&qr, &names));
        }
        Ok(RegressionProblem {
            y,
            x,
            names,
            intercept,
        })
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }
}

fn rank_error(qr: &PivotedQr, names: &[String]) -> BmomError {
    BmomError::IllPosedDesign {
        reason: format!(
            "design has numerical rank {} but {} columns",
            qr.rank(),
            qr.cols()
        ),
        columns: qr
            .deficient_columns()
            .into_iter()
            .map(|c| names[c].clone())
            .collect(),
    }
}

/// Assembles `X` from named columns, with a leading column of ones when
/// `intercept` is set.
pub fn build_design(
    response: &[f64],
    columns: &[(String, Vec<f64>)],
    intercept: bool,
) -> Result<RegressionProblem> {
    let n = response.len();
    for (name, values) in columns {
        if values.len() != n {
            return Err(BmomError::RaggedColumns {
                column: name.clone(),
                expected: n,
                got: values.len(),
            });
        }
    }
    let k = columns.len() + usize::from(intercept);
    let mut names = Vec::with_capacity(k);
    if intercept {
        names.push(INTERCEPT_NAME.to_string());
    }
    names.extend(columns.iter().map(|(name, _)| name.clone()));
    let offset = usize::from(intercept);
    let x = DMatrix::from_fn(n, k, |i, j| {
        if intercept && j == 0 {
            1.0
        } else {
            columns[j - offset].1[i]
        }
    });
    RegressionProblem::new(DVector::from_column_slice(response), x, names, intercept)
}

/// Autoregressive design of order `q`: row `t` regresses `series[t]` on
/// `(1, series[t−1], …, series[t−q])`, for `t = q..len`. The first `q`
/// values enter only as regressors.
pub fn build_ar_design(series: &[f64], q: usize, intercept: bool) -> Result<RegressionProblem> {
    let k = q + usize::from(intercept);
    if series.len() <= q || series.len() - q <= k {
        return Err(BmomError::InsufficientData {
            needed: q + k,
            got: series.len(),
        });
    }
    let response = &series[q..];
    let columns: Vec<(String, Vec<f64>)> = (1..=q)
        .map(|lag| {
            let values = (q..series.len()).map(|t| series[t - lag]).collect();
            (format!("lag{lag}"), values)
        })
        .collect();
    build_design(response, &columns, intercept)
}

/// Least-squares moments of one fitted problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresFit {
    pub names: Vec<String>,
    pub beta_hat: DVector<f64>,
    pub residuals: DVector<f64>,
    pub s2: f64,
    pub dof: usize,
    pub xtx_inv: DMatrix<f64>,
    pub leverage: DVector<f64>,
    pub(crate) x: DMatrix<f64>,
    pub(crate) y: DVector<f64>,
}

/// Least-squares moments without the positive-variance check, so `β̂` and
/// `û` stay available for exact fits.
pub fn least_squares(problem: &RegressionProblem) -> Result<LeastSquaresFit> {
    least_squares_with_dof(problem, problem.n() - problem.k())
}

pub(crate) fn least_squares_with_dof(
    problem: &RegressionProblem,
    dof: usize,
) -> Result<LeastSquaresFit> {
    let qr = PivotedQr::factor(problem.x());
    if !qr.is_full_rank() {
        return Err(rank_error(&qr, problem.names()));
    }
    let beta_hat = qr.solve(problem.y());
    let residuals = problem.y() - problem.x() * &beta_hat;
    let s2 = residuals.norm_squared() / dof as f64;
    Ok(LeastSquaresFit {
        names: problem.names().to_vec(),
        beta_hat,
        residuals,
        s2,
        dof,
        xtx_inv: qr.xtx_inverse(),
        leverage: qr.leverage(),
        x: problem.x().clone(),
        y: problem.y().clone(),
    })
}

/// Treats a residual sum of squares as zero when it is indistinguishable
/// from rounding in `y`.
pub(crate) fn is_zero_variance(rss: f64, y: &DVector<f64>) -> bool {
    let floor = 64.0 * f64::EPSILON * y.norm();
    rss <= floor * floor
}

pub fn fit_regression(problem: &RegressionProblem) -> Result<LeastSquaresFit> {
    let fit = least_squares(problem)?;
    fit.require_spread()?;
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictivePoint {
    pub y_hat_f: f64,
    /// `1 + x_fᵀ(XᵀX)⁻¹x_f`
    pub inflation: f64,
    pub s_e2: f64,
}

impl PredictivePoint {
    pub fn marginal(&self) -> Result<LaplaceDist> {
        LaplaceDist::from_mean_var(self.y_hat_f, self.s_e2)
    }

    pub fn conditional(&self, sigma2: f64) -> Result<NormalDist> {
        check_sigma2(sigma2)?;
        NormalDist::new(self.y_hat_f, self.inflation * sigma2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizedError {
    pub conditional: NormalDist,
    pub marginal: LaplaceDist,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionDiagnostics {
    /// `max |Xᵀû|`
    pub max_orthogonality: f64,
    /// `Σ h_i`, equal to `k` for an idempotent projection
    pub leverage_sum: f64,
    /// Largest gap between the QR leverages and `x_iᵀ(XᵀX)⁻¹x_i`
    pub projection_defect: f64,
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2 > 0.0 && sigma2.is_finite() {
        Ok(())
    } else {
        Err(BmomError::domain(
            "sigma2",
            format!("{sigma2} must be positive"),
        ))
    }
}

impl LeastSquaresFit {
    pub fn k(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    pub fn fitted(&self) -> DVector<f64> {
        &self.x * &self.beta_hat
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.y
    }

    pub(crate) fn require_spread(&self) -> Result<()> {
        if is_zero_variance(self.residuals.norm_squared(), &self.y) || !(self.s2 > 0.0) {
            Err(BmomError::ZeroVariance)
        } else {
            Ok(())
        }
    }

    fn check_coefficient(&self, i: usize) -> Result<()> {
        if i < self.k() {
            Ok(())
        } else {
            Err(BmomError::IndexOutOfRange {
                what: "coefficients",
                index: i,
                len: self.k(),
            })
        }
    }

    fn check_k_vector(&self, what: &'static str, v: &[f64]) -> Result<()> {
        if v.len() == self.k() {
            Ok(())
        } else {
            Err(BmomError::DimensionMismatch {
                what,
                expected: self.k(),
                got: v.len(),
            })
        }
    }

    fn quad_form(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        (v.transpose() * &self.xtx_inv * &v)[(0, 0)]
    }

    /// Exponential density of `σ²` with mean `s²`.
    pub fn sigma2_density(&self) -> Result<ScaledExponentialDist> {
        self.require_spread()?;
        ScaledExponentialDist::new(self.s2)
    }

    /// `β_i | σ², D ~ N(β̂_i, [(XᵀX)⁻¹]_ii σ²)`, `σ²` defaulting to `s²`.
    pub fn coefficient_conditional(&self, i: usize, sigma2: Option<f64>) -> Result<NormalDist> {
        self.check_coefficient(i)?;
        let sigma2 = sigma2.unwrap_or(self.s2);
        check_sigma2(sigma2)?;
        NormalDist::new(self.beta_hat[i], self.xtx_inv[(i, i)] * sigma2)
    }

    /// Laplace marginal of `β_i` with variance `s_i² = [(XᵀX)⁻¹]_ii s²`.
    pub fn coefficient_marginal(&self, i: usize) -> Result<LaplaceDist> {
        self.check_coefficient(i)?;
        self.require_spread()?;
        LaplaceDist::from_mean_var(self.beta_hat[i], self.xtx_inv[(i, i)] * self.s2)
    }

    /// Laplace marginal of `η = ℓᵀβ` with variance `ℓᵀ(XᵀX)⁻¹ℓ s²`.
    pub fn linear_combination_marginal(&self, ell: &[f64]) -> Result<LaplaceDist> {
        self.check_k_vector("linear combination", ell)?;
        if ell.iter().all(|&v| v == 0.0) {
            return Err(BmomError::domain(
                "linear combination",
                "ell is the zero vector",
            ));
        }
        self.require_spread()?;
        let location = ell
            .iter()
            .zip(self.beta_hat.iter())
            .map(|(a, b)| a * b)
            .sum();
        LaplaceDist::from_mean_var(location, self.quad_form(ell) * self.s2)
    }

    pub fn predictive_point(&self, x_f: &[f64]) -> Result<PredictivePoint> {
        self.check_k_vector("future regressor", x_f)?;
        let y_hat_f = x_f
            .iter()
            .zip(self.beta_hat.iter())
            .map(|(a, b)| a * b)
            .sum();
        let inflation = 1.0 + self.quad_form(x_f);
        Ok(PredictivePoint {
            y_hat_f,
            inflation,
            s_e2: inflation * self.s2,
        })
    }

    /// Densities of the `i`-th realized error: normal with mean `û_i` and
    /// variance `h_i σ²`, and its Laplace marginal with variance `h_i s²`.
    pub fn realized_error_marginal(&self, i: usize, sigma2: Option<f64>) -> Result<RealizedError> {
        if i >= self.n() {
            return Err(BmomError::IndexOutOfRange {
                what: "observations",
                index: i,
                len: self.n(),
            });
        }
        self.require_spread()?;
        let sigma2 = sigma2.unwrap_or(self.s2);
        check_sigma2(sigma2)?;
        let h = self.leverage[i];
        Ok(RealizedError {
            conditional: NormalDist::new(self.residuals[i], h * sigma2)?,
            marginal: LaplaceDist::from_mean_var(self.residuals[i], h * self.s2)?,
        })
    }

    /// Exponential density for a strictly positive `θ = ℓᵀβ`, mean `ℓᵀβ̂`.
    pub fn positive_combination_density(&self, ell: &[f64]) -> Result<ScaledExponentialDist> {
        self.check_k_vector("linear combination", ell)?;
        let mean: f64 = ell
            .iter()
            .zip(self.beta_hat.iter())
            .map(|(a, b)| a * b)
            .sum();
        if !(mean > 0.0) {
            return Err(BmomError::PositivityViolation {
                what: "ell'beta_hat",
                value: mean,
            });
        }
        ScaledExponentialDist::new(mean)
    }

    pub fn projection_diagnostics(&self) -> ProjectionDiagnostics {
        let xtu = self.x.transpose() * &self.residuals;
        let direct = DVector::from_iterator(
            self.n(),
            self.x
                .row_iter()
                .map(|row| (row * &self.xtx_inv * row.transpose())[(0, 0)]),
        );
        ProjectionDiagnostics {
            max_orthogonality: xtu.amax(),
            leverage_sum: self.leverage.sum(),
            projection_defect: (&direct - &self.leverage).amax(),
        }
    }
}
