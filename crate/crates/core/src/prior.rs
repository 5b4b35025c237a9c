//! Prior information as a conceptual sample `(X_c, y_c)` stacked on top of
//! the observed data: `w = Wβ + ε` with `W = [X_c; X]`, `w = [y_c; y]`.
//!
//! The posterior mean is `β̄ = (WᵀW)⁻¹Wᵀw`, which equals
//! `(X_cᵀX_c + XᵀX)⁻¹(X_cᵀX_c β̂_c + XᵀX β̂)` whenever `X_c` has full column
//! rank, and `E(σ²|D) = (w − Wβ̄)ᵀ(w − Wβ̄)/(n + n_c − k)`.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{BmomError, Result};
use crate::linalg::PivotedQr;
use crate::regression::{
    least_squares, least_squares_with_dof, LeastSquaresFit, RegressionProblem,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptualSample {
    x: DMatrix<f64>,
    y: DVector<f64>,
    n_c: usize,
}

impl ConceptualSample {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(BmomError::DimensionMismatch {
                what: "conceptual sample response",
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(BmomError::domain(
                "conceptual sample",
                "contains non-finite values",
            ));
        }
        let n_c = x.nrows();
        Ok(ConceptualSample { x, y, n_c })
    }

    pub fn empty(k: usize) -> Self {
        ConceptualSample {
            x: DMatrix::zeros(0, k),
            y: DVector::zeros(0),
            n_c: 0,
        }
    }

    /// Prior given as `(X_cᵀX_c, β̂_c, n_c)`.
    ///
    /// The moment matrix is replaced by its Cholesky square root `X_c = Lᵀ`
    /// (k rows) with `y_c = X_c β̂_c`, which reproduces `X_cᵀX_c` and
    /// `X_cᵀy_c` exactly. `n_c` is kept for the degrees of freedom.
    pub fn from_moments(xtx_c: &DMatrix<f64>, beta_c: &[f64], n_c: usize) -> Result<Self> {
        let k = xtx_c.nrows();
        if xtx_c.ncols() != k {
            return Err(BmomError::DimensionMismatch {
                what: "prior moment matrix columns",
                expected: k,
                got: xtx_c.ncols(),
            });
        }
        if beta_c.len() != k {
            return Err(BmomError::DimensionMismatch {
                what: "prior coefficient vector",
                expected: k,
                got: beta_c.len(),
            });
        }
        let sym_gap = (xtx_c - xtx_c.transpose()).amax();
        if sym_gap > 1e-12 * xtx_c.amax().max(1.0) {
            return Err(BmomError::domain(
                "prior moment matrix",
                format!("not symmetric (max asymmetry {sym_gap:e})"),
            ));
        }
        let chol = Cholesky::new(xtx_c.clone())
            .ok_or_else(|| BmomError::domain("prior moment matrix", "not positive definite"))?;
        let x = chol.l().transpose();
        let y = &x * DVector::from_column_slice(beta_c);
        Ok(ConceptualSample { x, y, n_c })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Number of conceptual observations counted in the degrees of freedom.
    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }
}

/// Stacks the prior rows above the data rows and re-validates the design.
pub fn stack(problem: &RegressionProblem, prior: &ConceptualSample) -> Result<RegressionProblem> {
    if prior.k() != problem.k() {
        return Err(BmomError::DimensionMismatch {
            what: "conceptual sample columns",
            expected: problem.k(),
            got: prior.k(),
        });
    }
    if prior.rows() == 0 {
        return Ok(problem.clone());
    }
    let (n, k) = (problem.n(), problem.k());
    let rows = prior.rows();
    let w_mat = DMatrix::from_fn(rows + n, k, |i, j| {
        if i < rows {
            prior.x[(i, j)]
        } else {
            problem.x()[(i - rows, j)]
        }
    });
    let w_vec = DVector::from_fn(rows + n, |i, _| {
        if i < rows {
            prior.y[i]
        } else {
            problem.y()[i - rows]
        }
    });
    RegressionProblem::new(
        w_vec,
        w_mat,
        problem.names().to_vec(),
        problem.has_intercept(),
    )
}

/// Least-squares fit of the stacked system with `n + n_c − k` degrees of
/// freedom. Downstream marginals and predictions use it unchanged.
pub fn fit_with_prior(
    problem: &RegressionProblem,
    prior: &ConceptualSample,
) -> Result<LeastSquaresFit> {
    let stacked = stack(problem, prior)?;
    let total = problem.n() + prior.n_c();
    if total <= problem.k() {
        return Err(BmomError::InsufficientData {
            needed: problem.k(),
            got: total,
        });
    }
    let fit = least_squares_with_dof(&stacked, total - problem.k())?;
    fit.require_spread()?;
    Ok(fit)
}

/// `β̄` computed by both algebraic routes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMeanForms {
    /// `(WᵀW)⁻¹Wᵀw` via the stacked QR.
    pub stacked: DVector<f64>,
    /// `(X_cᵀX_c + XᵀX)⁻¹(X_cᵀX_c β̂_c + XᵀX β̂)`; absent when `X_c` alone
    /// is rank deficient.
    pub combined: Option<DVector<f64>>,
    /// `β̂_c`, the prior sample's own least-squares estimate.
    pub beta_c: Option<DVector<f64>>,
}

impl PosteriorMeanForms {
    /// Largest relative gap between the two forms.
    pub fn max_relative_gap(&self) -> Option<f64> {
        self.combined.as_ref().map(|c| {
            let scale = self.stacked.amax().max(f64::MIN_POSITIVE);
            (&self.stacked - c).amax() / scale
        })
    }
}

pub fn posterior_mean_forms(
    problem: &RegressionProblem,
    prior: &ConceptualSample,
) -> Result<PosteriorMeanForms> {
    let stacked = least_squares(&stack(problem, prior)?)?.beta_hat;
    let k = problem.k();
    if prior.rows() < k {
        return Ok(PosteriorMeanForms {
            stacked,
            combined: None,
            beta_c: None,
        });
    }
    let qr_c = PivotedQr::factor(prior.x());
    if !qr_c.is_full_rank() {
        return Ok(PosteriorMeanForms {
            stacked,
            combined: None,
            beta_c: None,
        });
    }
    let beta_c = qr_c.solve(prior.y());
    let beta = least_squares(problem)?.beta_hat;
    let xtx_c = prior.x().transpose() * prior.x();
    let xtx = problem.x().transpose() * problem.x();
    let rhs = &xtx_c * &beta_c + &xtx * &beta;
    let combined = Cholesky::new(&xtx_c + &xtx)
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| BmomError::Internal("X_c'X_c + X'X is not positive definite".into()))?;
    Ok(PosteriorMeanForms {
        stacked,
        combined: Some(combined),
        beta_c: Some(beta_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::{build_design, fit_regression};

    fn fixture() -> RegressionProblem {
        build_design(&[1.0, 2.0, 4.0], &[("x".into(), vec![0.0, 1.0, 2.0])], true).unwrap()
    }

    #[test]
    fn empty_prior_reduces_exactly() {
        let p = fixture();
        let prior = ConceptualSample::empty(2);
        assert_eq!(stack(&p, &prior).unwrap(), p);
        assert_eq!(
            fit_with_prior(&p, &prior).unwrap(),
            fit_regression(&p).unwrap()
        );
    }

    #[test]
    fn duplicated_data() {
        let p = fixture();
        let prior = ConceptualSample::new(p.x().clone(), p.y().clone()).unwrap();
        let stacked = stack(&p, &prior).unwrap();
        assert_eq!(stacked.n(), 6);
        let fit = fit_with_prior(&p, &prior).unwrap();
        assert!((fit.beta_hat[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((fit.beta_hat[1] - 1.5).abs() < 1e-12);
        assert!((fit.s2 - 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(fit.dof, 4);
    }

    #[test]
    fn wrong_width_is_rejected() {
        let prior = ConceptualSample::new(DMatrix::zeros(2, 3), DVector::zeros(2)).unwrap();
        assert!(matches!(
            stack(&fixture(), &prior),
            Err(BmomError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn moment_form_matches_sample_form() {
        let xc = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 1.0, -1.0, 1.0, 2.0]);
        let yc = DVector::from_vec(vec![0.7, 1.2, -0.3]);
        let sample = ConceptualSample::new(xc.clone(), yc.clone()).unwrap();
        let beta_c = PivotedQr::factor(&xc).solve(&yc);
        let moments =
            ConceptualSample::from_moments(&(xc.transpose() * &xc), beta_c.as_slice(), 3).unwrap();
        let p = fixture();
        let a = fit_with_prior(&p, &sample).unwrap();
        let b = fit_with_prior(&p, &moments).unwrap();
        assert!((&a.beta_hat - &b.beta_hat).amax() < 1e-12);
        assert!((&a.xtx_inv - &b.xtx_inv).amax() < 1e-12);
        assert_eq!(a.dof, b.dof);
    }

    #[test]
    fn rank_deficient_prior_skips_combined_form() {
        let xc = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let prior = ConceptualSample::new(xc, DVector::from_vec(vec![1.0, 2.0])).unwrap();
        let forms = posterior_mean_forms(&fixture(), &prior).unwrap();
        assert!(forms.combined.is_none());
        assert!(fit_with_prior(&fixture(), &prior).is_ok());
    }

    #[test]
    fn non_spd_moments_are_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(ConceptualSample::from_moments(&bad, &[0.0, 0.0], 5).is_err());
    }
}
