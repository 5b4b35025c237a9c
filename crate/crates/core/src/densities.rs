//! The three maximum-entropy families: normal, Laplace (double exponential)
//! and the scaled exponential on the positive half-line.
//!
//! A Laplace law with location `m` and scale `b` has density
//! `exp(−|x−m|/b) / (2b)`, variance `2b²` and excess kurtosis 3. It arises
//! here as the scale mixture of a normal over an exponential variance, which
//! [`mixture_check`] verifies numerically.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::error::{check_probability, BmomError, Result};
use crate::quadrature::{integrate, Quadrature};
use crate::special;

/// A density and cumulative probability at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub pdf: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalDist {
    mean: f64,
    variance: f64,
}

impl NormalDist {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(BmomError::domain(
                "normal mean",
                format!("{mean} is not finite"),
            ));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(BmomError::DegenerateSpread { variance });
        }
        Ok(NormalDist { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.std_dev();
        -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI * self.variance).ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        special::normal_cdf((x - self.mean) / self.std_dev())
    }

    pub fn eval(&self, x: f64) -> Evaluation {
        Evaluation {
            pdf: self.pdf(x),
            cdf: self.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.mean + self.std_dev() * special::normal_quantile(p)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceDist {
    location: f64,
    scale: f64,
}

impl LaplaceDist {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(BmomError::domain(
                "laplace location",
                format!("{location} is not finite"),
            ));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(BmomError::DegenerateSpread {
                variance: 2.0 * scale * scale,
            });
        }
        Ok(LaplaceDist { location, scale })
    }

    /// Moment-matched Laplace law: `scale = sqrt(variance / 2)`.
    pub fn from_mean_var(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(BmomError::DegenerateSpread { variance });
        }
        LaplaceDist::new(mean, (0.5 * variance).sqrt())
    }

    /// The `w` form: density `exp(−2|w|)`, scale 1/2.
    pub fn standard_w() -> Self {
        LaplaceDist {
            location: 0.0,
            scale: 0.5,
        }
    }

    /// The unit-variance `z` form, scale `1/√2`.
    pub fn standard_z() -> Self {
        LaplaceDist {
            location: 0.0,
            scale: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.scale * self.scale
    }

    pub fn std_dev(&self) -> f64 {
        SQRT_2 * self.scale
    }

    /// `E(x−m)^order`; zero for odd orders.
    pub fn central_moment(&self, order: u32) -> f64 {
        if order % 2 == 1 {
            return 0.0;
        }
        // E|x−m|^k = k! b^k
        (1..=order).map(f64::from).product::<f64>() * self.scale.powi(order as i32)
    }

    pub fn kurtosis(&self) -> f64 {
        let m2 = self.central_moment(2);
        self.central_moment(4) / (m2 * m2)
    }

    pub fn excess_kurtosis(&self) -> f64 {
        3.0
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        -(x - self.location).abs() / self.scale - (2.0 * self.scale).ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let d = (x - self.location) / self.scale;
        if d <= 0.0 {
            0.5 * d.exp()
        } else {
            1.0 - 0.5 * (-d).exp()
        }
    }

    /// `1 − cdf(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let d = (x - self.location) / self.scale;
        if d >= 0.0 {
            0.5 * (-d).exp()
        } else {
            1.0 - 0.5 * d.exp()
        }
    }

    pub fn eval(&self, x: f64) -> Evaluation {
        Evaluation {
            pdf: self.pdf(x),
            cdf: self.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability("laplace quantile probability", p)?;
        Ok(if p <= 0.5 {
            self.location + self.scale * (2.0 * p).ln()
        } else {
            self.location - self.scale * (2.0 * (1.0 - p)).ln()
        })
    }

    /// Half-width of the equal-tail interval: `b·ln(1/(1−level))`.
    pub fn half_width(&self, level: f64) -> Result<f64> {
        check_probability("interval level", level)?;
        Ok(-self.scale * (-level).ln_1p())
    }
}

/// Exponential density `exp(−x/mean)/mean` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledExponentialDist {
    mean: f64,
}

impl ScaledExponentialDist {
    pub fn new(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(BmomError::PositivityViolation {
                what: "exponential mean",
                value: mean,
            });
        }
        Ok(ScaledExponentialDist { mean })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.mean * self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.mean
    }

    pub fn eval(&self, x: f64) -> Result<Evaluation> {
        if !(x >= 0.0) {
            return Err(BmomError::domain(
                "exponential argument",
                format!("{x} is negative"),
            ));
        }
        let r = x / self.mean;
        Ok(Evaluation {
            pdf: (-r - self.mean.ln()).exp(),
            cdf: -(-r).exp_m1(),
        })
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability("exponential quantile probability", p)?;
        Ok(-self.mean * (-p).ln_1p())
    }
}

/// Any of the three families, for catalogs and grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Normal(NormalDist),
    Laplace(LaplaceDist),
    Exponential(ScaledExponentialDist),
}

impl Density {
    pub fn family(&self) -> &'static str {
        match self {
            Density::Normal(_) => "normal",
            Density::Laplace(_) => "laplace",
            Density::Exponential(_) => "exponential",
        }
    }

    /// Mean for normal, location for Laplace, 0 (the support edge) for the
    /// exponential.
    pub fn location(&self) -> f64 {
        match self {
            Density::Normal(d) => d.mean(),
            Density::Laplace(d) => d.location(),
            Density::Exponential(_) => 0.0,
        }
    }

    /// Standard deviation for normal, `b` for Laplace, the mean for the
    /// exponential.
    pub fn scale(&self) -> f64 {
        match self {
            Density::Normal(d) => d.std_dev(),
            Density::Laplace(d) => d.scale(),
            Density::Exponential(d) => d.mean(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Density::Normal(d) => d.mean(),
            Density::Laplace(d) => d.location(),
            Density::Exponential(d) => d.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Density::Normal(d) => d.variance(),
            Density::Laplace(d) => d.variance(),
            Density::Exponential(d) => d.variance(),
        }
    }

    /// Density, zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Normal(d) => d.pdf(x),
            Density::Laplace(d) => d.pdf(x),
            Density::Exponential(d) => d.eval(x).map_or(0.0, |e| e.pdf),
        }
    }
}

/// `Λ_{2r} = (2r)!/2^{2r}`, the even moments of the `w` form `exp(−2|w|)`.
pub fn laplace_even_moment(r: u32) -> f64 {
    let mut acc = 1.0;
    for j in 1..=2 * r {
        acc *= f64::from(j) / 2.0;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Laplace,
    Normal,
    StudentT,
}

impl IntervalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            IntervalMethod::Laplace => "laplace",
            IntervalMethod::Normal => "normal",
            IntervalMethod::StudentT => "student_t",
        }
    }
}

/// Equal-tail interval `[lower, upper]` at probability `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    pub(crate) fn symmetric(
        center: f64,
        half_width: f64,
        level: f64,
        method: IntervalMethod,
    ) -> Self {
        IntervalEstimate {
            level,
            lower: center - half_width,
            upper: center + half_width,
            method,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Symmetric families that admit an equal-tail interval about their center.
pub trait SymmetricFamily {
    fn center(&self) -> f64;
    fn half_width(&self, level: f64) -> Result<f64>;
    fn method(&self) -> IntervalMethod;
}

impl SymmetricFamily for LaplaceDist {
    fn center(&self) -> f64 {
        self.location
    }
    fn half_width(&self, level: f64) -> Result<f64> {
        LaplaceDist::half_width(self, level)
    }
    fn method(&self) -> IntervalMethod {
        IntervalMethod::Laplace
    }
}

impl SymmetricFamily for NormalDist {
    fn center(&self) -> f64 {
        self.mean
    }
    fn half_width(&self, level: f64) -> Result<f64> {
        check_probability("interval level", level)?;
        Ok(self.std_dev() * special::normal_quantile(0.5 * (1.0 + level))?)
    }
    fn method(&self) -> IntervalMethod {
        IntervalMethod::Normal
    }
}

pub fn central_interval<D: SymmetricFamily>(d: &D, level: f64) -> Result<IntervalEstimate> {
    let hw = d.half_width(level)?;
    Ok(IntervalEstimate::symmetric(
        d.center(),
        hw,
        level,
        d.method(),
    ))
}

/// The standardized 95% Laplace half-width, `ln(20)/√2`.
pub fn laplace_standard_c95() -> f64 {
    (20.0f64).ln() / SQRT_2
}

/// Absolute tolerance used by the mixture quadrature.
pub const MIXTURE_TOL: f64 = 1e-9;

/// Truncation exponent: the integrand beyond `t = sqrt(TAIL_EXPONENT)·s` is
/// bounded by `exp(−TAIL_EXPONENT) ≈ 4e-18` times its peak, so the dropped
/// tail mass is far below 1e-12.
const TAIL_EXPONENT: f64 = 40.0;

/// Numeric value of `∫₀^∞ N(θ; ȳ, σ²/n) · (1/s²) exp(−σ²/s²) dσ²` at
/// `θ − ȳ = offset`.
///
/// With `σ² = t²` the integrand becomes
/// `2√n / (√(2π) s²) · exp(−a t² − b/t²)`, `a = 1/s²`, `b = n·offset²/2`,
/// which is smooth and bounded on `[0, ∞)`.
pub fn mixture_density(n: u32, s2: f64, offset: f64) -> Result<Quadrature> {
    if n == 0 {
        return Err(BmomError::InsufficientData { needed: 0, got: 0 });
    }
    if !(s2 > 0.0 && s2.is_finite()) {
        return Err(BmomError::DegenerateSpread { variance: s2 });
    }
    if !offset.is_finite() {
        return Err(BmomError::domain(
            "mixture grid point",
            format!("{offset} is not finite"),
        ));
    }
    let nf = f64::from(n);
    let a = 1.0 / s2;
    let b = 0.5 * nf * offset * offset;
    let front = 2.0 * nf.sqrt() / ((2.0 * std::f64::consts::PI).sqrt() * s2);
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let barrier = if b == 0.0 { 0.0 } else { b / (t * t) };
        front * (-a * t * t - barrier).exp()
    };
    let peak = (b / a).sqrt().sqrt();
    let upper = (TAIL_EXPONENT * s2).sqrt().max(2.0 * peak);
    let q = integrate(integrand, 0.0, upper, MIXTURE_TOL)?;
    if q.abs_error > MIXTURE_TOL {
        return Err(BmomError::Numeric {
            routine: "mixture quadrature",
            diagnostics: format!(
                "n = {n}, s2 = {s2}, offset = {offset}: error estimate {:e} exceeds {MIXTURE_TOL:e}",
                q.abs_error
            ),
        });
    }
    Ok(q)
}

/// Max over `grid` (offsets `θ − ȳ`) of the gap between the numeric
/// normal–exponential mixture and the closed-form Laplace
/// `(√n/(√2 s)) exp(−√(2n)|θ−ȳ|/s)`.
pub fn mixture_check(n: u32, s2: f64, grid: &[f64]) -> Result<f64> {
    let closed = LaplaceDist::new(0.0, (s2 / (2.0 * f64::from(n.max(1)))).sqrt())?;
    let mut worst = 0.0f64;
    for &x in grid {
        let numeric = mixture_density(n, s2, x)?.value;
        worst = worst.max((numeric - closed.pdf(x)).abs());
    }
    Ok(worst)
}
