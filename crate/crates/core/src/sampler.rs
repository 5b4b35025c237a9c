//! Seeded Monte Carlo draws from the joint maximum-entropy posterior of
//! `(β, σ²)` and from the predictive density.
//!
//! Each draw is composed in two stages: `σ²` from the exponential density
//! with mean `s²`, then `β | σ²` from `N(β̂, (XᵀX)⁻¹σ²)`. The predictive
//! draw replaces the second stage with `y_f | σ² ~ N(ŷ_f, (1 + x_fᵀ(XᵀX)⁻¹x_f)σ²)`,
//! which is the natural extension of the same composition to a future
//! observation.
//!
//! # Generator
//!
//! ChaCha20 (`rand_chacha`), keyed by `ChaCha20Rng::seed_from_u64(seed)`.
//! ChaCha is counter based, so every variate has a fixed address
//! `(stream, word position)`:
//!
//! | stream | content | words per draw |
//! |--------|---------|----------------|
//! | 0 | uniform for `σ²` | 2 |
//! | 1 | `k` normals for `β` | `2k` |
//! | 2 | normal for `y_f` | 2 |
//!
//! Draw `i` only reads its own words, so adding draws never perturbs earlier
//! ones and chunks can be generated on any number of threads.
//!
//! A 64-bit output `x` maps to the open unit interval as
//! `((x >> 12) + 1/2) · 2⁻⁵²`. Normals use the inverse cdf from
//! [`crate::special`]; `ln` is the pure-Rust `libm` port, so streams are
//! bit-identical across platforms.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_probability, BmomError, Result};
use crate::regression::LeastSquaresFit;
use crate::special::normal_quantile_unchecked;

const SIGMA2_STREAM: u64 = 0;
const BETA_STREAM: u64 = 1;
const PREDICTIVE_STREAM: u64 = 2;
const CHUNK: usize = 8_192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DrawConfig {
    pub seed: u64,
    pub n_draws: usize,
}

impl DrawConfig {
    pub fn new(seed: u64, n_draws: usize) -> Result<Self> {
        if n_draws == 0 {
            return Err(BmomError::domain("n_draws", "must be at least 1"));
        }
        Ok(DrawConfig { seed, n_draws })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDraw {
    pub sigma2: f64,
    pub beta: Vec<f64>,
}

impl JointDraw {
    /// `[sigma2, beta_1, …, beta_k]`
    pub fn to_row(&self) -> Vec<f64> {
        std::iter::once(self.sigma2)
            .chain(self.beta.iter().copied())
            .collect()
    }
}

/// Maps a 64-bit word to `(0, 1)`.
pub fn open_unit(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse exponential cdf, `−mean · ln(u)`.
pub fn exponential_from_uniform(mean: f64, u: f64) -> f64 {
    -mean * libm::log(u)
}

fn stream_at(seed: u64, stream: u64, word: u128) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word);
    rng
}

fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    normal_quantile_unchecked(open_unit(rng.next_u64()))
}

fn chunks(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK).min(n)))
        .collect()
}

/// Lower-triangular `L` with `L Lᵀ = (XᵀX)⁻¹`.
fn coefficient_root(fit: &LeastSquaresFit) -> Result<DMatrix<f64>> {
    let sym = (&fit.xtx_inv + fit.xtx_inv.transpose()) * 0.5;
    Cholesky::new(sym)
        .map(|c| c.l())
        .ok_or_else(|| BmomError::Internal("(X'X)^-1 has no Cholesky factor".into()))
}

pub fn draw_joint(fit: &LeastSquaresFit, config: &DrawConfig) -> Result<Vec<JointDraw>> {
    fit.require_spread()?;
    let root = coefficient_root(fit)?;
    let k = fit.k();
    let s2 = fit.s2;
    let beta_hat = &fit.beta_hat;
    let seed = config.seed;
    let parts: Vec<Vec<JointDraw>> = chunks(config.n_draws)
        .into_par_iter()
        .map(|(start, end)| {
            let mut sig = stream_at(seed, SIGMA2_STREAM, 2 * start as u128);
            let mut zs = stream_at(seed, BETA_STREAM, (2 * k * start) as u128);
            let mut z = DVector::zeros(k);
            (start..end)
                .map(|_| {
                    let sigma2 = exponential_from_uniform(s2, open_unit(sig.next_u64()));
                    for zi in z.iter_mut() {
                        *zi = standard_normal(&mut zs);
                    }
                    let beta = beta_hat + (&root * &z) * sigma2.sqrt();
                    JointDraw {
                        sigma2,
                        beta: beta.iter().copied().collect(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Draws of a future `y_f` at regressor `x_f`.
pub fn draw_predictive(
    fit: &LeastSquaresFit,
    x_f: &[f64],
    config: &DrawConfig,
) -> Result<Vec<f64>> {
    fit.require_spread()?;
    let point = fit.predictive_point(x_f)?;
    let s2 = fit.s2;
    let seed = config.seed;
    let parts: Vec<Vec<f64>> = chunks(config.n_draws)
        .into_par_iter()
        .map(|(start, end)| {
            let mut sig = stream_at(seed, SIGMA2_STREAM, 2 * start as u128);
            let mut noise = stream_at(seed, PREDICTIVE_STREAM, 2 * start as u128);
            (start..end)
                .map(|_| {
                    let sigma2 = exponential_from_uniform(s2, open_unit(sig.next_u64()));
                    let z = standard_normal(&mut noise);
                    point.y_hat_f + (point.inflation * sigma2).sqrt() * z
                })
                .collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Equal-tail empirical interval from type-7 quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrawSummary {
    pub count: usize,
    pub mean: Vec<f64>,
    /// Unbiased (divisor `N − 1`) sample covariance.
    pub covariance: Vec<Vec<f64>>,
    /// Central second moment, divisor `N`.
    pub m2: Vec<f64>,
    /// Central fourth moment, divisor `N`.
    pub m4: Vec<f64>,
    /// `m4 / m2² − 3`; zero-variance coordinates report 0.
    pub excess_kurtosis: Vec<f64>,
    /// One list per coordinate, one interval per requested level.
    pub intervals: Vec<Vec<QuantileInterval>>,
}

/// Type-7 sample quantile (linear interpolation between order statistics,
/// `h = (N−1)p`) of an ascending slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[allow(clippy::needless_range_loop)]
pub fn summarize_draws<R: AsRef<[f64]>>(rows: &[R], levels: &[f64]) -> Result<DrawSummary> {
    if rows.len() < 2 {
        return Err(BmomError::InsufficientData {
            needed: 1,
            got: rows.len(),
        });
    }
    for &level in levels {
        check_probability("interval level", level)?;
    }
    let dim = rows[0].as_ref().len();
    if let Some(bad) = rows.iter().find(|r| r.as_ref().len() != dim) {
        return Err(BmomError::DimensionMismatch {
            what: "draw width",
            expected: dim,
            got: bad.as_ref().len(),
        });
    }
    let nf = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.as_ref()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut covariance = vec![vec![0.0; dim]; dim];
    let mut m2 = vec![0.0; dim];
    let mut m4 = vec![0.0; dim];
    for r in rows {
        let d: Vec<f64> = r.as_ref().iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..dim {
            let sq = d[i] * d[i];
            m2[i] += sq;
            m4[i] += sq * sq;
            for j in 0..=i {
                covariance[i][j] += d[i] * d[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..=i {
            covariance[i][j] /= nf - 1.0;
            covariance[j][i] = covariance[i][j];
        }
        m2[i] /= nf;
        m4[i] /= nf;
    }
    let excess_kurtosis = m2
        .iter()
        .zip(&m4)
        .map(|(&a, &b)| if a > 0.0 { b / (a * a) - 3.0 } else { 0.0 })
        .collect();

    let mut intervals = Vec::with_capacity(dim);
    let mut column = Vec::with_capacity(rows.len());
    for i in 0..dim {
        column.clear();
        column.extend(rows.iter().map(|r| r.as_ref()[i]));
        column.sort_by(f64::total_cmp);
        intervals.push(
            levels
                .iter()
                .map(|&level| QuantileInterval {
                    level,
                    lower: quantile_type7(&column, 0.5 * (1.0 - level)),
                    upper: quantile_type7(&column, 0.5 * (1.0 + level)),
                })
                .collect(),
        );
    }
    Ok(DrawSummary {
        count: rows.len(),
        mean,
        covariance,
        m2,
        m4,
        excess_kurtosis,
        intervals,
    })
}

/// Convenience wrapper for a scalar stream.
pub fn summarize_values(values: &[f64], levels: &[f64]) -> Result<DrawSummary> {
    let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
    summarize_draws(&rows, levels)
}

/// Writes draws as CSV with header `sigma2,beta_1,…,beta_k`.
pub fn write_draws_csv<W: Write>(draws: &[JointDraw], out: &mut W) -> std::io::Result<()> {
    let k = draws.first().map_or(0, |d| d.beta.len());
    let mut header = String::from("sigma2");
    for j in 1..=k {
        header.push_str(&format!(",beta_{j}"));
    }
    writeln!(out, "{header}")?;
    for d in draws {
        let mut line = format!("{:?}", d.sigma2);
        for b in &d.beta {
            line.push_str(&format!(",{b:?}"));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
