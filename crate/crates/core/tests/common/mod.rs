//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerical code.

#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..k {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * k {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[k..].to_vec()).collect()
}

/// Brute-force least squares through the normal equations.
pub struct NormalEquations {
    pub beta: Vec<f64>,
    pub s2: f64,
    pub xtx_inv: Vec<Vec<f64>>,
    pub leverage: Vec<f64>,
    pub residuals: Vec<f64>,
}

pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> NormalEquations {
    let n = x.len();
    let k = x[0].len();
    let xtx: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| (0..n).map(|i| x[i][a] * x[i][b]).sum())
                .collect()
        })
        .collect();
    let xty: Vec<f64> = (0..k)
        .map(|a| (0..n).map(|i| x[i][a] * y[i]).sum())
        .collect();
    let inv = invert(&xtx);
    let beta: Vec<f64> = (0..k)
        .map(|a| (0..k).map(|b| inv[a][b] * xty[b]).sum())
        .collect();
    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..k).map(|a| x[i][a] * beta[a]).sum::<f64>())
        .collect();
    let s2 = residuals.iter().map(|u| u * u).sum::<f64>() / (n - k) as f64;
    let leverage = (0..n)
        .map(|i| {
            (0..k)
                .map(|a| (0..k).map(|b| x[i][a] * inv[a][b] * x[i][b]).sum::<f64>())
                .sum()
        })
        .collect();
    NormalEquations {
        beta,
        s2,
        xtx_inv: inv,
        leverage,
        residuals,
    }
}

/// Composite Simpson rule with `m` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    assert!(m.is_multiple_of(2));
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Composite midpoint rule; never evaluates the endpoints.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Small deterministic generator for building random problems.
pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    /// Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// A random well-conditioned problem: intercept plus `k − 1` uniform
/// regressors, `y = Xβ + noise`.
pub fn random_problem(rng: &mut TestRng, n: usize, k: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let beta: Vec<f64> = (0..k).map(|_| rng.range(-3.0, 3.0)).collect();
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..k)
                .map(|j| if j == 0 { 1.0 } else { rng.range(-2.0, 2.0) })
                .collect()
        })
        .collect();
    let y = x
        .iter()
        .map(|row| row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.normal())
        .collect();
    (x, y)
}

pub fn to_matrix(x: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x[0].len(), |i, j| x[i][j])
}

pub fn to_vector(y: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(y)
}

pub fn names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("x{j}")).collect()
}

pub fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Walks two JSON values in parallel and returns the largest numeric gap,
/// ignoring strings; `None` if the shapes differ.
pub fn json_numeric_gap(a: &serde_json::Value, b: &serde_json::Value) -> Option<f64> {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64()?, y.as_f64()?);
            Some((x - y).abs())
        }
        (Value::String(_), Value::String(_)) | (Value::Null, Value::Null) => Some(0.0),
        (Value::Bool(x), Value::Bool(y)) => (x == y).then_some(0.0),
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return None;
            }
            x.iter()
                .zip(y)
                .try_fold(0.0f64, |m, (p, q)| Some(m.max(json_numeric_gap(p, q)?)))
        }
        (Value::Object(x), Value::Object(y)) => {
            if x.keys().ne(y.keys()) {
                return None;
            }
            x.iter().zip(y).try_fold(0.0f64, |m, ((_, p), (_, q))| {
                Some(m.max(json_numeric_gap(p, q)?))
            })
        }
        _ => None,
    }
}
