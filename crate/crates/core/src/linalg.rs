//! Householder QR with column pivoting.
//!
//! `X P = Q R` with the column of largest remaining norm moved forward at
//! each step, so `|R_00| ≥ |R_11| ≥ …`. A diagonal entry below
//! `max(n, k) · ε · |R_00|` marks numerical rank loss.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Unit Householder vectors; reflector `j` acts on rows `j..n`.
    reflectors: Vec<DVector<f64>>,
    /// Upper-triangular `k × k` factor in pivoted column order.
    r: DMatrix<f64>,
    /// `perm[j]` is the original column sitting at pivoted position `j`.
    perm: Vec<usize>,
    rank: usize,
    rows: usize,
}

impl PivotedQr {
    pub fn factor(x: &DMatrix<f64>) -> Self {
        let (n, k) = x.shape();
        let mut a = x.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut reflectors = Vec::with_capacity(k.min(n));
        for j in 0..k.min(n) {
            let (best, _) = (j..k)
                .map(|c| (c, a.view((j, c), (n - j, 1)).norm_squared()))
                .fold(
                    (j, -1.0),
                    |acc, (c, v)| if v > acc.1 { (c, v) } else { acc },
                );
            if best != j {
                a.swap_columns(j, best);
                perm.swap(j, best);
            }
            let col = a.view((j, j), (n - j, 1)).clone_owned();
            let norm = col.norm();
            let mut v = DVector::from_iterator(n - j, col.iter().copied());
            if norm == 0.0 {
                reflectors.push(DVector::zeros(n - j));
                continue;
            }
            let alpha = if v[0] >= 0.0 { -norm } else { norm };
            v[0] -= alpha;
            let vn = v.norm();
            v /= vn;
            // A[j.., j..] ← (I − 2vvᵀ) A[j.., j..]
            for c in j..k {
                let mut colc = a.column_mut(c);
                let mut colc = colc.rows_range_mut(j..);
                let dot = v.dot(&colc);
                colc.axpy(-2.0 * dot, &v, 1.0);
            }
            a[(j, j)] = alpha;
            for i in j + 1..n {
                a[(i, j)] = 0.0;
            }
            reflectors.push(v);
        }
        let mut r = DMatrix::zeros(k, k);
        for i in 0..k.min(n) {
            for c in i..k {
                r[(i, c)] = a[(i, c)];
            }
        }
        let lead = if k > 0 { r[(0, 0)].abs() } else { 0.0 };
        let threshold = (n.max(k) as f64) * f64::EPSILON * lead;
        let rank = (0..k.min(n))
            .take_while(|&j| lead > 0.0 && r[(j, j)].abs() > threshold)
            .count();
        PivotedQr {
            reflectors,
            r,
            perm,
            rank,
            rows: n,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.perm.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.cols()
    }

    /// Original indices of the columns that fell below the rank threshold.
    pub fn deficient_columns(&self) -> Vec<usize> {
        let mut cols = self.perm[self.rank..].to_vec();
        cols.sort_unstable();
        cols
    }

    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.cols()).map(|j| self.r[(j, j)]).collect()
    }

    /// `Qᵀ y`, full length `n`.
    pub fn qt_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = y.clone();
        for (j, v) in self.reflectors.iter().enumerate() {
            let mut tail = out.rows_mut(j, self.rows - j);
            let dot = v.dot(&tail);
            tail.axpy(-2.0 * dot, v, 1.0);
        }
        out
    }

    /// Least-squares solution in the original column order.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let k = self.cols();
        let qty = self.qt_mul(y);
        let mut z = DVector::zeros(k);
        for i in (0..k).rev() {
            let mut acc = qty[i];
            for c in i + 1..k {
                acc -= self.r[(i, c)] * z[c];
            }
            z[i] = acc / self.r[(i, i)];
        }
        let mut beta = DVector::zeros(k);
        for (pos, &orig) in self.perm.iter().enumerate() {
            beta[orig] = z[pos];
        }
        beta
    }

    /// `R⁻¹` by back substitution.
    fn r_inverse(&self) -> DMatrix<f64> {
        let k = self.cols();
        let mut inv = DMatrix::zeros(k, k);
        for c in 0..k {
            inv[(c, c)] = 1.0 / self.r[(c, c)];
            for i in (0..c).rev() {
                let mut acc = 0.0;
                for m in i + 1..=c {
                    acc += self.r[(i, m)] * inv[(m, c)];
                }
                inv[(i, c)] = -acc / self.r[(i, i)];
            }
        }
        inv
    }

    /// `(XᵀX)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ`, in the original column order.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.cols();
        let ri = self.r_inverse();
        let pivoted = &ri * ri.transpose();
        let mut out = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                out[(self.perm[i], self.perm[j])] = pivoted[(i, j)];
            }
        }
        out
    }

    /// Thin `Q` (`n × k`).
    pub fn thin_q(&self) -> DMatrix<f64> {
        let (n, k) = (self.rows, self.cols());
        let mut q = DMatrix::zeros(n, k);
        for c in 0..k.min(n) {
            q[(c, c)] = 1.0;
        }
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            for c in 0..k {
                let mut tail = q.column_mut(c);
                let mut tail = tail.rows_range_mut(j..);
                let dot = v.dot(&tail);
                tail.axpy(-2.0 * dot, v, 1.0);
            }
        }
        q
    }

    /// Diagonal of the hat matrix `X(XᵀX)⁻¹Xᵀ`: squared row norms of thin `Q`.
    pub fn leverage(&self) -> DVector<f64> {
        let q = self.thin_q();
        DVector::from_iterator(self.rows, q.row_iter().map(|row| row.norm_squared()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0])
    }

    #[test]
    fn fixture_solution() {
        let qr = PivotedQr::factor(&fixture());
        assert!(qr.is_full_rank());
        let beta = qr.solve(&DVector::from_vec(vec![1.0, 2.0, 4.0]));
        assert!((beta[0] - 5.0 / 6.0).abs() < 1e-14);
        assert!((beta[1] - 1.5).abs() < 1e-14);
        let inv = qr.xtx_inverse();
        let want = DMatrix::from_row_slice(2, 2, &[5.0 / 6.0, -0.5, -0.5, 0.5]);
        assert!((inv - want).amax() < 1e-14);
        let h = qr.leverage();
        for (got, want) in h.iter().zip([5.0 / 6.0, 1.0 / 3.0, 5.0 / 6.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn thin_q_is_orthonormal() {
        let x = DMatrix::from_row_slice(
            5,
            3,
            &[
                1.0, 0.3, -2.0, 1.0, 1.7, 0.1, 1.0, -0.4, 0.9, 1.0, 2.2, 3.0, 1.0, 0.0, -1.1,
            ],
        );
        let qr = PivotedQr::factor(&x);
        let q = qr.thin_q();
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn detects_duplicate_column() {
        let x = DMatrix::from_row_slice(4, 3, &[1., 2., 2., 1., 3., 3., 1., 5., 5., 1., 7., 7.]);
        let qr = PivotedQr::factor(&x);
        assert_eq!(qr.rank(), 2);
        assert_eq!(qr.deficient_columns().len(), 1);
        assert!(qr.deficient_columns()[0] >= 1);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let qr = PivotedQr::factor(&DMatrix::zeros(4, 2));
        assert_eq!(qr.rank(), 0);
        assert_eq!(qr.deficient_columns(), vec![0, 1]);
    }
}
