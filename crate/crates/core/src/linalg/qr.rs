use super::{dot, Matrix, RANK_TOL};
use crate::error::{Error, Result};

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    rows: usize,
    cols: usize,
    r: Matrix,
    reflectors: Vec<(Vec<f64>, f64)>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let steps = m.min(n);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::with_capacity(steps);

        for k in 0..steps {
            // Pivot: remaining column with the largest trailing norm.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let s: f64 = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }

            let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
            let xnorm = super::norm(&x);
            if xnorm == 0.0 {
                reflectors.push((vec![0.0; m - k], 0.0));
                continue;
            }
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let mut v = x;
            v[0] -= alpha;
            let vv = dot(&v, &v);
            let beta = if vv > 0.0 { 2.0 / vv } else { 0.0 };
            r[(k, k)] = alpha;
            for i in (k + 1)..m {
                r[(i, k)] = 0.0;
            }
            for j in (k + 1)..n {
                let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * beta;
                if s != 0.0 {
                    for i in k..m {
                        r[(i, j)] -= s * v[i - k];
                    }
                }
            }
            reflectors.push((v, beta));
        }

        let r00 = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
        let threshold = RANK_TOL * r00 * m.max(n) as f64;
        let rank = if r00 == 0.0 {
            0
        } else {
            (0..steps).take_while(|&k| r[(k, k)].abs() > threshold).count()
        };

        PivotedQr {
            rows: m,
            cols: n,
            r,
            reflectors,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Diagonal of `R` (length `min(rows, cols)`).
    pub fn r_diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|k| self.r[(k, k)]).collect()
    }

    /// `b <- Q^T b`
    pub fn apply_qt(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.rows);
        for (k, (v, beta)) in self.reflectors.iter().enumerate() {
            if *beta == 0.0 {
                continue;
            }
            let s = dot(v, &b[k..]) * beta;
            for (bi, vi) in b[k..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// `b <- Q b`
    pub fn apply_q(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.rows);
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let s = dot(v, &b[k..]) * beta;
            for (bi, vi) in b[k..].iter_mut().zip(v) {
                *bi -= s * vi;
            }
        }
    }

    /// Column `k` of the full orthogonal factor `Q`.
    pub fn q_column(&self, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.rows];
        e[k] = 1.0;
        self.apply_q(&mut e);
        e
    }

    /// Orthonormal basis of the numerical column space.
    pub fn range_basis(&self) -> Vec<Vec<f64>> {
        (0..self.rank).map(|k| self.q_column(k)).collect()
    }

    /// Orthonormal basis of the orthogonal complement of the column space.
    pub fn complement_basis(&self) -> Vec<Vec<f64>> {
        (self.rank..self.rows).map(|k| self.q_column(k)).collect()
    }

    /// Norm of the component of `b` orthogonal to the numerical column space.
    pub fn residual_norm(&self, b: &[f64]) -> f64 {
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        super::norm(&y[self.rank..])
    }

    /// Basic least-squares solution of `min ||A x - b||` using the leading
    /// `rank` pivoted columns; the remaining coordinates are zero.
    pub fn least_squares(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in (i + 1)..r {
                s -= self.r[(i, j)] * z[j];
            }
            z[i] = s / self.r[(i, i)];
        }
        let mut x = vec![0.0; self.cols];
        for (i, zi) in z.into_iter().enumerate() {
            x[self.perm[i]] = zi;
        }
        x
    }
}

/// Least-squares solve via pivoted QR.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    a.check_finite()?;
    Ok(PivotedQr::new(a).least_squares(b))
}
