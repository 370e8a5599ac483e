use super::{dot, Matrix};
use crate::error::{Error, Result};

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `M = U diag(s) V^T`.
///
/// `u` is `rows x k`, `v` is `cols x k` with `k = min(rows, cols)`, and the
/// singular values are sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Matrix {
        let (m, n, k) = (self.u.rows(), self.v.rows(), self.singular_values.len());
        let mut out = Matrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..k {
                    s += self.u[(i, l)] * self.singular_values[l] * self.v[(j, l)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

/// Column-major working storage for the one-sided Jacobi sweep.
struct Columns {
    len: usize,
    data: Vec<f64>,
}

impl Columns {
    fn of(m: &Matrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let mut data = vec![0.0; rows * cols];
        for j in 0..cols {
            for i in 0..rows {
                data[j * rows + i] = m[(i, j)];
            }
        }
        Columns { len: rows, data }
    }

    fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Columns { len: n, data }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    #[inline]
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64) {
        let len = self.len;
        let (lo, hi) = self.data.split_at_mut(q * len);
        let cp = &mut lo[p * len..(p + 1) * len];
        let cq = &mut hi[..len];
        for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    }
}

/// Hestenes one-sided Jacobi on the columns of `work` (rows >= cols).
fn jacobi_sweeps(work: &mut Columns, mut accum: Option<&mut Columns>, cols: usize) {
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) = {
                    let (up, uq) = (work.col(p), work.col(q));
                    (dot(up, up), dot(uq, uq), dot(up, uq))
                };
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                work.rotate(p, q, c, s);
                if let Some(v) = accum.as_deref_mut() {
                    v.rotate(p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn tall_singular_values(m: &Matrix) -> Vec<f64> {
    let mut work = Columns::of(m);
    jacobi_sweeps(&mut work, None, m.cols());
    let mut s: Vec<f64> = (0..m.cols()).map(|j| dot(work.col(j), work.col(j)).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Singular values only, sorted nonincreasing.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    m.check_finite()?;
    if m.rows() >= m.cols() {
        Ok(tall_singular_values(m))
    } else {
        Ok(tall_singular_values(&m.transpose()))
    }
}

fn tall_svd(m: &Matrix) -> SvdResult {
    let (rows, cols) = (m.rows(), m.cols());
    let mut work = Columns::of(m);
    let mut v = Columns::identity(cols);
    jacobi_sweeps(&mut work, Some(&mut v), cols);

    let norms: Vec<f64> = (0..cols).map(|j| dot(work.col(j), work.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let mut u = Matrix::zeros(rows, cols);
    let mut vm = Matrix::zeros(cols, cols);
    let mut singular = Vec::with_capacity(cols);
    let mut filled: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut pending = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular.push(s);
        for i in 0..cols {
            vm[(i, k)] = v.col(j)[i];
        }
        if s > f64::MIN_POSITIVE * 1e8 {
            let col: Vec<f64> = work.col(j).iter().map(|x| x / s).collect();
            filled.push(col);
        } else {
            pending.push(k);
            filled.push(Vec::new());
        }
    }
    // Complete U with unit vectors orthogonal to the columns already present.
    for &k in &pending {
        let mut best: Option<Vec<f64>> = None;
        for e in 0..rows {
            let mut cand = vec![0.0; rows];
            cand[e] = 1.0;
            for _ in 0..2 {
                for other in filled.iter().filter(|c| !c.is_empty()) {
                    let proj = dot(other, &cand);
                    super::axpy(-proj, other, &mut cand);
                }
            }
            let nrm = super::norm(&cand);
            if nrm > 0.5 {
                best = Some(cand.iter().map(|x| x / nrm).collect());
                break;
            }
        }
        filled[k] = best.unwrap_or_else(|| vec![0.0; rows]);
    }
    for (k, col) in filled.iter().enumerate() {
        for i in 0..rows {
            u[(i, k)] = col[i];
        }
    }
    SvdResult {
        u,
        singular_values: singular,
        v: vm,
    }
}

/// One-sided Jacobi SVD.
pub fn svd(m: &Matrix) -> Result<SvdResult> {
    m.check_finite()?;
    if m.rows() >= m.cols() {
        Ok(tall_svd(m))
    } else {
        let t = tall_svd(&m.transpose());
        Ok(SvdResult {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

/// Smallest singular value of a square or tall matrix.
pub fn min_singular_value(m: &Matrix) -> Result<f64> {
    if m.rows() < m.cols() {
        return Err(Error::WideMatrix {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let s = singular_values(m)?;
    Ok(*s.last().expect("matrix has at least one column"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_and_diagonal() {
        let s = singular_values(&Matrix::identity(3)).unwrap();
        assert_eq!(s, vec![1.0, 1.0, 1.0]);
        let s = singular_values(&Matrix::diag(&[1.0, 3.0, 2.0])).unwrap();
        assert_eq!(s, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn min_singular_value_cases() {
        assert_eq!(min_singular_value(&Matrix::identity(4)).unwrap(), 1.0);
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-6]]).unwrap();
        assert_abs_diff_eq!(min_singular_value(&m).unwrap(), 1e-6, epsilon = 1e-20);
        let wide = Matrix::zeros(2, 3);
        assert!(matches!(min_singular_value(&wide), Err(Error::WideMatrix { .. })));
    }

    #[test]
    fn zero_matrix_has_zero_singular_values() {
        let z = Matrix::zeros(3, 2);
        let r = svd(&z).unwrap();
        assert_eq!(r.singular_values, vec![0.0, 0.0]);
        // U is still orthonormal.
        let utu = r.u.transpose().matmul(&r.u).unwrap();
        assert!(utu.sub(&Matrix::identity(2)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = Matrix::identity(2);
        m[(1, 0)] = f64::NAN;
        assert!(matches!(svd(&m), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn wide_matrix_reconstructs() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 4.0]]).unwrap();
        let r = svd(&m).unwrap();
        assert_eq!(r.u.rows(), 2);
        assert_eq!(r.v.rows(), 3);
        let err = r.reconstruct().sub(&m).unwrap().frobenius_norm();
        assert!(err < 1e-12);
    }
}
