//! Independent reference implementations used by the integration tests.
//! They rely on nalgebra rather than the crate's own linear algebra.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| gaussian_vec(rng, d)).collect()
}

pub fn to_dmatrix_cols(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let d = cols[0].len();
    DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i])
}

/// All k-subsets of 0..n.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Distance from `x` to the span of `basis` via an SVD projector.
pub fn span_distance(x: &[f64], basis: &[Vec<f64>]) -> f64 {
    let xv = DVector::from_column_slice(x);
    if basis.is_empty() {
        return xv.norm();
    }
    let b = to_dmatrix_cols(basis);
    let svd = b.svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let mut proj = DVector::zeros(x.len());
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-10 * smax.max(f64::MIN_POSITIVE) * x.len().max(basis.len()) as f64 {
            let col = u.column(k);
            proj += col * col.dot(&xv);
        }
    }
    (xv - proj).norm()
}

pub fn matrix_rank(cols: &[Vec<f64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let m = to_dmatrix_cols(cols);
    let sv = m.singular_values();
    let smax = sv.max();
    sv.iter()
        .filter(|&&s| s > 1e-10 * smax * cols.len().max(cols[0].len()) as f64)
        .count()
}

/// Min-norm point of `conv(vertices)` by enumerating affinely independent
/// subsets, solving the equality-constrained problem on each through its
/// KKT system and keeping the best one with nonnegative weights.
pub fn brute_force_min_norm(vertices: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let d = vertices[0].len();
    let mut best = (f64::INFINITY, vec![]);
    for s in 1..=(d + 1).min(vertices.len()) {
        for sub in subsets(vertices.len(), s) {
            let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
            for i in 0..s {
                for j in 0..s {
                    kkt[(i, j)] = vertices[sub[i]]
                        .iter()
                        .zip(&vertices[sub[j]])
                        .map(|(a, b)| a * b)
                        .sum();
                }
                kkt[(i, s)] = 1.0;
                kkt[(s, i)] = 1.0;
            }
            let mut rhs = DVector::zeros(s + 1);
            rhs[s] = 1.0;
            let Some(sol) = kkt.clone().lu().solve(&rhs) else {
                continue;
            };
            // Reject numerically singular systems.
            if (kkt * &sol - &rhs).norm() > 1e-9 {
                continue;
            }
            if (0..s).any(|i| sol[i] < -1e-12) {
                continue;
            }
            let mut x = vec![0.0; d];
            for i in 0..s {
                for k in 0..d {
                    x[k] += sol[i] * vertices[sub[i]][k];
                }
            }
            let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm < best.0 {
                best = (nrm, x);
            }
        }
    }
    best
}

/// Min over `f` on conv(vertices) for `f(x) = 1/2 |x - b|^2`, via min-norm
/// of the translated vertices.
pub fn brute_force_projection(vertices: &[Vec<f64>], b: &[f64]) -> (f64, Vec<f64>) {
    let shifted: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| v.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let (r, x) = brute_force_min_norm(&shifted);
    (0.5 * r * r, x.iter().zip(b).map(|(x, y)| x + y).collect())
}

/// Every d-subset whose hyperplane has all other points strictly on one side.
pub fn brute_force_facets(pts: &[Vec<f64>]) -> BTreeSet<Vec<usize>> {
    let d = pts[0].len();
    let n = pts.len();
    let mut out = BTreeSet::new();
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        // Normal via the null space of the (d-1) x d difference matrix.
        let p0 = DVector::from_vec(pts[subset[0]].clone());
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (r, &i) in subset[1..].iter().enumerate() {
            let diff = DVector::from_vec(pts[i].clone()) - &p0;
            m.set_row(r, &diff.transpose());
        }
        let svd = m.clone().svd(false, true);
        let vt = svd.v_t.unwrap();
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let normal = vt.row(imin).transpose();
        let off = normal.dot(&p0);
        let (mut pos, mut neg) = (0, 0);
        for j in 0..n {
            if subset.contains(&j) {
                continue;
            }
            let h = normal.dot(&DVector::from_vec(pts[j].clone())) - off;
            if h > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        if pos == 0 || neg == 0 {
            out.insert(subset.clone());
        }
        // next combination
        let mut k = d;
        while k > 0 && subset[k - 1] == n - d + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        subset[k - 1] += 1;
        for t in k..d {
            subset[t] = subset[t - 1] + 1;
        }
    }
    out
}
