//! Dense linear algebra for the small matrices this crate works with.
//!
//! Everything here is written for matrices up to a few dozen rows and
//! columns: one-sided Jacobi SVD, cyclic Jacobi for symmetric eigenvalues,
//! Householder QR with column pivoting, and the point/span/affine-hull
//! distances built on top of them. Vectors are plain `&[f64]` slices.

mod distance;
mod eigen;
mod matrix;
mod qr;
mod svd;

pub use distance::{
    affine_shortest_vector, distance_to_affine_hull, distance_to_span, one_off_distance,
    AffineFrame, SpanProjector,
};
pub use eigen::symmetric_eigenvalues;
pub use matrix::Matrix;
pub use qr::{least_squares, PivotedQr};
pub use svd::{min_singular_value, singular_values, svd, SvdResult};

/// Relative tolerance for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Convex (or affine) combination `sum_i w_i p_i`.
pub fn combine(points: &[Vec<f64>], indices: &[usize], weights: &[f64]) -> Vec<f64> {
    let dim = points.first().map_or(0, Vec::len);
    let mut out = vec![0.0; dim];
    for (&i, &w) in indices.iter().zip(weights) {
        axpy(w, &points[i], &mut out);
    }
    out
}

pub fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let dim = points.first().map_or(0, Vec::len);
    let mut c = vec![0.0; dim];
    for p in points {
        axpy(1.0, p, &mut c);
    }
    let inv = 1.0 / points.len().max(1) as f64;
    c.iter_mut().for_each(|v| *v *= inv);
    c
}
