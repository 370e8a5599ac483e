use super::{dot, norm, sub, Matrix, PivotedQr};
use crate::error::{Error, Result};

/// Distances below `max(SNAP_REL * |x|, SNAP_ABS)` are reported as zero.
const SNAP_REL: f64 = 1e-12;
const SNAP_ABS: f64 = 1e-14;

/// Precomputed orthogonalization of a spanning set, for repeated
/// point-to-span distance queries.
#[derive(Debug, Clone)]
pub struct SpanProjector {
    dim: usize,
    qr: Option<PivotedQr>,
}

impl SpanProjector {
    pub fn new(dim: usize, basis: &[Vec<f64>]) -> Result<Self> {
        for b in basis {
            if b.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
        }
        if basis.is_empty() || dim == 0 {
            return Ok(SpanProjector { dim, qr: None });
        }
        let m = Matrix::from_columns(basis)?;
        let qr = PivotedQr::new(&m);
        Ok(SpanProjector {
            dim,
            qr: (qr.rank() > 0).then_some(qr),
        })
    }

    pub fn rank(&self) -> usize {
        self.qr.as_ref().map_or(0, PivotedQr::rank)
    }

    /// Distance without the snap-to-zero rule.
    pub fn raw_distance(&self, x: &[f64]) -> f64 {
        match &self.qr {
            None => norm(x),
            Some(qr) => qr.residual_norm(x),
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let d = self.raw_distance(x);
        if d <= (SNAP_REL * norm(x)).max(SNAP_ABS) {
            Ok(0.0)
        } else {
            Ok(d)
        }
    }

    /// Orthonormal basis of the complement of the span.
    pub fn complement(&self) -> Vec<Vec<f64>> {
        match &self.qr {
            None => (0..self.dim)
                .map(|i| {
                    let mut e = vec![0.0; self.dim];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            Some(qr) => qr.complement_basis(),
        }
    }
}

/// Euclidean distance from `x` to `span(basis)`; a rank-deficient or empty
/// basis is allowed.
pub fn distance_to_span(x: &[f64], basis: &[Vec<f64>]) -> Result<f64> {
    SpanProjector::new(x.len(), basis)?.distance(x)
}

/// Euclidean distance from `x` to the affine hull of `points`.
pub fn distance_to_affine_hull(x: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    let (p0, rest) = points
        .split_first()
        .ok_or_else(|| Error::invalid("affine hull of an empty point list"))?;
    if p0.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: p0.len(),
        });
    }
    let dirs: Vec<Vec<f64>> = rest.iter().map(|p| sub(p, p0)).collect();
    distance_to_span(&sub(x, p0), &dirs)
}

/// Shortest vector in the affine hull of `d` affinely independent points
/// in `R^d` whose hull misses the origin.
///
/// With `P` the matrix whose rows are the points, the minimizer is
/// `v = P^{-1} 1 / |P^{-1} 1|^2`, certified by `P v = |v|^2 1`. The squared
/// divisor is what makes `|v| = 1 / |P^{-1} 1|` hold.
pub fn affine_shortest_vector(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = points.len();
    if d == 0 {
        return Err(Error::invalid("no points"));
    }
    let p = Matrix::from_rows(points)?;
    if p.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.cols(),
        });
    }
    let qr = PivotedQr::new(&p);
    if qr.rank() < d {
        return Err(Error::Singular {
            rank: qr.rank(),
            expected: d,
        });
    }
    let y = qr.least_squares(&vec![1.0; d]);
    let yy = dot(&y, &y);
    if !yy.is_finite() || yy == 0.0 {
        return Err(Error::Singular {
            rank: qr.rank(),
            expected: d,
        });
    }
    Ok(y.iter().map(|v| v / yy).collect())
}

/// `min_i dist(a_i, span(a_j : j != i))` over the columns of `m`.
pub fn one_off_distance(m: &Matrix) -> Result<f64> {
    let cols = m.columns();
    let mut best = f64::INFINITY;
    for i in 0..cols.len() {
        let others: Vec<Vec<f64>> = cols
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.clone())
            .collect();
        best = best.min(distance_to_span(&cols[i], &others)?);
    }
    Ok(best)
}

/// Orthonormal coordinates on the affine hull of a point list. Distances
/// between points are preserved exactly (up to rounding).
#[derive(Debug, Clone)]
pub struct AffineFrame {
    origin: Vec<f64>,
    axes: Vec<Vec<f64>>,
}

impl AffineFrame {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let p0 = points
            .first()
            .ok_or_else(|| Error::invalid("empty point list"))?
            .clone();
        let dirs: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, &p0)).collect();
        if dirs.is_empty() {
            return Ok(AffineFrame {
                origin: p0,
                axes: Vec::new(),
            });
        }
        let qr = PivotedQr::new(&Matrix::from_columns(&dirs)?);
        Ok(AffineFrame {
            origin: p0,
            axes: qr.range_basis(),
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let y = sub(x, &self.origin);
        self.axes.iter().map(|a| dot(a, &y)).collect()
    }
}
