//! Point sets, convex hulls of points in general position, simplicial face
//! lattices, diameters and the centroid ball of a simplex.

mod hull;
pub mod io;

pub use hull::{convex_hull, HULL_TOL};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{self, AffineFrame, PivotedQr};

/// A finite list of distinct points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    /// Validates dimensions and finiteness; exact duplicates are rejected.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("point set is empty"))?;
        if dim == 0 {
            return Err(Error::invalid("points must have at least one coordinate"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("point {i}"),
                });
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::Degenerate {
                        indices: vec![i, j],
                        reason: "duplicate points".into(),
                    });
                }
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn into_points(self) -> Vec<Vec<f64>> {
        self.points
    }

    pub fn subset(&self, indices: &[usize]) -> PointSet {
        PointSet {
            dim: self.dim,
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    /// Dimension of the affine hull (numerical rank of the differences).
    pub fn affine_dim(&self) -> usize {
        if self.points.len() < 2 {
            return 0;
        }
        let p0 = &self.points[0];
        let dirs: Vec<Vec<f64>> = self.points[1..].iter().map(|p| linalg::sub(p, p0)).collect();
        match linalg::Matrix::from_columns(&dirs) {
            Ok(m) => PivotedQr::new(&m).rank(),
            Err(_) => 0,
        }
    }

    /// `d + 1` affinely independent points.
    pub fn is_simplex(&self) -> bool {
        self.len() >= 2 && self.affine_dim() == self.len() - 1
    }

    /// The same points in orthonormal coordinates of their affine hull.
    pub fn to_affine_coordinates(&self) -> Result<PointSet> {
        let frame = AffineFrame::new(&self.points)?;
        let pts = self.points.iter().map(|p| frame.project(p)).collect();
        Ok(PointSet {
            dim: frame.dim().max(1),
            points: if frame.dim() == 0 {
                vec![vec![0.0]; self.points.len()]
            } else {
                pts
            },
        })
    }

    pub fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<PointSet> {
        PointSet::new(self.points.iter().map(|p| f(p)).collect())
    }
}

/// A facet of a simplicial polytope: `d` vertex indices, unit outward normal
/// and offset with `<normal, x> = offset` on the facet.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub vertices: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Facet {
    /// Signed distance of `x` above the facet hyperplane.
    pub fn height(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.normal, x) - self.offset
    }
}

/// Convex hull of a point set, described by its facets.
#[derive(Debug, Clone)]
pub struct Polytope {
    points: PointSet,
    facets: Vec<Facet>,
    vertices: Vec<usize>,
    simplicial: bool,
}

impl Polytope {
    pub(crate) fn from_parts(points: PointSet, facets: Vec<Facet>, simplicial: bool) -> Self {
        let vertices: BTreeSet<usize> = facets.iter().flat_map(|f| f.vertices.iter().copied()).collect();
        Polytope {
            points,
            facets,
            vertices: vertices.into_iter().collect(),
            simplicial,
        }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Indices (into the point set) of the hull vertices, ascending.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// All nonempty proper faces of a simplicial polytope as sorted vertex
/// index sets: every nonempty subset of every facet, deduplicated.
pub fn enumerate_faces(p: &Polytope) -> Result<Vec<Vec<usize>>> {
    enumerate_faces_capped(p, usize::MAX)
}

/// [`enumerate_faces`] that gives up once more than `cap` faces are found.
pub fn enumerate_faces_capped(p: &Polytope, cap: usize) -> Result<Vec<Vec<usize>>> {
    if !p.is_simplicial() {
        return Err(Error::NotSimplicial);
    }
    let mut faces = BTreeSet::new();
    for f in p.facets() {
        let k = f.vertices.len();
        for mask in 1u64..(1u64 << k) {
            let face: Vec<usize> = (0..k)
                .filter(|&b| mask & (1 << b) != 0)
                .map(|b| f.vertices[b])
                .collect();
            faces.insert(face);
            if faces.len() > cap {
                return Err(Error::cap("face count", faces.len() as u128, cap as u128));
            }
        }
    }
    let mut out: Vec<Vec<usize>> = faces.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Largest pairwise Euclidean distance.
pub fn diameter(ps: &PointSet) -> Result<f64> {
    if ps.len() < 2 {
        return Err(Error::invalid("diameter needs at least two points"));
    }
    let pts = ps.points();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.max(linalg::distance(&pts[i], &pts[j]));
        }
    }
    Ok(best)
}

/// Ball centered at the centroid of a `d`-simplex with radius equal to the
/// distance from the centroid to the nearest facet hyperplane.
pub fn simplex_centroid_ball(points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let ps = PointSet::new(points.to_vec())?;
    if ps.len() != ps.dim() + 1 || !ps.is_simplex() {
        return Err(Error::Degenerate {
            indices: (0..ps.len()).collect(),
            reason: "not a nondegenerate d-simplex in R^d".into(),
        });
    }
    let center = linalg::centroid(points);
    let mut radius = f64::INFINITY;
    for i in 0..points.len() {
        let opposite: Vec<Vec<f64>> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        radius = radius.min(linalg::distance_to_affine_hull(&center, &opposite)?);
    }
    Ok((center, radius))
}
