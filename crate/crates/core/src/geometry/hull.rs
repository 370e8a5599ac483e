use std::collections::{HashMap, VecDeque};

use super::{Facet, PointSet, Polytope};
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, sub, Matrix, PivotedQr, SpanProjector};

/// One-sidedness / coplanarity tolerance, applied after centering the
/// points and scaling them to unit RMS norm.
pub const HULL_TOL: f64 = 1e-9;

/// Points centered at their centroid and scaled to unit RMS norm.
struct Working {
    pts: Vec<Vec<f64>>,
}

impl Working {
    fn new(ps: &PointSet) -> Self {
        let c = linalg::centroid(ps.points());
        let centered: Vec<Vec<f64>> = ps.points().iter().map(|p| sub(p, &c)).collect();
        let rms = (centered.iter().map(|p| linalg::norm_sq(p)).sum::<f64>() / centered.len() as f64)
            .sqrt();
        let inv = if rms > 0.0 { 1.0 / rms } else { 1.0 };
        Working {
            pts: centered.into_iter().map(|p| linalg::scale(&p, inv)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.pts.len()
    }

    /// Hyperplane through the given `d` points, oriented away from the
    /// centroid (the origin of the working frame), and checked against all
    /// other points.
    fn facet(&self, mut idx: Vec<usize>) -> Result<Facet> {
        idx.sort_unstable();
        let d = self.pts[0].len();
        let p0 = &self.pts[idx[0]];
        let dirs: Vec<Vec<f64>> = idx[1..].iter().map(|&i| sub(&self.pts[i], p0)).collect();
        let normal = if d == 1 {
            vec![if p0[0] >= 0.0 { 1.0 } else { -1.0 }]
        } else {
            let qr = PivotedQr::new(&Matrix::from_columns(&dirs)?);
            if qr.rank() < d - 1 {
                return Err(Error::Degenerate {
                    indices: idx,
                    reason: "facet vertices are affinely dependent".into(),
                });
            }
            qr.q_column(d - 1)
        };
        let mut normal = normal;
        let mut offset = dot(&normal, p0);
        if offset < 0.0 {
            normal.iter_mut().for_each(|v| *v = -*v);
            offset = -offset;
        }
        for (j, p) in self.pts.iter().enumerate() {
            if idx.binary_search(&j).is_ok() {
                continue;
            }
            let h = dot(&normal, p) - offset;
            if h > -HULL_TOL {
                let mut indices = idx.clone();
                indices.push(j);
                return Err(Error::Degenerate {
                    indices,
                    reason: if h > HULL_TOL {
                        "hyperplane is not supporting".into()
                    } else {
                        "point lies on a facet hyperplane".into()
                    },
                });
            }
        }
        Ok(Facet {
            vertices: idx,
            normal,
            offset,
        })
    }

    /// First facet: start from the point with smallest first coordinate and
    /// repeatedly rotate a supporting hyperplane until it touches `d` points.
    fn initial_facet(&self) -> Result<Facet> {
        let d = self.pts[0].len();
        let n = self.len();
        let start = (0..n)
            .min_by(|&a, &b| self.pts[a][0].total_cmp(&self.pts[b][0]).then(a.cmp(&b)))
            .expect("nonempty");
        if d == 1 {
            return self.facet(vec![start]);
        }
        let mut members = vec![start];
        let mut u = vec![0.0; d];
        u[0] = -1.0;
        let base = self.pts[start].clone();
        while members.len() < d {
            let mut span: Vec<Vec<f64>> = members[1..]
                .iter()
                .map(|&i| sub(&self.pts[i], &base))
                .collect();
            span.push(u.clone());
            let w = SpanProjector::new(d, &span)?
                .complement()
                .into_iter()
                .next()
                .ok_or_else(|| Error::Degenerate {
                    indices: members.clone(),
                    reason: "could not extend supporting hyperplane".into(),
                })?;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if members.contains(&j) {
                    continue;
                }
                let y = sub(&self.pts[j], &base);
                let (x, h) = (dot(&y, &w), dot(&y, &u));
                // Points already on the hyperplane join without rotation;
                // affine dependence is caught when the facet is built.
                let angle = if h >= -HULL_TOL * 1e-3 { 0.0 } else { h.atan2(x) };
                if best.is_none_or(|(_, a)| angle > a) {
                    best = Some((j, angle));
                }
            }
            let (j, angle) = best.ok_or_else(|| Error::invalid("not enough points for a facet"))?;
            let psi = -angle;
            let mut next: Vec<f64> = w
                .iter()
                .zip(&u)
                .map(|(wi, ui)| psi.sin() * wi + psi.cos() * ui)
                .collect();
            let nn = norm(&next);
            next.iter_mut().for_each(|v| *v /= nn);
            u = next;
            members.push(j);
        }
        self.facet(members)
    }

    /// The other facet sharing the ridge `facet \ {facet.vertices[drop]}`.
    fn pivot(&self, facet: &Facet, drop: usize) -> Result<Facet> {
        let d = self.pts[0].len();
        let apex = facet.vertices[drop];
        let ridge: Vec<usize> = facet
            .vertices
            .iter()
            .copied()
            .filter(|&v| v != apex)
            .collect();
        let r0 = &self.pts[ridge[0]];
        let mut dirs: Vec<Vec<f64>> = ridge[1..].iter().map(|&i| sub(&self.pts[i], r0)).collect();
        dirs.push(facet.normal.clone());
        let proj = SpanProjector::new(d, &dirs)?;
        // In-facet direction orthogonal to the ridge, pointing at the apex.
        let w = {
            let to_apex = sub(&self.pts[apex], r0);
            let mut comp = vec![0.0; d];
            for c in proj.complement() {
                linalg::axpy(dot(&c, &to_apex), &c, &mut comp);
            }
            let nrm = norm(&comp);
            if nrm <= HULL_TOL {
                return Err(Error::Degenerate {
                    indices: facet.vertices.clone(),
                    reason: "apex lies on the ridge".into(),
                });
            }
            linalg::scale(&comp, 1.0 / nrm)
        };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.len() {
            if facet.vertices.contains(&j) {
                continue;
            }
            let y = sub(&self.pts[j], r0);
            let (x, h) = (dot(&y, &w), dot(&y, &facet.normal));
            if x.abs() <= HULL_TOL && h.abs() <= HULL_TOL {
                let mut indices = ridge.clone();
                indices.push(j);
                return Err(Error::Degenerate {
                    indices,
                    reason: "point on the affine hull of a ridge".into(),
                });
            }
            let angle = h.atan2(x);
            if best.is_none_or(|(_, a)| angle < a) {
                best = Some((j, angle));
            }
        }
        let (j, _) = best.ok_or_else(|| Error::invalid("no point beyond ridge"))?;
        let mut next = ridge;
        next.push(j);
        self.facet(next)
    }
}

/// Convex hull of points in general position by ridge pivoting.
///
/// The hull is returned as a simplicial facet list. Inputs with `d + 1`
/// points on a common hyperplane (within [`HULL_TOL`] in normalized
/// coordinates) are rejected with the offending indices.
pub fn convex_hull(ps: &PointSet) -> Result<Polytope> {
    let d = ps.dim();
    let n = ps.len();
    if n < d + 1 {
        return Err(Error::invalid(format!(
            "convex hull in R^{d} needs at least {} points, got {n}",
            d + 1
        )));
    }
    if ps.affine_dim() < d {
        return Err(Error::Degenerate {
            indices: (0..n).collect(),
            reason: "points are not full-dimensional".into(),
        });
    }
    let work = Working::new(ps);

    let mut facets = Vec::new();
    if d == 1 {
        let (lo, hi) = (0..n).fold((0, 0), |(lo, hi), i| {
            let x = work.pts[i][0];
            (
                if x < work.pts[lo][0] { i } else { lo },
                if x > work.pts[hi][0] { i } else { hi },
            )
        });
        facets.push(work.facet(vec![lo])?);
        facets.push(work.facet(vec![hi])?);
    } else {
        let first = work.initial_facet()?;
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(first.vertices.clone(), 0);
        facets.push(first);
        let mut queue = VecDeque::from([0usize]);
        while let Some(fi) = queue.pop_front() {
            let facet = facets[fi].clone();
            for k in 0..d {
                let next = work.pivot(&facet, k)?;
                if !index.contains_key(&next.vertices) {
                    index.insert(next.vertices.clone(), facets.len());
                    queue.push_back(facets.len());
                    facets.push(next);
                }
            }
        }
    }

    // Offsets in the caller's coordinates; normals are unchanged by the
    // translation and positive scaling of the working frame.
    let facets = facets
        .into_iter()
        .map(|f| {
            let offset = dot(&f.normal, ps.point(f.vertices[0]));
            Facet { offset, ..f }
        })
        .collect();
    Ok(Polytope::from_parts(ps.clone(), facets, true))
}
