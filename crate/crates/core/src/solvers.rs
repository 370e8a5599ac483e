//! Linear minimization over vertex lists, Frank-Wolfe variants with exact
//! line search, and Wolfe's min-norm-point algorithm.
//!
//! Vertices are passed as plain slices so that Minkowski differences, which
//! may repeat points, can be fed straight in.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm_sq, sub, symmetric_eigenvalues, Matrix};

/// Weight sums drifting further than this from 1 are renormalized.
const WEIGHT_DRIFT: f64 = 1e-12;

/// `f(x) = 1/2 x^T Q x + c^T x + constant` with `Q` symmetric PSD.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    q: Matrix,
    c: Vec<f64>,
    constant: f64,
    mu: f64,
    l: f64,
}

impl QuadraticObjective {
    pub fn new(q: Matrix, c: Vec<f64>) -> Result<Self> {
        if q.cols() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: q.cols(),
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "linear term".into(),
            });
        }
        let ev = symmetric_eigenvalues(&q)?;
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        if lo < -1e-12 * hi.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "quadratic term is not positive semidefinite (min eigenvalue {lo:e})"
            )));
        }
        Ok(QuadraticObjective {
            q,
            c,
            constant: 0.0,
            mu: lo.max(0.0),
            l: hi.max(lo.max(0.0)),
        })
    }

    /// `1/2 |x|^2`, the min-norm-point objective.
    pub fn min_norm(dim: usize) -> Self {
        QuadraticObjective {
            q: Matrix::identity(dim),
            c: vec![0.0; dim],
            constant: 0.0,
            mu: 1.0,
            l: 1.0,
        }
    }

    /// `1/2 |x - b|^2`.
    pub fn squared_distance(b: &[f64]) -> Self {
        let mut f = Self::min_norm(b.len());
        f.c = b.iter().map(|v| -v).collect();
        f.constant = 0.5 * norm_sq(b);
        f
    }

    /// `1/2 sum_i q_i (x_i - b_i)^2` for a nonnegative diagonal `q`.
    pub fn diagonal(q: &[f64], b: &[f64]) -> Result<Self> {
        if q.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: b.len(),
            });
        }
        let mut f = Self::new(Matrix::diag(q), q.iter().zip(b).map(|(qi, bi)| -qi * bi).collect())?;
        f.constant = 0.5 * q.iter().zip(b).map(|(qi, bi)| qi * bi * bi).sum::<f64>();
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Strong convexity modulus (smallest eigenvalue of `Q`).
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Gradient Lipschitz constant (largest eigenvalue of `Q`).
    pub fn lipschitz(&self) -> f64 {
        self.l
    }

    fn qx(&self, x: &[f64]) -> Vec<f64> {
        (0..self.q.rows()).map(|i| dot(self.q.row(i), x)).collect()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.qx(x)) + dot(&self.c, x) + self.constant
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.qx(x);
        linalg::axpy(1.0, &self.c, &mut g);
        g
    }

    /// `d^T Q d`
    pub fn curvature(&self, d: &[f64]) -> f64 {
        dot(d, &self.qx(d))
    }
}

/// Index of the vertex minimizing `<direction, a_i>`; ties go to the lowest
/// index.
pub fn lmo(vertices: &[Vec<f64>], direction: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, a) in vertices.iter().enumerate() {
        let v = dot(direction, a);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Toward the LMO vertex.
    Fw,
    /// Away from an active vertex.
    Away,
    /// Mass moved from an active vertex to the LMO vertex.
    Pairwise,
    /// An away or pairwise step that zeroed the weight it moved (for Wolfe:
    /// a minor cycle that removed a point from the corral).
    Drop,
}

impl StepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StepKind::Fw => "fw",
            StepKind::Away => "away",
            StepKind::Pairwise => "pairwise",
            StepKind::Drop => "drop",
        }
    }
}

/// State after one step.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iterate: Vec<f64>,
    pub objective: f64,
    /// Duality gap `max_v <grad f(x), x - v>` at `iterate`.
    pub gap: f64,
    pub step: StepKind,
    pub step_length: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub initial_point: Vec<f64>,
    pub initial_objective: f64,
    pub initial_gap: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Duality gap at the returned point.
    pub final_residual: f64,
}

impl RunTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Objective values starting with the initial point.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective)
            .chain(self.records.iter().map(|r| r.objective))
            .collect()
    }

    /// Number of non-drop steps among the first `t` steps, for `t = 0..=T`.
    pub fn good_step_counts(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.records.len() + 1);
        let mut g = 0;
        out.push(0);
        for r in &self.records {
            if r.step != StepKind::Drop {
                g += 1;
            }
            out.push(g);
        }
        out
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.records.iter().filter(|r| r.step == kind).count()
    }
}

/// Convex combination describing the final iterate.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Active vertex indices, ascending.
    pub active: Vec<usize>,
    /// Positive weights aligned with `active`, summing to 1.
    pub weights: Vec<f64>,
    /// Duality gap at the final point.
    pub residual: f64,
}

impl Certificate {
    pub fn point(&self, vertices: &[Vec<f64>]) -> Vec<f64> {
        linalg::combine(vertices, &self.active, &self.weights)
    }

    /// Checks the min-norm optimality conditions: `<x, a_i> >= |x|^2 - tol`
    /// for every vertex and equality within `tol` on the active set, plus
    /// reconstruction of `x` to `1e-10`.
    pub fn check_min_norm(&self, vertices: &[Vec<f64>], x: &[f64], tol: f64) -> bool {
        let xx = norm_sq(x);
        let rec = self.point(vertices);
        let sum: f64 = self.weights.iter().sum();
        linalg::distance(&rec, x) <= 1e-10 * (1.0 + linalg::norm(x))
            && (sum - 1.0).abs() <= 1e-10
            && self.weights.iter().all(|&w| w > 0.0)
            && vertices.iter().all(|a| dot(x, a) >= xx - tol)
            && self.active.iter().all(|&i| (dot(x, &vertices[i]) - xx).abs() <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub certificate: Certificate,
    pub trace: RunTrace,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FwOptions {
    pub max_iter: usize,
    /// Stop once the duality gap is at most this.
    pub tol: f64,
}

impl Default for FwOptions {
    fn default() -> Self {
        FwOptions {
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Vanilla,
    Away,
    Pairwise,
}

fn validate(
    vertices: &[Vec<f64>],
    f: &QuadraticObjective,
    x0: &[f64],
    opts: &FwOptions,
) -> Result<Vec<f64>> {
    if vertices.is_empty() {
        return Err(Error::invalid("empty vertex list"));
    }
    for (i, a) in vertices.iter().enumerate() {
        if a.len() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: a.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("vertex {i}"),
            });
        }
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if x0.len() != vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: vertices.len(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("initial weights must be finite and nonnegative"));
    }
    let s: f64 = x0.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("initial weights sum to {s}, not 1")));
    }
    Ok(x0.iter().map(|w| w / s).collect())
}

fn point_of(vertices: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; vertices[0].len()];
    for (a, &w) in vertices.iter().zip(weights) {
        if w != 0.0 {
            linalg::axpy(w, a, &mut x);
        }
    }
    x
}

fn gap_at(vertices: &[Vec<f64>], g: &[f64], x: &[f64]) -> (usize, f64) {
    let s = lmo(vertices, g);
    (s, dot(g, x) - dot(g, &vertices[s]))
}

/// Exact line search for a quadratic along `d`, clipped to `[0, gmax]`.
fn line_search(f: &QuadraticObjective, g: &[f64], d: &[f64], gmax: f64) -> f64 {
    let slope = dot(g, d);
    if slope >= 0.0 {
        return 0.0;
    }
    let curv = f.curvature(d);
    if curv <= 0.0 {
        return gmax;
    }
    (-slope / curv).min(gmax)
}

/// Shared Frank-Wolfe driver. `x0` holds convex weights over `vertices`.
pub fn frank_wolfe(
    variant: Variant,
    vertices: &[Vec<f64>],
    f: &QuadraticObjective,
    x0: &[f64],
    opts: &FwOptions,
) -> Result<Solution> {
    let mut w = validate(vertices, f, x0, opts)?;
    let mut x = point_of(vertices, &w);
    let mut g = f.gradient(&x);
    let (mut s, mut gap) = gap_at(vertices, &g, &x);
    let mut trace = RunTrace {
        initial_point: x.clone(),
        initial_objective: f.value(&x),
        initial_gap: gap,
        records: Vec::new(),
        converged: false,
        final_residual: gap,
    };

    for _ in 0..opts.max_iter {
        if gap <= opts.tol {
            trace.converged = true;
            break;
        }
        // Away vertex: active vertex with the largest <g, a_i>.
        let away = || {
            let mut v = usize::MAX;
            let mut best = f64::NEG_INFINITY;
            for (i, a) in vertices.iter().enumerate() {
                if w[i] > 0.0 {
                    let val = dot(&g, a);
                    if val > best {
                        best = val;
                        v = i;
                    }
                }
            }
            v
        };
        let (kind, d, gmax, moved) = match variant {
            Variant::Vanilla => (StepKind::Fw, sub(&vertices[s], &x), 1.0, usize::MAX),
            Variant::Away => {
                let v = away();
                let d_fw = sub(&vertices[s], &x);
                let d_aw = sub(&x, &vertices[v]);
                if -dot(&g, &d_fw) >= -dot(&g, &d_aw) || w[v] >= 1.0 {
                    (StepKind::Fw, d_fw, 1.0, usize::MAX)
                } else {
                    (StepKind::Away, d_aw, w[v] / (1.0 - w[v]), v)
                }
            }
            Variant::Pairwise => {
                let v = away();
                (StepKind::Pairwise, sub(&vertices[s], &vertices[v]), w[v], v)
            }
        };
        let gamma = line_search(f, &g, &d, gmax);
        let dropped = moved != usize::MAX && gamma >= gmax;
        match kind {
            StepKind::Fw => {
                for wi in w.iter_mut() {
                    *wi *= 1.0 - gamma;
                }
                w[s] += gamma;
            }
            StepKind::Away => {
                for wi in w.iter_mut() {
                    *wi *= 1.0 + gamma;
                }
                w[moved] -= gamma;
                if dropped {
                    w[moved] = 0.0;
                }
            }
            StepKind::Pairwise => {
                w[s] += gamma;
                w[moved] -= gamma;
                if dropped {
                    w[moved] = 0.0;
                }
            }
            StepKind::Drop => unreachable!(),
        }
        for wi in w.iter_mut() {
            if *wi < 0.0 {
                *wi = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_DRIFT {
            w.iter_mut().for_each(|wi| *wi /= sum);
        }
        x = point_of(vertices, &w);
        g = f.gradient(&x);
        (s, gap) = gap_at(vertices, &g, &x);
        trace.records.push(IterationRecord {
            iterate: x.clone(),
            objective: f.value(&x),
            gap,
            step: if dropped { StepKind::Drop } else { kind },
            step_length: gamma,
        });
    }
    if gap <= opts.tol {
        trace.converged = true;
    }
    trace.final_residual = gap;
    let (active, weights): (Vec<usize>, Vec<f64>) =
        w.iter().enumerate().filter(|(_, &wi)| wi > 0.0).map(|(i, &wi)| (i, wi)).unzip();
    Ok(Solution {
        x,
        certificate: Certificate {
            active,
            weights,
            residual: gap,
        },
        trace,
    })
}

pub fn fw_vanilla(
    vertices: &[Vec<f64>],
    f: &QuadraticObjective,
    x0: &[f64],
    opts: &FwOptions,
) -> Result<Solution> {
    frank_wolfe(Variant::Vanilla, vertices, f, x0, opts)
}

pub fn fw_away(
    vertices: &[Vec<f64>],
    f: &QuadraticObjective,
    x0: &[f64],
    opts: &FwOptions,
) -> Result<Solution> {
    frank_wolfe(Variant::Away, vertices, f, x0, opts)
}

pub fn fw_pairwise(
    vertices: &[Vec<f64>],
    f: &QuadraticObjective,
    x0: &[f64],
    opts: &FwOptions,
) -> Result<Solution> {
    frank_wolfe(Variant::Pairwise, vertices, f, x0, opts)
}

/// Unit weight on vertex `i`.
pub fn vertex_weights(n: usize, i: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    w[i] = 1.0;
    w
}

/// Affine minimizer of the corral: weights summing to one that minimize
/// `|sum_i alpha_i a_i|`.
fn affine_minimizer(vertices: &[Vec<f64>], corral: &[usize]) -> Result<Vec<f64>> {
    if corral.len() == 1 {
        return Ok(vec![1.0]);
    }
    let p0 = &vertices[corral[0]];
    let cols: Vec<Vec<f64>> = corral[1..].iter().map(|&i| sub(&vertices[i], p0)).collect();
    let d = Matrix::from_columns(&cols)?;
    let rhs: Vec<f64> = p0.iter().map(|v| -v).collect();
    let beta = linalg::least_squares(&d, &rhs)?;
    let mut alpha = Vec::with_capacity(corral.len());
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Ok(alpha)
}

/// Default cap on Wolfe major cycles.
pub const WOLFE_MAX_MAJOR: usize = 10_000;

/// Wolfe's min-norm-point algorithm over `conv(vertices)`.
///
/// A vertex enters the corral when `<x, a> < |x|^2 - tol * max(1, |x|^2)`.
/// Minor cycles move toward the corral's affine minimizer and drop points
/// whose weight reaches zero. Repeating a corral aborts with
/// [`Error::NotConverged`].
pub fn wolfe_mnp(vertices: &[Vec<f64>], tol: f64) -> Result<Solution> {
    wolfe_mnp_capped(vertices, tol, WOLFE_MAX_MAJOR)
}

pub fn wolfe_mnp_capped(vertices: &[Vec<f64>], tol: f64, max_major: usize) -> Result<Solution> {
    let f = QuadraticObjective::min_norm(vertices.first().map_or(0, Vec::len));
    let start = (0..vertices.len())
        .min_by(|&a, &b| norm_sq(&vertices[a]).total_cmp(&norm_sq(&vertices[b])).then(a.cmp(&b)))
        .ok_or_else(|| Error::invalid("empty vertex list"))?;
    validate(vertices, &f, &vertex_weights(vertices.len(), start), &FwOptions { max_iter: 0, tol })?;

    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = vertices[start].clone();
    let gap_of = |x: &[f64]| {
        let (_, gap) = gap_at(vertices, x, x);
        gap
    };
    let mut trace = RunTrace {
        initial_point: x.clone(),
        initial_objective: f.value(&x),
        initial_gap: gap_of(&x),
        records: Vec::new(),
        converged: false,
        final_residual: 0.0,
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let minor_cap = vertices[0].len() + 2;

    for _ in 0..max_major {
        let xx = norm_sq(&x);
        let j = lmo(vertices, &x);
        if dot(&x, &vertices[j]) >= xx - tol * xx.max(1.0) || corral.contains(&j) {
            trace.converged = true;
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        let mut minor = 0;
        loop {
            let alpha = affine_minimizer(vertices, &corral)?;
            if alpha.iter().all(|&a| a > 0.0) {
                lambda = alpha;
                break;
            }
            minor += 1;
            if minor > minor_cap + corral.len() {
                return Err(Error::NotConverged {
                    iterations: trace.records.len(),
                    reason: "minor cycle did not terminate".into(),
                });
            }
            // Largest step toward alpha that keeps every weight nonnegative.
            let mut theta = 1.0;
            let mut hit = usize::MAX;
            for (i, (&l, &a)) in lambda.iter().zip(&alpha).enumerate() {
                if a <= 0.0 && l - a > 0.0 {
                    let t = l / (l - a);
                    if t < theta {
                        theta = t;
                        hit = i;
                    }
                }
            }
            let mut next: Vec<(usize, f64)> = Vec::with_capacity(corral.len());
            for (i, (&l, &a)) in lambda.iter().zip(&alpha).enumerate() {
                let v = theta * a + (1.0 - theta) * l;
                if i != hit && v > 0.0 {
                    next.push((corral[i], v));
                }
            }
            if next.is_empty() {
                return Err(Error::NotConverged {
                    iterations: trace.records.len(),
                    reason: "corral emptied in a minor cycle".into(),
                });
            }
            let total: f64 = next.iter().map(|p| p.1).sum();
            corral = next.iter().map(|p| p.0).collect();
            lambda = next.iter().map(|p| p.1 / total).collect();
            x = linalg::combine(vertices, &corral, &lambda);
            trace.records.push(IterationRecord {
                iterate: x.clone(),
                objective: f.value(&x),
                gap: gap_of(&x),
                step: StepKind::Drop,
                step_length: theta,
            });
        }
        x = linalg::combine(vertices, &corral, &lambda);
        trace.records.push(IterationRecord {
            iterate: x.clone(),
            objective: f.value(&x),
            gap: gap_of(&x),
            step: StepKind::Fw,
            step_length: 1.0,
        });
        let mut key = corral.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            return Err(Error::NotConverged {
                iterations: trace.records.len(),
                reason: "corral repeated".into(),
            });
        }
    }
    if !trace.converged {
        return Err(Error::NotConverged {
            iterations: trace.records.len(),
            reason: format!("no convergence within {max_major} major cycles"),
        });
    }

    let mut pairs: Vec<(usize, f64)> = corral.into_iter().zip(lambda).collect();
    pairs.sort_by_key(|p| p.0);
    let (active, weights): (Vec<usize>, Vec<f64>) = pairs.into_iter().unzip();
    let residual = gap_of(&x);
    trace.final_residual = residual;
    Ok(Solution {
        x,
        certificate: Certificate {
            active,
            weights,
            residual,
        },
        trace,
    })
}

/// Minkowski difference `{p - q}` in row-major order over `(p, q)`.
pub fn minkowski_difference(p: &[Vec<f64>], q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    p.iter()
        .flat_map(|a| q.iter().map(move |b| sub(a, b)))
        .collect()
}

/// Euclidean distance between `conv(p)` and `conv(q)`, as the min-norm
/// point of their Minkowski difference.
pub fn polytope_distance(p: &[Vec<f64>], q: &[Vec<f64>], tol: f64) -> Result<f64> {
    Ok(polytope_distance_solution(p, q, tol)?.x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// [`polytope_distance`] with the full Wolfe solution; vertex `k` of the
/// difference body is `p[k / q.len()] - q[k % q.len()]`.
pub fn polytope_distance_solution(p: &[Vec<f64>], q: &[Vec<f64>], tol: f64) -> Result<Solution> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::invalid("both point lists must be nonempty"));
    }
    wolfe_mnp(&minkowski_difference(p, q), tol)
}
