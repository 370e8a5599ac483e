//! Condition measures of finite point sets and their convex hulls: width,
//! minwidth, vertex-facet distance, facial distance (equal to pyramidal
//! width), the conditioning ratio kappa, robust Kruskal rank and the
//! delta-distance property.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, diameter, enumerate_faces_capped, PointSet, Polytope};
use crate::linalg::{self, min_singular_value, sub, Matrix, PivotedQr, SpanProjector};
use crate::solvers::polytope_distance;
use crate::subsets::{next_combination, Combinations};

/// Default largest non-simplex point set accepted by [`minwidth`].
pub const MINWIDTH_SUBSET_CAP: usize = 12;
/// Default face-count guard for [`facial_distance`].
pub const FACE_CAP: usize = 200_000;
/// Column cap for [`robust_kruskal_rank`].
pub const KRUSKAL_MAX_COLS: usize = 20;
/// Row cap for [`delta_distance`].
pub const DELTA_MAX_ROWS: usize = 18;
/// Wolfe tolerance used for face-to-complement distances.
pub const DISTANCE_TOL: f64 = 1e-12;

/// Directional width of `pts` along the unit vector `u`.
fn directional_width(pts: &[Vec<f64>], u: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let h = linalg::dot(u, p);
        lo = lo.min(h);
        hi = hi.max(h);
    }
    hi - lo
}

/// Splits `subset` into the part containing its first element and the rest,
/// according to the bits of `mask` over `subset[1..]`.
fn bipartition(subset: &[usize], mask: usize) -> (Vec<usize>, Vec<usize>) {
    let mut plus = vec![subset[0]];
    let mut minus = Vec::new();
    for (b, &i) in subset[1..].iter().enumerate() {
        if mask & (1 << b) != 0 {
            minus.push(i);
        } else {
            plus.push(i);
        }
    }
    (plus, minus)
}

fn part_directions(pts: &[Vec<f64>], plus: &[usize], minus: &[usize]) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(plus.len() + minus.len());
    for part in [plus, minus] {
        for &i in &part[1..] {
            dirs.push(sub(&pts[i], &pts[part[0]]));
        }
    }
    dirs
}

/// Width of affinely independent points: the smallest distance between the
/// affine hulls of two complementary nonempty parts.
pub fn simplex_width(pts: &[Vec<f64>]) -> Result<f64> {
    let s = pts.len();
    if s < 2 {
        return Err(Error::invalid("width needs at least two points"));
    }
    let idx: Vec<usize> = (0..s).collect();
    let mut best = f64::INFINITY;
    for mask in 1..(1usize << (s - 1)) {
        let (plus, minus) = bipartition(&idx, mask);
        let dirs = part_directions(pts, &plus, &minus);
        let gap = sub(&pts[plus[0]], &pts[minus[0]]);
        best = best.min(linalg::distance_to_span(&gap, &dirs)?);
    }
    Ok(best)
}

/// Exact width: the minimum directional width within the affine hull.
///
/// The minimizing direction is normal to a facet of the difference body, so
/// it is orthogonal to the affine directions of two point groups with
/// `dim + 1` points in total. Every such candidate is scanned.
pub fn width(ps: &PointSet) -> Result<f64> {
    if ps.len() < 2 {
        return Err(Error::invalid("width needs at least two points"));
    }
    let q = ps.to_affine_coordinates()?;
    let k = q.dim();
    let pts = q.points();
    if k == 1 {
        return Ok(directional_width(pts, &[1.0]));
    }
    if pts.len() == k + 1 {
        return simplex_width(pts);
    }
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..=k).collect();
    loop {
        for mask in 1..(1usize << k) {
            let (plus, minus) = bipartition(&subset, mask);
            let dirs = part_directions(pts, &plus, &minus);
            let proj = SpanProjector::new(k, &dirs)?;
            if proj.rank() != k - 1 {
                continue;
            }
            let u = &proj.complement()[0];
            best = best.min(directional_width(pts, u));
        }
        if !next_combination(&mut subset, pts.len()) {
            break;
        }
    }
    if !best.is_finite() {
        return Err(Error::Degenerate {
            indices: (0..ps.len()).collect(),
            reason: "no candidate width direction".into(),
        });
    }
    Ok(best)
}

fn affinely_independent(pts: &[Vec<f64>]) -> bool {
    let dirs: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
    match Matrix::from_columns(&dirs) {
        Ok(m) => PivotedQr::new(&m).rank() == dirs.len(),
        Err(_) => false,
    }
}

/// Minimum width over all subsets with at least two points.
///
/// For a simplex this is its width. Otherwise the scan runs over the
/// affinely independent subsets only: the width of any subset is attained
/// by `k + 1` of its points spanning its affine hull, and those points form
/// a simplex of no larger width. Non-simplex inputs with more than
/// `subset_cap` points are rejected.
pub fn minwidth(ps: &PointSet, subset_cap: usize) -> Result<f64> {
    if ps.len() < 2 {
        return Err(Error::invalid("minwidth needs at least two points"));
    }
    if ps.is_simplex() {
        return width(ps);
    }
    if ps.len() > subset_cap {
        return Err(Error::cap(
            "minwidth subset enumeration (points)",
            ps.len() as u128,
            subset_cap as u128,
        ));
    }
    let pts = ps.points();
    let mut best = f64::INFINITY;
    for size in 2..=(ps.dim() + 1).min(ps.len()) {
        for subset in Combinations::new(ps.len(), size) {
            let chosen: Vec<Vec<f64>> = subset.iter().map(|&i| pts[i].clone()).collect();
            if affinely_independent(&chosen) {
                best = best.min(simplex_width(&chosen)?);
            }
        }
    }
    Ok(best)
}

/// Minimum over facets `F` and hull vertices `v` outside `F` of
/// `dist(v, aff F)`.
pub fn vf(p: &Polytope) -> Result<f64> {
    let pts = p.points().points();
    let mut best = f64::INFINITY;
    for f in p.facets() {
        let v0 = &pts[f.vertices[0]];
        let dirs: Vec<Vec<f64>> = f.vertices[1..].iter().map(|&i| sub(&pts[i], v0)).collect();
        let proj = SpanProjector::new(p.dim(), &dirs)?;
        for &v in p.vertices() {
            if !f.vertices.contains(&v) {
                best = best.min(proj.distance(&sub(&pts[v], v0))?);
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::invalid("polytope has no facet with an outside vertex"));
    }
    Ok(best)
}

/// Minimum over nonempty proper faces `F` of the distance from `F` to the
/// convex hull of the remaining vertices.
pub fn facial_distance(p: &Polytope, face_cap: usize) -> Result<f64> {
    let pts = p.points().points();
    let verts = p.vertices();
    if verts.len() < 2 {
        return Err(Error::invalid("facial distance needs at least two vertices"));
    }
    let faces = enumerate_faces_capped(p, face_cap)?;
    let mut best = f64::INFINITY;
    for face in &faces {
        let inside: Vec<Vec<f64>> = face.iter().map(|&i| pts[i].clone()).collect();
        let rest: Vec<Vec<f64>> = verts
            .iter()
            .filter(|v| face.binary_search(v).is_err())
            .map(|&i| pts[i].clone())
            .collect();
        if rest.is_empty() {
            continue;
        }
        best = best.min(polytope_distance(&inside, &rest, DISTANCE_TOL)?);
    }
    Ok(best)
}

/// Corners of an axis-aligned box as `(lo, hi)` per coordinate, if `ps` is
/// exactly the `2^d` corner set of a box with positive side lengths.
pub fn axis_box(ps: &PointSet) -> Option<Vec<(f64, f64)>> {
    let d = ps.dim();
    if d >= usize::BITS as usize - 1 || ps.len() != 1usize << d {
        return None;
    }
    let mut bounds = Vec::with_capacity(d);
    for j in 0..d {
        let lo = ps.points().iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
        let hi = ps.points().iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) || ps.points().iter().any(|p| p[j] != lo && p[j] != hi) {
            return None;
        }
        bounds.push((lo, hi));
    }
    // Distinct points with two values per coordinate, 2^d of them, are the
    // full corner set.
    Some(bounds)
}

/// Closed-form measures of a box with the given side lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxMeasures {
    pub width: f64,
    pub vf: f64,
    pub phi: f64,
    pub diam: f64,
}

impl BoxMeasures {
    /// `phi = 1 / sqrt(sum l_i^-2)` is the distance from a corner to the
    /// hull of the others (attained by the simplex of its neighbours),
    /// `vf = width = min l_i`, `diam = sqrt(sum l_i^2)`.
    pub fn new(sides: &[f64]) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::invalid("box side lengths must be positive and finite"));
        }
        let min = sides.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(BoxMeasures {
            width: min,
            vf: min,
            phi: 1.0 / sides.iter().map(|l| 1.0 / (l * l)).sum::<f64>().sqrt(),
            diam: sides.iter().map(|l| l * l).sum::<f64>().sqrt(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.phi / self.diam
    }
}

/// Facial distance over diameter. Axis-aligned boxes use the closed form.
pub fn kappa(ps: &PointSet) -> Result<f64> {
    if let Some(b) = axis_box(ps) {
        let sides: Vec<f64> = b.iter().map(|(lo, hi)| hi - lo).collect();
        return Ok(BoxMeasures::new(&sides)?.kappa());
    }
    let hull = convex_hull(&full_dimensional(ps)?)?;
    Ok(facial_distance(&hull, FACE_CAP)? / diameter(ps)?)
}

fn full_dimensional(ps: &PointSet) -> Result<PointSet> {
    if ps.affine_dim() < ps.dim() {
        ps.to_affine_coordinates()
    } else {
        Ok(ps.clone())
    }
}

/// Largest `k` such that every `k`-column submatrix has `sigma_k >= 1/tau`.
///
/// Levels are tested upward and the scan stops at the first failing
/// subset; passing at level `k` implies passing at `k - 1` by singular
/// value interlacing.
pub fn robust_kruskal_rank(m: &Matrix, tau: f64) -> Result<usize> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau must be positive"));
    }
    m.check_finite()?;
    if m.cols() > KRUSKAL_MAX_COLS {
        return Err(Error::cap(
            "robust Kruskal rank (columns)",
            m.cols() as u128,
            KRUSKAL_MAX_COLS as u128,
        ));
    }
    let threshold = 1.0 / tau;
    let mut rank = 0;
    for k in 1..=m.cols().min(m.rows()) {
        for subset in Combinations::new(m.cols(), k) {
            if min_singular_value(&m.select_columns(&subset))? < threshold {
                return Ok(rank);
            }
        }
        rank = k;
    }
    Ok(rank)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDistance {
    /// Largest delta for which the property holds for the normalized rows.
    pub delta: f64,
    /// Original row norms (rows are scaled to unit length first).
    pub row_norms: Vec<f64>,
    /// A row `j` and subset `I` attaining `delta`.
    pub witness: Option<(usize, Vec<usize>)>,
}

/// Minimum over rows `a_j` and subsets `I` with `a_j` outside `span(a_I)` of
/// `dist(a_j, span(a_I))`, after normalizing rows.
///
/// Distances only shrink as `I` grows, and any admissible `I` extends to
/// `r - 1` independent rows (`r` the rank) that still miss `a_j`, so only
/// those subsets are scanned.
pub fn delta_distance(m: &Matrix) -> Result<DeltaDistance> {
    m.check_finite()?;
    if m.rows() > DELTA_MAX_ROWS {
        return Err(Error::cap(
            "delta-distance rows",
            m.rows() as u128,
            DELTA_MAX_ROWS as u128,
        ));
    }
    let mut rows = m.row_vectors();
    let mut row_norms = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter_mut().enumerate() {
        let n = linalg::norm(r);
        if n == 0.0 {
            return Err(Error::invalid(format!("row {i} is zero")));
        }
        r.iter_mut().for_each(|v| *v /= n);
        row_norms.push(n);
    }
    let dim = m.cols();
    let rank = PivotedQr::new(&Matrix::from_columns(&rows)?).rank();
    let mut best = f64::INFINITY;
    let mut witness = None;
    for j in 0..rows.len() {
        let others: Vec<usize> = (0..rows.len()).filter(|&i| i != j).collect();
        for pick in Combinations::new(others.len(), rank - 1) {
            let subset: Vec<usize> = pick.iter().map(|&p| others[p]).collect();
            let basis: Vec<Vec<f64>> = subset.iter().map(|&i| rows[i].clone()).collect();
            let proj = SpanProjector::new(dim, &basis)?;
            if proj.rank() != rank - 1 {
                continue;
            }
            let mut with_j = basis;
            with_j.push(rows[j].clone());
            if PivotedQr::new(&Matrix::from_columns(&with_j)?).rank() != rank {
                continue;
            }
            let dist = proj.raw_distance(&rows[j]);
            if dist < best {
                best = dist;
                witness = Some((j, subset));
            }
        }
    }
    Ok(DeltaDistance {
        delta: best,
        row_norms,
        witness,
    })
}

/// Alon-Vu lower estimate `2^(d-1) / d^(d/2)` on the vertex-facet distance
/// of their 0-1 simplex; only meaningful for that construction.
pub fn alon_vu_lower_bound(d: usize) -> f64 {
    let d = d as f64;
    2f64.powf(d - 1.0) / d.powf(d / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Convex hull, face enumeration and Wolfe distances.
    Hull,
    /// Closed form for axis-aligned boxes.
    BoxOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hull => "hull",
            Method::BoxOracle => "box",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "hull" => Some(Method::Hull),
            "box" => Some(Method::BoxOracle),
            _ => None,
        }
    }
}

/// Which measures to compute, and the enumeration guards.
#[derive(Debug, Clone, Copy)]
pub struct MeasureOptions {
    pub width: bool,
    pub minwidth: bool,
    pub vf: bool,
    pub phi: bool,
    pub subset_cap: usize,
    pub face_cap: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            width: true,
            minwidth: true,
            vf: true,
            phi: true,
            subset_cap: MINWIDTH_SUBSET_CAP,
            face_cap: FACE_CAP,
        }
    }
}

/// Measures of one point set. `pwidth` is reported equal to `phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub width: Option<f64>,
    pub minwidth: Option<f64>,
    pub phi: Option<f64>,
    pub pwidth: Option<f64>,
    pub vf: Option<f64>,
    pub diam: f64,
    pub kappa: Option<f64>,
    pub simplex: bool,
    pub method: Method,
    pub notes: Vec<String>,
}

/// Column order of [`MeasureReport::to_csv_row`]. Missing values are `NA`.
pub const MEASURE_CSV_HEADER: &str = "width,minwidth,phi,pwidth,vf,diam,kappa,simplex,method";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::invalid(format!("bad number {s:?}")))
}

impl MeasureReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_opt(self.width),
            fmt_opt(self.minwidth),
            fmt_opt(self.phi),
            fmt_opt(self.pwidth),
            fmt_opt(self.vf),
            self.diam,
            fmt_opt(self.kappa),
            self.simplex,
            self.method.as_str()
        )
    }

    /// Inverse of [`MeasureReport::to_csv_row`]; notes are not part of the
    /// row and come back empty.
    pub fn from_csv_row(row: &str) -> Result<Self> {
        let f: Vec<&str> = row.trim().split(',').collect();
        if f.len() != 9 {
            return Err(Error::invalid(format!("expected 9 fields, found {}", f.len())));
        }
        Ok(MeasureReport {
            width: parse_opt(f[0])?,
            minwidth: parse_opt(f[1])?,
            phi: parse_opt(f[2])?,
            pwidth: parse_opt(f[3])?,
            vf: parse_opt(f[4])?,
            diam: parse_opt(f[5])?.ok_or_else(|| Error::invalid("diam is required"))?,
            kappa: parse_opt(f[6])?,
            simplex: f[7]
                .parse()
                .map_err(|_| Error::invalid(format!("bad flag {:?}", f[7])))?,
            method: Method::parse(f[8]).ok_or_else(|| Error::invalid(format!("bad method {:?}", f[8])))?,
            notes: Vec::new(),
        })
    }

    /// One `key=value` per line, followed by `note=` lines.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in [
            ("width", fmt_opt(self.width)),
            ("minwidth", fmt_opt(self.minwidth)),
            ("phi", fmt_opt(self.phi)),
            ("pwidth", fmt_opt(self.pwidth)),
            ("vf", fmt_opt(self.vf)),
            ("diam", format!("{}", self.diam)),
            ("kappa", fmt_opt(self.kappa)),
            ("simplex", self.simplex.to_string()),
            ("method", self.method.as_str().to_string()),
        ] {
            let _ = writeln!(out, "{k}={v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note={n}");
        }
        out
    }

    /// `minwidth <= phi <= vf` wherever both sides are present, with
    /// `slack * max(1, |rhs|)` allowance.
    pub fn check_chain(&self, slack: f64) -> Result<()> {
        let le = |a: Option<f64>, b: Option<f64>, what: &str| match (a, b) {
            (Some(a), Some(b)) if a > b + slack * b.abs().max(1.0) => {
                Err(Error::InvariantViolated(format!("{what}: {a} > {b}")))
            }
            _ => Ok(()),
        };
        le(self.minwidth, self.phi, "minwidth <= phi")?;
        le(self.phi, self.vf, "phi <= vf")?;
        le(self.minwidth, self.vf, "minwidth <= vf")
    }
}

/// Computes the selected measures. Boxes go to the closed form; everything
/// else goes through the convex hull of the points (in affine coordinates
/// when they are not full-dimensional).
pub fn measure_report(ps: &PointSet, opts: &MeasureOptions) -> Result<MeasureReport> {
    let diam = diameter(ps)?;
    let simplex = ps.is_simplex();
    let mut notes = Vec::new();
    if let Some(b) = axis_box(ps) {
        let sides: Vec<f64> = b.iter().map(|(lo, hi)| hi - lo).collect();
        let m = BoxMeasures::new(&sides)?;
        let minwidth = if opts.minwidth && ps.len() <= opts.subset_cap {
            Some(minwidth(ps, opts.subset_cap)?)
        } else {
            if opts.minwidth {
                notes.push(format!(
                    "minwidth skipped: {} corners exceed the subset cap {}",
                    ps.len(),
                    opts.subset_cap
                ));
            }
            None
        };
        notes.push("axis-aligned box: closed-form width, vf and phi".into());
        let phi = opts.phi.then_some(m.phi);
        return Ok(MeasureReport {
            width: opts.width.then_some(m.width),
            minwidth,
            phi,
            pwidth: phi,
            vf: opts.vf.then_some(m.vf),
            diam,
            kappa: phi.map(|p| p / diam),
            simplex,
            method: Method::BoxOracle,
            notes,
        });
    }

    let width_v = if opts.width { Some(width(ps)?) } else { None };
    let minwidth_v = if !opts.minwidth {
        None
    } else if simplex {
        notes.push("simplex: minwidth equals width".into());
        Some(match width_v {
            Some(w) => w,
            None => width(ps)?,
        })
    } else {
        Some(minwidth(ps, opts.subset_cap)?)
    };
    let (vf_v, phi_v) = if opts.vf || opts.phi {
        let full = full_dimensional(ps)?;
        let hull = convex_hull(&full)?;
        (
            if opts.vf { Some(vf(&hull)?) } else { None },
            if opts.phi {
                Some(facial_distance(&hull, opts.face_cap)?)
            } else {
                None
            },
        )
    } else {
        (None, None)
    };
    Ok(MeasureReport {
        width: width_v,
        minwidth: minwidth_v,
        phi: phi_v,
        pwidth: phi_v,
        vf: vf_v,
        diam,
        kappa: phi_v.map(|p| p / diam),
        simplex,
        method: Method::Hull,
        notes,
    })
}
