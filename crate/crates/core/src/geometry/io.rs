//! Plain-text vertex files: one point per line, whitespace-separated
//! decimal floats, `#` starts a comment. The dimension is taken from the
//! first data line.

use std::fmt::Write as _;
use std::path::Path;

use super::PointSet;
use crate::error::{Error, Result};

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut p = Vec::new();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("not a number: {tok:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("non-finite value {tok:?}"),
                });
            }
            p.push(v);
        }
        if let Some(first) = points.first() {
            if first.len() != p.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {} coordinates, found {}", first.len(), p.len()),
                });
            }
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no points in file".into(),
        });
    }
    Ok(points)
}

pub fn parse_point_set(text: &str) -> Result<PointSet> {
    PointSet::new(parse_points(text)?)
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<PointSet> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_point_set(&text)
}

/// Inverse of [`parse_points`]; floats use the shortest round-trip form.
pub fn format_points(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let line: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Corners of `[0, 1]^d`, in binary counting order.
pub fn cube_points(d: usize) -> PointSet {
    let pts = (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|b| if mask & (1 << b) != 0 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    PointSet::new(pts).expect("cube corners are distinct")
}
