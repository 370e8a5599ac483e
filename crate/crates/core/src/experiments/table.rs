//! Trial tables, their summaries, and the CSV formats both are stored in.
//!
//! Trials CSV: optional `#` comment lines, then the header
//! `trial,d,n,seed,attempts,label,<columns...>` and one row per trial.
//! Missing values are written `NA`; floats use the shortest representation
//! that parses back to the same value.
//!
//! Summary CSV: header `section,d,column,measure,value`. `group` rows hold
//! the per-`d` column summaries, `slope` rows the fits of the log of the
//! median and of the lower quartile against `d` (`d` is `NA` there).

use std::fmt::Write as _;

use super::stats::{log_slope, ColumnSummary, SlopeFit};
use crate::error::{Error, Result};

pub const TRIAL_KEY_COLUMNS: [&str; 6] = ["trial", "d", "n", "seed", "attempts", "label"];
pub const SUMMARY_HEADER: &str = "section,d,column,measure,value";

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    /// Group key of the row, the dimension for every built-in experiment.
    pub d: usize,
    pub n: usize,
    /// Seed of the substream that produced the row.
    pub seed: u64,
    /// Draws used, including resamples after degenerate draws.
    pub attempts: u32,
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub columns: Vec<String>,
    pub records: Vec<TrialRecord>,
}

pub fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v}")
    }
}

fn parse_value(s: &str, line: usize) -> Result<f64> {
    if s == "NA" {
        return Ok(f64::NAN);
    }
    s.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("bad number {s:?}"),
    })
}

fn parse_int<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} {s:?}"),
    })
}

impl TrialTable {
    pub fn new(columns: &[&str]) -> Self {
        TrialTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            records: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.records.iter().map(|r| r.values[j]).collect())
    }

    pub fn header(&self) -> String {
        let mut h: Vec<&str> = TRIAL_KEY_COLUMNS.to_vec();
        h.extend(self.columns.iter().map(String::as_str));
        h.join(",")
    }

    /// Rows sorted by `(d, trial)`, the order every aggregate is folded in.
    pub fn sort(&mut self) {
        self.records.sort_by_key(|r| (r.d, r.trial));
    }

    /// Concatenation of tables with identical headers, sorted.
    pub fn merge(tables: Vec<TrialTable>) -> Result<TrialTable> {
        let mut it = tables.into_iter();
        let mut out = it.next().ok_or_else(|| Error::invalid("no tables to merge"))?;
        for t in it {
            if t.columns != out.columns {
                return Err(Error::invalid(format!(
                    "header mismatch: {:?} vs {:?}",
                    out.header(),
                    t.header()
                )));
            }
            out.records.extend(t.records);
        }
        out.sort();
        for w in out.records.windows(2) {
            if (w[0].d, w[0].trial) == (w[1].d, w[1].trial) {
                return Err(Error::invalid(format!(
                    "trial {} of group d={} appears twice",
                    w[0].trial, w[0].d
                )));
            }
        }
        Ok(out)
    }

    /// CSV text; each `comments` entry becomes one `# ` line.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.header());
        for r in &self.records {
            let _ = write!(s, "{},{},{},{},{},{}", r.trial, r.d, r.n, r.seed, r.attempts, r.label);
            for v in &r.values {
                let _ = write!(s, ",{}", fmt_value(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<TrialTable> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: "missing header".into(),
        })?;
        let names: Vec<&str> = header.split(',').collect();
        if names.len() < TRIAL_KEY_COLUMNS.len() || names[..6] != TRIAL_KEY_COLUMNS {
            return Err(Error::Parse {
                line: hline,
                message: format!("header must start with {}", TRIAL_KEY_COLUMNS.join(",")),
            });
        }
        let mut table = TrialTable::new(&names[6..]);
        for (line, row) in lines {
            let f: Vec<&str> = row.split(',').collect();
            if f.len() != names.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, got {}", names.len(), f.len()),
                });
            }
            table.records.push(TrialRecord {
                trial: parse_int(f[0], line, "trial")?,
                d: parse_int(f[1], line, "d")?,
                n: parse_int(f[2], line, "n")?,
                seed: parse_int(f[3], line, "seed")?,
                attempts: parse_int(f[4], line, "attempts")?,
                label: f[5].to_string(),
                values: f[6..]
                    .iter()
                    .map(|v| parse_value(v, line))
                    .collect::<Result<_>>()?,
            });
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub d: usize,
    pub column: String,
    pub stats: ColumnSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeSummary {
    pub column: String,
    /// Which per-group quantile was fitted: `median` or `q25`.
    pub of: &'static str,
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
    pub slopes: Vec<SlopeSummary>,
}

impl Summary {
    pub fn group(&self, d: usize, column: &str) -> Option<&ColumnSummary> {
        self.groups
            .iter()
            .find(|g| g.d == d && g.column == column)
            .map(|g| &g.stats)
    }

    pub fn slope(&self, column: &str, of: &str) -> Option<&SlopeFit> {
        self.slopes
            .iter()
            .find(|s| s.column == column && s.of == of)
            .map(|s| &s.fit)
    }

    /// `(d, value)` pairs of one per-group measure, for plot data.
    pub fn series(&self, column: &str, measure: &str) -> Vec<(usize, f64)> {
        self.groups
            .iter()
            .filter(|g| g.column == column)
            .filter_map(|g| g.stats.get(measure).map(|v| (g.d, v)))
            .collect()
    }

    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut s = String::new();
        for c in comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{SUMMARY_HEADER}");
        for g in &self.groups {
            for m in ColumnSummary::MEASURES {
                let v = g.stats.get(m).expect("known measure");
                let _ = writeln!(s, "group,{},{},{m},{}", g.d, g.column, fmt_value(v));
            }
        }
        for sl in &self.slopes {
            let f = &sl.fit;
            for (m, v) in [
                ("slope", f.slope),
                ("std_error", f.std_error),
                ("ci_low", f.ci_low),
                ("ci_high", f.ci_high),
                ("points", f.points as f64),
            ] {
                let _ = writeln!(s, "slope,NA,{},{}.{m},{}", sl.column, sl.of, fmt_value(v));
            }
        }
        s
    }

    /// Aligned plain-text rendering of the medians and slope fits.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>4}  {:<16} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}",
            "d", "column", "count", "mean", "min", "q25", "median", "max"
        );
        for g in &self.groups {
            let st = &g.stats;
            let _ = writeln!(
                s,
                "{:>4}  {:<16} {:>6} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
                g.d, g.column, st.count, st.mean, st.min, st.q25, st.median, st.max
            );
        }
        if !self.slopes.is_empty() {
            s.push('\n');
            for sl in &self.slopes {
                let f = &sl.fit;
                let _ = writeln!(
                    s,
                    "slope of ln {}({}) vs d: {:.5} (se {:.5}, 95% CI [{:.5}, {:.5}], {} points)",
                    sl.of, sl.column, f.slope, f.std_error, f.ci_low, f.ci_high, f.points
                );
            }
        }
        s
    }
}

/// Per-`d` summaries of every column, and log-slope fits of the median and
/// lower quartile wherever at least three groups have positive values.
pub fn summarize(table: &TrialTable) -> Summary {
    let mut t = table.clone();
    t.sort();
    let mut ds: Vec<usize> = t.records.iter().map(|r| r.d).collect();
    ds.dedup();
    let mut groups = Vec::new();
    for &d in &ds {
        let rows: Vec<&TrialRecord> = t.records.iter().filter(|r| r.d == d).collect();
        for (j, col) in t.columns.iter().enumerate() {
            let vals: Vec<f64> = rows.iter().map(|r| r.values[j]).collect();
            if let Some(stats) = ColumnSummary::from_values(&vals) {
                groups.push(GroupSummary {
                    d,
                    column: col.clone(),
                    stats,
                });
            }
        }
    }
    let mut slopes = Vec::new();
    if ds.len() >= 3 {
        for col in &t.columns {
            for of in ["median", "q25"] {
                let pts: Vec<(f64, f64)> = groups
                    .iter()
                    .filter(|g| &g.column == col)
                    .map(|g| (g.d as f64, g.stats.get(of).expect("known measure")))
                    .collect();
                if pts.len() < 3 {
                    continue;
                }
                let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
                if let Ok(fit) = log_slope(&xs, &ys) {
                    slopes.push(SlopeSummary {
                        column: col.clone(),
                        of,
                        fit,
                    });
                }
            }
        }
    }
    Summary { groups, slopes }
}
