//! Quantiles, column summaries and log-linear slope fits.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Linear-interpolation quantile of sorted data (the "type 7" rule:
/// position `(n - 1) p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summary of the finite entries of one column. For 0/1 pass flags the mean
/// is the passing fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl ColumnSummary {
    /// `None` when no entry is finite. The mean is summed in input order.
    pub fn from_values(values: &[f64]) -> Option<ColumnSummary> {
        let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return None;
        }
        let mean = finite.iter().sum::<f64>() / finite.len() as f64;
        let mut sorted = finite;
        sorted.sort_by(f64::total_cmp);
        Some(ColumnSummary {
            count: sorted.len(),
            mean,
            min: sorted[0],
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }

    pub fn get(&self, measure: &str) -> Option<f64> {
        Some(match measure {
            "count" => self.count as f64,
            "mean" => self.mean,
            "min" => self.min,
            "q25" => self.q25,
            "median" => self.median,
            "q75" => self.q75,
            "max" => self.max,
            _ => return None,
        })
    }

    pub const MEASURES: [&'static str; 7] = ["count", "mean", "min", "q25", "median", "q75", "max"];
}

/// Ordinary least squares `y = intercept + slope x` with a two-sided 95%
/// Student-t interval on the slope.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn excludes_zero(&self) -> bool {
        self.ci_high < 0.0 || self.ci_low > 0.0
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let k = xs.len();
    if k != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: ys.len(),
        });
    }
    if k < 3 {
        return Err(Error::invalid(format!("slope fit needs at least 3 points, got {k}")));
    }
    let mx = xs.iter().sum::<f64>() / k as f64;
    let my = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::invalid("slope fit needs distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let df = (k - 2) as f64;
    let std_error = (sse / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::invalid(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        std_error,
        ci_low: slope - t * std_error,
        ci_high: slope + t * std_error,
        points: k,
    })
}

/// Fit of `ln y` against `x`; every `y` must be positive.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if let Some(bad) = ys.iter().find(|&&y| !(y > 0.0 && y.is_finite())) {
        return Err(Error::invalid(format!("log fit of non-positive value {bad}")));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(xs, &logs)
}

/// Standard error of a Monte Carlo proportion.
pub fn binomial_se(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn summary_skips_missing_values() {
        let s = ColumnSummary::from_values(&[f64::NAN, 3.0, 1.0]).unwrap();
        assert_eq!(s.count, 2);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.median, 2.0);
        assert!(ColumnSummary::from_values(&[f64::NAN]).is_none());
    }

    #[test]
    fn single_value_summary_is_constant() {
        let s = ColumnSummary::from_values(&[0.25]).unwrap();
        for m in ColumnSummary::MEASURES.iter().skip(1) {
            assert_eq!(s.get(m), Some(0.25));
        }
    }

    #[test]
    fn exact_line_has_zero_error() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(f.slope, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.intercept, 0.5, epsilon = 1e-13);
        assert!(f.std_error < 1e-13);
        assert!(f.excludes_zero());
    }

    #[test]
    fn slope_standard_error_matches_textbook_example() {
        // Noisy line around y = x; the textbook formulas recomputed inline.
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.1, 0.9, 2.1, 2.9, 4.1];
        let f = linear_fit(&xs, &ys).unwrap();
        let mx = 2.0;
        let my = ys.iter().sum::<f64>() / 5.0;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
        let sse: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - (my - slope * mx) - slope * x).powi(2))
            .sum();
        assert_abs_diff_eq!(f.slope, slope, epsilon = 1e-14);
        assert_abs_diff_eq!(f.std_error, (sse / 3.0 / sxx).sqrt(), epsilon = 1e-14);
        // t_{0.975, 3} = 3.182446...
        assert_abs_diff_eq!(f.ci_high - f.slope, 3.182446305 * f.std_error, epsilon = 1e-8);
    }

    #[test]
    fn fits_reject_bad_input() {
        assert!(linear_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(log_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
    }
}
