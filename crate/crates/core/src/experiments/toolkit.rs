//! Monte Carlo checks of the Gaussian tail and comparison inequalities used
//! by the smoothed analysis: uniform marginals of sphere projections,
//! chi-square tails, noncentral versus central tails and their ratio form,
//! the one-dimensional shift comparison, and boundary layers of boxes.
//!
//! Every check reports one statistic, one threshold and passes when the
//! statistic is at most the threshold. Monte Carlo thresholds already carry
//! a three-standard-error slack.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::rng::{gaussian_vector, RngStream};
use super::stats::binomial_se;
use crate::linalg::norm;

/// Samples for the marginal CDF checks.
pub const KS_SAMPLES: usize = 100_000;
/// Largest Kolmogorov-Smirnov distance accepted.
pub const KS_TOLERANCE: f64 = 0.02;
/// Samples for the chi-square tail checks.
pub const TAIL_SAMPLES: usize = 1_000_000;
/// Samples per side for the two-sample comparisons.
pub const COMPARISON_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ToolkitCheck {
    /// `family:key=value:...`, no commas or spaces.
    pub label: String,
    /// Dimension or degrees of freedom of the check.
    pub dim: usize,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ToolkitCheck {
    fn new(label: String, dim: usize, statistic: f64, threshold: f64) -> Self {
        ToolkitCheck {
            label,
            dim,
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }
}

fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Norm of the first `d - 2` coordinates of a uniform unit vector in `R^d`
/// against the CDF `t^(d-2)`.
pub fn archimedes_check<R: Rng + ?Sized>(d: usize, samples: usize, rng: &mut R) -> ToolkitCheck {
    assert!(d >= 3);
    let mut r: Vec<f64> = (0..samples)
        .map(|_| {
            let g = gaussian_vector(d, rng);
            norm(&g[..d - 2]) / norm(&g)
        })
        .collect();
    let k = (d - 2) as i32;
    let ks = ks_distance(&mut r, |t| t.clamp(0.0, 1.0).powi(k));
    ToolkitCheck::new(format!("archimedes:d={d}"), d, ks, KS_TOLERANCE)
}

/// Upper and lower tails of `Z = sum alpha_i (X_i^2 - 1)` at each `t`.
pub fn laurent_checks<R: Rng + ?Sized>(
    name: &str,
    alpha: &[f64],
    ts: &[f64],
    samples: usize,
    rng: &mut R,
) -> Vec<ToolkitCheck> {
    let a2 = norm(alpha);
    let ainf = alpha.iter().copied().fold(0.0, f64::max);
    let z: Vec<f64> = (0..samples)
        .map(|_| {
            alpha
                .iter()
                .map(|a| {
                    let x = std_normal(rng);
                    a * (x * x - 1.0)
                })
                .sum()
        })
        .collect();
    let mut out = Vec::new();
    for &t in ts {
        let hi = 2.0 * a2 * t.sqrt() + 2.0 * ainf * t;
        let lo = -2.0 * a2 * t.sqrt();
        let upper = z.iter().filter(|&&v| v >= hi).count() as f64 / samples as f64;
        let lower = z.iter().filter(|&&v| v <= lo).count() as f64 / samples as f64;
        let bound = (-t).exp();
        out.push(ToolkitCheck::new(
            format!("laurent_upper:{name}:t={t}"),
            alpha.len(),
            upper,
            bound + 3.0 * binomial_se(upper, samples),
        ));
        out.push(ToolkitCheck::new(
            format!("laurent_lower:{name}:t={t}"),
            alpha.len(),
            lower,
            bound + 3.0 * binomial_se(lower, samples),
        ));
    }
    out
}

fn tail_fraction(values: &[f64], level: f64) -> f64 {
    values.iter().filter(|&&v| v >= level).count() as f64 / values.len() as f64
}

fn sum_squares<R: Rng + ?Sized>(k: usize, mu: f64, samples: usize, rng: &mut R) -> Vec<f64> {
    (0..samples)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let y = mu + std_normal(rng);
                    y * y
                })
                .sum()
        })
        .collect()
}

/// `P(sum X_i^2 >= t^2) <= P(sum Y_i^2 >= t^2)` with `X_i ~ N(0,1)`,
/// `Y_i ~ N(mu,1)`, `k` terms, at the squared levels `t2s`. With `mu = 0`
/// both sides reuse one stream and must agree exactly.
pub fn noncentral_checks<R: Rng + ?Sized>(
    k: usize,
    mu: f64,
    t2s: &[f64],
    samples: usize,
    rng: &mut R,
) -> Vec<ToolkitCheck> {
    let central = sum_squares(k, 0.0, samples, rng);
    let shifted = if mu == 0.0 {
        central.clone()
    } else {
        sum_squares(k, mu, samples, rng)
    };
    t2s.iter()
        .map(|&t2| {
            let (pc, pn) = (tail_fraction(&central, t2), tail_fraction(&shifted, t2));
            let slack = if mu == 0.0 {
                0.0
            } else {
                3.0 * (binomial_se(pc, samples).powi(2) + binomial_se(pn, samples).powi(2)).sqrt()
            };
            ToolkitCheck::new(format!("noncentral:k={k}:mu={mu}:t2={t2}"), k, pc - pn, slack)
        })
        .collect()
}

/// `P(Y_0^2 / (Y_0^2 + sum Y_i^2) >= t^2) <= P(X_0^2 / (X_0^2 + sum X_i^2) >= t^2)`
/// with `Y_0` centered and `Y_1..Y_k` of mean `mu`.
pub fn ratio_checks<R: Rng + ?Sized>(
    k: usize,
    mu: f64,
    ts: &[f64],
    samples: usize,
    rng: &mut R,
) -> Vec<ToolkitCheck> {
    let mut ratio = |shift: f64| -> Vec<f64> {
        (0..samples)
            .map(|_| {
                let y0 = std_normal(rng);
                let rest: f64 = (0..k)
                    .map(|_| {
                        let y = shift + std_normal(rng);
                        y * y
                    })
                    .sum();
                y0 * y0 / (y0 * y0 + rest)
            })
            .collect()
    };
    let central = ratio(0.0);
    let shifted = ratio(mu);
    ts.iter()
        .map(|&t| {
            let (pc, pn) = (tail_fraction(&central, t * t), tail_fraction(&shifted, t * t));
            let slack =
                3.0 * (binomial_se(pc, samples).powi(2) + binomial_se(pn, samples).powi(2)).sqrt();
            ToolkitCheck::new(format!("ratio:k={k}:mu={mu}:t={t}"), k + 1, pn - pc, slack)
        })
        .collect()
}

/// `P(|Y| < t) <= P(|X| < t)` for `X ~ N(0,1)`, `Y ~ N(c,1)`.
pub fn shift_checks<R: Rng + ?Sized>(
    c: f64,
    ts: &[f64],
    samples: usize,
    rng: &mut R,
) -> Vec<ToolkitCheck> {
    let x: Vec<f64> = (0..samples).map(|_| std_normal(rng).abs()).collect();
    let y: Vec<f64> = (0..samples).map(|_| (c + std_normal(rng)).abs()).collect();
    ts.iter()
        .map(|&t| {
            let frac = |v: &[f64]| v.iter().filter(|&&a| a < t).count() as f64 / samples as f64;
            let (px, py) = (frac(&x), frac(&y));
            let slack =
                3.0 * (binomial_se(px, samples).powi(2) + binomial_se(py, samples).powi(2)).sqrt();
            ToolkitCheck::new(format!("shift:c={c}:t={t}"), 1, py - px, slack)
        })
        .collect()
}

/// Gaussian measure of the boundary layer `[-a,a]^d \ [-a+e,a-e]^d` for
/// increasing `e`, estimated on one shared sample. The statistic is the
/// largest decrease between consecutive layers, so nesting forces it to 0.
/// The layer measures divided by `e d^(1/4)` are returned alongside.
pub fn box_layer_check<R: Rng + ?Sized>(
    d: usize,
    a: f64,
    eps: &[f64],
    samples: usize,
    rng: &mut R,
) -> (ToolkitCheck, Vec<f64>) {
    let depth: Vec<f64> = (0..samples)
        .map(|_| {
            // Distance from the sample to the complement of the box, or a
            // negative number when outside.
            (0..d)
                .map(|_| a - std_normal(rng).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let layers: Vec<f64> = eps
        .iter()
        .map(|&e| depth.iter().filter(|&&h| h >= 0.0 && h < e).count() as f64 / samples as f64)
        .collect();
    let worst_drop = layers
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max);
    let scale = (d as f64).powf(0.25);
    let ratios = layers.iter().zip(eps).map(|(g, e)| g / (e * scale)).collect();
    (
        ToolkitCheck::new(format!("box_layer:d={d}:a={a}"), d, worst_drop, 0.0),
        ratios,
    )
}

/// Runs every check on fixed grids, each family on its own substream.
pub fn stats_toolkit_checks(stream: &RngStream) -> Vec<ToolkitCheck> {
    let jobs: Vec<Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<ToolkitCheck> + Sync>> = vec![
        Box::new(|r| vec![archimedes_check(6, KS_SAMPLES, r)]),
        Box::new(|r| vec![archimedes_check(4, KS_SAMPLES, r)]),
        Box::new(|r| laurent_checks("ones5", &[1.0; 5], &[0.5, 1.0, 2.0, 4.0], TAIL_SAMPLES, r)),
        Box::new(|r| {
            let alpha: Vec<f64> = (1..=5).map(|i| i as f64 / 5.0).collect();
            laurent_checks("ramp5", &alpha, &[0.5, 1.0, 2.0, 4.0], TAIL_SAMPLES, r)
        }),
        Box::new(|r| {
            let mut out = Vec::new();
            for k in [3usize, 8] {
                let kf = k as f64;
                let grid = [0.5 * kf, kf, 2.0 * kf, 3.0 * kf];
                for mu in [0.0, 0.5, 1.0, 2.0] {
                    out.extend(noncentral_checks(k, mu, &grid, COMPARISON_SAMPLES, r));
                }
            }
            out
        }),
        Box::new(|r| {
            let mut out = Vec::new();
            for k in [3usize, 8] {
                for mu in [0.5, 1.0, 2.0] {
                    out.extend(ratio_checks(k, mu, &[0.3, 0.5, 0.7], COMPARISON_SAMPLES, r));
                }
            }
            out
        }),
        Box::new(|r| {
            let mut out = Vec::new();
            for c in [0.5, 1.0, 2.0] {
                out.extend(shift_checks(c, &[0.5, 1.0, 2.0], COMPARISON_SAMPLES, r));
            }
            out
        }),
        Box::new(|r| {
            [2usize, 8]
                .iter()
                .map(|&d| box_layer_check(d, 1.0, &[0.05, 0.1, 0.2, 0.4], COMPARISON_SAMPLES, r).0)
                .collect()
        }),
    ];
    let results: Vec<Vec<ToolkitCheck>> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, job)| job(&mut stream.rng(i as u64, 0)))
        .collect();
    results.into_iter().flatten().collect()
}
