//! Single-trial routines and the runners that map them over seeded
//! substreams.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::mc::{
    band_pair_measure_check, band_union_bound, band_union_volume, gaussian_points,
    min_submatrix_sigma, SubsetMode,
};
use super::rng::{gaussian_vector, rng_from_seed, split, unit_vector, RngStream};
use super::table::{TrialRecord, TrialTable};
use super::toolkit::stats_toolkit_checks;
use crate::conditioning::{facial_distance, kappa, measure_report, vf, MeasureOptions, FACE_CAP};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, diameter, simplex_centroid_ball, PointSet};
use crate::linalg::{self, min_singular_value, one_off_distance, Matrix};
use crate::solvers::{
    frank_wolfe, vertex_weights, wolfe_mnp, FwOptions, QuadraticObjective, RunTrace, Variant,
};

/// Draws per trial before it is recorded as invalid.
pub const MAX_ATTEMPTS: u32 = 10;
/// Largest `d` for which the smoothed-simplex trial also computes the
/// facial distance exactly.
pub const EXACT_PHI_MAX_D: usize = 6;
/// Multiplicative slack of the linear-rate check.
pub const RATE_SLACK: f64 = 1e-6;
/// Absolute slack of the singular-value sandwich check.
pub const SANDWICH_SLACK: f64 = 1e-9;
/// Slack of the `minwidth <= phi <= vf` chain check.
pub const CHAIN_SLACK: f64 = 1e-8;

const SWEEP_SHIFT: u32 = 40;

fn is_degenerate(e: &Error) -> bool {
    matches!(
        e,
        Error::Degenerate { .. } | Error::Singular { .. } | Error::NotSimplicial
    )
}

/// Outcome of [`with_resampling`]: `value` is `None` when every attempt was
/// degenerate.
#[derive(Debug, Clone)]
pub struct Drawn<T> {
    pub value: Option<T>,
    pub attempts: u32,
    pub seed: u64,
}

/// Runs `f` on substream attempts `0, 1, ...` of trial `index` until it
/// returns anything but a degeneracy error, at most [`MAX_ATTEMPTS`] times.
pub fn with_resampling<T>(
    stream: &RngStream,
    index: u64,
    mut f: impl FnMut(&mut ChaCha8Rng) -> Result<T>,
) -> Result<Drawn<T>> {
    for attempt in 0..MAX_ATTEMPTS {
        let seed = stream.seed(index, attempt);
        match f(&mut rng_from_seed(seed)) {
            Ok(v) => {
                return Ok(Drawn {
                    value: Some(v),
                    attempts: attempt + 1,
                    seed,
                })
            }
            Err(e) if is_degenerate(&e) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Drawn {
        value: None,
        attempts: MAX_ATTEMPTS,
        seed: stream.seed(index, MAX_ATTEMPTS - 1),
    })
}

/// Generator for per-trial parameters (dimension, counts) that must not
/// change when the geometric draw is resampled.
pub fn params_rng(stream: &RngStream, index: u64) -> ChaCha8Rng {
    rng_from_seed(split(stream.seed(index, 0), u64::MAX))
}

/// Vertices of a regular simplex inscribed in the unit sphere of `R^d`.
pub fn regular_simplex(d: usize) -> Vec<Vec<f64>> {
    // Helmert coordinates of e_i minus the centroid in R^{d+1}, whose norm
    // sqrt(d / (d + 1)) is scaled away.
    let scale = ((d + 1) as f64 / d as f64).sqrt();
    (0..=d)
        .map(|i| {
            (1..=d)
                .map(|k| {
                    let kf = k as f64;
                    let h = match i.cmp(&k) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -kf,
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    scale * h / (kf * (kf + 1.0)).sqrt()
                })
                .collect()
        })
        .collect()
}

/// `sqrt(2 pi) sigma delta (d + 1)^-2`.
pub fn simplex_width_bound(d: usize, sigma: f64, delta: f64) -> f64 {
    (2.0 * std::f64::consts::PI).sqrt() * sigma * delta / ((d + 1) as f64).powi(2)
}

/// `2 (sigma sqrt(2d + 3 ln((d + 1) / delta)) + 1)`.
pub fn simplex_diameter_bound(d: usize, sigma: f64, delta: f64) -> f64 {
    let d_f = d as f64;
    2.0 * (sigma * (2.0 * d_f + 3.0 * ((d_f + 1.0) / delta).ln()).sqrt() + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexTrial {
    /// Twice the radius of the centroid ball, a lower bound on the width.
    pub minwidth_lb: f64,
    pub diam: f64,
    pub kappa_lb: f64,
    pub phi: Option<f64>,
    pub pass_minwidth: bool,
    pub pass_diam: bool,
}

/// Perturbs the `d + 1` means by `N(0, sigma^2 I)` and measures the simplex.
pub fn smoothed_simplex_trial<R: Rng + ?Sized>(
    d: usize,
    sigma: f64,
    delta: f64,
    means: &[Vec<f64>],
    rng: &mut R,
) -> Result<SimplexTrial> {
    if means.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            got: means.len(),
        });
    }
    let ps = gaussian_points(d, d + 1, Some(means), sigma, rng)?;
    let (_, r) = simplex_centroid_ball(ps.points())?;
    let diam = diameter(&ps)?;
    let phi = if d <= EXACT_PHI_MAX_D {
        Some(facial_distance(&convex_hull(&ps)?, FACE_CAP)?)
    } else {
        None
    };
    Ok(SimplexTrial {
        minwidth_lb: 2.0 * r,
        diam,
        kappa_lb: 2.0 * r / diam,
        phi,
        pass_minwidth: 2.0 * r >= simplex_width_bound(d, sigma, delta),
        pass_diam: diam <= simplex_diameter_bound(d, sigma, delta),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeTrial {
    pub d: usize,
    pub vf: f64,
    pub diam: f64,
    pub facets: usize,
}

/// Hull of `n + 1` standard Gaussian points in `R^d`, `d = floor(delta n)`.
pub fn random_polytope_vf_trial<R: Rng + ?Sized>(
    n: usize,
    delta: f64,
    rng: &mut R,
) -> Result<PolytopeTrial> {
    let d = (delta * n as f64 + 1e-9).floor() as usize;
    if d < 2 {
        return Err(Error::invalid(format!("floor(delta n) = {d} < 2")));
    }
    if d > 10 || n > 24 {
        return Err(Error::invalid(format!("hull limits d <= 10, n <= 24 exceeded: d={d}, n={n}")));
    }
    let ps = gaussian_points(d, n + 1, None, 1.0, rng)?;
    let p = convex_hull(&ps)?;
    Ok(PolytopeTrial {
        d,
        vf: vf(&p)?,
        diam: diameter(&ps)?,
        facets: p.facets().len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCheck {
    /// Largest `h_t / ((1 - mu kappa^2 / 4L)^{G_t} h_0)` along the run.
    pub worst_ratio: f64,
    pub good_steps: usize,
    pub iterations: usize,
    pub converged: bool,
    pub pass: bool,
}

/// Compares every primal gap of a run against the per-good-step contraction
/// `1 - (mu / 4L) kappa^2`.
pub fn rate_check(trace: &RunTrace, f: &QuadraticObjective, fstar: f64, kappa: f64) -> RateCheck {
    let rho = 1.0 - f.mu() / (4.0 * f.lipschitz()) * kappa * kappa;
    let objs = trace.objectives();
    let good = trace.good_step_counts();
    let h0 = objs[0] - fstar;
    let mut worst: f64 = 0.0;
    if h0 > 0.0 {
        for (obj, &g) in objs.iter().zip(&good) {
            worst = worst.max((obj - fstar) / (rho.powi(g as i32) * h0));
        }
    }
    RateCheck {
        worst_ratio: worst,
        good_steps: *good.last().expect("nonempty"),
        iterations: trace.iterations(),
        converged: trace.converged,
        pass: worst <= 1.0 + RATE_SLACK,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRateTrial {
    pub kappa: f64,
    pub fstar: f64,
    pub h0: f64,
    pub away: RateCheck,
    pub pairwise: RateCheck,
}

/// Projection of a Gaussian point `b ~ N(0, 4 I)` onto a Gaussian simplex
/// with away-step and pairwise Frank-Wolfe started at vertex 0, `f*` from
/// Wolfe's algorithm on the shifted vertices.
pub fn linear_rate_trial<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<LinearRateTrial> {
    let ps = gaussian_points(d, d + 1, None, 1.0, rng)?;
    let b = linalg::scale(&gaussian_vector(d, rng), 2.0);
    if !ps.is_simplex() {
        return Err(Error::Degenerate {
            indices: (0..=d).collect(),
            reason: "simplex draw is flat".into(),
        });
    }
    let k = kappa(&ps)?;
    let shifted: Vec<Vec<f64>> = ps.points().iter().map(|p| linalg::sub(p, &b)).collect();
    let fstar = 0.5 * linalg::norm_sq(&wolfe_mnp(&shifted, 1e-12)?.x);
    let f = QuadraticObjective::squared_distance(&b);
    let x0 = vertex_weights(d + 1, 0);
    let opts = FwOptions::default();
    let run = |v| frank_wolfe(v, ps.points(), &f, &x0, &opts);
    let away = run(Variant::Away)?;
    let pairwise = run(Variant::Pairwise)?;
    Ok(LinearRateTrial {
        kappa: k,
        fstar,
        h0: away.trace.initial_objective - fstar,
        away: rate_check(&away.trace, &f, fstar, k),
        pairwise: rate_check(&pairwise.trace, &f, fstar, k),
    })
}

fn columns(e: Experiment) -> &'static [&'static str] {
    match e {
        Experiment::SmoothedSimplex => &[
            "minwidth_lb",
            "diam",
            "kappa_lb",
            "phi",
            "pass_minwidth",
            "pass_diam",
        ],
        Experiment::SigmaDecay => &["min_sigma", "exact", "subsets"],
        Experiment::VfDecay => &["vf", "diam", "facets", "pass_diam"],
        Experiment::BandVolume => &["epsilon", "estimate", "std_error", "bound", "pass"],
        Experiment::BandPair => &[
            "inner", "c_s", "c_t", "epsilon", "estimate", "std_error", "bound", "pass",
        ],
        Experiment::Sandwich => &["one_off", "sigma_min", "pass"],
        Experiment::Chain => &["minwidth", "phi", "vf", "pass"],
        Experiment::LinearRate => &[
            "kappa",
            "fstar",
            "h0",
            "away_good",
            "away_worst",
            "away_pass",
            "pairwise_good",
            "pairwise_worst",
            "pairwise_pass",
        ],
        Experiment::StatsToolkit => &["statistic", "threshold", "pass"],
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// One unit of work: the group key `d`, the trial number and the stream
/// index derived from both.
#[derive(Debug, Clone, Copy)]
struct Unit {
    d: usize,
    trial: u64,
    index: u64,
}

fn units(cfg: &ExperimentConfig) -> Vec<Unit> {
    let trials = cfg.trial_offset..cfg.trial_offset + cfg.trials as u64;
    if cfg.experiment.is_sweep() {
        cfg.dims()
            .flat_map(|d| {
                trials.clone().map(move |t| Unit {
                    d,
                    trial: t,
                    index: ((d as u64) << SWEEP_SHIFT) | t,
                })
            })
            .collect()
    } else {
        trials.map(|t| Unit { d: 0, trial: t, index: t }).collect()
    }
}

fn record(unit: Unit, d: usize, n: usize, drawn: Drawn<Vec<f64>>, width: usize) -> TrialRecord {
    let (label, values) = match drawn.value {
        Some(v) => ("-".to_string(), v),
        None => ("invalid".to_string(), vec![f64::NAN; width]),
    };
    TrialRecord {
        trial: unit.trial,
        d,
        n,
        seed: drawn.seed,
        attempts: drawn.attempts,
        label,
        values,
    }
}

fn run_unit(cfg: &ExperimentConfig, stream: &RngStream, u: Unit) -> Result<TrialRecord> {
    let width = columns(cfg.experiment).len();
    let mut params = params_rng(stream, u.index);
    let mut pick_d = || params.random_range(cfg.d_min..=cfg.d_max);
    match cfg.experiment {
        Experiment::SmoothedSimplex => {
            let means = regular_simplex(u.d);
            let drawn = with_resampling(stream, u.index, |rng| {
                let t = smoothed_simplex_trial(u.d, cfg.sigma, cfg.delta, &means, rng)?;
                Ok(vec![
                    t.minwidth_lb,
                    t.diam,
                    t.kappa_lb,
                    opt(t.phi),
                    flag(t.pass_minwidth),
                    flag(t.pass_diam),
                ])
            })?;
            Ok(record(u, u.d, u.d + 1, drawn, width))
        }
        Experiment::SigmaDecay => {
            let n = cfg.n_for(u.d);
            let mode = if u.d <= cfg.exact_max_d {
                SubsetMode::Exact
            } else {
                SubsetMode::Sampled(cfg.sample_subsets)
            };
            let drawn = with_resampling(stream, u.index, |rng| {
                let data = (0..u.d * n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                let a = Matrix::from_row_major(u.d, n, data)?;
                let s = min_submatrix_sigma(&a, mode, rng)?;
                Ok(vec![s.value, flag(s.exact), s.subsets as f64])
            })?;
            Ok(record(u, u.d, n, drawn, width))
        }
        Experiment::VfDecay => {
            let n = cfg.n_for(u.d);
            let drawn = with_resampling(stream, u.index, |rng| {
                let t = random_polytope_vf_trial(n, cfg.delta, rng)?;
                Ok(vec![
                    t.vf,
                    t.diam,
                    t.facets as f64,
                    flag(t.diam >= (t.d as f64).sqrt()),
                ])
            })?;
            Ok(record(u, u.d, n, drawn, width))
        }
        Experiment::BandVolume => {
            let d = pick_d();
            let n_max = cfg.n.expect("validated");
            let n = params.random_range(cfg.n_min.unwrap_or(d).max(d - 1)..=n_max.max(d - 1));
            let eps = cfg.epsilon.unwrap_or(0.01);
            let drawn = with_resampling(stream, u.index, |rng| {
                let data = (0..d * n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                let a = Matrix::from_row_major(d, n, data)?;
                let est = band_union_volume(&a, eps, cfg.mc_samples, rng)?;
                let bound = band_union_bound(d, n, eps);
                Ok(vec![
                    eps,
                    est.estimate,
                    est.std_error,
                    bound,
                    flag(est.estimate <= bound + 3.0 * est.std_error),
                ])
            })?;
            Ok(record(u, d, n, drawn, width))
        }
        Experiment::BandPair => {
            let d = pick_d();
            let eps = cfg.epsilon.unwrap_or_else(|| params.random_range(0.01..0.5));
            let (c_s, c_t) = (params.random_range(-1.0..1.0), params.random_range(-1.0..1.0));
            let drawn = with_resampling(stream, u.index, |rng| {
                let (a, b) = (unit_vector(d, rng), unit_vector(d, rng));
                let rho = linalg::dot(&a, &b);
                if rho.abs() >= 1.0 - 1e-12 {
                    return Err(Error::Degenerate {
                        indices: vec![0, 1],
                        reason: "parallel band normals".into(),
                    });
                }
                let c = band_pair_measure_check(&a, &b, c_s, c_t, eps, cfg.mc_samples, rng)?;
                Ok(vec![
                    rho,
                    c_s,
                    c_t,
                    eps,
                    c.mc.estimate,
                    c.mc.std_error,
                    c.bound,
                    flag(c.pass),
                ])
            })?;
            Ok(record(u, d, 2, drawn, width))
        }
        Experiment::Sandwich => {
            let n = pick_d();
            let drawn = with_resampling(stream, u.index, |rng| {
                let data = (0..n * n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                let a = Matrix::from_row_major(n, n, data)?;
                let off = one_off_distance(&a)?;
                let s = min_singular_value(&a)?;
                let ok = off / (n as f64).sqrt() <= s + SANDWICH_SLACK && s <= off + SANDWICH_SLACK;
                Ok(vec![off, s, flag(ok)])
            })?;
            Ok(record(u, n, n, drawn, width))
        }
        Experiment::Chain => {
            let d = pick_d();
            let lo = cfg.n_min.unwrap_or(d + 1).max(d + 1);
            let n = params.random_range(lo..=cfg.n.expect("validated").max(lo));
            let drawn = with_resampling(stream, u.index, |rng| {
                let ps = gaussian_points(d, n, None, 1.0, rng)?;
                chain_values(&ps)
            })?;
            Ok(record(u, d, n, drawn, width))
        }
        Experiment::LinearRate => {
            let d = pick_d();
            let drawn = with_resampling(stream, u.index, |rng| {
                let t = linear_rate_trial(d, rng)?;
                Ok(vec![
                    t.kappa,
                    t.fstar,
                    t.h0,
                    t.away.good_steps as f64,
                    t.away.worst_ratio,
                    flag(t.away.pass),
                    t.pairwise.good_steps as f64,
                    t.pairwise.worst_ratio,
                    flag(t.pairwise.pass),
                ])
            })?;
            Ok(record(u, d, d + 1, drawn, width))
        }
        Experiment::StatsToolkit => unreachable!("handled by run_experiment"),
    }
}

fn chain_values(ps: &PointSet) -> Result<Vec<f64>> {
    let r = measure_report(ps, &MeasureOptions::default())?;
    let ok = r.check_chain(CHAIN_SLACK).is_ok();
    Ok(vec![opt(r.minwidth), opt(r.phi), opt(r.vf), flag(ok)])
}

/// Runs every trial of a configuration on the current rayon pool. Rows come
/// back sorted by `(d, trial)` whatever the schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let stream = RngStream::new(cfg.seed);
    let mut table = TrialTable::new(columns(cfg.experiment));
    if cfg.experiment == Experiment::StatsToolkit {
        for (i, c) in stats_toolkit_checks(&stream).into_iter().enumerate() {
            table.records.push(TrialRecord {
                trial: i as u64,
                d: c.dim,
                n: 0,
                seed: cfg.seed,
                attempts: 1,
                label: c.label,
                values: vec![c.statistic, c.threshold, flag(c.pass)],
            });
        }
        table.sort();
        return Ok(table);
    }
    let units = units(cfg);
    table.records = units
        .par_iter()
        .map(|&u| run_unit(cfg, &stream, u))
        .collect::<Result<Vec<_>>>()?;
    table.sort();
    Ok(table)
}

/// Comment lines written at the top of every output file.
pub fn config_comments(cfg: &ExperimentConfig) -> Vec<String> {
    cfg.to_key_value().lines().map(str::to_string).collect()
}
