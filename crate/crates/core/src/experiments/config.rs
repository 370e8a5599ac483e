//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! `experiment` is required; every other key has a per-experiment default
//! (see [`ExperimentConfig::defaults`]). Keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `experiment` | one of [`Experiment::ALL`] |
//! | `seed` | master seed |
//! | `trials` | trials per `d` for sweeps, in total otherwise |
//! | `trial_offset` | index of the first trial, for sharded runs |
//! | `d` | sets `d_min = d_max` |
//! | `d_min`, `d_max` | dimension range |
//! | `n`, `n_min` | point or column count range, where it is free |
//! | `delta` | ratio `d / n`, or the failure probability of the simplex bounds |
//! | `sigma` | perturbation scale |
//! | `epsilon` | band width; unset draws one per trial where allowed |
//! | `mc_samples` | Monte Carlo samples per estimate |
//! | `t` | single tail level overriding the built-in grid |
//! | `exact_max_d` | largest `d` with exact submatrix enumeration |
//! | `sample_subsets` | subsets drawn per matrix above `exact_max_d` |
//! | `output` | output path prefix |

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    SmoothedSimplex,
    SigmaDecay,
    VfDecay,
    BandVolume,
    BandPair,
    Sandwich,
    Chain,
    LinearRate,
    StatsToolkit,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::SmoothedSimplex,
        Experiment::SigmaDecay,
        Experiment::VfDecay,
        Experiment::BandVolume,
        Experiment::BandPair,
        Experiment::Sandwich,
        Experiment::Chain,
        Experiment::LinearRate,
        Experiment::StatsToolkit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SmoothedSimplex => "smoothed_simplex",
            Experiment::SigmaDecay => "sigma_decay",
            Experiment::VfDecay => "vf_decay",
            Experiment::BandVolume => "band_volume",
            Experiment::BandPair => "band_pair",
            Experiment::Sandwich => "sandwich",
            Experiment::Chain => "chain",
            Experiment::LinearRate => "linear_rate",
            Experiment::StatsToolkit => "stats_toolkit",
        }
    }

    /// Sweeps run `trials` trials at every `d` in range; the others run
    /// `trials` trials in total with `d` drawn per trial.
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            Experiment::SmoothedSimplex | Experiment::SigmaDecay | Experiment::VfDecay
        )
    }

    pub fn names() -> String {
        Experiment::ALL.map(Experiment::name).join(", ")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown experiment {s:?}; valid names: {}",
                    Experiment::names()
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub trials: usize,
    pub trial_offset: u64,
    pub d_min: usize,
    pub d_max: usize,
    pub n: Option<usize>,
    pub n_min: Option<usize>,
    pub delta: f64,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub mc_samples: usize,
    pub t: Option<f64>,
    pub exact_max_d: usize,
    pub sample_subsets: usize,
    pub output: Option<String>,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            seed: DEFAULT_SEED,
            trials: 100,
            trial_offset: 0,
            d_min: 2,
            d_max: 5,
            n: None,
            n_min: None,
            delta: 0.5,
            sigma: 0.1,
            epsilon: None,
            mc_samples: 1_000_000,
            t: None,
            exact_max_d: 7,
            sample_subsets: 10_000,
            output: None,
        };
        match experiment {
            Experiment::SmoothedSimplex => ExperimentConfig {
                d_min: 8,
                d_max: 8,
                delta: 0.25,
                trials: 1000,
                ..base
            },
            Experiment::SigmaDecay => ExperimentConfig {
                d_min: 4,
                d_max: 10,
                trials: 200,
                ..base
            },
            Experiment::VfDecay => ExperimentConfig {
                d_min: 3,
                d_max: 8,
                trials: 300,
                ..base
            },
            Experiment::BandVolume => ExperimentConfig {
                n: Some(8),
                epsilon: Some(0.01),
                trials: 50,
                ..base
            },
            Experiment::BandPair => ExperimentConfig { trials: 50, ..base },
            Experiment::Sandwich => ExperimentConfig {
                d_max: 12,
                trials: 1000,
                ..base
            },
            Experiment::Chain => ExperimentConfig {
                n: Some(10),
                trials: 500,
                ..base
            },
            Experiment::LinearRate => ExperimentConfig {
                d_max: 6,
                trials: 100,
                ..base
            },
            Experiment::StatsToolkit => ExperimentConfig {
                trials: 1,
                d_min: 1,
                d_max: 1,
                ..base
            },
        }
    }

    pub fn dims(&self) -> std::ops::RangeInclusive<usize> {
        self.d_min..=self.d_max
    }

    /// `n = ceil(d / delta)`, the count for which `floor(delta n) = d`.
    pub fn n_for(&self, d: usize) -> usize {
        (d as f64 / self.delta - 1e-9).ceil() as usize
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_seed(text, DEFAULT_SEED)
    }

    /// [`parse`](Self::parse) with `seed` used when the text sets none.
    pub fn parse_with_seed(text: &str, seed: u64) -> Result<Self> {
        let mut pairs: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key = value, got {body:?}"),
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if pairs.iter().any(|(_, pk, _)| *pk == k) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key {k:?}"),
                });
            }
            pairs.push((line, k, v));
        }
        let (eline, _, ename) = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .ok_or(Error::Parse {
                line: 0,
                message: "missing key \"experiment\"".into(),
            })?;
        let experiment: Experiment = ename.parse().map_err(|e: Error| Error::Parse {
            line: *eline,
            message: e.to_string(),
        })?;
        let mut c = ExperimentConfig {
            seed,
            ..ExperimentConfig::defaults(experiment)
        };
        for (line, k, v) in &pairs {
            c.set(k, v).map_err(|message| Error::Parse {
                line: *line,
                message,
            })?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse::<T>().map_err(|_| format!("bad value {v:?} for {key}"))
        }
        match key {
            "experiment" => {}
            "seed" => self.seed = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "trial_offset" => self.trial_offset = num(key, value)?,
            "d" => {
                self.d_min = num(key, value)?;
                self.d_max = self.d_min;
            }
            "d_min" => self.d_min = num(key, value)?,
            "d_max" => self.d_max = num(key, value)?,
            "n" => self.n = Some(num(key, value)?),
            "n_min" => self.n_min = Some(num(key, value)?),
            "delta" => self.delta = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "epsilon" => self.epsilon = Some(num(key, value)?),
            "mc_samples" => self.mc_samples = num(key, value)?,
            "t" => self.t = Some(num(key, value)?),
            "exact_max_d" => self.exact_max_d = num(key, value)?,
            "sample_subsets" => self.sample_subsets = num(key, value)?,
            "output" => self.output = Some(value.to_string()),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.trials == 0 || self.mc_samples == 0 || self.sample_subsets == 0 {
            return bad("trials, mc_samples and sample_subsets must be positive".into());
        }
        if self.d_min == 0 || self.d_min > self.d_max {
            return bad(format!("need 0 < d_min <= d_max, got {}..{}", self.d_min, self.d_max));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return bad(format!("epsilon must be nonnegative, got {e}"));
            }
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("t must be positive, got {t}"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.n_min, self.n) {
            if lo > hi {
                return bad(format!("n_min {lo} exceeds n {hi}"));
            }
        }
        match self.experiment {
            Experiment::SigmaDecay | Experiment::VfDecay => {
                for d in self.dims() {
                    let n = self.n_for(d);
                    if ((self.delta * n as f64) + 1e-9).floor() as usize != d || n < d {
                        return bad(format!("no n with floor(delta n) = {d} for delta {}", self.delta));
                    }
                }
                if self.experiment == Experiment::VfDecay {
                    if self.d_min < 2 {
                        return bad("vf_decay needs d >= 2".into());
                    }
                    if self.d_max > 10 || self.n_for(self.d_max) > 24 {
                        return bad("vf_decay is limited to d <= 10 and n <= 24".into());
                    }
                }
            }
            Experiment::SmoothedSimplex | Experiment::LinearRate | Experiment::Chain => {
                if self.d_min < 2 && self.experiment != Experiment::SmoothedSimplex {
                    return bad(format!("{} needs d >= 2", self.experiment));
                }
                if self.experiment == Experiment::Chain && self.n.unwrap_or(0) < self.d_max + 1 {
                    return bad("chain needs n >= d_max + 1".into());
                }
            }
            Experiment::BandVolume => {
                if self.d_min < 2 {
                    return bad("band_volume needs d >= 2".into());
                }
                if self.n.unwrap_or(0) < self.d_max {
                    return bad("band_volume needs n >= d_max".into());
                }
            }
            Experiment::BandPair => {
                if self.d_min < 2 {
                    return bad("band_pair needs d >= 2".into());
                }
            }
            Experiment::Sandwich | Experiment::StatsToolkit => {}
        }
        Ok(())
    }

    /// Every resolved key, one `key=value` per line, in a form that parses
    /// back to the same configuration.
    pub fn to_key_value(&self) -> String {
        let mut lines = vec![
            format!("experiment={}", self.experiment),
            format!("seed={}", self.seed),
            format!("trials={}", self.trials),
            format!("trial_offset={}", self.trial_offset),
            format!("d_min={}", self.d_min),
            format!("d_max={}", self.d_max),
        ];
        if let Some(n) = self.n {
            lines.push(format!("n={n}"));
        }
        if let Some(n) = self.n_min {
            lines.push(format!("n_min={n}"));
        }
        lines.push(format!("delta={}", self.delta));
        lines.push(format!("sigma={}", self.sigma));
        if let Some(e) = self.epsilon {
            lines.push(format!("epsilon={e}"));
        }
        lines.push(format!("mc_samples={}", self.mc_samples));
        if let Some(t) = self.t {
            lines.push(format!("t={t}"));
        }
        lines.push(format!("exact_max_d={}", self.exact_max_d));
        lines.push(format!("sample_subsets={}", self.sample_subsets));
        if let Some(o) = &self.output {
            lines.push(format!("output={o}"));
        }
        lines.join("\n") + "\n"
    }
}
