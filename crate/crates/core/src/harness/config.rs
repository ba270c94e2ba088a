use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::distributions::{apply_affine, make_beta_mixture, make_gaussian, make_uniform_ball, DistributionSpec};
use crate::error::{Error, Result};
use crate::learners::ScheduleConstants;
use crate::oracles::NoiseModel;

/// Evaluation draws used for a run's final error.
pub const DEFAULT_EVAL_SAMPLES: usize = 1_000_000;
/// Default passive sample-size constant.
pub const DEFAULT_PASSIVE_C: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LearnerKind {
    Active,
    Passive,
    ActiveNoise,
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearnerKind::Active => "active",
            LearnerKind::Passive => "passive",
            LearnerKind::ActiveNoise => "active_noise",
        })
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "active" => Ok(LearnerKind::Active),
            "passive" => Ok(LearnerKind::Passive),
            "active_noise" => Ok(LearnerKind::ActiveNoise),
            other => Err(Error::Config(format!("unknown learner {other:?}"))),
        }
    }
}

/// Reads a whitespace-separated square matrix.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad matrix entry {t:?} in {}", path.display())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("{} is not a square matrix", path.display())));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// Builds a distribution from `gaussian`, `ball` or `mixture:<sep>`, optionally
/// composed with a matrix.
pub fn parse_dist(descriptor: &str, dim: usize, affine: Option<&DMatrix<f64>>) -> Result<DistributionSpec> {
    let base = match descriptor.trim().split_once(':') {
        None if descriptor.trim() == "gaussian" => make_gaussian(dim)?,
        None if descriptor.trim() == "ball" => make_uniform_ball(dim)?,
        Some(("mixture", sep)) => {
            let sep: f64 = sep
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad mixture separation {sep:?}")))?;
            make_beta_mixture(dim, sep)?
        }
        _ => return Err(Error::Config(format!("unknown distribution {descriptor:?}"))),
    };
    match affine {
        Some(a) => {
            if a.nrows() != dim {
                return Err(Error::Config(format!("affine matrix is {}x{}, dim is {dim}", a.nrows(), a.ncols())));
            }
            apply_affine(&base, a)
        }
        None => Ok(base),
    }
}

/// Optional overrides of [`ScheduleConstants`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScheduleOverrides {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c_r: Option<f64>,
    pub c_eps: Option<f64>,
    pub s: Option<usize>,
    pub unlabeled_cap_factor: Option<f64>,
}

impl ScheduleOverrides {
    pub fn apply(&self, mut c: ScheduleConstants) -> ScheduleConstants {
        if let Some(v) = self.c1 {
            c.c1 = v;
        }
        if let Some(v) = self.c2 {
            c.c2 = v;
        }
        if let Some(v) = self.c_r {
            c.c_r = v;
        }
        if let Some(v) = self.c_eps {
            c.c_eps = v;
        }
        if let Some(v) = self.s {
            c.rounds = Some(v);
        }
        if let Some(v) = self.unlabeled_cap_factor {
            c.unlabeled_cap_factor = v;
        }
        c
    }
}

/// One batch of runs. Parsed from `key = value` lines; `#` starts a comment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dist: String,
    pub dim: usize,
    pub affine: Option<PathBuf>,
    pub eps: f64,
    pub delta: f64,
    pub noise: NoiseModel,
    pub learner: LearnerKind,
    pub seeds: Vec<u64>,
    pub schedule: ScheduleOverrides,
    /// Passive sample size constant: `m = ceil(c (d + ln(1/delta)) / eps)`.
    pub passive_c: f64,
    /// Unlabeled draws for the whitening preprocessor of the passive learner.
    pub whiten: Option<usize>,
    pub eval_samples: usize,
    /// Record wall-clock time. Off by default so output is byte-reproducible.
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dist: "gaussian".into(),
            dim: 5,
            affine: None,
            eps: 0.05,
            delta: 0.1,
            noise: NoiseModel::None,
            learner: LearnerKind::Active,
            seeds: (0..10).collect(),
            schedule: ScheduleOverrides::default(),
            passive_c: DEFAULT_PASSIVE_C,
            whiten: None,
            eval_samples: DEFAULT_EVAL_SAMPLES,
            timing: false,
            out: None,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

/// `a,b,c` or `a..b` (half-open).
fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = num("seeds", a.trim())?;
        let b: u64 = num("seeds", b.trim())?;
        return Ok((a..b).collect());
    }
    value
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| num("seeds", t.trim()))
        .collect()
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v.trim().trim_matches('"'))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one key. Used for both file lines and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dist" => self.dist = value.to_string(),
            "dim" => self.dim = num(key, value)?,
            "affine" => self.affine = (!value.is_empty()).then(|| PathBuf::from(value)),
            "eps" => self.eps = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "noise" => self.noise = value.parse()?,
            "learner" => self.learner = value.parse()?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "c1" => self.schedule.c1 = Some(num(key, value)?),
            "c2" => self.schedule.c2 = Some(num(key, value)?),
            "c_r" => self.schedule.c_r = Some(num(key, value)?),
            "c_eps" => self.schedule.c_eps = Some(num(key, value)?),
            "s" => self.schedule.s = Some(num(key, value)?),
            "unlabeled_cap_factor" => self.schedule.unlabeled_cap_factor = Some(num(key, value)?),
            "passive_c" => self.passive_c = num(key, value)?,
            "whiten" => {
                self.whiten = match value {
                    "" | "none" | "0" => None,
                    v => Some(num(key, v)?),
                }
            }
            "eval_samples" => self.eval_samples = num(key, value)?,
            "timing" => self.timing = num(key, value)?,
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.25) {
            return Err(Error::Config(format!("eps {} outside (0, 1/4)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds list is empty".into()));
        }
        if self.dim < 2 {
            return Err(Error::Config(format!("dim {} below 2", self.dim)));
        }
        if self.eval_samples == 0 || !(self.passive_c > 0.0) {
            return Err(Error::Config("eval_samples and passive_c must be positive".into()));
        }
        if self.learner == LearnerKind::Active && !self.noise.is_noiseless() {
            return Err(Error::Config("learner active needs noise = none".into()));
        }
        Ok(())
    }

    /// The distribution this config describes.
    pub fn spec(&self) -> Result<DistributionSpec> {
        let matrix = self.affine.as_deref().map(read_matrix).transpose()?;
        parse_dist(&self.dist, self.dim, matrix.as_ref())
    }
}
