//! Labeling oracles with query accounting.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{angle, Hypothesis, Label};
use crate::montecarlo;
use crate::rng::RandomStream;

pub const DEFAULT_MASSART_ETA: f64 = 0.1;
pub const DEFAULT_TSYBAKOV_ALPHA: f64 = 0.5;
pub const DEFAULT_TSYBAKOV_TAU: f64 = 0.5;

/// Label noise relative to the target halfspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    None,
    /// Each label flipped independently with probability `eta`.
    Massart { eta: f64 },
    /// Flip probability decays with the target margin:
    /// `q(x) = (1 - min(1, |w*·x| / tau)^(alpha / (1 - alpha))) / 2`.
    Tsybakov { alpha: f64, tau: f64 },
}

impl NoiseModel {
    pub fn massart(eta: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&eta) {
            return Err(Error::param(format!("massart eta {eta} outside [0, 1/2)")));
        }
        Ok(NoiseModel::Massart { eta })
    }

    pub fn tsybakov(alpha: f64, tau: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::param(format!("tsybakov alpha {alpha} outside (0, 1)")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param(format!("tsybakov tau {tau} must be positive")));
        }
        Ok(NoiseModel::Tsybakov { alpha, tau })
    }

    pub fn is_noiseless(&self) -> bool {
        matches!(self, NoiseModel::None | NoiseModel::Massart { eta: 0.0 })
    }

    /// Probability that the label of a point with target margin `margin` is
    /// flipped.
    #[inline]
    pub fn flip_probability(&self, margin: f64) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Massart { eta } => eta,
            NoiseModel::Tsybakov { alpha, tau } => {
                let t = (margin.abs() / tau).min(1.0);
                0.5 * (1.0 - t.powf(alpha / (1.0 - alpha)))
            }
        }
    }

    /// `1 - 2 q(x)`: the excess-error contribution of a point on which a
    /// hypothesis disagrees with the target.
    #[inline]
    pub fn excess_weight(&self, margin: f64) -> f64 {
        1.0 - 2.0 * self.flip_probability(margin)
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::None
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseModel::None => write!(f, "none"),
            NoiseModel::Massart { eta } => write!(f, "massart:{eta}"),
            NoiseModel::Tsybakov { alpha, tau } => write!(f, "tsybakov:{alpha}:{tau}"),
        }
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    /// Parses `none`, `massart[:<eta>]` or `tsybakov[:<alpha>[:<tau>]]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| -> Result<f64> {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {p:?} in noise {s:?}")))
        };
        match parts.as_slice() {
            ["none"] => Ok(NoiseModel::None),
            ["massart"] => NoiseModel::massart(DEFAULT_MASSART_ETA),
            ["massart", eta] => NoiseModel::massart(num(eta)?),
            ["tsybakov"] => NoiseModel::tsybakov(DEFAULT_TSYBAKOV_ALPHA, DEFAULT_TSYBAKOV_TAU),
            ["tsybakov", a] => NoiseModel::tsybakov(num(a)?, DEFAULT_TSYBAKOV_TAU),
            ["tsybakov", a, t] => NoiseModel::tsybakov(num(a)?, num(t)?),
            _ => Err(Error::Config(format!("unknown noise model {s:?}"))),
        }
    }
}

/// Draws a label for `x` without touching any query counter.
pub fn noisy_label<R: Rng + ?Sized>(target: &Hypothesis, noise: &NoiseModel, x: &[f64], rng: &mut R) -> Label {
    let m = target.margin(x);
    let clean = Label::from_margin(m);
    let q = noise.flip_probability(m);
    if q > 0.0 && rng.gen::<f64>() < q {
        clean.flipped()
    } else {
        clean
    }
}

/// Label source for the learners. Counts every label it issues.
#[derive(Clone, Debug)]
pub struct LabelOracle {
    target: Hypothesis,
    noise: NoiseModel,
    queries_used: u64,
}

impl LabelOracle {
    pub fn new(target: Hypothesis, noise: NoiseModel) -> Self {
        Self {
            target,
            noise,
            queries_used: 0,
        }
    }

    pub fn realizable(target: Hypothesis) -> Self {
        Self::new(target, NoiseModel::None)
    }

    pub fn target(&self) -> &Hypothesis {
        &self.target
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    pub fn label(&mut self, x: &[f64], rng: &mut RandomStream) -> Result<Label> {
        Error::check_dim(self.target.dim(), x.len())?;
        self.queries_used += 1;
        Ok(noisy_label(&self.target, &self.noise, x, rng))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExcessMethod {
    /// Variance-free evaluation where available: `(1 - 2 eta)·angle/pi` for
    /// rotationally symmetric specs, planar quadrature for Tsybakov noise
    /// under the standard Gaussian. Falls back to Monte Carlo otherwise.
    ClosedForm,
    /// Average of `(1 - 2 q(x))·1[w and w* disagree on x]` over `n` draws.
    MonteCarlo,
}

/// `err(w) - err(w*)` under `dist` with the oracle's noise model.
pub fn excess_error(
    w: &Hypothesis,
    oracle: &LabelOracle,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
    method: ExcessMethod,
) -> Result<f64> {
    excess_error_for(w, oracle.target(), oracle.noise(), dist, n, rng, method)
}

pub(crate) fn excess_error_for(
    w: &Hypothesis,
    target: &Hypothesis,
    noise: &NoiseModel,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
    method: ExcessMethod,
) -> Result<f64> {
    Error::check_dim(target.dim(), w.dim())?;
    Error::check_dim(target.dim(), dist.dim())?;
    if n == 0 {
        return Err(Error::param("evaluation sample count must be positive"));
    }
    let theta = angle(w, target)?;
    if method == ExcessMethod::ClosedForm {
        match *noise {
            NoiseModel::None | NoiseModel::Massart { .. } => {
                let scale = noise.excess_weight(0.0);
                if dist.is_rotationally_symmetric() {
                    return Ok(scale * theta / std::f64::consts::PI);
                }
                let hits = montecarlo::count(dist, n, rng, |x| {
                    w.classify(x) != target.classify(x)
                });
                return Ok(scale * hits as f64 / n as f64);
            }
            NoiseModel::Tsybakov { alpha, tau } if dist.is_standard_gaussian() => {
                return Ok(gaussian_tsybakov_excess(theta, alpha, tau));
            }
            NoiseModel::Tsybakov { .. } => {}
        }
    }
    Ok(montecarlo::mean(dist, n, rng, |x| {
        let m = target.margin(x);
        if Label::from_margin(m) != w.classify(x) {
            noise.excess_weight(m)
        } else {
            0.0
        }
    }))
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Excess error of a hypothesis at angle `theta` from the target under the
/// standard Gaussian with margin-decaying noise. The problem reduces to the
/// plane spanned by the two normals: over the two disagreement wedges,
/// `(1/pi) ∫_0^theta ∫_0^inf r e^{-r²/2} (1 - 2q(r sin psi)) dr dpsi`.
fn gaussian_tsybakov_excess(theta: f64, alpha: f64, tau: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let k = alpha / (1.0 - alpha);
    let radial = |psi: f64| {
        let s = psi.sin().abs();
        if s < 1e-300 {
            return 0.0;
        }
        let r0 = (tau / s).min(40.0);
        let inner = simpson(|r| r * (-0.5 * r * r).exp() * (r * s / tau).powf(k), 0.0, r0, 800);
        inner + (-0.5 * r0 * r0).exp()
    };
    // The integrand is symmetric about pi/2 in psi; integrate in two legs for
    // obtuse angles so the kink at pi/2 sits on a node.
    let half_pi = std::f64::consts::FRAC_PI_2;
    let total = if theta <= half_pi {
        simpson(radial, 0.0, theta, 400)
    } else {
        simpson(&radial, 0.0, half_pi, 400) + simpson(&radial, half_pi, theta, 400)
    };
    total / std::f64::consts::PI
}
