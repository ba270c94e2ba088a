//! Passive ERM and the margin-based active learners, with label and
//! unlabeled-draw accounting.

mod active;
mod consistent;
mod erm;
mod passive;

pub use active::{margin_active_learn, margin_active_learn_noise};
pub use consistent::find_consistent;
pub use erm::{constrained_erm, training_errors};
pub use passive::{passive_learn, passive_sample_size, PassiveOptions};

use crate::error::{Error, Result};
use crate::geometry::{Hypothesis, Label};

/// Tunable constants behind the default schedules. The theory only asserts
/// that suitable constants exist; these defaults are calibrated at desk scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleConstants {
    /// Band scale: `b_k = c1 / 2^k`.
    pub c1: f64,
    /// Label scale: `m_k = ceil(c2 (d + ln((1 + s - k) / delta)))`.
    pub c2: f64,
    /// Radius scale for the noisy learner: `r_k = c_r 2^{-(k-1)(1-alpha)}`.
    pub c_r: f64,
    /// Tolerance scale for the noisy learner: `eps_k = c_eps 2^{-k} / b_{k-1}`.
    pub c_eps: f64,
    /// Round count override; default `ceil(log2(1/eps)) + 2`.
    pub rounds: Option<usize>,
    /// Multiplier on the per-round unlabeled allowance `2 m_k / (c_band b_{k-1})`.
    pub unlabeled_cap_factor: f64,
    /// Lower bound `c_band` on `P(|w·x| <= b) / min(b, 1/9)` assumed by the cap.
    pub band_mass_floor: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 16.0,
            c_r: 2.0,
            c_eps: 1.0,
            rounds: None,
            unlabeled_cap_factor: 4.0,
            band_mass_floor: 0.5,
        }
    }
}

/// Per-round parameters. Round `k` is 1-based everywhere in this API.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    band: Vec<f64>,
    labels: Vec<usize>,
    radii: Option<Vec<f64>>,
    tolerances: Option<Vec<f64>>,
    constants: ScheduleConstants,
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::param(format!("eps {eps} outside (0, 1/4)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

impl Schedule {
    /// Default round count `ceil(log2(1/eps)) + 2`.
    pub fn default_rounds(eps: f64) -> usize {
        (1.0 / eps).log2().ceil() as usize + 2
    }

    /// Band and label schedule of the realizable learner.
    pub fn realizable(d: usize, eps: f64, delta: f64, constants: ScheduleConstants) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        check_eps_delta(eps, delta)?;
        if !(constants.c1 > 0.0 && constants.c2 > 0.0) {
            return Err(Error::param("c1 and c2 must be positive"));
        }
        let s = constants.rounds.unwrap_or_else(|| Self::default_rounds(eps));
        if s == 0 {
            return Err(Error::param("round count must be positive"));
        }
        let band = (1..=s).map(|k| constants.c1 * 0.5f64.powi(k as i32)).collect();
        let labels = (1..=s)
            .map(|k| {
                let tail = ((1 + s - k) as f64 / delta).ln();
                (constants.c2 * (d as f64 + tail)).ceil() as usize
            })
            .collect();
        let out = Self {
            band,
            labels,
            radii: None,
            tolerances: None,
            constants,
        };
        out.validate()?;
        Ok(out)
    }

    /// Schedule of the noisy learner for noise exponent `alpha` (0 for
    /// Massart): radii `r_k = c_r 2^{-(k-1)(1-alpha)}` and tolerances
    /// `eps_k = c_eps 2^{-k} / b_{k-1}` with `b_0 = c1`. Round 1 starts from a
    /// random hypothesis, so its radius is the whole sphere. For `alpha > 0`
    /// the label budgets grow as `m_k 2^{2 alpha (k-1)}`: band labels get
    /// noisier as the band narrows, and the total then scales like
    /// `(1/eps)^{2 alpha}`.
    pub fn noisy(d: usize, eps: f64, delta: f64, alpha: f64, constants: ScheduleConstants) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::param(format!("alpha {alpha} outside [0, 1)")));
        }
        if !(constants.c_r > 0.0 && constants.c_eps > 0.0) {
            return Err(Error::param("c_r and c_eps must be positive"));
        }
        let mut out = Self::realizable(d, eps, delta, constants)?;
        let s = out.rounds();
        for (k, m) in out.labels.iter_mut().enumerate() {
            *m = (*m as f64 * 2f64.powf(2.0 * alpha * k as f64)).ceil() as usize;
        }
        let radii = (1..=s)
            .map(|k| {
                if k == 1 {
                    std::f64::consts::PI
                } else {
                    (constants.c_r * 2f64.powf(-((k - 1) as f64) * (1.0 - alpha))).min(std::f64::consts::PI)
                }
            })
            .collect();
        let tolerances = (1..=s)
            .map(|k| {
                let prev_band = if k == 1 { constants.c1 } else { out.band[k - 2] };
                constants.c_eps * 0.5f64.powi(k as i32) / prev_band
            })
            .collect();
        out.radii = Some(radii);
        out.tolerances = Some(tolerances);
        out.validate()?;
        Ok(out)
    }

    /// Fully explicit schedule.
    pub fn custom(
        band: Vec<f64>,
        labels: Vec<usize>,
        radii: Option<Vec<f64>>,
        tolerances: Option<Vec<f64>>,
        constants: ScheduleConstants,
    ) -> Result<Self> {
        let out = Self {
            band,
            labels,
            radii,
            tolerances,
            constants,
        };
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let s = self.band.len();
        if s == 0 || self.labels.len() != s {
            return Err(Error::param("band and label lists must be nonempty and equal length"));
        }
        if self.band.iter().any(|b| !(*b > 0.0)) || self.labels.iter().any(|m| *m == 0) {
            return Err(Error::param("schedule entries must be positive"));
        }
        for list in [&self.radii, &self.tolerances].into_iter().flatten() {
            if list.len() != s || list.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::param("radius/tolerance lists must be positive with length s"));
            }
        }
        if !(self.constants.unlabeled_cap_factor > 0.0 && self.constants.band_mass_floor > 0.0) {
            return Err(Error::param("cap factor and band mass floor must be positive"));
        }
        Ok(())
    }

    pub fn rounds(&self) -> usize {
        self.band.len()
    }

    /// `b_k`.
    pub fn band(&self, k: usize) -> f64 {
        self.band[k - 1]
    }

    /// `m_k`.
    pub fn labels(&self, k: usize) -> usize {
        self.labels[k - 1]
    }

    /// `r_k`, when the schedule carries radii.
    pub fn radius(&self, k: usize) -> Option<f64> {
        self.radii.as_ref().map(|r| r[k - 1])
    }

    /// `eps_k`, when the schedule carries tolerances.
    pub fn tolerance(&self, k: usize) -> Option<f64> {
        self.tolerances.as_ref().map(|r| r[k - 1])
    }

    pub fn constants(&self) -> &ScheduleConstants {
        &self.constants
    }

    pub fn total_labels(&self) -> usize {
        self.labels.iter().sum()
    }

    /// Maximum draws allowed while collecting the `m_k` labels of round
    /// `k >= 2` from the band `b_{k-1}`: `factor · 2 m_k / (c_band · min(b_{k-1}, 1/9))`.
    pub fn unlabeled_cap(&self, k: usize) -> u64 {
        let c = &self.constants;
        let b = self.band(k - 1).min(1.0 / 9.0);
        (c.unlabeled_cap_factor * 2.0 * self.labels(k) as f64 / (c.band_mass_floor * b)).ceil() as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundSummary {
    pub round: usize,
    /// Disagreement with the target (realizable) or excess error (noisy).
    pub measured_error: f64,
    pub labels: u64,
    pub unlabeled: u64,
}

/// One label request, recorded when tracing is enabled.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryRecord {
    pub round: usize,
    pub x: Vec<f64>,
    pub label: Label,
    /// `|w_{k-1}·x|` for band-filtered queries.
    pub band_margin: Option<f64>,
    /// `b_{k-1}` for band-filtered queries.
    pub band: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LearnResult {
    pub w_hat: Hypothesis,
    pub labels_used: u64,
    pub unlabeled_used: u64,
    pub per_round: Vec<RoundSummary>,
    /// Set when `d < 4`, below the dimension the guarantees are stated for.
    pub below_theorem_dimension: bool,
    pub trace: Option<Vec<QueryRecord>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerOptions {
    /// Draws used for per-round error estimates when no closed form applies.
    pub round_eval_samples: usize,
    /// Record every label request.
    pub trace: bool,
}

impl Default for LearnerOptions {
    fn default() -> Self {
        Self {
            round_eval_samples: 20_000,
            trace: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_values() {
        let s = Schedule::realizable(5, 0.05, 0.1, ScheduleConstants::default()).unwrap();
        assert_eq!(s.rounds(), 7);
        for k in 1..=7 {
            assert_eq!(s.band(k), 1.0 / 2f64.powi(k as i32));
            let want = (16.0 * (5.0 + ((8 - k) as f64 / 0.1).ln())).ceil() as usize;
            assert_eq!(s.labels(k), want);
        }
        assert_eq!(s.radius(1), None);
        // b_1 = 1/2 is clipped to 1/9 in the cap.
        assert_eq!(s.unlabeled_cap(2), (4.0 * 2.0 * s.labels(2) as f64 / (0.5 / 9.0)).ceil() as u64);
    }

    #[test]
    fn noisy_schedule_values() {
        let s = Schedule::noisy(3, 0.05, 0.1, 0.5, ScheduleConstants::default()).unwrap();
        assert_eq!(s.radius(1), Some(std::f64::consts::PI));
        assert!((s.radius(3).unwrap() - 2.0 * 2f64.powf(-1.0)).abs() < 1e-15);
        assert!((s.tolerance(1).unwrap() - 0.5).abs() < 1e-15);
        assert!((s.tolerance(4).unwrap() - (1.0 / 16.0) / (1.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn noisy_labels_grow_with_alpha() {
        let c = ScheduleConstants::default();
        let base = Schedule::realizable(3, 0.05, 0.1, c).unwrap();
        let massart = Schedule::noisy(3, 0.05, 0.1, 0.0, c).unwrap();
        let tsybakov = Schedule::noisy(3, 0.05, 0.1, 0.5, c).unwrap();
        for k in 1..=base.rounds() {
            assert_eq!(massart.labels(k), base.labels(k));
            // 2^{2 alpha (k-1)} = 2^{k-1} at alpha = 1/2
            assert_eq!(tsybakov.labels(k), base.labels(k) << (k - 1));
        }
    }

    #[test]
    fn schedule_validation() {
        let c = ScheduleConstants::default();
        assert!(Schedule::realizable(5, 0.25, 0.1, c).is_err());
        assert!(Schedule::realizable(5, 0.1, 1.0, c).is_err());
        assert!(Schedule::realizable(1, 0.1, 0.1, c).is_err());
        assert!(Schedule::custom(vec![0.5], vec![10, 10], None, None, c).is_err());
        assert!(Schedule::custom(vec![0.5], vec![0], None, None, c).is_err());
        assert!(Schedule::noisy(3, 0.1, 0.1, 1.0, c).is_err());
    }

    #[test]
    fn quarter_eps_is_short() {
        // ceil(log2(1/0.2499)) = 3
        let s = Schedule::realizable(5, 0.2499, 0.1, ScheduleConstants::default()).unwrap();
        assert_eq!(s.rounds(), 5);
    }
}
