//! Monte Carlo estimators and statistical checks for the geometric facts the
//! learners rely on.

mod audits;
mod band;
mod capacity;

pub use audits::{check_band_mass, check_isotropy, check_light_tails, check_tail};
pub use band::{
    band_disagreement_profile, check_margin_decay, estimate_band_disagreement, MarginDecayReport,
    DEFAULT_C6_FLOOR,
};
pub use capacity::{
    estimate_capacity, estimate_dis_coefficient, AngleDisagreementMap, CapacityCurve, CapacityEstimate,
};

use std::fmt;

use rand::Rng;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{rotate_towards, Hypothesis};
use crate::montecarlo;
use crate::rng::RandomStream;

/// Lower bound on `d(u, v) / angle(u, v)` asserted by [`check_angle_bound`].
pub const DEFAULT_C_FLOOR: f64 = 0.1;
/// Width of the normal-approximation interval, in standard deviations.
pub const Z: f64 = 3.0;
/// Below this many expected hits the Wilson interval is used.
const WILSON_BELOW: f64 = 25.0;

/// Point estimate with a symmetric confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateWithCI {
    pub value: f64,
    pub half_width: f64,
    pub n: u64,
}

impl EstimateWithCI {
    /// Proportion `hits / n` with a 3-sigma interval; Wilson when
    /// `hits < 25`, widened to cover the whole Wilson interval.
    pub fn from_counts(hits: u64, n: u64) -> Self {
        assert!(n > 0 && hits <= n);
        let nf = n as f64;
        let p = hits as f64 / nf;
        let half_width = if p * nf < WILSON_BELOW {
            let z2 = Z * Z;
            let denom = 1.0 + z2 / nf;
            let center = (p + z2 / (2.0 * nf)) / denom;
            let spread = Z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
            (center + spread - p).max(p - (center - spread))
        } else {
            Z * (p * (1.0 - p) / nf).sqrt()
        };
        Self {
            value: p,
            half_width,
            n,
        }
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.half_width).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        (self.value + self.half_width).min(1.0)
    }

    /// Whether `x` lies inside the interval.
    pub fn covers(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.half_width
    }
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub estimate: f64,
    pub bound: f64,
    pub ci: f64,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} est={:.6e} bound={:.6e} ci={:.3e}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.estimate,
            self.bound,
            self.ci
        )
    }
}

pub(crate) fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::param(format!("need at least {min} samples, got {n}")));
    }
    Ok(())
}

/// Monte Carlo estimate of `P(sign(u·x) != sign(v·x))`.
pub fn estimate_disagreement(
    u: &Hypothesis,
    v: &Hypothesis,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
) -> Result<EstimateWithCI> {
    Error::check_dim(u.dim(), v.dim())?;
    Error::check_dim(u.dim(), dist.dim())?;
    check_n(n, 1000)?;
    if u == v {
        return Ok(EstimateWithCI {
            value: 0.0,
            half_width: 0.0,
            n: n as u64,
        });
    }
    let hits = montecarlo::count(dist, n, rng, |x| u.classify(x) != v.classify(x));
    Ok(EstimateWithCI::from_counts(hits, n as u64))
}

/// A unit vector at angle exactly `theta` from `u`, in a random direction.
pub fn hypothesis_at_angle<R: Rng + ?Sized>(u: &Hypothesis, theta: f64, rng: &mut R) -> Result<Hypothesis> {
    loop {
        let t = Hypothesis::random(u.dim(), rng)?;
        let c = crate::geometry::dot(u.as_slice(), t.as_slice());
        let perp: Vec<f64> = t.as_slice().iter().zip(u.as_slice()).map(|(ti, ui)| ti - c * ui).collect();
        if crate::geometry::norm(&perp) > 1e-6 {
            return rotate_towards(u, &Hypothesis::new(perp)?, theta);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleBoundReport {
    /// `(angle, disagreement estimate)` per random pair.
    pub pairs: Vec<(f64, EstimateWithCI)>,
    /// `min d̂/θ` over pairs.
    pub min_ratio: f64,
    /// CI half-width of the ratio at the minimizing pair.
    pub min_ratio_ci: f64,
    pub c_floor: f64,
    pub pass: bool,
}

impl AngleBoundReport {
    pub fn to_check(&self, name: &str) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass: self.pass,
            estimate: self.min_ratio,
            bound: self.c_floor,
            ci: self.min_ratio_ci,
        }
    }
}

/// Draws `trials` pairs of unit vectors with angles uniform in `(0, pi/2]`
/// and checks that `min d̂/θ >= c_floor` up to CI slack. Pair `i` uses child
/// stream `i`.
pub fn check_angle_bound(dist: &DistributionSpec, trials: usize, n: usize, rng: &RandomStream) -> Result<AngleBoundReport> {
    if !dist.is_isotropic() {
        return Err(Error::param(format!("{dist} is not flagged isotropic")));
    }
    if trials == 0 {
        return Err(Error::param("need at least one trial"));
    }
    check_n(n, 1000)?;
    let mut pairs = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut r = rng.child(i as u64);
        let u = Hypothesis::random(dist.dim(), &mut r)?;
        let theta = std::f64::consts::FRAC_PI_2 * (1.0 - r.gen::<f64>());
        let v = hypothesis_at_angle(&u, theta, &mut r)?;
        let est = estimate_disagreement(&u, &v, dist, n, &r.child(0))?;
        pairs.push((theta, est));
    }
    let (min_ratio, min_ratio_ci) = pairs
        .iter()
        .map(|(t, e)| (e.value / t, e.half_width / t))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("trials > 0");
    let pass = pairs.iter().all(|(t, e)| (e.value + e.half_width) / t >= DEFAULT_C_FLOOR);
    Ok(AngleBoundReport {
        pairs,
        min_ratio,
        min_ratio_ci,
        c_floor: DEFAULT_C_FLOOR,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{apply_affine, make_gaussian, make_uniform_ball};
    use crate::geometry::angle;
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    #[test]
    fn wilson_for_rare_events() {
        let e = EstimateWithCI::from_counts(0, 1000);
        assert_eq!(e.value, 0.0);
        assert!(e.half_width > 0.0 && e.half_width < 0.01);
        let big = EstimateWithCI::from_counts(500, 1000);
        assert!((big.half_width - 3.0 * (0.25f64 / 1000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn disagreement_identity_and_orthogonal() {
        let spec = make_gaussian(2).unwrap();
        let rng = RandomStream::new(1, 0);
        let e1 = Hypothesis::axis(2, 0).unwrap();
        let e2 = Hypothesis::axis(2, 1).unwrap();
        let same = estimate_disagreement(&e1, &e1, &spec, 1000, &rng).unwrap();
        assert_eq!((same.value, same.half_width), (0.0, 0.0));
        let orth = estimate_disagreement(&e1, &e2, &spec, 100_000, &rng).unwrap();
        assert!(orth.covers(0.5));
        assert!(estimate_disagreement(&e1, &e2, &spec, 999, &rng).is_err());
    }

    #[test]
    fn disagreement_matches_angle_over_pi() {
        let spec = make_gaussian(6).unwrap();
        let mut rng = RandomStream::new(2, 0);
        let u = Hypothesis::random(6, &mut rng).unwrap();
        let v = hypothesis_at_angle(&u, 0.3, &mut rng).unwrap();
        assert!((angle(&u, &v).unwrap() - 0.3).abs() < 1e-12);
        let e = estimate_disagreement(&u, &v, &spec, 200_000, &rng.child(5)).unwrap();
        assert!(e.covers(0.3 / PI), "{e:?}");
    }

    #[test]
    fn disagreement_is_symmetric() {
        let spec = make_uniform_ball(3).unwrap();
        let mut rng = RandomStream::new(3, 0);
        let u = Hypothesis::random(3, &mut rng).unwrap();
        let v = Hypothesis::random(3, &mut rng).unwrap();
        let a = estimate_disagreement(&u, &v, &spec, 50_000, &rng.child(1)).unwrap();
        let b = estimate_disagreement(&v, &u, &spec, 50_000, &rng.child(1)).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn angle_bound_gaussian_plane() {
        let spec = make_gaussian(2).unwrap();
        let r = check_angle_bound(&spec, 20, 20_000, &RandomStream::new(4, 0)).unwrap();
        assert!(r.pass);
        assert!((r.min_ratio - 1.0 / PI).abs() < 0.05);
    }

    #[test]
    fn angle_bound_needs_isotropic_flag() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[3.0, 1.0]));
        let spec = apply_affine(&make_gaussian(2).unwrap(), &a).unwrap();
        assert!(check_angle_bound(&spec, 5, 1000, &RandomStream::new(5, 0)).is_err());
    }

    #[test]
    fn check_line_format() {
        let c = CheckResult {
            name: "x".into(),
            pass: true,
            estimate: 0.5,
            bound: 1.0,
            ci: 0.01,
        };
        assert!(c.to_string().starts_with("CHECK x PASS est="));
    }
}
