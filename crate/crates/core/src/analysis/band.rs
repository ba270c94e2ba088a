use super::{check_n, CheckResult, EstimateWithCI};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{angle, Hypothesis};
use crate::montecarlo;
use crate::rng::RandomStream;

/// Decay rate floor asserted by [`check_margin_decay`]: the fitted slope of
/// `ln(P/eta)` against `b/eta` must be at most `-DEFAULT_C6_FLOOR`.
pub const DEFAULT_C6_FLOOR: f64 = 0.3;

fn check_pair(u: &Hypothesis, v: &Hypothesis, dist: &DistributionSpec) -> Result<f64> {
    Error::check_dim(u.dim(), v.dim())?;
    Error::check_dim(u.dim(), dist.dim())?;
    let eta = angle(u, v)?;
    if eta >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::param(format!("angle {eta} is not below pi/2")));
    }
    Ok(eta)
}

/// `P(sign(u·x) != sign(v·x) and |v·x| >= b)` for every `b` in `bs`, all from
/// one shared sample, so the estimates are exactly nonincreasing in `b`.
pub fn band_disagreement_profile(
    u: &Hypothesis,
    v: &Hypothesis,
    bs: &[f64],
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
) -> Result<Vec<EstimateWithCI>> {
    check_pair(u, v, dist)?;
    check_n(n, 1000)?;
    if bs.iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::param("band widths must be nonnegative"));
    }
    let k = bs.len();
    let counts = montecarlo::monte_carlo(
        dist,
        n,
        rng,
        || vec![0u64; k],
        |acc, x| {
            if u.classify(x) != v.classify(x) {
                let m = v.margin(x).abs();
                for (c, b) in acc.iter_mut().zip(bs) {
                    if m >= *b {
                        *c += 1;
                    }
                }
            }
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    Ok(counts
        .into_iter()
        .map(|c| EstimateWithCI::from_counts(c, n as u64))
        .collect())
}

/// `P(sign(u·x) != sign(v·x) and |v·x| >= b)`.
pub fn estimate_band_disagreement(
    u: &Hypothesis,
    v: &Hypothesis,
    b: f64,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
) -> Result<EstimateWithCI> {
    Ok(band_disagreement_profile(u, v, &[b], dist, n, rng)?[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginDecayReport {
    /// `angle(u, v)`.
    pub eta: f64,
    pub b_grid: Vec<f64>,
    pub estimates: Vec<EstimateWithCI>,
    /// Slope of the least-squares line through `(b/eta, ln(P/eta))` over the
    /// nonzero estimates.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 3-sigma standard error of the slope (0 with only two points).
    pub slope_ci: f64,
    pub points_used: usize,
    /// False when the grid starts below `eta`, outside the regime the decay
    /// bound covers.
    pub regime_ok: bool,
    pub pass: bool,
}

impl MarginDecayReport {
    pub fn to_check(&self, name: &str) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass: self.pass,
            estimate: self.slope,
            bound: -DEFAULT_C6_FLOOR,
            ci: self.slope_ci,
        }
    }
}

/// Fits the exponential decay of band disagreement in `b/eta`.
pub fn check_margin_decay(
    u: &Hypothesis,
    v: &Hypothesis,
    dist: &DistributionSpec,
    b_grid: &[f64],
    n: usize,
    rng: &RandomStream,
) -> Result<MarginDecayReport> {
    let eta = check_pair(u, v, dist)?;
    if eta == 0.0 {
        return Err(Error::param("u and v coincide"));
    }
    if b_grid.len() < 2 || b_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("b grid needs at least two strictly increasing values"));
    }
    let estimates = band_disagreement_profile(u, v, b_grid, dist, n, rng)?;
    let pts: Vec<(f64, f64)> = b_grid
        .iter()
        .zip(&estimates)
        .filter(|(_, e)| e.value > 0.0)
        .map(|(b, e)| (b / eta, (e.value / eta).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientResolution(format!(
            "{} of {} band estimates are nonzero at n = {n}",
            pts.len(),
            b_grid.len()
        )));
    }
    let (slope, intercept, r_squared, se) = least_squares(&pts);
    let regime_ok = b_grid[0] >= eta;
    if !regime_ok {
        log::warn!("b grid starts at {} below eta = {eta}", b_grid[0]);
    }
    Ok(MarginDecayReport {
        eta,
        b_grid: b_grid.to_vec(),
        estimates,
        slope,
        intercept,
        r_squared,
        slope_ci: 3.0 * se,
        points_used: pts.len(),
        regime_ok,
        pass: slope <= -DEFAULT_C6_FLOOR,
    })
}

/// Ordinary least squares `y = a x + c`; returns `(a, c, r², se(a))`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let a = sxy / sxx;
    let c = my - a * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - a * p.0 - c).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = if pts.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (a, c, r2, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{estimate_disagreement, hypothesis_at_angle};
    use crate::distributions::make_gaussian;

    fn pair(eta: f64, seed: u64) -> (Hypothesis, Hypothesis) {
        let mut rng = RandomStream::new(seed, 0);
        let v = Hypothesis::random(2, &mut rng).unwrap();
        let u = hypothesis_at_angle(&v, eta, &mut rng).unwrap();
        (u, v)
    }

    #[test]
    fn zero_band_is_plain_disagreement() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.2, 1);
        let rng = RandomStream::new(9, 0);
        let a = estimate_band_disagreement(&u, &v, 0.0, &spec, 100_000, &rng).unwrap();
        let b = estimate_disagreement(&u, &v, &spec, 100_000, &rng).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn profile_is_monotone() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.1, 2);
        let bs = [0.0, 0.1, 0.2, 0.4, 0.6];
        let p = band_disagreement_profile(&u, &v, &bs, &spec, 200_000, &RandomStream::new(3, 0)).unwrap();
        assert!(p.windows(2).all(|w| w[1].value <= w[0].value));
    }

    #[test]
    fn decay_is_steep_for_gaussian_plane() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.2, 4);
        let grid: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|k| k * 0.2).collect();
        let r = check_margin_decay(&u, &v, &spec, &grid, 2_000_000, &RandomStream::new(5, 0)).unwrap();
        assert!(r.pass && r.regime_ok, "{r:?}");
        assert!(r.slope < 0.0);
    }

    #[test]
    fn unresolvable_decay_errors() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.01, 6);
        let grid = [0.5, 1.0, 2.0];
        let r = check_margin_decay(&u, &v, &spec, &grid, 1000, &RandomStream::new(7, 0));
        assert!(matches!(r, Err(Error::InsufficientResolution(_))));
    }

    #[test]
    fn low_grid_is_flagged() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.3, 8);
        let grid = [0.05, 0.3, 0.6];
        let r = check_margin_decay(&u, &v, &spec, &grid, 100_000, &RandomStream::new(9, 0)).unwrap();
        assert!(!r.regime_ok);
    }

    #[test]
    fn wide_angle_rejected() {
        let spec = make_gaussian(2).unwrap();
        let u = Hypothesis::axis(2, 0).unwrap();
        let v = Hypothesis::axis(2, 1).unwrap();
        assert!(estimate_band_disagreement(&u, &v, 0.1, &spec, 1000, &RandomStream::new(0, 0)).is_err());
    }

    #[test]
    fn ci_shrinks_with_root_n() {
        let spec = make_gaussian(2).unwrap();
        let (u, v) = pair(0.2, 10);
        let rng = RandomStream::new(11, 0);
        let a = estimate_band_disagreement(&u, &v, 0.2, &spec, 400_000, &rng).unwrap();
        let b = estimate_band_disagreement(&u, &v, 0.2, &spec, 1_600_000, &rng).unwrap();
        let ratio = a.half_width / b.half_width;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn least_squares_exact_line() {
        let (a, c, r2, se) = least_squares(&[(1.0, 1.0), (2.0, -1.0), (3.0, -3.0)]);
        assert!((a + 2.0).abs() < 1e-12 && (c - 3.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12 && se.abs() < 1e-9);
    }
}
