use std::f64::consts::{FRAC_PI_2, PI};

use super::{check_n, hypothesis_at_angle};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{dis_membership, Hypothesis};
use crate::montecarlo;
use crate::rng::RandomStream;

const TABLE_ANGLES: usize = 64;

/// Empirical map from angle to disagreement distance around a fixed center,
/// tabulated at 64 angles in `(0, pi/2]` and made monotone by isotonic
/// regression. Each angle uses its own random rotation direction.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleDisagreementMap {
    angles: Vec<f64>,
    raw: Vec<f64>,
    fitted: Vec<f64>,
}

impl AngleDisagreementMap {
    pub fn estimate(center: &Hypothesis, dist: &DistributionSpec, n: usize, rng: &RandomStream) -> Result<Self> {
        Error::check_dim(center.dim(), dist.dim())?;
        check_n(n, 1000)?;
        let angles: Vec<f64> = (1..=TABLE_ANGLES)
            .map(|j| FRAC_PI_2 * j as f64 / TABLE_ANGLES as f64)
            .collect();
        let mut dir_rng = rng.child(0);
        let others = angles
            .iter()
            .map(|t| hypothesis_at_angle(center, *t, &mut dir_rng))
            .collect::<Result<Vec<_>>>()?;
        let counts = montecarlo::monte_carlo(
            dist,
            n,
            &rng.child(1),
            || vec![0u64; TABLE_ANGLES],
            |acc, x| {
                let c = center.classify(x);
                for (a, w) in acc.iter_mut().zip(&others) {
                    if w.classify(x) != c {
                        *a += 1;
                    }
                }
            },
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
        let raw: Vec<f64> = counts.iter().map(|c| *c as f64 / n as f64).collect();
        let fitted = isotonic(&raw);
        Ok(Self { angles, raw, fitted })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    /// Smallest angle whose fitted disagreement reaches `r`, interpolating
    /// linearly (through the origin below the first node).
    pub fn invert(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::param("disagreement radius must be positive"));
        }
        let last = *self.fitted.last().expect("nonempty table");
        if r > last {
            return Err(Error::Calibration(format!(
                "radius {r} exceeds the largest tabulated disagreement {last}"
            )));
        }
        let mut prev = (0.0, 0.0);
        for (t, d) in self.angles.iter().zip(&self.fitted) {
            if *d >= r {
                if *d <= prev.1 {
                    return Err(Error::Calibration(format!(
                        "disagreement map is flat at {r}; increase the sample size"
                    )));
                }
                return Ok(prev.0 + (t - prev.0) * (r - prev.1) / (d - prev.1));
            }
            prev = (*t, *d);
        }
        unreachable!("r <= last fitted value")
    }
}

/// Pool-adjacent-violators fit of a nondecreasing sequence.
fn isotonic(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(y.len());
    for v in y {
        blocks.push((*v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let total = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / total as f64, total);
        }
    }
    blocks.into_iter().flat_map(|(v, k)| std::iter::repeat(v).take(k)).collect()
}

/// Capacity at one disagreement radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityEstimate {
    pub r: f64,
    /// Angular radius matching `r`.
    pub phi: f64,
    /// `P(DIS) / r`.
    pub value: f64,
    /// 3-sigma half-width of `value`.
    pub half_width: f64,
}

fn angular_radius(r: f64, dist: &DistributionSpec, map: Option<&AngleDisagreementMap>) -> Result<f64> {
    if dist.is_rotationally_symmetric() {
        return Ok(PI * r);
    }
    map.expect("map present for asymmetric specs").invert(r)
}

fn capacity_with(
    center: &Hypothesis,
    r: f64,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
    map: Option<&AngleDisagreementMap>,
) -> Result<CapacityEstimate> {
    if !(r > 0.0 && r <= 0.25) {
        return Err(Error::param(format!("radius {r} outside (0, 1/4]")));
    }
    let phi = angular_radius(r, dist, map)?;
    if phi >= FRAC_PI_2 {
        return Err(Error::Calibration(format!("angular radius {phi} reaches pi/2")));
    }
    // Zero draws have probability zero; treat them as outside.
    let hits = montecarlo::count(dist, n, rng, |x| dis_membership(x, center, phi).unwrap_or(false));
    let p = super::EstimateWithCI::from_counts(hits, n as u64);
    Ok(CapacityEstimate {
        r,
        phi,
        value: p.value / r,
        half_width: p.half_width / r,
    })
}

fn map_for(center: &Hypothesis, dist: &DistributionSpec, n: usize, rng: &RandomStream) -> Result<Option<AngleDisagreementMap>> {
    if dist.is_rotationally_symmetric() {
        Ok(None)
    } else {
        AngleDisagreementMap::estimate(center, dist, n, &rng.child(0xca1)).map(Some)
    }
}

/// `P(DIS(B(w, phi(r)))) / r`, where `phi(r)` is the angular radius whose
/// disagreement distance is `r` (`pi r` for rotationally symmetric specs,
/// otherwise read off an [`AngleDisagreementMap`] estimated with `n` draws).
pub fn estimate_capacity(
    w: &Hypothesis,
    r: f64,
    dist: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
) -> Result<CapacityEstimate> {
    Error::check_dim(w.dim(), dist.dim())?;
    check_n(n, 1000)?;
    let map = map_for(w, dist, n, rng)?;
    capacity_with(w, r, dist, n, rng, map.as_ref())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityCurve {
    pub points: Vec<CapacityEstimate>,
    pub sup_value: f64,
}

/// Capacity over `r_grid` and its supremum.
pub fn estimate_dis_coefficient(
    w: &Hypothesis,
    eps: f64,
    dist: &DistributionSpec,
    r_grid: &[f64],
    n: usize,
    rng: &RandomStream,
) -> Result<CapacityCurve> {
    Error::check_dim(w.dim(), dist.dim())?;
    check_n(n, 1000)?;
    if r_grid.is_empty() {
        return Err(Error::param("empty radius grid"));
    }
    if r_grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::param("radius grid must be strictly increasing"));
    }
    if r_grid[0] < eps || *r_grid.last().unwrap() > 0.25 {
        return Err(Error::param(format!("radius grid must lie in [{eps}, 1/4]")));
    }
    let map = map_for(w, dist, n, rng)?;
    let points = r_grid
        .iter()
        .enumerate()
        .map(|(i, r)| capacity_with(w, *r, dist, n, &rng.child(i as u64 + 1), map.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let sup_value = points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    Ok(CapacityCurve { points, sup_value })
}
