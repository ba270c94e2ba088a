use super::{check_n, CheckResult, EstimateWithCI, Z};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, Hypothesis};
use crate::montecarlo;
use crate::rng::RandomStream;

/// Counts, over one shared sample, how often `stat(x) >= t` for each
/// threshold `t`.
fn exceedances<F>(dist: &DistributionSpec, thresholds: &[f64], n: usize, rng: &RandomStream, stat: F) -> Vec<EstimateWithCI>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let k = thresholds.len();
    let counts = montecarlo::monte_carlo(
        dist,
        n,
        rng,
        || vec![0u64; k],
        |acc, x| {
            let s = stat(x);
            for (c, t) in acc.iter_mut().zip(thresholds) {
                if s >= *t {
                    *c += 1;
                }
            }
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    counts
        .into_iter()
        .map(|c| EstimateWithCI::from_counts(c, n as u64))
        .collect()
}

fn upper_check(name: String, est: &EstimateWithCI, bound: f64) -> CheckResult {
    CheckResult {
        name,
        pass: est.value - est.half_width <= bound,
        estimate: est.value,
        bound,
        ci: est.half_width,
    }
}

/// `P(||X|| >= alpha sqrt(d)) <= e^{1 - alpha}` for each alpha, with CI slack.
pub fn check_tail(dist: &DistributionSpec, alphas: &[f64], n: usize, rng: &RandomStream) -> Result<Vec<CheckResult>> {
    check_n(n, 1000)?;
    let sd = (dist.dim() as f64).sqrt();
    let thresholds: Vec<f64> = alphas.iter().map(|a| a * sd).collect();
    let est = exceedances(dist, &thresholds, n, rng, norm);
    Ok(alphas
        .iter()
        .zip(&est)
        .map(|(a, e)| upper_check(format!("tail/{dist}/alpha={a}"), e, (1.0 - a).exp()))
        .collect())
}

/// `P(|u·x| <= b) <= 2b` for a random unit `u` and each `b`, with CI slack.
pub fn check_band_mass(dist: &DistributionSpec, bs: &[f64], n: usize, rng: &RandomStream) -> Result<Vec<CheckResult>> {
    check_n(n, 1000)?;
    if bs.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::param("band half-widths must be positive"));
    }
    let u = Hypothesis::random(dist.dim(), &mut rng.child(0))?;
    // |u·x| <= b  <=>  -|u·x| >= -b
    let thresholds: Vec<f64> = bs.iter().map(|b| -b).collect();
    let est = exceedances(dist, &thresholds, n, &rng.child(1), |x| -u.margin(x).abs());
    Ok(bs
        .iter()
        .zip(&est)
        .map(|(b, e)| upper_check(format!("band/{dist}/b={b}"), e, 2.0 * b))
        .collect())
}

/// Light-tail bound `P(||X|| > R sqrt(C d)) <= C e^{1 - R}` with
/// `C = e^{beta ceil(log2(d + 1))}` taken from the distribution.
pub fn check_light_tails(dist: &DistributionSpec, rs: &[f64], n: usize, rng: &RandomStream) -> Result<Vec<CheckResult>> {
    check_n(n, 1000)?;
    let c = dist.light_tail_constant();
    let scale = (c * dist.dim() as f64).sqrt();
    let thresholds: Vec<f64> = rs.iter().map(|r| r * scale).collect();
    let est = exceedances(dist, &thresholds, n, rng, norm);
    Ok(rs
        .iter()
        .zip(&est)
        .map(|(r, e)| upper_check(format!("light_tail/{dist}/R={r}"), e, c * (1.0 - r).exp()))
        .collect())
}

/// Mean norm at most `0.01 sqrt(d)` and second moment in `[0.97, 1.03]`
/// along `directions` random unit vectors. The second check reports the
/// largest `|E(u·x)^2 - 1|`.
pub fn check_isotropy(dist: &DistributionSpec, directions: usize, n: usize, rng: &RandomStream) -> Result<Vec<CheckResult>> {
    check_n(n, 1000)?;
    let d = dist.dim();
    let mut dir_rng = rng.child(0);
    let dirs = (0..directions)
        .map(|_| Hypothesis::random(d, &mut dir_rng))
        .collect::<Result<Vec<_>>>()?;
    // [sum x (d) | sum (u·x)^2 | sum (u·x)^4]
    let width = d + 2 * directions;
    let sums = montecarlo::monte_carlo(
        dist,
        n,
        &rng.child(1),
        || vec![0.0f64; width],
        |acc, x| {
            acc[..d].iter_mut().zip(x).for_each(|(a, v)| *a += v);
            for (i, u) in dirs.iter().enumerate() {
                let m2 = dot(u.as_slice(), x).powi(2);
                acc[d + i] += m2;
                acc[d + directions + i] += m2 * m2;
            }
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let nf = n as f64;
    let mean: Vec<f64> = sums[..d].iter().map(|s| s / nf).collect();
    let mean_bound = 0.01 * (d as f64).sqrt();
    let mean_norm = norm(&mean);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..directions {
        let m2 = sums[d + i] / nf;
        let m4 = sums[d + directions + i] / nf;
        let dev = (m2 - 1.0).abs();
        if dev >= worst.0 {
            worst = (dev, Z * ((m4 - m2 * m2).max(0.0) / nf).sqrt());
        }
    }
    Ok(vec![
        CheckResult {
            name: format!("isotropy_mean/{dist}"),
            pass: mean_norm <= mean_bound,
            estimate: mean_norm,
            bound: mean_bound,
            ci: Z * (d as f64 / nf).sqrt(),
        },
        CheckResult {
            name: format!("isotropy_second_moment/{dist}"),
            pass: directions == 0 || worst.0 <= 0.03,
            estimate: worst.0,
            bound: 0.03,
            ci: worst.1,
        },
    ])
}
