use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use super::consistent::find_consistent;
use crate::error::{Error, Result};
use crate::geometry::{angle_unchecked, dot, norm, Hypothesis, Label, LabeledExample};
use crate::rng::RandomStream;

const HINGE_ITERS: usize = 300;
const REGULARIZATION: f64 = 1e-2;
const PERTURBATIONS: usize = 32;
const POLISH_STEPS: usize = 200;
const ERM_SEED: u64 = 0x5eed_e12a;

/// Number of examples `w` misclassifies (ties count as `+1`).
pub fn training_errors(w: &[f64], examples: &[LabeledExample]) -> usize {
    examples
        .iter()
        .filter(|e| Label::from_margin(dot(w, &e.x)) != e.y)
        .count()
}

/// Approximate 0-1 empirical risk minimization over the angular ball
/// `{w : angle(w, center) <= radius}`.
///
/// Candidates come from projected subgradient descent on a regularized hinge
/// surrogate (iterates projected onto the cone around `center`), an exact
/// separator when the examples admit one inside the ball, random in-ball
/// perturbations, and a local random-search polish of the best 0-1 error.
/// Among candidates whose error is within `eps_k · n` of the best found, the
/// one with the lowest surrogate value is returned. A radius of `pi` or more
/// leaves the search unconstrained; radius 0 returns `center`.
pub fn constrained_erm(
    examples: &[LabeledExample],
    center: &Hypothesis,
    radius: f64,
    eps_k: f64,
) -> Result<Hypothesis> {
    if examples.is_empty() {
        return Err(Error::EmptyExamples);
    }
    let d = center.dim();
    for e in examples {
        Error::check_dim(d, e.x.len())?;
    }
    if !(radius >= 0.0) {
        return Err(Error::param(format!("radius {radius} must be nonnegative")));
    }
    if !(eps_k >= 0.0) {
        return Err(Error::param(format!("eps_k {eps_k} must be nonnegative")));
    }
    if radius < 1e-12 {
        return Ok(center.clone());
    }
    let radius = radius.min(PI);
    let c = center.as_slice();

    let scale = {
        let ms: f64 = examples.iter().map(|e| dot(c, &e.x).powi(2)).sum::<f64>() / examples.len() as f64;
        if ms > 0.0 {
            ms.sqrt()
        } else {
            1.0
        }
    };
    let surrogate = Surrogate {
        examples,
        scale,
        lambda: REGULARIZATION,
    };

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let (avg, last) = surrogate.descend(c, radius);
    let magnitude = norm(&avg).max(1e-12);
    candidates.push(avg.clone());
    candidates.push(last);
    if let Ok(sep) = find_consistent(examples) {
        if angle_unchecked(sep.as_slice(), c) <= radius {
            candidates.push(sep.into_inner());
        }
    }
    candidates.push(c.to_vec());

    let mut rng = RandomStream::new(ERM_SEED, examples.len() as u64);
    let base = unit(&avg).unwrap_or_else(|| c.to_vec());
    for _ in 0..PERTURBATIONS {
        let step = rng.gen_range(0.0..0.2) * radius.min(FRAC_PI_2);
        candidates.push(clamp_to_ball(&perturb(&base, step, &mut rng), c, radius));
    }

    let mut scored: Vec<(Vec<f64>, usize)> = candidates
        .into_iter()
        .filter_map(|v| unit(&v))
        .map(|u| {
            let err = training_errors(&u, examples);
            (u, err)
        })
        .collect();

    // Local 0-1 polish around the current best.
    let (mut best, mut best_err) = scored
        .iter()
        .min_by_key(|(_, e)| *e)
        .map(|(u, e)| (u.clone(), *e))
        .expect("at least the center is a candidate");
    let mut step = 0.1 * radius.min(FRAC_PI_2);
    for _ in 0..POLISH_STEPS {
        if best_err == 0 {
            break;
        }
        let trial = clamp_to_ball(&perturb(&best, rng.gen_range(0.0..step), &mut rng), c, radius);
        if let Some(u) = unit(&trial) {
            let e = training_errors(&u, examples);
            if e < best_err {
                best = u;
                best_err = e;
            } else {
                step *= 0.98;
            }
        }
    }
    scored.push((best, best_err));

    let allowance = best_err as f64 + eps_k * examples.len() as f64;
    let chosen = scored
        .into_iter()
        .filter(|(_, e)| (*e as f64) <= allowance)
        .map(|(u, e)| {
            let scaled: Vec<f64> = u.iter().map(|v| v * magnitude).collect();
            (surrogate.value(&scaled), e, u)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, u)| u)
        .expect("the best candidate is always within the allowance");
    Ok(Hypothesis::from_unit_unchecked(chosen))
}

struct Surrogate<'a> {
    examples: &'a [LabeledExample],
    scale: f64,
    lambda: f64,
}

impl Surrogate<'_> {
    /// Mean hinge `max(0, 1 - y v·x / scale)` plus `lambda/2 ||v||²`.
    fn value(&self, v: &[f64]) -> f64 {
        let n = self.examples.len() as f64;
        let hinge: f64 = self
            .examples
            .iter()
            .map(|e| (1.0 - e.signed_margin(v) / self.scale).max(0.0))
            .sum::<f64>()
            / n;
        hinge + 0.5 * self.lambda * dot(v, v)
    }

    /// Pegasos-style projected subgradient descent started at `center`.
    /// Returns the tail-averaged iterate and the last iterate.
    fn descend(&self, center: &[f64], radius: f64) -> (Vec<f64>, Vec<f64>) {
        let d = center.len();
        let n = self.examples.len() as f64;
        let max_norm = 1.0 / self.lambda.sqrt();
        let mut v = center.to_vec();
        let mut avg = vec![0.0; d];
        let mut averaged = 0usize;
        let mut grad = vec![0.0; d];
        for t in 1..=HINGE_ITERS {
            grad.iter_mut().zip(&v).for_each(|(g, vi)| *g = self.lambda * vi);
            for e in self.examples {
                if e.signed_margin(&v) / self.scale < 1.0 {
                    let s = e.y.sign() / (self.scale * n);
                    grad.iter_mut().zip(&e.x).for_each(|(g, xi)| *g -= s * xi);
                }
            }
            let eta = 1.0 / (self.lambda * t as f64);
            v.iter_mut().zip(&grad).for_each(|(vi, g)| *vi -= eta * g);
            project_cone(&mut v, center, radius);
            let nv = norm(&v);
            if nv > max_norm {
                v.iter_mut().for_each(|vi| *vi *= max_norm / nv);
            }
            if t > HINGE_ITERS / 2 {
                avg.iter_mut().zip(&v).for_each(|(a, vi)| *a += vi);
                averaged += 1;
            }
        }
        avg.iter_mut().for_each(|a| *a /= averaged as f64);
        project_cone(&mut avg, center, radius);
        (avg, v)
    }
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n > 1e-12 && n.is_finite() {
        Some(v.iter().map(|x| x / n).collect())
    } else {
        None
    }
}

/// Euclidean projection onto the cone `{v : angle(v, c) <= radius}` for
/// `radius < pi/2`; for wider radii the direction is clamped to the ball and
/// the norm kept.
fn project_cone(v: &mut [f64], c: &[f64], radius: f64) {
    if radius >= PI {
        return;
    }
    let a = dot(v, c);
    let perp: Vec<f64> = v.iter().zip(c).map(|(vi, ci)| vi - a * ci).collect();
    let rho = norm(&perp);
    let ang = rho.atan2(a);
    if ang <= radius {
        return;
    }
    let (s, co) = radius.sin_cos();
    let edge: Vec<f64> = if rho < 1e-300 {
        // v points straight away from c; any boundary direction will do.
        let j = if c[0].abs() < 0.9 { 0 } else { 1 };
        let mut e: Vec<f64> = c.iter().map(|ci| -c[j] * ci).collect();
        e[j] += 1.0;
        let en = norm(&e);
        e.iter().zip(c).map(|(ei, ci)| co * ci + s * ei / en).collect()
    } else {
        perp.iter().zip(c).map(|(pi, ci)| co * ci + s * pi / rho).collect()
    };
    if radius < FRAC_PI_2 {
        let len = dot(v, &edge);
        if len <= 0.0 {
            v.iter_mut().for_each(|x| *x = 0.0);
        } else {
            v.iter_mut().zip(&edge).for_each(|(x, e)| *x = len * e);
        }
    } else {
        let nv = norm(v);
        v.iter_mut().zip(&edge).for_each(|(x, e)| *x = nv * e);
    }
}

fn clamp_to_ball(v: &[f64], c: &[f64], radius: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    if let Some(u) = unit(v) {
        if angle_unchecked(&u, c) > radius {
            let nv = norm(v);
            let a = dot(&u, c);
            let perp: Vec<f64> = u.iter().zip(c).map(|(ui, ci)| ui - a * ci).collect();
            let rho = norm(&perp);
            if rho > 1e-300 {
                let (s, co) = radius.sin_cos();
                out = perp
                    .iter()
                    .zip(c)
                    .map(|(pi, ci)| nv * (co * ci + s * pi / rho))
                    .collect();
            } else {
                out = c.to_vec();
            }
        }
    }
    out
}

/// Rotates unit `u` by `step` radians in a uniformly random direction.
fn perturb<R: Rng + ?Sized>(u: &[f64], step: f64, rng: &mut R) -> Vec<f64> {
    let d = u.len();
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let a = dot(&g, u);
        let perp: Vec<f64> = g.iter().zip(u).map(|(gi, ui)| gi - a * ui).collect();
        let pn = norm(&perp);
        if pn > 1e-9 {
            let (s, co) = step.sin_cos();
            return u.iter().zip(&perp).map(|(ui, pi)| co * ui + s * pi / pn).collect();
        }
    }
}
