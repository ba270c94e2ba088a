//! Vector and halfspace primitives.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[cfg(test)]
const UNIT_TOL: f64 = 1e-9;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unit normal of a homogeneous halfspace `{x : w·x >= 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis(Vec<f64>);

impl Hypothesis {
    /// Normalizes `w` to unit length.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::InvalidDimension(w.len()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("hypothesis has a non-finite coordinate"));
        }
        let n = norm(&w);
        if n == 0.0 {
            return Err(Error::DegeneratePoint);
        }
        let mut w = w;
        w.iter_mut().for_each(|v| *v /= n);
        Ok(Self(w))
    }

    /// The `i`-th standard basis vector of R^d.
    pub fn axis(dim: usize, i: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if i >= dim {
            return Err(Error::param(format!("axis {i} out of range for d={dim}")));
        }
        let mut w = vec![0.0; dim];
        w[i] = 1.0;
        Ok(Self(w))
    }

    /// Uniformly random direction on the unit sphere.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        loop {
            let w: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if norm(&w) > 1e-12 {
                return Self::new(w);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    /// Signed margin `w·x`. Dimensions are only checked in debug builds.
    #[inline]
    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    /// `sign(w·x)` with the tie `w·x = 0` mapped to `+1`.
    #[inline]
    pub fn classify(&self, x: &[f64]) -> Label {
        Label::from_margin(self.margin(x))
    }

    pub(crate) fn from_unit_unchecked(w: Vec<f64>) -> Self {
        debug_assert!((norm(&w) - 1.0).abs() < 1e-6);
        Self(w)
    }

    #[cfg(test)]
    pub(crate) fn is_unit(&self) -> bool {
        (norm(&self.0) - 1.0).abs() <= UNIT_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn from_margin(m: f64) -> Self {
        if m >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    #[inline]
    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            _ => Err(Error::param(format!("label must be +1 or -1, got {s}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => write!(f, "+1"),
            Label::Negative => write!(f, "-1"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample {
    pub x: Vec<f64>,
    pub y: Label,
}

impl LabeledExample {
    pub fn new(x: Vec<f64>, y: Label) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("example has a non-finite coordinate"));
        }
        Ok(Self { x, y })
    }

    /// `y·(w·x)`; positive iff `w` classifies the example correctly.
    #[inline]
    pub fn signed_margin(&self, w: &[f64]) -> f64 {
        self.y.sign() * dot(w, &self.x)
    }
}

/// Set of hypotheses within `radius` radians of `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularBall {
    pub center: Hypothesis,
    pub radius: f64,
}

impl AngularBall {
    pub fn new(center: Hypothesis, radius: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&radius) {
            return Err(Error::param(format!("ball radius {radius} outside [0, pi]")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, w: &Hypothesis) -> Result<bool> {
        Ok(angle(&self.center, w)? <= self.radius + 1e-12)
    }

    /// Exact membership of `x` in the disagreement region of this ball.
    pub fn disagreement_contains(&self, x: &[f64]) -> Result<bool> {
        dis_membership(x, &self.center, self.radius)
    }
}

/// Angle between two unit vectors, in `[0, pi]`.
pub fn angle(u: &Hypothesis, v: &Hypothesis) -> Result<f64> {
    Error::check_dim(u.dim(), v.dim())?;
    Ok(angle_unchecked(u.as_slice(), v.as_slice()))
}

#[inline]
pub(crate) fn angle_unchecked(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0).acos()
}

pub fn predict(w: &Hypothesis, x: &[f64]) -> Result<Label> {
    Error::check_dim(w.dim(), x.len())?;
    Ok(w.classify(x))
}

/// Rotates `w` by `phi` radians towards `t` inside the plane they span.
pub fn rotate_towards(w: &Hypothesis, t: &Hypothesis, phi: f64) -> Result<Hypothesis> {
    Error::check_dim(w.dim(), t.dim())?;
    let c = dot(w.as_slice(), t.as_slice());
    let perp: Vec<f64> = t
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(ti, wi)| ti - c * wi)
        .collect();
    let pn = norm(&perp);
    if pn < 1e-12 {
        return Err(Error::DegenerateRotation);
    }
    let total = angle_unchecked(w.as_slice(), t.as_slice());
    if !(0.0..=total + 1e-12).contains(&phi) {
        return Err(Error::param(format!(
            "rotation angle {phi} outside [0, {total}]"
        )));
    }
    let (s, co) = phi.sin_cos();
    let out = w
        .as_slice()
        .iter()
        .zip(&perp)
        .map(|(wi, pi)| co * wi + s * pi / pn)
        .collect();
    Hypothesis::new(out)
}

/// Whether some hypothesis within angle `phi` of `center` labels `x`
/// differently from `center`. Equivalent to `|center·x| / ||x|| <= sin(phi)`.
pub fn dis_membership(x: &[f64], center: &Hypothesis, phi: f64) -> Result<bool> {
    Error::check_dim(center.dim(), x.len())?;
    if !(0.0..PI / 2.0).contains(&phi) {
        return Err(Error::param(format!("phi {phi} outside [0, pi/2)")));
    }
    let n = norm(x);
    if n == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok(center.margin(x).abs() / n <= phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn h(v: &[f64]) -> Hypothesis {
        Hypothesis::new(v.to_vec()).unwrap()
    }

    #[test]
    fn angle_examples() {
        let e1 = Hypothesis::axis(2, 0).unwrap();
        let e2 = Hypothesis::axis(2, 1).unwrap();
        assert_eq!(angle(&e1, &e1).unwrap(), 0.0);
        assert!((angle(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((angle(&h(&[1.0, 0.0]), &h(&[-1.0, 0.0])).unwrap() - PI).abs() < 1e-15);
        let e3 = Hypothesis::axis(3, 0).unwrap();
        assert!(matches!(
            angle(&e1, &e3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn predict_examples() {
        let w = h(&[1.0, 0.0]);
        assert_eq!(predict(&w, &[2.0, 5.0]).unwrap(), Label::Positive);
        assert_eq!(predict(&w, &[-0.1, 9.0]).unwrap(), Label::Negative);
        assert_eq!(predict(&w, &[0.0, 3.0]).unwrap(), Label::Positive);
        assert!(predict(&w, &[1.0]).is_err());
    }

    #[test]
    fn rotate_examples() {
        let e1 = Hypothesis::axis(2, 0).unwrap();
        let e2 = Hypothesis::axis(2, 1).unwrap();
        let r = rotate_towards(&e1, &e2, FRAC_PI_2).unwrap();
        assert!((r.as_slice()[0]).abs() < 1e-12 && (r.as_slice()[1] - 1.0).abs() < 1e-12);
        let r = rotate_towards(&e1, &e2, 0.0).unwrap();
        assert_eq!(r, e1);
        let r = rotate_towards(&e1, &e2, PI / 4.0).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.as_slice()[0] - s).abs() < 1e-12 && (r.as_slice()[1] - s).abs() < 1e-12);
        assert!(matches!(
            rotate_towards(&e1, &e1, 0.1),
            Err(Error::DegenerateRotation)
        ));
    }

    #[test]
    fn dis_membership_examples() {
        let e1 = Hypothesis::axis(2, 0).unwrap();
        assert!(!dis_membership(&[1.0, 0.0], &e1, PI / 6.0).unwrap());
        assert!(dis_membership(&[0.0, 1.0], &e1, 0.01).unwrap());
        assert!(dis_membership(&[0.3, 1.0], &e1, PI / 6.0).unwrap());
        assert!(matches!(
            dis_membership(&[0.0, 0.0], &e1, 0.1),
            Err(Error::DegeneratePoint)
        ));
    }

    #[test]
    fn hypothesis_rejects_bad_input() {
        assert!(matches!(Hypothesis::new(vec![1.0]), Err(Error::InvalidDimension(1))));
        assert!(matches!(Hypothesis::new(vec![0.0, 0.0]), Err(Error::DegeneratePoint)));
        assert!(Hypothesis::new(vec![f64::NAN, 1.0]).is_err());
    }

    /// Brute-force check of the angular criterion in the plane: scan rotations
    /// of the center over [-phi, phi] and look for a sign change.
    #[test]
    fn dis_membership_matches_rotation_scan() {
        use rand::Rng;
        let mut rng = RandomStream::new(42, 0);
        let steps = 10_000;
        let mut mismatches = 0;
        for _ in 0..1000 {
            let center_angle: f64 = rng.gen_range(0.0..2.0 * PI);
            let center = h(&[center_angle.cos(), center_angle.sin()]);
            let phi: f64 = rng.gen_range(0.0..1.5);
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let base = center.classify(&x);
            let flips = (0..=steps).any(|i| {
                let a = center_angle - phi + 2.0 * phi * i as f64 / steps as f64;
                Label::from_margin(a.cos() * x[0] + a.sin() * x[1]) != base
            });
            let exact = dis_membership(&x, &center, phi).unwrap();
            if flips != exact {
                // Only grid-resolution cases near the boundary may disagree.
                let slack = (center.margin(&x).abs() / norm(&x) - phi.sin()).abs();
                assert!(slack < 1e-3, "mismatch far from boundary: {slack}");
                mismatches += 1;
            }
        }
        assert!(mismatches <= 5, "{mismatches} near-boundary mismatches");
    }

    fn unit_vec(dim: usize) -> impl Strategy<Value = Hypothesis> {
        prop::collection::vec(-1.0f64..1.0, dim)
            .prop_filter("nonzero", |v| norm(v) > 1e-3)
            .prop_map(|v| Hypothesis::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn predict_flips_under_negation(w in unit_vec(4), x in prop::collection::vec(-5.0f64..5.0, 4)) {
            prop_assume!(w.margin(&x) != 0.0);
            prop_assert_eq!(predict(&w.negated(), &x).unwrap(), predict(&w, &x).unwrap().flipped());
        }

        #[test]
        fn angle_is_a_metric(u in unit_vec(3), v in unit_vec(3), w in unit_vec(3)) {
            let uv = angle(&u, &v).unwrap();
            let vu = angle(&v, &u).unwrap();
            prop_assert!((uv - vu).abs() < 1e-12);
            prop_assert!(angle(&u, &u).unwrap() < 1e-7);
            let uw = angle(&u, &w).unwrap();
            let vw = angle(&v, &w).unwrap();
            prop_assert!(uw <= uv + vw + 1e-8);
            prop_assert!((0.0..=PI).contains(&uv));
        }

        #[test]
        fn rotation_stays_in_plane(w in unit_vec(5), t in unit_vec(5), frac in 0.0f64..1.0) {
            let total = angle(&w, &t).unwrap();
            prop_assume!(total > 1e-3 && total < PI - 1e-3);
            let phi = frac * total;
            let r = rotate_towards(&w, &t, phi).unwrap();
            prop_assert!(r.is_unit());
            prop_assert!((angle(&r, &w).unwrap() - phi).abs() < 1e-8);
            prop_assert!((angle(&r, &t).unwrap() - (total - phi)).abs() < 1e-8);
            // Residual after projecting onto span{w, t}.
            let c = dot(w.as_slice(), t.as_slice());
            let perp: Vec<f64> = t.as_slice().iter().zip(w.as_slice()).map(|(a, b)| a - c * b).collect();
            let pn = norm(&perp);
            let a = dot(r.as_slice(), w.as_slice());
            let b = dot(r.as_slice(), &perp) / pn;
            let resid: f64 = r.as_slice().iter().enumerate()
                .map(|(i, ri)| ri - a * w.as_slice()[i] - b * perp[i] / pn)
                .map(|e| e * e).sum::<f64>().sqrt();
            prop_assert!(resid < 1e-8);
        }
    }
}
