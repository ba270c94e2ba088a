//! Seedable samplers for isotropic log-concave and nearly log-concave
//! distributions over R^d, plus affine (non-isotropic) variants.

mod beta;
mod whitening;

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::rng::RandomStream;

pub use beta::{midpoint_log_concavity_defect, mixture_axis_beta};
pub use whitening::{estimate_whitening, WhiteningTransform};

#[derive(Clone, Debug, PartialEq)]
pub enum DistributionKind {
    /// Standard Gaussian N(0, I).
    Gaussian,
    /// Uniform on the centered ball of the given radius.
    UniformBall { radius: f64 },
    /// Mixture of unit-covariance Gaussians.
    GaussianMixture {
        means: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// Law of `A·x` for `x` drawn from `inner`. `inner` is never itself affine.
    Affine {
        inner: Box<DistributionSpec>,
        matrix: DMatrix<f64>,
    },
}

/// A sampleable distribution over R^d.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec {
    kind: DistributionKind,
    dim: usize,
    isotropic: bool,
    rotationally_symmetric: bool,
    gaussian: bool,
    beta: f64,
    name: String,
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Isotropic standard Gaussian on R^d.
pub fn make_gaussian(d: usize) -> Result<DistributionSpec> {
    check_dim(d)?;
    Ok(DistributionSpec {
        kind: DistributionKind::Gaussian,
        dim: d,
        isotropic: true,
        rotationally_symmetric: true,
        gaussian: true,
        beta: 0.0,
        name: "gaussian".into(),
    })
}

/// Uniform distribution on the ball of radius `sqrt(d + 2)`, which has
/// identity covariance.
pub fn make_uniform_ball(d: usize) -> Result<DistributionSpec> {
    check_dim(d)?;
    Ok(DistributionSpec {
        kind: DistributionKind::UniformBall {
            radius: ((d + 2) as f64).sqrt(),
        },
        dim: d,
        isotropic: true,
        rotationally_symmetric: true,
        gaussian: false,
        beta: 0.0,
        name: "ball".into(),
    })
}

/// Mixture of unit-covariance Gaussians with the given means and weights.
/// Not flagged isotropic; wrap with [`apply_affine`] or whitening as needed.
pub fn make_gaussian_mixture(means: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<DistributionSpec> {
    if means.is_empty() || means.len() != weights.len() {
        return Err(Error::param("mixture needs one weight per component"));
    }
    let d = means[0].len();
    check_dim(d)?;
    for m in &means {
        Error::check_dim(d, m.len())?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("mixture mean is not finite"));
        }
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::param("mixture weights must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("mixture weights sum to {total}, not 1")));
    }
    Ok(DistributionSpec {
        kind: DistributionKind::GaussianMixture { means, weights },
        dim: d,
        isotropic: false,
        rotationally_symmetric: false,
        gaussian: false,
        beta: 0.0,
        name: "mixture".into(),
    })
}

/// Equal-weight mixture of `N(±(separation/2)·e1, I)`, rescaled along `e1`
/// so the result is isotropic. Its nearly-log-concave defect `beta` is
/// computed numerically from the one-dimensional marginal along `e1`.
pub fn make_beta_mixture(d: usize, separation: f64) -> Result<DistributionSpec> {
    check_dim(d)?;
    if !(separation >= 0.0) {
        return Err(Error::param(format!("separation {separation} must be >= 0")));
    }
    if separation > 2.0 {
        return Err(Error::param(format!("separation {separation} exceeds 2")));
    }
    if separation == 0.0 {
        return make_gaussian(d);
    }
    let half = separation / 2.0;
    let mut plus = vec![0.0; d];
    plus[0] = half;
    let minus: Vec<f64> = plus.iter().map(|v| -v).collect();
    let mixture = make_gaussian_mixture(vec![plus, minus], vec![0.5, 0.5])?;
    let mut a = DMatrix::<f64>::identity(d, d);
    a[(0, 0)] = 1.0 / (1.0 + half * half).sqrt();
    let mut spec = apply_affine(&mixture, &a)?;
    spec.isotropic = true;
    spec.beta = mixture_axis_beta(separation);
    spec.name = format!("mixture:{separation}");
    Ok(spec)
}

/// Law of `A·x` for `x` drawn from `spec`.
pub fn apply_affine(spec: &DistributionSpec, a: &DMatrix<f64>) -> Result<DistributionSpec> {
    let d = spec.dim;
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::SingularMatrix);
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("affine matrix has a non-finite entry"));
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::SingularMatrix);
    }
    let orthogonal = (a * a.transpose() - DMatrix::<f64>::identity(d, d)).amax() < 1e-9;
    let (inner, matrix) = match &spec.kind {
        DistributionKind::Affine { inner, matrix } => (inner.clone(), a * matrix),
        _ => (Box::new(spec.clone()), a.clone()),
    };
    let inner_name = inner.name.clone();
    Ok(DistributionSpec {
        kind: DistributionKind::Affine { inner, matrix },
        dim: d,
        isotropic: spec.isotropic && orthogonal,
        rotationally_symmetric: spec.rotationally_symmetric && orthogonal,
        gaussian: spec.gaussian && orthogonal,
        // Affine maps preserve the log-concavity defect.
        beta: spec.beta,
        name: format!("affine({inner_name})"),
    })
}

impl DistributionSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    /// True when the law is invariant under rotations about the origin, so
    /// that disagreement between halfspaces is exactly `angle / pi`.
    pub fn is_rotationally_symmetric(&self) -> bool {
        self.rotationally_symmetric
    }

    /// True for the isotropic standard Gaussian (possibly rotated).
    pub fn is_standard_gaussian(&self) -> bool {
        self.gaussian
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Light-tail constant `C = exp(beta * ceil(log2(d + 1)))`.
    pub fn light_tail_constant(&self) -> f64 {
        let k = ((self.dim + 1) as f64).log2().ceil();
        (self.beta * k).exp()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sampler(&self) -> Sampler<'_> {
        Sampler {
            spec: self,
            scratch: vec![0.0; self.dim],
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(d={})", self.name, self.dim)
    }
}

/// Reusable draw state for one spec.
pub struct Sampler<'a> {
    spec: &'a DistributionSpec,
    scratch: Vec<f64>,
}

impl Sampler<'_> {
    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    /// Writes one draw into `out` (length `d`).
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.spec.dim);
        match &self.spec.kind {
            DistributionKind::Affine { inner, matrix } => {
                draw_base(inner, rng, &mut self.scratch);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..self.scratch.len())
                        .map(|j| matrix[(i, j)] * self.scratch[j])
                        .sum();
                }
            }
            _ => draw_base(self.spec, rng, out),
        }
    }

    pub fn draw_vec<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.dim];
        self.draw(rng, &mut out);
        out
    }
}

fn draw_base<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R, out: &mut [f64]) {
    match &spec.kind {
        DistributionKind::Gaussian => {
            out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        }
        DistributionKind::UniformBall { radius } => loop {
            out.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            let n = norm(out);
            if n > 1e-300 {
                let u: f64 = rng.gen();
                let r = radius * u.powf(1.0 / out.len() as f64);
                out.iter_mut().for_each(|v| *v *= r / n);
                break;
            }
        },
        DistributionKind::GaussianMixture { means, weights } => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut k = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    k = i;
                    break;
                }
            }
            for (v, m) in out.iter_mut().zip(&means[k]) {
                *v = m + rng.sample::<f64, _>(StandardNormal);
            }
        }
        DistributionKind::Affine { .. } => unreachable!("affine specs are flattened"),
    }
}

/// `n` i.i.d. draws from `spec`.
pub fn sample(spec: &DistributionSpec, n: usize, rng: &mut RandomStream) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::param("sample count must be at least 1"));
    }
    let mut s = spec.sampler();
    Ok((0..n).map(|_| s.draw_vec(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dot, Hypothesis};

    fn second_moments(spec: &DistributionSpec, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = RandomStream::new(seed, 0);
        let d = spec.dim();
        let mut s = spec.sampler();
        let mut x = vec![0.0; d];
        let mut m = DMatrix::<f64>::zeros(d, d);
        for _ in 0..n {
            s.draw(&mut rng, &mut x);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += x[i] * x[j];
                }
            }
        }
        m / n as f64
    }

    #[test]
    fn constructors_reject_small_dimension() {
        assert!(matches!(make_gaussian(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(make_uniform_ball(1), Err(Error::InvalidDimension(1))));
        assert!(make_beta_mixture(1, 1.0).is_err());
        assert!(make_beta_mixture(3, -0.5).is_err());
    }

    #[test]
    fn gaussian_is_white() {
        let m = second_moments(&make_gaussian(2).unwrap(), 200_000, 1);
        assert!((m - DMatrix::<f64>::identity(2, 2)).amax() < 0.02);
    }

    #[test]
    fn gaussian_norm_squared_is_dimension() {
        let spec = make_gaussian(16).unwrap();
        let mut rng = RandomStream::new(2, 0);
        let mut s = spec.sampler();
        let mut x = vec![0.0; 16];
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| {
                s.draw(&mut rng, &mut x);
                dot(&x, &x)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 16.0).abs() < 0.16, "{mean}");
    }

    #[test]
    fn ball_radius_and_isotropy() {
        let spec = make_uniform_ball(3).unwrap();
        match spec.kind() {
            DistributionKind::UniformBall { radius } => assert_eq!(*radius, 5f64.sqrt()),
            _ => panic!(),
        }
        let spec = make_uniform_ball(2).unwrap();
        let mut rng = RandomStream::new(3, 0);
        let u = Hypothesis::random(2, &mut rng).unwrap();
        let pts = sample(&spec, 1_000_000, &mut rng).unwrap();
        let m2: f64 = pts.iter().map(|x| u.margin(x).powi(2)).sum::<f64>() / pts.len() as f64;
        assert!((m2 - 1.0).abs() < 0.02, "{m2}");
        assert!(pts.iter().all(|x| norm(x) <= 2.0));
    }

    #[test]
    fn zero_separation_mixture_is_gaussian() {
        assert_eq!(make_beta_mixture(4, 0.0).unwrap(), make_gaussian(4).unwrap());
    }

    #[test]
    fn beta_mixture_is_isotropic_and_centered() {
        let spec = make_beta_mixture(2, 1.0).unwrap();
        assert!(spec.is_isotropic());
        assert!(spec.beta() < 1e-9);
        let m = second_moments(&spec, 1_000_000, 4);
        assert!((m - DMatrix::<f64>::identity(2, 2)).amax() < 0.02);
        match spec.kind() {
            DistributionKind::Affine { inner, .. } => match inner.kind() {
                DistributionKind::GaussianMixture { means, .. } => {
                    assert_eq!(means[0][0], -means[1][0]);
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = make_gaussian(3).unwrap();
        let a = sample(&spec, 1000, &mut RandomStream::new(9, 1)).unwrap();
        let b = sample(&spec, 1000, &mut RandomStream::new(9, 1)).unwrap();
        assert_eq!(a, b);
        assert!(sample(&spec, 0, &mut RandomStream::new(9, 1)).is_err());
    }

    #[test]
    fn gaussian_norm_tail_matches_chi_square() {
        // P(chi2_4 > 36) = 19 e^{-18} ~ 2.9e-7
        let spec = make_gaussian(4).unwrap();
        let mut rng = RandomStream::new(5, 0);
        let mut s = spec.sampler();
        let mut x = vec![0.0; 4];
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                s.draw(&mut rng, &mut x);
                norm(&x) >= 6.0
            })
            .count();
        assert!(hits <= 5, "{hits}");
        assert!((hits as f64 / n as f64) <= (-2.0f64).exp());
    }

    #[test]
    fn affine_covariance() {
        let g = make_gaussian(2).unwrap();
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0]));
        let spec = apply_affine(&g, &a).unwrap();
        assert!(!spec.is_isotropic());
        let m = second_moments(&spec, 1_000_000, 6);
        assert!((m[(0, 0)] - 16.0).abs() < 0.32);
        assert!((m[(1, 1)] - 1.0).abs() < 0.02);
        let id = apply_affine(&g, &DMatrix::identity(2, 2)).unwrap();
        assert!(id.is_isotropic() && id.is_rotationally_symmetric());
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(apply_affine(&g, &singular), Err(Error::SingularMatrix)));
    }

    #[test]
    fn nested_affine_flattens() {
        let g = make_gaussian(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let once = apply_affine(&g, &a).unwrap();
        let twice = apply_affine(&once, &a).unwrap();
        match twice.kind() {
            DistributionKind::Affine { inner, matrix } => {
                assert_eq!(inner.kind(), &DistributionKind::Gaussian);
                assert_eq!(matrix[(0, 0)], 4.0);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn mixture_validation() {
        assert!(make_gaussian_mixture(vec![vec![0.0, 0.0]], vec![0.5]).is_err());
        assert!(make_gaussian_mixture(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.5, -0.5]).is_err());
        assert!(make_gaussian_mixture(vec![vec![0.0, 0.0], vec![1.0]], vec![0.5, 0.5]).is_err());
    }
}
