use nalgebra::{DMatrix, DVector};

use super::{apply_affine, DistributionSpec};
use crate::error::{Error, Result};
use crate::geometry::Hypothesis;

const MAX_CONDITION: f64 = 1e12;

/// Estimated inverse square root of the second-moment matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct WhiteningTransform {
    matrix: DMatrix<f64>,
    n_used: usize,
}

/// Estimates `M = S^{-1/2}` where `S` is the empirical second-moment matrix
/// of `samples`. Requires at least `10·d²` samples.
pub fn estimate_whitening(samples: &[Vec<f64>]) -> Result<WhiteningTransform> {
    let d = samples.first().map(Vec::len).unwrap_or(0);
    if samples.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let needed = 10 * d * d;
    if samples.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: samples.len(),
        });
    }
    let mut s = DMatrix::<f64>::zeros(d, d);
    for x in samples {
        Error::check_dim(d, x.len())?;
        let v = DVector::from_column_slice(x);
        s.ger(1.0, &v, &v, 1.0);
    }
    s /= samples.len() as f64;
    let eig = s.symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if !(lmin > 0.0) || lmax / lmin > MAX_CONDITION {
        let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
        return Err(Error::RankDeficient { condition });
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let mut matrix = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    // Symmetrize away rounding noise.
    matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(WhiteningTransform {
        matrix,
        n_used: samples.len(),
    })
}

impl WhiteningTransform {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Maps a halfspace learned on whitened points back to the original
    /// space: `v·(M x) = (Mᵀ v)·x`.
    pub fn pull_back(&self, v: &Hypothesis) -> Result<Hypothesis> {
        Error::check_dim(self.dim(), v.dim())?;
        let w = self.matrix.transpose() * DVector::from_column_slice(v.as_slice());
        Hypothesis::new(w.as_slice().to_vec())
    }

    /// Distribution of whitened draws from `spec`.
    pub fn whiten_spec(&self, spec: &DistributionSpec) -> Result<DistributionSpec> {
        apply_affine(spec, &self.matrix)
    }
}
