use super::{find_consistent, LearnResult, LearnerOptions, QueryRecord, RoundSummary};
use crate::distributions::{estimate_whitening, DistributionSpec};
use crate::error::{Error, Result};
use crate::geometry::LabeledExample;
use crate::oracles::{excess_error, ExcessMethod, LabelOracle};
use crate::rng::RandomStream;

const EVAL_STREAM: u64 = 0xe7a1;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PassiveOptions {
    /// Estimate a whitening map from this many extra unlabeled draws, learn in
    /// whitened coordinates and map the result back. Draws count towards
    /// `unlabeled_used`.
    pub whiten: Option<usize>,
    pub learner: LearnerOptions,
}

/// Default passive sample size `ceil(c (d + ln(1/delta)) / eps)`.
pub fn passive_sample_size(d: usize, eps: f64, delta: f64, c: f64) -> usize {
    (c * (d as f64 + (1.0 / delta).ln()) / eps).ceil() as usize
}

/// Labels `m` unconditioned draws and returns a consistent hypothesis.
pub fn passive_learn(
    dist: &DistributionSpec,
    oracle: &mut LabelOracle,
    m: usize,
    rng: &mut RandomStream,
    options: PassiveOptions,
) -> Result<LearnResult> {
    Error::check_dim(dist.dim(), oracle.target().dim())?;
    if m == 0 {
        return Err(Error::param("passive sample size must be at least 1"));
    }
    let start = oracle.queries_used();
    let mut sampler = dist.sampler();
    let mut unlabeled = 0u64;

    let whitening = match options.whiten {
        Some(n) => {
            let pts: Vec<Vec<f64>> = (0..n).map(|_| sampler.draw_vec(rng)).collect();
            unlabeled += n as u64;
            Some(estimate_whitening(&pts)?)
        }
        None => None,
    };

    let mut trace = options.learner.trace.then(Vec::new);
    let mut examples = Vec::with_capacity(m);
    for _ in 0..m {
        let x = sampler.draw_vec(rng);
        unlabeled += 1;
        let y = oracle.label(&x, rng)?;
        if let Some(t) = trace.as_mut() {
            t.push(QueryRecord {
                round: 1,
                x: x.clone(),
                label: y,
                band_margin: None,
                band: None,
            });
        }
        let x = match &whitening {
            Some(t) => t.apply(&x),
            None => x,
        };
        examples.push(LabeledExample { x, y });
    }

    let w = find_consistent(&examples)?;
    let w_hat = match &whitening {
        Some(t) => t.pull_back(&w)?,
        None => w,
    };
    let labels_used = oracle.queries_used() - start;
    let measured_error = excess_error(
        &w_hat,
        oracle,
        dist,
        options.learner.round_eval_samples.max(1),
        &rng.child(EVAL_STREAM),
        ExcessMethod::ClosedForm,
    )?;
    Ok(LearnResult {
        w_hat,
        labels_used,
        unlabeled_used: unlabeled,
        per_round: vec![RoundSummary {
            round: 1,
            measured_error,
            labels: labels_used,
            unlabeled,
        }],
        below_theorem_dimension: dist.dim() < 4,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{apply_affine, make_gaussian};
    use crate::geometry::Hypothesis;
    use nalgebra::{DMatrix, DVector};

    fn run(spec: &DistributionSpec, m: usize, seed: u64, options: PassiveOptions) -> (LearnResult, LabelOracle) {
        let mut rng = RandomStream::new(seed, 0);
        let target = Hypothesis::random(spec.dim(), &mut rng.child(1)).unwrap();
        let mut oracle = LabelOracle::realizable(target);
        let r = passive_learn(spec, &mut oracle, m, &mut rng, options).unwrap();
        (r, oracle)
    }

    #[test]
    fn sample_size_formula() {
        assert_eq!(passive_sample_size(5, 0.05, 0.1, 40.0), (40.0 * (5.0 + 10f64.ln()) / 0.05).ceil() as usize);
    }

    #[test]
    fn single_point() {
        let spec = make_gaussian(3).unwrap();
        let (r, oracle) = run(&spec, 1, 1, PassiveOptions::default());
        assert_eq!(r.labels_used, 1);
        assert_eq!(oracle.queries_used(), 1);
        assert_eq!(r.unlabeled_used, 1);
    }

    #[test]
    fn deterministic() {
        let spec = make_gaussian(4).unwrap();
        let (a, _) = run(&spec, 300, 2, PassiveOptions::default());
        let (b, _) = run(&spec, 300, 2, PassiveOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn learns_with_default_size() {
        let spec = make_gaussian(5).unwrap();
        let m = passive_sample_size(5, 0.05, 0.1, 40.0);
        let (r, _) = run(&spec, m, 3, PassiveOptions::default());
        assert!(r.per_round[0].measured_error <= 0.05);
    }

    #[test]
    fn whitening_counts_extra_draws_and_learns() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[4.0, 1.0, 1.0]));
        let spec = apply_affine(&make_gaussian(3).unwrap(), &a).unwrap();
        let options = PassiveOptions {
            whiten: Some(2_000),
            ..Default::default()
        };
        let (r, _) = run(&spec, 2_000, 4, options);
        assert_eq!(r.labels_used, 2_000);
        assert_eq!(r.unlabeled_used, 4_000);
        assert!(r.per_round[0].measured_error <= 0.05);
    }

    #[test]
    fn zero_labels_rejected() {
        let spec = make_gaussian(3).unwrap();
        let mut oracle = LabelOracle::realizable(Hypothesis::axis(3, 0).unwrap());
        let r = passive_learn(&spec, &mut oracle, 0, &mut RandomStream::new(0, 0), PassiveOptions::default());
        assert!(r.is_err());
    }
}
