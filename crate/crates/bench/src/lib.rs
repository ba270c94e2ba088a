//! Shared fixtures for the criterion benches.

use halfspace_core::{make_gaussian, sample, DistributionSpec, Hypothesis, LabeledExample, RandomStream};

/// `n` Gaussian points in R^d labeled by a random target, plus that target.
pub fn labeled_gaussian(d: usize, n: usize, seed: u64) -> (Hypothesis, Vec<LabeledExample>) {
    let mut rng = RandomStream::new(seed, 0);
    let target = Hypothesis::random(d, &mut rng).expect("d >= 2");
    let pts = sample(&gaussian(d), n, &mut rng).expect("n >= 1");
    let data = pts
        .into_iter()
        .map(|x| {
            let y = target.classify(&x);
            LabeledExample { x, y }
        })
        .collect();
    (target, data)
}

pub fn gaussian(d: usize) -> DistributionSpec {
    make_gaussian(d).expect("d >= 2")
}
