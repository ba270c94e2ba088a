//! Block-parallel Monte Carlo over a distribution.
//!
//! Draws are split into fixed-size blocks, block `b` using child stream `b`
//! of the caller's stream, and partial results are merged in block order.
//! Results are therefore identical for any thread count.

use rayon::prelude::*;

use crate::distributions::DistributionSpec;
use crate::rng::RandomStream;

const BLOCK: usize = 1 << 14;

pub fn monte_carlo<A, I, F, M>(
    spec: &DistributionSpec,
    n: usize,
    rng: &RandomStream,
    init: I,
    fold: F,
    merge: M,
) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[f64]) + Sync,
    M: Fn(A, A) -> A,
{
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.child(b as u64);
            let mut sampler = spec.sampler();
            let mut x = vec![0.0; spec.dim()];
            let mut acc = init();
            let len = BLOCK.min(n - b * BLOCK);
            for _ in 0..len {
                sampler.draw(&mut stream, &mut x);
                fold(&mut acc, &x);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(init(), merge)
}

/// Number of draws (out of `n`) satisfying `pred`.
pub fn count<P>(spec: &DistributionSpec, n: usize, rng: &RandomStream, pred: P) -> u64
where
    P: Fn(&[f64]) -> bool + Sync,
{
    monte_carlo(
        spec,
        n,
        rng,
        || 0u64,
        |acc, x| {
            if pred(x) {
                *acc += 1
            }
        },
        |a, b| a + b,
    )
}

/// Mean of `f` over `n` draws.
pub fn mean<F>(spec: &DistributionSpec, n: usize, rng: &RandomStream, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let total = monte_carlo(spec, n, rng, || 0.0f64, |acc, x| *acc += f(x), |a, b| a + b);
    total / n as f64
}
