//! Margin-based active learning and passive ERM for homogeneous halfspaces
//! under isotropic log-concave and nearly log-concave distributions, with
//! Monte Carlo checks of the geometry these learners depend on.
//!
//! Everything random takes an explicit [`RandomStream`]; a `(seed, stream)`
//! pair reproduces its draws bit for bit.

pub mod analysis;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod learners;
pub mod montecarlo;
pub mod oracles;
pub mod rng;

pub use distributions::{
    apply_affine, estimate_whitening, make_beta_mixture, make_gaussian, make_gaussian_mixture, make_uniform_ball,
    sample, DistributionKind, DistributionSpec, WhiteningTransform,
};
pub use error::{Error, Result};
pub use geometry::{angle, dis_membership, predict, rotate_towards, AngularBall, Hypothesis, Label, LabeledExample};
pub use learners::{
    constrained_erm, find_consistent, margin_active_learn, margin_active_learn_noise, passive_learn,
    passive_sample_size, LearnResult, LearnerOptions, PassiveOptions, QueryRecord, RoundSummary, Schedule,
    ScheduleConstants,
};
pub use oracles::{excess_error, ExcessMethod, LabelOracle, NoiseModel};
pub use rng::RandomStream;
