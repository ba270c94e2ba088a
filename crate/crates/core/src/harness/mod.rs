//! Configuration, batch orchestration, CSV output, the verification suite
//! and the active-vs-passive label benchmark.

mod config;
mod experiment;
mod gap;
mod verify;

pub use config::{
    parse_dist, read_matrix, ExperimentConfig, LearnerKind, ScheduleOverrides, DEFAULT_EVAL_SAMPLES,
    DEFAULT_PASSIVE_C,
};
pub use experiment::{read_records, run_experiment, run_seed, with_workers, write_records, ExperimentRecord, WORKERS_ENV};
pub use gap::{
    median, run_gap_benchmark, GapReport, GapRow, ACTIVE_GROWTH_CEILING, FINAL_FRACTION_CEILING,
    PASSIVE_GROWTH_FLOOR,
};
pub use verify::{run_verification_suite, Level, VerificationReport};
