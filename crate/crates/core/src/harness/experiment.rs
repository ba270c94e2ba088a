use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, LearnerKind};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::Hypothesis;
use crate::learners::{
    margin_active_learn, margin_active_learn_noise, passive_learn, passive_sample_size, LearnResult,
    LearnerOptions, PassiveOptions, Schedule, ScheduleConstants,
};
use crate::oracles::{excess_error, ExcessMethod, LabelOracle, NoiseModel};
use crate::rng::RandomStream;

/// Environment variable setting the number of worker threads.
pub const WORKERS_ENV: &str = "HALFSPACE_WORKERS";

const BASE_HEADER: [&str; 11] = [
    "learner", "dist", "dim", "eps", "delta", "noise", "seed", "labels", "unlabeled", "error", "wall_ms",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub learner: LearnerKind,
    pub dist: String,
    pub dim: usize,
    pub eps: f64,
    pub delta: f64,
    pub noise: NoiseModel,
    pub seed: u64,
    pub labels_used: u64,
    pub unlabeled_used: u64,
    /// Final error against the known target; NaN when the run failed before
    /// producing a hypothesis.
    pub measured_error: f64,
    pub wall_time_ms: u64,
    /// `(measured_error, labels)` per round.
    pub per_round: Vec<(f64, u64)>,
    /// Error message for runs that did not finish normally.
    pub failure: Option<String>,
}

impl ExperimentRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `f` on a pool sized by [`WORKERS_ENV`] (default: all logical CPUs).
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

fn schedule_for(cfg: &ExperimentConfig, constants: ScheduleConstants) -> Result<Schedule> {
    match (cfg.learner, cfg.noise) {
        (LearnerKind::ActiveNoise, NoiseModel::Tsybakov { alpha, .. }) => {
            Schedule::noisy(cfg.dim, cfg.eps, cfg.delta, alpha, constants)
        }
        (LearnerKind::ActiveNoise, _) => Schedule::noisy(cfg.dim, cfg.eps, cfg.delta, 0.0, constants),
        _ => Schedule::realizable(cfg.dim, cfg.eps, cfg.delta, constants),
    }
}

/// One seed of a batch. Streams: target from child 1, learner from child 2,
/// evaluation from child 3 of `(seed, 0)`.
pub fn run_seed(cfg: &ExperimentConfig, spec: &DistributionSpec, seed: u64) -> ExperimentRecord {
    let root = RandomStream::new(seed, 0);
    let mut record = ExperimentRecord {
        learner: cfg.learner,
        dist: spec.name().to_string(),
        dim: cfg.dim,
        eps: cfg.eps,
        delta: cfg.delta,
        noise: cfg.noise,
        seed,
        labels_used: 0,
        unlabeled_used: 0,
        measured_error: f64::NAN,
        wall_time_ms: 0,
        per_round: Vec::new(),
        failure: None,
    };
    let target = match Hypothesis::random(cfg.dim, &mut root.child(1)) {
        Ok(t) => t,
        Err(e) => {
            record.failure = Some(e.to_string());
            return record;
        }
    };
    let mut oracle = LabelOracle::new(target, cfg.noise);
    let mut rng = root.child(2);
    let constants = cfg.schedule.apply(ScheduleConstants::default());
    let options = LearnerOptions::default();
    let start = Instant::now();
    let outcome: Result<LearnResult> = match cfg.learner {
        LearnerKind::Passive => passive_learn(
            spec,
            &mut oracle,
            passive_sample_size(cfg.dim, cfg.eps, cfg.delta, cfg.passive_c),
            &mut rng,
            PassiveOptions {
                whiten: cfg.whiten,
                learner: options,
            },
        ),
        LearnerKind::Active => schedule_for(cfg, constants)
            .and_then(|s| margin_active_learn(spec, &mut oracle, cfg.eps, cfg.delta, &s, &mut rng, options)),
        LearnerKind::ActiveNoise => schedule_for(cfg, constants)
            .and_then(|s| margin_active_learn_noise(spec, &mut oracle, cfg.eps, cfg.delta, &s, &mut rng, options)),
    };
    if cfg.timing {
        record.wall_time_ms = start.elapsed().as_millis() as u64;
    }
    let result = match outcome {
        Ok(r) => Some(r),
        Err(Error::BudgetExhausted { partial, .. }) => {
            record.failure = Some("unlabeled budget exhausted".into());
            Some(*partial)
        }
        Err(e) => {
            record.failure = Some(e.to_string());
            record.labels_used = oracle.queries_used();
            None
        }
    };
    if let Some(r) = result {
        record.labels_used = r.labels_used;
        record.unlabeled_used = r.unlabeled_used;
        record.per_round = r.per_round.iter().map(|p| (p.measured_error, p.labels)).collect();
        match excess_error(
            &r.w_hat,
            &oracle,
            spec,
            cfg.eval_samples,
            &root.child(3),
            ExcessMethod::MonteCarlo,
        ) {
            Ok(e) => record.measured_error = e,
            Err(e) => record.failure = Some(e.to_string()),
        }
    }
    record
}

/// Runs every seed of `cfg`, in parallel, returning records in seed order.
/// Failed seeds are reported in their record and do not stop the batch.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let spec = cfg.spec()?;
    if spec.dim() != cfg.dim {
        return Err(Error::Config("distribution dimension does not match dim".into()));
    }
    Ok(with_workers(|| {
        cfg.seeds
            .par_iter()
            .map(|seed| run_seed(cfg, &spec, *seed))
            .collect()
    }))
}

/// Writes records as CSV; per-round columns extend to the longest run.
pub fn write_records<W: Write>(writer: W, records: &[ExperimentRecord]) -> Result<()> {
    let rounds = records.iter().map(|r| r.per_round.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = BASE_HEADER.iter().map(|s| s.to_string()).collect();
    for k in 1..=rounds {
        header.push(format!("r{k}_err"));
        header.push(format!("r{k}_labels"));
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.learner.to_string(),
            r.dist.clone(),
            r.dim.to_string(),
            r.eps.to_string(),
            r.delta.to_string(),
            r.noise.to_string(),
            r.seed.to_string(),
            r.labels_used.to_string(),
            r.unlabeled_used.to_string(),
            r.measured_error.to_string(),
            r.wall_time_ms.to_string(),
        ];
        for k in 0..rounds {
            match r.per_round.get(k) {
                Some((e, l)) => {
                    row.push(e.to_string());
                    row.push(l.to_string());
                }
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses CSV written by [`write_records`]. Failure messages are not stored
/// in the file; failed runs come back with a NaN error and `failure = None`.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let header = rd.headers()?.clone();
    if header.len() < BASE_HEADER.len() || header.iter().zip(BASE_HEADER).any(|(a, b)| a != b) {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let extra = header.len() - BASE_HEADER.len();
    if extra % 2 != 0 {
        return Err(Error::Config("per-round columns must come in pairs".into()));
    }
    let bad = |field: &str| Error::Config(format!("bad CSV field {field:?}"));
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(s));
        let parse_u = |s: &str| s.parse::<u64>().map_err(|_| bad(s));
        let mut per_round = Vec::new();
        for k in 0..extra / 2 {
            let e = get(BASE_HEADER.len() + 2 * k);
            let l = get(BASE_HEADER.len() + 2 * k + 1);
            if e.is_empty() {
                break;
            }
            per_round.push((parse_f(e)?, parse_u(l)?));
        }
        out.push(ExperimentRecord {
            learner: get(0).parse()?,
            dist: get(1).to_string(),
            dim: parse_u(get(2))? as usize,
            eps: parse_f(get(3))?,
            delta: parse_f(get(4))?,
            noise: get(5).parse()?,
            seed: parse_u(get(6))?,
            labels_used: parse_u(get(7))?,
            unlabeled_used: parse_u(get(8))?,
            measured_error: parse_f(get(9))?,
            wall_time_ms: parse_u(get(10))?,
            per_round,
            failure: None,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            dim: 4,
            eps: 0.1,
            seeds: vec![1, 2, 3],
            eval_samples: 50_000,
            ..Default::default()
        }
    }

    #[test]
    fn one_record_per_seed_in_order() {
        let recs = run_experiment(&small_cfg()).unwrap();
        assert_eq!(recs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![1, 2, 3]);
        for r in &recs {
            assert!(r.succeeded());
            assert!(r.labels_used <= r.unlabeled_used);
            assert!((0.0..=1.0).contains(&r.measured_error));
            assert_eq!(r.wall_time_ms, 0);
        }
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let cfg = small_cfg();
        let a = run_experiment(&cfg).unwrap();
        let mut buf_a = Vec::new();
        write_records(&mut buf_a, &a).unwrap();
        let mut buf_b = Vec::new();
        write_records(&mut buf_b, &run_experiment(&cfg).unwrap()).unwrap();
        assert_eq!(buf_a, buf_b);
        let text = String::from_utf8(buf_a.clone()).unwrap();
        assert!(text.starts_with("learner,dist,dim,eps,delta,noise,seed,labels,unlabeled,error,wall_ms,r1_err,r1_labels"));
        let back = read_records(&buf_a[..]).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn failing_seed_does_not_stop_batch() {
        let mut cfg = small_cfg();
        cfg.schedule.unlabeled_cap_factor = Some(1e-3);
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| !r.succeeded()));
        assert!(recs.iter().all(|r| r.labels_used > 0 && r.measured_error.is_finite()));
    }

    #[test]
    fn empty_seeds_rejected() {
        let cfg = ExperimentConfig {
            seeds: vec![],
            ..Default::default()
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn passive_and_noisy_learners_run() {
        let mut cfg = small_cfg();
        cfg.learner = LearnerKind::Passive;
        let p = run_experiment(&cfg).unwrap();
        assert!(p.iter().all(|r| r.succeeded() && r.per_round.len() == 1));
        cfg.learner = LearnerKind::ActiveNoise;
        cfg.noise = NoiseModel::massart(0.1).unwrap();
        cfg.dim = 3;
        let n = run_experiment(&cfg).unwrap();
        assert!(n.iter().all(|r| r.succeeded()));
    }
}
