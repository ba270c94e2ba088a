use super::{
    constrained_erm, find_consistent, LearnResult, LearnerOptions, QueryRecord, RoundSummary, Schedule,
};
use crate::distributions::{DistributionSpec, Sampler};
use crate::error::{Error, Result};
use crate::geometry::{Hypothesis, LabeledExample};
use crate::oracles::{excess_error, ExcessMethod, LabelOracle};
use crate::rng::RandomStream;

const EVAL_STREAM: u64 = 0xe7a1;

fn check_inputs(dist: &DistributionSpec, oracle: &LabelOracle, eps: f64, delta: f64) -> Result<()> {
    Error::check_dim(dist.dim(), oracle.target().dim())?;
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::param(format!("eps {eps} outside (0, 1/4)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param(format!("delta {delta} outside (0, 1)")));
    }
    if dist.dim() < 4 {
        log::warn!(
            "d = {} is below the dimension (4) the label-complexity guarantee assumes",
            dist.dim()
        );
    }
    Ok(())
}

/// Shared bookkeeping for one learner run.
struct Run<'a> {
    dist: &'a DistributionSpec,
    sampler: Sampler<'a>,
    oracle: &'a mut LabelOracle,
    options: LearnerOptions,
    eval_rng: RandomStream,
    start_queries: u64,
    unlabeled: u64,
    per_round: Vec<RoundSummary>,
    trace: Option<Vec<QueryRecord>>,
}

impl<'a> Run<'a> {
    fn new(dist: &'a DistributionSpec, oracle: &'a mut LabelOracle, rng: &RandomStream, options: LearnerOptions) -> Self {
        let start_queries = oracle.queries_used();
        Self {
            dist,
            sampler: dist.sampler(),
            oracle,
            options,
            eval_rng: rng.child(EVAL_STREAM),
            start_queries,
            unlabeled: 0,
            per_round: Vec::new(),
            trace: options.trace.then(Vec::new),
        }
    }

    fn labels_used(&self) -> u64 {
        self.oracle.queries_used() - self.start_queries
    }

    /// Draws `m` points without filtering and labels all of them.
    fn draw_unconditioned(&mut self, m: usize, round: usize, rng: &mut RandomStream, into: &mut Vec<LabeledExample>) -> Result<()> {
        for _ in 0..m {
            let x = self.sampler.draw_vec(rng);
            self.unlabeled += 1;
            let y = self.oracle.label(&x, rng)?;
            if let Some(t) = self.trace.as_mut() {
                t.push(QueryRecord {
                    round,
                    x: x.clone(),
                    label: y,
                    band_margin: None,
                    band: None,
                });
            }
            into.push(LabeledExample { x, y });
        }
        Ok(())
    }

    /// Draws until `m` points with `|center·x| < band` have been labeled.
    /// Returns the number of draws, or `None` when the cap was hit first.
    #[allow(clippy::too_many_arguments)]
    fn draw_in_band(
        &mut self,
        m: usize,
        center: &Hypothesis,
        band: f64,
        cap: u64,
        round: usize,
        rng: &mut RandomStream,
        into: &mut Vec<LabeledExample>,
    ) -> Result<Option<u64>> {
        let mut drawn = 0u64;
        let mut got = 0usize;
        while got < m {
            if drawn >= cap {
                return Ok(None);
            }
            let x = self.sampler.draw_vec(rng);
            drawn += 1;
            self.unlabeled += 1;
            let margin = center.margin(&x).abs();
            if margin >= band {
                continue;
            }
            let y = self.oracle.label(&x, rng)?;
            got += 1;
            if let Some(t) = self.trace.as_mut() {
                t.push(QueryRecord {
                    round,
                    x: x.clone(),
                    label: y,
                    band_margin: Some(margin),
                    band: Some(band),
                });
            }
            into.push(LabeledExample { x, y });
        }
        Ok(Some(drawn))
    }

    fn evaluate(&self, w: &Hypothesis) -> Result<f64> {
        excess_error(
            w,
            self.oracle,
            self.dist,
            self.options.round_eval_samples.max(1),
            &self.eval_rng,
            ExcessMethod::ClosedForm,
        )
    }

    fn record(&mut self, round: usize, w: &Hypothesis, labels: u64, unlabeled: u64) -> Result<()> {
        let measured_error = self.evaluate(w)?;
        self.per_round.push(RoundSummary {
            round,
            measured_error,
            labels,
            unlabeled,
        });
        Ok(())
    }

    fn finish(self, w_hat: Hypothesis) -> LearnResult {
        LearnResult {
            w_hat,
            labels_used: self.oracle.queries_used() - self.start_queries,
            unlabeled_used: self.unlabeled,
            per_round: self.per_round,
            below_theorem_dimension: self.dist.dim() < 4,
            trace: self.trace,
        }
    }

    fn exhausted(self, round: usize, drawn: u64, cap: u64, w: Hypothesis) -> Error {
        Error::BudgetExhausted {
            round,
            drawn,
            cap,
            partial: Box::new(self.finish(w)),
        }
    }
}

/// Margin-based active learning in the realizable case.
///
/// Round 1 labels `m_1` unfiltered draws into the working set. In round `k`
/// the learner fits a unit hypothesis `w_k` consistent with the whole working
/// set, then (if `k < s`) keeps drawing points, discarding those with
/// `|w_k·x| >= b_k` and labeling the rest, until `m_{k+1}` new labels have
/// been added. The result is `w_s`.
pub fn margin_active_learn(
    dist: &DistributionSpec,
    oracle: &mut LabelOracle,
    eps: f64,
    delta: f64,
    schedule: &Schedule,
    rng: &mut RandomStream,
    options: LearnerOptions,
) -> Result<LearnResult> {
    check_inputs(dist, oracle, eps, delta)?;
    if !oracle.noise().is_noiseless() {
        return Err(Error::param("margin_active_learn needs a noiseless oracle"));
    }
    let s = schedule.rounds();
    let mut run = Run::new(dist, oracle, rng, options);
    let mut working: Vec<LabeledExample> = Vec::with_capacity(schedule.total_labels());

    run.draw_unconditioned(schedule.labels(1), 1, rng, &mut working)?;
    let mut round_labels = run.labels_used();
    let mut round_unlabeled = run.unlabeled;
    let mut k = 1;
    loop {
        let w_k = find_consistent(&working)?;
        run.record(k, &w_k, round_labels, round_unlabeled)?;
        if k == s {
            return Ok(run.finish(w_k));
        }
        let (labels_before, unlabeled_before) = (run.labels_used(), run.unlabeled);
        let cap = schedule.unlabeled_cap(k + 1);
        match run.draw_in_band(schedule.labels(k + 1), &w_k, schedule.band(k), cap, k + 1, rng, &mut working)? {
            Some(_) => {}
            None => return Err(run.exhausted(k + 1, cap, cap, w_k)),
        }
        round_labels = run.labels_used() - labels_before;
        round_unlabeled = run.unlabeled - unlabeled_before;
        k += 1;
    }
}

/// Margin-based active learning under label noise.
///
/// Starts from a random unit `w_0` and `m_1` unfiltered labels. In round `k`
/// it fits `w_k` by approximate ERM over the angular ball of radius `r_k`
/// around `w_{k-1}` with slack `eps_k`, clears the working set, and (if
/// `k < s`) collects `m_{k+1}` labels from the band `|w_k·x| < b_k`.
pub fn margin_active_learn_noise(
    dist: &DistributionSpec,
    oracle: &mut LabelOracle,
    eps: f64,
    delta: f64,
    schedule: &Schedule,
    rng: &mut RandomStream,
    options: LearnerOptions,
) -> Result<LearnResult> {
    check_inputs(dist, oracle, eps, delta)?;
    let s = schedule.rounds();
    if schedule.radius(1).is_none() || schedule.tolerance(1).is_none() {
        return Err(Error::param("noisy learner needs a schedule with radii and tolerances"));
    }
    let mut w_prev = Hypothesis::random(dist.dim(), rng)?;
    let mut run = Run::new(dist, oracle, rng, options);
    let mut working: Vec<LabeledExample> = Vec::with_capacity(schedule.labels(1));

    run.draw_unconditioned(schedule.labels(1), 1, rng, &mut working)?;
    let mut round_labels = run.labels_used();
    let mut round_unlabeled = run.unlabeled;
    let mut k = 1;
    loop {
        let radius = schedule.radius(k).expect("checked above");
        let tol = schedule.tolerance(k).expect("checked above");
        let w_k = constrained_erm(&working, &w_prev, radius, tol)?;
        run.record(k, &w_k, round_labels, round_unlabeled)?;
        if k == s {
            return Ok(run.finish(w_k));
        }
        working.clear();
        let (labels_before, unlabeled_before) = (run.labels_used(), run.unlabeled);
        let cap = schedule.unlabeled_cap(k + 1);
        match run.draw_in_band(schedule.labels(k + 1), &w_k, schedule.band(k), cap, k + 1, rng, &mut working)? {
            Some(_) => {}
            None => return Err(run.exhausted(k + 1, cap, cap, w_k)),
        }
        round_labels = run.labels_used() - labels_before;
        round_unlabeled = run.unlabeled - unlabeled_before;
        w_prev = w_k;
        k += 1;
    }
}
