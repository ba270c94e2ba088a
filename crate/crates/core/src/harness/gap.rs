use super::config::{ExperimentConfig, LearnerKind};
use super::experiment::{run_experiment, ExperimentRecord};
use crate::error::{Error, Result};

/// Minimum growth of median passive labels per halving of eps.
pub const PASSIVE_GROWTH_FLOOR: f64 = 1.6;
/// Maximum growth of median active labels per halving of eps.
pub const ACTIVE_GROWTH_CEILING: f64 = 1.25;
/// Maximum ratio of active to passive labels at the finest eps.
pub const FINAL_FRACTION_CEILING: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct GapRow {
    pub eps: f64,
    pub active_labels: f64,
    pub passive_labels: f64,
    pub active_unlabeled: f64,
    pub active_error: f64,
    pub passive_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    /// One row of medians per eps, in grid order.
    pub rows: Vec<GapRow>,
    pub records: Vec<ExperimentRecord>,
    /// Ratio of consecutive median label counts.
    pub passive_growth: Vec<f64>,
    pub active_growth: Vec<f64>,
    /// Active over passive median labels at the last eps.
    pub final_fraction: f64,
    pub pass: bool,
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn ratios(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] / w[0]).collect()
}

/// Active and passive runs over `eps_grid` (each a halving of the previous),
/// everything else taken from `base`.
pub fn run_gap_benchmark(base: &ExperimentConfig, eps_grid: &[f64]) -> Result<GapReport> {
    if eps_grid.len() < 2 {
        return Err(Error::Config("gap benchmark needs at least two eps values".into()));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for &eps in eps_grid {
        let mut medians = [(0.0, 0.0, 0.0); 2];
        for (slot, learner) in [LearnerKind::Active, LearnerKind::Passive].into_iter().enumerate() {
            let cfg = ExperimentConfig {
                eps,
                learner,
                ..base.clone()
            };
            let recs = run_experiment(&cfg)?;
            medians[slot] = (
                median(recs.iter().map(|r| r.labels_used as f64).collect()),
                median(recs.iter().map(|r| r.unlabeled_used as f64).collect()),
                median(recs.iter().map(|r| r.measured_error).collect()),
            );
            records.extend(recs);
        }
        rows.push(GapRow {
            eps,
            active_labels: medians[0].0,
            passive_labels: medians[1].0,
            active_unlabeled: medians[0].1,
            active_error: medians[0].2,
            passive_error: medians[1].2,
        });
    }
    let passive_growth = ratios(&rows.iter().map(|r| r.passive_labels).collect::<Vec<_>>());
    let active_growth = ratios(&rows.iter().map(|r| r.active_labels).collect::<Vec<_>>());
    let last = rows.last().expect("nonempty grid");
    let final_fraction = last.active_labels / last.passive_labels;
    let pass = passive_growth.iter().all(|g| *g >= PASSIVE_GROWTH_FLOOR)
        && active_growth.iter().all(|g| *g <= ACTIVE_GROWTH_CEILING)
        && final_fraction <= FINAL_FRACTION_CEILING;
    Ok(GapReport {
        rows,
        records,
        passive_growth,
        active_growth,
        final_fraction,
        pass,
    })
}
