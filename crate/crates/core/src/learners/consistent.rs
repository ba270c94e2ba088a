use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};

use crate::error::{Error, Result};
use crate::geometry::{norm, Hypothesis, LabeledExample};

/// Margins at or below this are treated as "no strict separator".
const FEASIBILITY_TOL: f64 = 1e-11;
const SEED_CONSTRAINTS: usize = 48;
const CUTS_PER_PASS: usize = 64;

/// Unit `w` with `y·(w·x) > 0` on every example with `x != 0`.
///
/// Solves `max t` subject to `y_i (w·x_i) / ||x_i|| >= t`, `|w_j| <= 1`,
/// `0 <= t <= 1` by row generation: the LP starts from a spread-out subset
/// of the examples and the most violated remaining rows are added until the
/// normalized solution classifies everything correctly. Zero vectors carry no
/// constraint and are skipped.
pub fn find_consistent(examples: &[LabeledExample]) -> Result<Hypothesis> {
    let first = examples.first().ok_or(Error::EmptyExamples)?;
    let d = first.x.len();
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    // Unit-normalized, label-signed rows.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(examples.len());
    for ex in examples {
        Error::check_dim(d, ex.x.len())?;
        let n = norm(&ex.x);
        if n > 0.0 {
            let s = ex.y.sign() / n;
            rows.push(ex.x.iter().map(|v| v * s).collect());
        }
    }
    if rows.is_empty() {
        return Err(Error::DegenerateExamples);
    }

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<Variable> = (0..d).map(|_| problem.add_var(0.0, (-1.0, 1.0))).collect();
    let t = problem.add_var(1.0, (0.0, 1.0));
    let mut in_lp = vec![false; rows.len()];
    let stride = (rows.len() / SEED_CONSTRAINTS).max(1);
    for i in (0..rows.len()).step_by(stride) {
        problem.add_constraint(row_expr(&rows[i], &w, t), ComparisonOp::Ge, 0.0);
        in_lp[i] = true;
    }
    let mut solution = problem
        .solve()
        .map_err(|e| Error::Solver(e.to_string()))?;

    loop {
        if solution.objective() <= FEASIBILITY_TOL {
            return Err(Error::Infeasible);
        }
        let cand: Vec<f64> = w.iter().map(|v| solution[*v]).collect();
        let mut violated: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (dot_rows(r, &cand), i))
            .filter(|(m, _)| *m <= 0.0)
            .collect();
        if violated.is_empty() {
            return Hypothesis::new(cand);
        }
        violated.sort_by(|a, b| a.0.total_cmp(&b.0));
        let fresh: Vec<usize> = violated
            .iter()
            .map(|(_, i)| *i)
            .filter(|i| !in_lp[*i])
            .take(CUTS_PER_PASS)
            .collect();
        if fresh.is_empty() {
            // Every violated row is already in the LP: the optimum margin is
            // below the solver's working precision.
            return polish(&rows, cand).ok_or_else(|| {
                Error::Solver(format!(
                    "separating margin {:.3e} below solver precision",
                    solution.objective()
                ))
            });
        }
        for i in fresh {
            in_lp[i] = true;
            solution = add_row(solution, &rows[i], &w, t)?;
        }
    }
}

fn row_expr(row: &[f64], w: &[Variable], t: Variable) -> LinearExpr {
    let mut e = LinearExpr::empty();
    for (v, c) in w.iter().zip(row) {
        e.add(*v, *c);
    }
    e.add(t, -1.0);
    e
}

fn add_row(solution: Solution, row: &[f64], w: &[Variable], t: Variable) -> Result<Solution> {
    solution
        .add_constraint(row_expr(row, w, t), ComparisonOp::Ge, 0.0)
        .map_err(|e| Error::Solver(e.to_string()))
}

#[inline]
fn dot_rows(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Perceptron passes from an almost-feasible start; returns a strictly
/// consistent direction if one is reached.
fn polish(rows: &[Vec<f64>], mut w: Vec<f64>) -> Option<Hypothesis> {
    let scale = norm(&w).max(1e-300);
    w.iter_mut().for_each(|v| *v /= scale);
    for _ in 0..200 {
        let mut clean = true;
        for r in rows {
            if dot_rows(r, &w) <= 0.0 {
                clean = false;
                let step = 1e-3 * norm(&w);
                w.iter_mut().zip(r).for_each(|(wi, ri)| *wi += step * ri);
            }
        }
        if clean {
            return Hypothesis::new(w).ok();
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_gaussian, sample};
    use crate::geometry::Label;
    use crate::rng::RandomStream;
    use proptest::prelude::*;

    fn ex(x: &[f64], y: i32) -> LabeledExample {
        LabeledExample::new(x.to_vec(), Label::from_sign(y).unwrap()).unwrap()
    }

    fn labeled_by(target: &Hypothesis, pts: Vec<Vec<f64>>) -> Vec<LabeledExample> {
        pts.into_iter()
            .map(|x| {
                let y = target.classify(&x);
                LabeledExample { x, y }
            })
            .collect()
    }

    #[test]
    fn single_constraint() {
        let w = find_consistent(&[ex(&[0.0, 1.0], 1)]).unwrap();
        assert!(w.as_slice()[1] > 0.0);
    }

    #[test]
    fn gaussian_sample_is_separated() {
        let mut rng = RandomStream::new(1, 0);
        let target = Hypothesis::random(5, &mut rng).unwrap();
        let pts = sample(&make_gaussian(5).unwrap(), 200, &mut rng).unwrap();
        let data = labeled_by(&target, pts);
        let w = find_consistent(&data).unwrap();
        assert!(data.iter().all(|e| e.signed_margin(w.as_slice()) > 0.0));
    }

    #[test]
    fn contradictory_labels_are_infeasible() {
        let r = find_consistent(&[ex(&[1.0, 0.0], 1), ex(&[1.0, 0.0], -1)]);
        assert!(matches!(r, Err(Error::Infeasible)));
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        assert!(matches!(find_consistent(&[]), Err(Error::EmptyExamples)));
        assert!(matches!(
            find_consistent(&[ex(&[0.0, 0.0], 1), ex(&[0.0, 0.0], -1)]),
            Err(Error::DegenerateExamples)
        ));
        assert!(matches!(
            find_consistent(&[ex(&[1.0, 0.0], 1), ex(&[1.0, 0.0, 2.0], -1)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn large_thin_band_sample() {
        // Points packed into a thin band around the target boundary, as in
        // late rounds of the active learner.
        let mut rng = RandomStream::new(2, 0);
        let target = Hypothesis::random(8, &mut rng).unwrap();
        let pts: Vec<Vec<f64>> = sample(&make_gaussian(8).unwrap(), 200_000, &mut rng)
            .unwrap()
            .into_iter()
            .filter(|x| target.margin(x).abs() < 2e-3)
            .collect();
        assert!(pts.len() > 100);
        let data = labeled_by(&target, pts);
        let w = find_consistent(&data).unwrap();
        assert!(data.iter().all(|e| e.signed_margin(w.as_slice()) > 0.0));
    }

    #[test]
    fn large_passive_sample() {
        let mut rng = RandomStream::new(3, 0);
        let target = Hypothesis::random(5, &mut rng).unwrap();
        let pts = sample(&make_gaussian(5).unwrap(), 25_000, &mut rng).unwrap();
        let data = labeled_by(&target, pts);
        let w = find_consistent(&data).unwrap();
        assert!(data.iter().all(|e| e.signed_margin(w.as_slice()) > 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn never_violates_a_constraint(seed in any::<u64>(), d in 2usize..7, n in 1usize..60) {
            let mut rng = RandomStream::new(seed, 0);
            let target = Hypothesis::random(d, &mut rng).unwrap();
            let pts = sample(&make_gaussian(d).unwrap(), n, &mut rng).unwrap();
            let data = labeled_by(&target, pts);
            let w = find_consistent(&data).unwrap();
            prop_assert!((norm(w.as_slice()) - 1.0).abs() < 1e-9);
            for e in &data {
                prop_assert!(e.signed_margin(w.as_slice()) > 0.0);
            }
        }
    }
}
