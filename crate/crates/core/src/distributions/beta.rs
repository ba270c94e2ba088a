/// Largest midpoint defect `(h(a) + h(b)) / 2 - h((a + b) / 2)` of a log
/// density `h` over a uniform grid on `[lo, hi]`, floored at zero. A density
/// is log-concave exactly when this is zero on every interval.
pub fn midpoint_log_concavity_defect<F: Fn(f64) -> f64>(h: F, lo: f64, hi: f64, points: usize) -> f64 {
    assert!(points >= 3 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    // Midpoints of grid pairs land on the half-step grid.
    let half: Vec<f64> = (0..2 * points - 1)
        .map(|i| h(lo + 0.5 * step * i as f64))
        .collect();
    let mut worst = 0.0f64;
    for i in 0..points {
        for j in i + 1..points {
            let defect = 0.5 * (half[2 * i] + half[2 * j]) - half[i + j];
            worst = worst.max(defect);
        }
    }
    worst
}

/// Defect of the marginal along the mixture axis of the isotropized
/// two-component mixture with means `±separation/2`.
pub fn mixture_axis_beta(separation: f64) -> f64 {
    let half = separation / 2.0;
    let scale = 1.0 / (1.0 + half * half).sqrt();
    let mu = half * scale;
    let var = scale * scale;
    let h = |x: f64| {
        let a = -(x - mu).powi(2) / (2.0 * var);
        let b = -(x + mu).powi(2) / (2.0 * var);
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln()
    };
    let reach = mu + 6.0 * scale;
    midpoint_log_concavity_defect(h, -reach, reach, 601)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_log_density_has_no_defect() {
        assert_eq!(midpoint_log_concavity_defect(|x| -x * x, -3.0, 3.0, 101), 0.0);
    }

    #[test]
    fn close_mixture_is_log_concave() {
        // Equal-variance mixtures stay log-concave while the mean gap is at
        // most twice the standard deviation.
        assert!(mixture_axis_beta(1.0) < 1e-12);
        assert!(mixture_axis_beta(2.0) < 1e-9);
    }

    #[test]
    fn well_separated_mixture_has_positive_defect() {
        let b3 = mixture_axis_beta(3.0);
        let b5 = mixture_axis_beta(5.0);
        assert!(b3 > 0.0);
        assert!(b5 > b3);
        // Bimodal midpoint dip of the symmetric mixture at 0 vs its modes.
        let half = 2.5f64;
        let s = 1.0 / (1.0 + half * half).sqrt();
        let mu = half * s;
        let h = |x: f64| {
            let a = -(x - mu).powi(2) / (2.0 * s * s);
            let b = -(x + mu).powi(2) / (2.0 * s * s);
            (a.exp() + b.exp()).ln()
        };
        // Reflect the right mode through 0 to get a lower bound on the defect.
        let grid_max = (0..2000)
            .map(|i| i as f64 * 3.0 / 2000.0)
            .map(|x| h(x) - h(0.0))
            .fold(0.0f64, f64::max);
        assert!(b5 + 1e-3 >= grid_max);
    }
}
