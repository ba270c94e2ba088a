use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::analysis::{
    check_angle_bound, check_band_mass, check_isotropy, check_light_tails, check_margin_decay, check_tail,
    estimate_capacity, estimate_dis_coefficient, hypothesis_at_angle, CheckResult,
};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::geometry::Hypothesis;
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(Error::Config(format!("unknown level {other:?}"))),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Quick => "quick",
            Level::Full => "full",
        })
    }
}

struct Sizes {
    n: usize,
    trials: usize,
    pair_n: usize,
}

impl Level {
    fn sizes(self) -> Sizes {
        match self {
            Level::Quick => Sizes {
                n: 200_000,
                trials: 20,
                pair_n: 20_000,
            },
            Level::Full => Sizes {
                n: 1_000_000,
                trials: 100,
                pair_n: 100_000,
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.checks {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }
}

fn failed(name: String, e: &Error) -> CheckResult {
    log::warn!("{name}: {e}");
    CheckResult {
        name,
        pass: false,
        estimate: f64::NAN,
        bound: f64::NAN,
        ci: f64::NAN,
    }
}

fn push_all(out: &mut Vec<CheckResult>, name: String, r: Result<Vec<CheckResult>>) {
    match r {
        Ok(v) => out.extend(v),
        Err(e) => out.push(failed(name, &e)),
    }
}

/// Runs every applicable check on one distribution. Distributions not
/// flagged isotropic only get the isotropy audit, which is expected to fail
/// for them.
fn checks_for(spec: &DistributionSpec, level: Level, rng: &RandomStream) -> Vec<CheckResult> {
    let sz = level.sizes();
    let mut out = Vec::new();
    push_all(&mut out, format!("isotropy/{spec}"), check_isotropy(spec, 20, sz.n, &rng.child(0)));
    if !spec.is_isotropic() {
        return out;
    }
    push_all(&mut out, format!("tail/{spec}"), check_tail(spec, &[1.0, 2.0, 3.0], sz.n, &rng.child(1)));
    push_all(
        &mut out,
        format!("band/{spec}"),
        check_band_mass(spec, &[0.05, 0.1, 0.25], sz.n, &rng.child(2)),
    );
    push_all(
        &mut out,
        format!("light_tail/{spec}"),
        check_light_tails(spec, &[2.0, 3.0], sz.n, &rng.child(3)),
    );

    let name = format!("angle_bound/{spec}");
    match check_angle_bound(spec, sz.trials, sz.pair_n, &rng.child(4)) {
        Ok(r) => out.push(r.to_check(&name)),
        Err(e) => out.push(failed(name, &e)),
    }

    let eta = 0.2;
    let name = format!("margin_decay/{spec}/eta={eta}");
    let decay = (|| {
        let mut r = rng.child(5);
        let v = Hypothesis::random(spec.dim(), &mut r)?;
        let u = hypothesis_at_angle(&v, eta, &mut r)?;
        // Half steps keep at least two nonzero points for bounded supports,
        // where the mass vanishes once b >= radius·sin(eta).
        let grid: Vec<f64> = (2..=8).map(|k| k as f64 * 0.5 * eta).collect();
        check_margin_decay(&u, &v, spec, &grid, sz.n, &r.child(0))
    })();
    match decay {
        Ok(r) => out.push(r.to_check(&name)),
        Err(e) => out.push(failed(name, &e)),
    }

    let w = Hypothesis::axis(spec.dim(), 0).expect("dim >= 2");
    if spec.is_standard_gaussian() && spec.dim() == 2 {
        for (i, r) in [0.002, 0.01, 0.05].iter().enumerate() {
            let name = format!("capacity/{spec}/r={r}");
            match estimate_capacity(&w, *r, spec, sz.n, &rng.child(6 + i as u64)) {
                Ok(c) => out.push(CheckResult {
                    name,
                    pass: (c.value - 2.0).abs() <= c.half_width,
                    estimate: c.value,
                    bound: 2.0,
                    ci: c.half_width,
                }),
                Err(e) => out.push(failed(name, &e)),
            }
        }
    } else {
        let eps: f64 = 0.01;
        let ceiling = 3.0 * (spec.dim() as f64).sqrt() * (1.0 / eps).ln();
        let name = format!("dis_coefficient/{spec}");
        match estimate_dis_coefficient(&w, eps, spec, &[0.01, 0.02, 0.05, 0.1, 0.2], sz.n, &rng.child(9)) {
            Ok(c) => out.push(CheckResult {
                name,
                pass: c.sup_value <= ceiling,
                estimate: c.sup_value,
                bound: ceiling,
                ci: c.points.iter().map(|p| p.half_width).fold(0.0, f64::max),
            }),
            Err(e) => out.push(failed(name, &e)),
        }
    }
    out
}

/// Structural checks over `dists`; distribution `i` uses child stream `i`.
pub fn run_verification_suite(dists: &[DistributionSpec], level: Level, rng: &RandomStream) -> VerificationReport {
    let checks = dists
        .iter()
        .enumerate()
        .flat_map(|(i, spec)| checks_for(spec, level, &rng.child(i as u64)))
        .collect();
    VerificationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{apply_affine, make_gaussian};
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn quick_gaussian_plane_passes() {
        let r = run_verification_suite(&[make_gaussian(2).unwrap()], Level::Quick, &RandomStream::new(1, 0));
        let mut buf = Vec::new();
        r.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(r.all_pass(), "{text}");
        assert!(text.lines().all(|l| l.starts_with("CHECK ")));
        assert!(r.checks.len() >= 12);
    }

    #[test]
    fn non_isotropic_negative_control() {
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 1.0]));
        let spec = apply_affine(&make_gaussian(2).unwrap(), &a).unwrap();
        let r = run_verification_suite(&[spec], Level::Quick, &RandomStream::new(2, 0));
        assert!(!r.all_pass());
        assert_eq!(r.failures(), 1);
    }

    #[test]
    fn level_parse() {
        assert_eq!("quick".parse::<Level>().unwrap(), Level::Quick);
        assert!("medium".parse::<Level>().is_err());
    }
}
