use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use halfspace_core::analysis::estimate_dis_coefficient;
use halfspace_core::harness::{
    parse_dist, run_experiment, run_gap_benchmark, run_verification_suite, write_records, ExperimentConfig, Level,
};
use halfspace_core::{DistributionSpec, Hypothesis, RandomStream};

#[derive(Parser, Debug)]
#[command(name = "halfspace", version, about = "Active and passive halfspace learning experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Global {
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// gaussian | ball | mixture:<sep>
    #[arg(long, global = true)]
    dist: Option<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// none | massart:<eta> | tsybakov:<alpha>:<tau>
    #[arg(long, global = true)]
    noise: Option<String>,
    /// quick | full
    #[arg(long, global = true)]
    level: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the structural verification suite.
    Verify,
    /// Run one batch of learner runs and write CSV records.
    Learn {
        /// key = value config file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// active | passive | active_noise
        #[arg(long)]
        learner: Option<String>,
        /// Comma list or half-open range `a..b`.
        #[arg(long)]
        seeds: Option<String>,
        /// Extra `key=value` overrides.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Active-vs-passive label benchmark over a halving eps grid.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Number of seeds per (learner, eps).
        #[arg(long, default_value_t = 20)]
        runs: u64,
        /// Comma-separated eps grid.
        #[arg(long, default_value = "0.1,0.05,0.025,0.0125")]
        grid: String,
    },
    /// Capacity curve and disagreement coefficient around a random target.
    Capacity {
        /// Comma-separated disagreement radii.
        #[arg(long, default_value = "0.01,0.02,0.05,0.1,0.2")]
        radii: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad list entry {t:?}")))
        .collect()
}

fn build_config(g: &Global, file: Option<&Path>, extra: &[(&str, String)]) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    let mut set = |k: &str, v: String| cfg.set(k, &v).with_context(|| format!("--{k} {v}"));
    if let Some(v) = &g.dist {
        set("dist", v.clone())?;
    }
    if let Some(v) = g.dim {
        set("dim", v.to_string())?;
    }
    if let Some(v) = g.eps {
        set("eps", v.to_string())?;
    }
    if let Some(v) = g.delta {
        set("delta", v.to_string())?;
    }
    if let Some(v) = &g.noise {
        set("noise", v.clone())?;
    }
    if let Some(v) = &g.out {
        set("out", v.display().to_string())?;
    }
    for (k, v) in extra {
        set(k, v.clone())?;
    }
    Ok(cfg)
}

fn verify(g: &Global) -> Result<bool> {
    let level: Level = g.level.as_deref().unwrap_or("quick").parse()?;
    let specs: Vec<DistributionSpec> = match (&g.dist, g.dim) {
        (Some(d), dim) => vec![parse_dist(d, dim.unwrap_or(2), None)?],
        (None, Some(dim)) => vec![parse_dist("gaussian", dim, None)?],
        (None, None) if level == Level::Quick => vec![parse_dist("gaussian", 2, None)?],
        (None, None) => {
            let mut v = Vec::new();
            for name in ["gaussian", "ball", "mixture:1"] {
                for dim in [2, 8] {
                    v.push(parse_dist(name, dim, None)?);
                }
            }
            v
        }
    };
    let report = run_verification_suite(&specs, level, &RandomStream::new(g.seed.unwrap_or(0), 0));
    let mut out = output(g.out.as_deref())?;
    report.write(&mut out)?;
    out.flush()?;
    if !report.all_pass() {
        eprintln!("{} of {} checks failed", report.failures(), report.checks.len());
    }
    Ok(report.all_pass())
}

fn learn(g: &Global, config: Option<&Path>, learner: Option<&str>, seeds: Option<&str>, set: &[String]) -> Result<bool> {
    let mut extra: Vec<(&str, String)> = Vec::new();
    if let Some(l) = learner {
        extra.push(("learner", l.to_string()));
    }
    if let Some(s) = seeds {
        extra.push(("seeds", s.to_string()));
    } else if let Some(s) = g.seed {
        extra.push(("seeds", s.to_string()));
    }
    for kv in set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {kv:?}");
        };
        extra.push((k.trim(), v.trim().to_string()));
    }
    let cfg = build_config(g, config, &extra)?;
    let records = run_experiment(&cfg)?;
    for r in records.iter().filter(|r| !r.succeeded()) {
        log::warn!("seed {}: {}", r.seed, r.failure.as_deref().unwrap_or(""));
    }
    let mut out = output(cfg.out.as_deref())?;
    write_records(&mut out, &records)?;
    out.flush()?;
    Ok(records.iter().all(|r| r.succeeded()))
}

fn bench(g: &Global, config: Option<&Path>, runs: u64, grid: &str) -> Result<bool> {
    let start = g.seed.unwrap_or(0);
    let seeds = format!("{start}..{}", start + runs);
    let cfg = build_config(g, config, &[("seeds", seeds)])?;
    let grid: Vec<f64> = list(grid)?;
    let report = run_gap_benchmark(&cfg, &grid)?;
    eprintln!("eps,active_labels,passive_labels,active_unlabeled,active_error,passive_error");
    for r in &report.rows {
        eprintln!(
            "{},{},{},{},{:.5},{:.5}",
            r.eps, r.active_labels, r.passive_labels, r.active_unlabeled, r.active_error, r.passive_error
        );
    }
    eprintln!(
        "passive growth {:?}, active growth {:?}, final active/passive {:.4}: {}",
        report.passive_growth,
        report.active_growth,
        report.final_fraction,
        if report.pass { "PASS" } else { "FAIL" }
    );
    let mut out = output(cfg.out.as_deref())?;
    write_records(&mut out, &report.records)?;
    out.flush()?;
    Ok(report.pass)
}

fn capacity(g: &Global, radii: &str, samples: usize) -> Result<bool> {
    let dim = g.dim.unwrap_or(2);
    let spec = parse_dist(g.dist.as_deref().unwrap_or("gaussian"), dim, None)?;
    let radii: Vec<f64> = list(radii)?;
    let eps = g.eps.unwrap_or(radii[0]);
    let rng = RandomStream::new(g.seed.unwrap_or(0), 0);
    let w = Hypothesis::random(dim, &mut rng.child(1))?;
    let curve = estimate_dis_coefficient(&w, eps, &spec, &radii, samples, &rng.child(2))?;
    let mut out = output(g.out.as_deref())?;
    writeln!(out, "r,phi,capacity,half_width")?;
    for p in &curve.points {
        writeln!(out, "{},{},{},{}", p.r, p.phi, p.value, p.half_width)?;
    }
    out.flush()?;
    eprintln!("dis coefficient (sup over r >= {eps}): {}", curve.sup_value);
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.command {
        Command::Verify => verify(g),
        Command::Learn {
            config,
            learner,
            seeds,
            set,
        } => learn(g, config.as_deref(), learner.as_deref(), seeds.as_deref(), set),
        Command::Bench { config, runs, grid } => bench(g, config.as_deref(), *runs, grid),
        Command::Capacity { radii, samples } => capacity(g, radii, *samples),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
