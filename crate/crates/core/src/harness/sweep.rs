//! Parallel seed/horizon sweeps and their aggregation.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, HarnessError};
use super::fit::{fit_scaling, ScalingFit};
use crate::instance::Instance;
use crate::learner::{Evaluator, LearnerRegistry};

/// Environment variable overriding the worker count.
pub const PARALLELISM_ENV: &str = "AUTOBID_PARALLELISM";

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `i`.
pub fn child_seed(base_seed: u64, i: u64) -> u64 {
    base_seed ^ splitmix64(i)
}

/// Outcome of one (horizon, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub regret: f64,
    pub roi_surplus: f64,
    pub budget_slack: f64,
    pub violation: f64,
    pub max_dual: f64,
    pub mean_g1: f64,
    pub mean_g2: f64,
    pub total_budget: f64,
    #[serde(rename = "T1")]
    pub t1: Option<usize>,
    #[serde(rename = "T2")]
    pub t2: usize,
    pub eta_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for a single sample.
    pub stderr: f64,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub runs: usize,
    pub regret: Stat,
    pub roi_surplus: Stat,
    pub budget_slack: Stat,
    pub violation: Stat,
    pub max_dual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub algorithm: String,
    pub instance: String,
    pub gl_opt: f64,
    /// Seconds since the Unix epoch; not part of the reproducible content.
    pub timestamp: u64,
    pub horizons: Vec<HorizonSummary>,
    pub regret_fit: Option<ScalingFit>,
    pub violation_fit: Option<ScalingFit>,
    /// Horizons left out of a fit because their mean metric is not positive.
    pub regret_fit_excluded: Vec<usize>,
    pub violation_fit_excluded: Vec<usize>,
    pub runs: Vec<RunRecord>,
}

impl SweepSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn runs_csv(&self) -> String {
        let mut s = String::from(
            "T,seed,regret,roi_surplus,budget_slack,violation,max_dual,mean_g1,mean_g2,total_budget,T1,T2\n",
        );
        for r in &self.runs {
            let t1 = r.t1.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.horizon,
                r.seed,
                r.regret,
                r.roi_surplus,
                r.budget_slack,
                r.violation,
                r.max_dual,
                r.mean_g1,
                r.mean_g2,
                r.total_budget,
                t1,
                r.t2
            );
        }
        s
    }

    /// Writes `summary.json` and `runs.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), HarnessError> {
        let io = |source| HarnessError::Io {
            path: dir.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("summary.json"), self.to_json()).map_err(io)?;
        std::fs::write(dir.join("runs.csv"), self.runs_csv()).map_err(io)?;
        Ok(())
    }
}

fn worker_count(config: &ExperimentConfig) -> Result<usize, HarnessError> {
    if let Ok(v) = std::env::var(PARALLELISM_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!(
                "{PARALLELISM_ENV} must be a positive integer, got {v:?}"
            ))),
        };
    }
    Ok(config
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

fn fit_positive(points: &[(usize, f64)]) -> (Option<ScalingFit>, Vec<usize>) {
    let excluded: Vec<usize> = points
        .iter()
        .filter(|p| !(p.1 > 0.0))
        .map(|p| p.0)
        .collect();
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(t, y)| (t as f64, y))
        .collect();
    (fit_scaling(&kept).ok(), excluded)
}

/// Runs every (horizon, seed) pair on a bounded worker pool and aggregates.
pub fn run_sweep(
    config: &ExperimentConfig,
    instance: &Instance,
) -> Result<SweepSummary, HarnessError> {
    let registry = LearnerRegistry::default();
    let learner = registry.get(&config.algorithm)?;
    let evaluator = Evaluator::new(instance)?;
    let seeds = config.seed_list();
    let mut horizons = config.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let jobs: Vec<(usize, u64)> = horizons
        .iter()
        .flat_map(|&t| seeds.iter().map(move |&s| (t, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config)?)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let mut runs: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(t, seed)| -> Result<RunRecord, HarnessError> {
                let log = learner.run(instance, &config.learner_config(t, seed))?;
                let m = evaluator.evaluate(&log.rho_bar)?;
                Ok(RunRecord {
                    horizon: t,
                    seed,
                    regret: m.regret,
                    roi_surplus: m.roi_surplus,
                    budget_slack: m.budget_slack,
                    violation: m.violation(),
                    max_dual: log.max_dual(),
                    mean_g1: log.mean_g1(),
                    mean_g2: log.mean_g2(),
                    total_budget: log.total_budget(),
                    t1: log.phase_one_end,
                    t2: log.termination,
                    eta_warning: log.eta_warning,
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    runs.sort_by_key(|r| (r.horizon, r.seed));

    let summaries: Vec<HorizonSummary> = horizons
        .iter()
        .map(|&t| {
            let rs: Vec<&RunRecord> = runs.iter().filter(|r| r.horizon == t).collect();
            let col = |f: fn(&RunRecord) -> f64| {
                Stat::from_samples(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            HorizonSummary {
                horizon: t,
                runs: rs.len(),
                regret: col(|r| r.regret),
                roi_surplus: col(|r| r.roi_surplus),
                budget_slack: col(|r| r.budget_slack),
                violation: col(|r| r.violation),
                max_dual: rs.iter().map(|r| r.max_dual).fold(0.0, f64::max),
            }
        })
        .collect();
    let (regret_fit, regret_fit_excluded) = fit_positive(
        &summaries
            .iter()
            .map(|h| (h.horizon, h.regret.mean))
            .collect::<Vec<_>>(),
    );
    let (violation_fit, violation_fit_excluded) = fit_positive(
        &summaries
            .iter()
            .map(|h| (h.horizon, h.violation.mean))
            .collect::<Vec<_>>(),
    );
    Ok(SweepSummary {
        algorithm: config.algorithm.clone(),
        instance: config.instance.display().to_string(),
        gl_opt: evaluator.gl_opt(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        horizons: summaries,
        regret_fit,
        violation_fit,
        regret_fit_excluded,
        violation_fit_excluded,
        runs,
    })
}
