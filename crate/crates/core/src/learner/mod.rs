//! Online per-channel budget pacing.
//!
//! Each channel runs a UCB bandit over a grid of budget arms, priced by dual
//! variables for the global ROI and budget constraints; the duals follow
//! projected stochastic gradient steps. The two-phase variant first builds
//! an ROI surplus with small fixed budgets and enforces the budget exactly.

mod evaluate;
mod sgd_ucb;
mod sgd_ucb_ii;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use evaluate::{evaluate_output, Evaluator, RunMetrics};
pub use sgd_ucb::{run_sgd_ucb, SgdUcb};
pub use sgd_ucb_ii::{run_sgd_ucb_ii, SgdUcbII};

use crate::benchmarks::{step_size_bound, OracleError};
use crate::channel_oracle::budget_only_totals;
use crate::instance::{
    check_global_roi_feasibility, check_moderate_budgets, check_per_channel_roi_feasibility,
    validate, Instance, InstanceError,
};
use crate::multi_item::{check_support_increasing_marginal, MultiItemError};
use crate::pwl::PwlError;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid learner configuration: {0}")]
    Config(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    MultiItem(#[from] MultiItemError),
}

/// Run parameters; unset fields take horizon-dependent defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub horizon: usize,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(horizon: usize, seed: u64) -> Self {
        Self {
            horizon,
            eta: None,
            delta: None,
            beta: None,
            seed,
        }
    }

    /// `0.5 / sqrt(T)`.
    pub fn default_eta(horizon: usize) -> f64 {
        0.5 / (horizon as f64).sqrt()
    }

    /// `rho * T^(-1/3)`.
    pub fn default_delta(rho: f64, horizon: usize) -> f64 {
        rho * (horizon as f64).powf(-1.0 / 3.0)
    }

    /// `1 / ln T`.
    pub fn default_beta(horizon: usize) -> f64 {
        1.0 / (horizon as f64).ln()
    }

    pub(crate) fn resolve(
        &self,
        instance: &Instance,
        with_beta: bool,
    ) -> Result<Resolved, LearnerError> {
        let t = self.horizon;
        if t < 2 {
            return Err(LearnerError::Config("horizon must be at least 2".into()));
        }
        let rho = instance.rho;
        let eta = self.eta.unwrap_or_else(|| Self::default_eta(t));
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(LearnerError::Config(format!(
                "step size must be positive, got {eta}"
            )));
        }
        let delta = self.delta.unwrap_or_else(|| Self::default_delta(rho, t));
        if !(delta > 0.0 && delta < rho) {
            return Err(LearnerError::Config(format!(
                "arm spacing must lie in (0, {rho}), got {delta}"
            )));
        }
        let arms = budget_arms(rho, delta);
        if arms.len() > t {
            return Err(LearnerError::Config(format!(
                "{} arms need more forced-exploration periods than the horizon {t}",
                arms.len()
            )));
        }
        let beta = if with_beta {
            let b = self.beta.unwrap_or_else(|| Self::default_beta(t).min(rho));
            if !(b > 0.0 && b.is_finite()) {
                return Err(LearnerError::Config(format!(
                    "phase-one budget must be positive, got {b}"
                )));
            }
            Some(b)
        } else {
            None
        };
        let eta_bound = step_size_bound(instance);
        Ok(Resolved {
            eta,
            delta,
            beta,
            arms,
            eta_bound,
        })
    }
}

/// `K = ceil(rho / delta) + 1` arms `a_k = min((k-1) delta, rho)`.
pub fn budget_arms(rho: f64, delta: f64) -> Vec<f64> {
    let ratio = rho / delta;
    let n = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.ceil()
    } as usize;
    (0..=n).map(|k| (k as f64 * delta).min(rho)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Resolved {
    pub eta: f64,
    pub delta: f64,
    pub beta: Option<f64>,
    pub arms: Vec<f64>,
    pub eta_bound: f64,
}

/// Pull counts and running mean conversions per channel and arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub counts: Vec<Vec<u64>>,
    pub means: Vec<Vec<f64>>,
}

impl ArmStats {
    pub fn new(channels: usize, arms: usize) -> Self {
        Self {
            counts: vec![vec![0; arms]; channels],
            means: vec![vec![0.0; arms]; channels],
        }
    }

    pub fn record(&mut self, channel: usize, arm: usize, reward: f64) {
        let n = &mut self.counts[channel][arm];
        *n += 1;
        let mean = &mut self.means[channel][arm];
        *mean += (reward - *mean) / *n as f64;
    }
}

/// Dual variables for the ROI (`lambda`) and budget (`mu`) constraints.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DualState {
    pub lambda: f64,
    pub mu: f64,
}

impl DualState {
    /// Projected gradient step.
    pub fn update(&mut self, g1: f64, g2: f64, eta: f64) {
        self.lambda = (self.lambda - eta * g1).max(0.0);
        self.mu = (self.mu - eta * g2).max(0.0);
    }
}

/// One period of a run. Duals are the values used to choose the budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub t: usize,
    /// True for the fixed-budget phase of the two-phase learner.
    pub warmup: bool,
    pub lambda: f64,
    pub mu: f64,
    pub budgets: Vec<f64>,
    pub arms: Vec<Option<usize>>,
    pub conversions: Vec<f64>,
    pub spends: Vec<f64>,
    pub g1: f64,
    pub g2: f64,
    /// Cumulative budget committed through this period.
    pub balance: f64,
}

/// Full trajectory and summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub algorithm: String,
    pub horizon: usize,
    pub seed: u64,
    pub eta: f64,
    pub delta: f64,
    pub beta: Option<f64>,
    pub arms: Vec<f64>,
    pub eta_bound: f64,
    /// Step size at or above the dual-boundedness ceiling.
    pub eta_warning: bool,
    pub periods: Vec<PeriodRecord>,
    pub stats: ArmStats,
    pub final_duals: DualState,
    /// Time-averaged budgets `(1/T) sum_{t <= T2} rho_{j,t}`.
    pub rho_bar: Vec<f64>,
    /// Last period of the fixed-budget phase.
    pub phase_one_end: Option<usize>,
    /// Last period played.
    pub termination: usize,
}

impl RunLog {
    /// Largest dual value seen over the run, including the final update.
    pub fn max_dual(&self) -> f64 {
        self.periods
            .iter()
            .flat_map(|p| [p.lambda, p.mu])
            .chain([self.final_duals.lambda, self.final_duals.mu])
            .fold(0.0, f64::max)
    }

    /// `(1/T) sum_t g1_t`.
    pub fn mean_g1(&self) -> f64 {
        self.periods.iter().map(|p| p.g1).sum::<f64>() / self.horizon as f64
    }

    /// `(1/T) sum_t g2_t`.
    pub fn mean_g2(&self) -> f64 {
        self.periods.iter().map(|p| p.g2).sum::<f64>() / self.horizon as f64
    }

    /// Total budget committed over all periods played.
    pub fn total_budget(&self) -> f64 {
        self.periods.last().map_or(0.0, |p| p.balance)
    }

    /// Total realized spend over all periods played.
    pub fn total_spend(&self) -> f64 {
        self.periods.iter().flat_map(|p| p.spends.iter()).sum()
    }

    /// One row per period: `t,lambda,mu,rho_1..rho_M,conv_total,spend_total,g1,g2,B`.
    pub fn to_csv(&self) -> String {
        let m = self.rho_bar.len();
        let mut s = String::from("t,lambda,mu");
        for j in 1..=m {
            let _ = write!(s, ",rho_{j}");
        }
        s.push_str(",conv_total,spend_total,g1,g2,B\n");
        for p in &self.periods {
            let _ = write!(s, "{},{},{}", p.t, p.lambda, p.mu);
            for b in &p.budgets {
                let _ = write!(s, ",{b}");
            }
            let conv: f64 = p.conversions.iter().sum();
            let spend: f64 = p.spends.iter().sum();
            let _ = writeln!(s, ",{conv},{spend},{},{},{}", p.g1, p.g2, p.balance);
        }
        s
    }

    pub fn summary(&self, metrics: &RunMetrics) -> RunSummary {
        RunSummary {
            algorithm: self.algorithm.clone(),
            horizon: self.horizon,
            seed: self.seed,
            rho_bar: self.rho_bar.clone(),
            t1: self.phase_one_end,
            t2: self.termination,
            regret: metrics.regret,
            roi_surplus: metrics.roi_surplus,
            budget_slack: metrics.budget_slack,
            max_dual: self.max_dual(),
            eta: self.eta,
            delta: self.delta,
            beta: self.beta,
            eta_warning: self.eta_warning,
        }
    }
}

/// Summary JSON emitted by `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub rho_bar: Vec<f64>,
    #[serde(rename = "T1")]
    pub t1: Option<usize>,
    #[serde(rename = "T2")]
    pub t2: usize,
    pub regret: f64,
    pub roi_surplus: f64,
    pub budget_slack: f64,
    pub max_dual: f64,
    pub eta: f64,
    pub delta: f64,
    pub beta: Option<f64>,
    pub eta_warning: bool,
}

/// Checks the instance assumptions a learner relies on.
pub(crate) fn check_preconditions(
    instance: &Instance,
    per_channel_roi: bool,
) -> Result<(), LearnerError> {
    let v = validate(instance);
    if !v.is_empty() {
        return Err(LearnerError::InvalidInstance(
            v.iter().map(ToString::to_string).collect(),
        ));
    }
    if !check_moderate_budgets(instance)? {
        return Err(LearnerError::Precondition(
            "some outcome's total cost is below the global budget".into(),
        ));
    }
    if !check_global_roi_feasibility(instance) {
        return Err(LearnerError::Precondition(
            "some joint realization has no strictly ROI-feasible auction".into(),
        ));
    }
    if per_channel_roi && !check_per_channel_roi_feasibility(instance) {
        return Err(LearnerError::Precondition(
            "some channel outcome has no strictly ROI-feasible auction".into(),
        ));
    }
    for c in &instance.channels {
        check_support_increasing_marginal(c)?;
    }
    Ok(())
}

/// Bandit and dual state shared by both learners.
pub(crate) struct UcbCore<'a> {
    instance: &'a Instance,
    arms: Vec<f64>,
    eta: f64,
    log_t: f64,
    pub stats: ArmStats,
    pub duals: DualState,
}

impl<'a> UcbCore<'a> {
    pub fn new(instance: &'a Instance, resolved: &Resolved, horizon: usize) -> Self {
        Self {
            instance,
            arms: resolved.arms.clone(),
            eta: resolved.eta,
            log_t: (horizon as f64).ln(),
            stats: ArmStats::new(instance.num_channels(), resolved.arms.len()),
            duals: DualState::default(),
        }
    }

    /// Arm for channel `j` in the `local`-th bandit period (1-based).
    fn choose(&self, j: usize, local: usize) -> usize {
        let k = self.arms.len();
        if local <= k {
            return local - 1;
        }
        let DualState { lambda, mu } = self.duals;
        let price = (lambda * self.instance.gamma + mu + self.instance.alpha) / (1.0 + lambda);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, &a) in self.arms.iter().enumerate() {
            let n = self.stats.counts[j][i];
            assert!(n > 0, "every arm is pulled during forced exploration");
            let score = self.stats.means[j][i] + (2.0 * self.log_t / n as f64).sqrt() - price * a;
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        best
    }

    /// Plays one bandit period and records it.
    pub fn play<R: Rng + ?Sized>(
        &mut self,
        t: usize,
        local: usize,
        rng: &mut R,
        balance: &mut f64,
    ) -> PeriodRecord {
        let inst = self.instance;
        let m = inst.num_channels();
        let chosen: Vec<usize> = (0..m).map(|j| self.choose(j, local)).collect();
        let budgets: Vec<f64> = chosen.iter().map(|&k| self.arms[k]).collect();
        let z = inst.sample(rng);
        let mut conversions = Vec::with_capacity(m);
        let mut spends = Vec::with_capacity(m);
        for j in 0..m {
            let (v, d) = budget_only_totals(z.auctions(inst, j), budgets[j]);
            self.stats.record(j, chosen[j], v);
            conversions.push(v);
            spends.push(d);
        }
        let (g1, g2) = gradients(inst, &conversions, &budgets);
        let before = self.duals;
        self.duals.update(g1, g2, self.eta);
        *balance += budgets.iter().sum::<f64>();
        PeriodRecord {
            t,
            warmup: false,
            lambda: before.lambda,
            mu: before.mu,
            budgets,
            arms: chosen.into_iter().map(Some).collect(),
            conversions,
            spends,
            g1,
            g2,
            balance: *balance,
        }
    }
}

/// `g1 = sum_j (V_j - gamma rho_j)`, `g2 = rho - sum_j rho_j`.
pub(crate) fn gradients(instance: &Instance, conversions: &[f64], budgets: &[f64]) -> (f64, f64) {
    let g1 = conversions
        .iter()
        .zip(budgets)
        .map(|(v, b)| v - instance.gamma * b)
        .sum();
    let g2 = instance.rho - budgets.iter().sum::<f64>();
    (g1, g2)
}

pub(crate) fn averaged_budgets(
    periods: &[PeriodRecord],
    channels: usize,
    horizon: usize,
) -> Vec<f64> {
    let mut bar = vec![0.0; channels];
    for p in periods {
        for (acc, b) in bar.iter_mut().zip(&p.budgets) {
            *acc += b;
        }
    }
    bar.iter().map(|s| s / horizon as f64).collect()
}

/// A named online learner.
pub trait BudgetLearner: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, instance: &Instance, config: &LearnerConfig) -> Result<RunLog, LearnerError>;
}

/// Learners addressable by name.
pub struct LearnerRegistry {
    entries: BTreeMap<&'static str, Box<dyn BudgetLearner>>,
}

impl LearnerRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, l: Box<dyn BudgetLearner>) {
        self.entries.insert(l.name(), l);
    }

    pub fn get(&self, name: &str) -> Result<&dyn BudgetLearner, LearnerError> {
        self.entries
            .get(name)
            .map(|l| l.as_ref())
            .ok_or_else(|| LearnerError::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for LearnerRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(SgdUcb));
        r.register(Box::new(SgdUcbII));
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arm_grid() {
        assert_eq!(budget_arms(1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let a = budget_arms(1.0, 0.3);
        assert_eq!(a.len(), 5);
        assert_eq!(*a.last().unwrap(), 1.0);
        let d = LearnerConfig::default_delta(2.0, 1000);
        assert_eq!(budget_arms(2.0, d).len(), 11);
    }

    #[test]
    fn running_mean() {
        let mut s = ArmStats::new(1, 2);
        for r in [1.0, 2.0, 6.0] {
            s.record(0, 1, r);
        }
        assert_eq!(s.counts[0], vec![0, 3]);
        assert!((s.means[0][1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dual_projection() {
        let mut d = DualState::default();
        d.update(1.0, 2.0, 0.1);
        assert_eq!(d, DualState::default());
        d.update(-1.0, -2.0, 0.5);
        assert_eq!(
            d,
            DualState {
                lambda: 0.5,
                mu: 1.0
            }
        );
    }

    #[test]
    fn registry_names() {
        assert_eq!(
            LearnerRegistry::default().names(),
            vec!["sgd-ucb", "sgd-ucb-ii"]
        );
        assert!(LearnerRegistry::default().get("thompson").is_err());
    }
}
