//! Exact benchmarks: the global per-auction optimum (GL-OPT), the best
//! budget-lever profile, the best ROI-lever profile, and the dual bound `C_F`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel_oracle::{budget_only_totals, solve_sequence, Lever};
use crate::instance::{validate, ChannelSupport, Instance};
use crate::lp::{simplex_solve, Constraint, LinearProgram, LpError, LpStatus};
use crate::multi_item::{check_support_increasing_marginal, reduce_support, MultiItemError};
use crate::pwl::expected_segments;

/// Enumeration cap on the joint support.
pub const JOINT_ENUMERATION_CAP: usize = 1_000_000;
/// Feasibility tolerance used when checking lever profiles.
pub const LEVER_FEASIBILITY_TOL: f64 = 1e-9;
/// Returned arguments must satisfy every constraint within this tolerance.
pub const ARGUMENT_TOL: f64 = 1e-8;
/// Offset used to bracket every ratio in the ROI-lever grid.
pub const RATIO_BRACKET: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    MultiItem(#[from] MultiItemError),
    #[error("grid search supports at most 3 channels, got {0}")]
    TooManyChannels(usize),
    #[error("grid step must be positive, got {0}")]
    InvalidGridStep(f64),
    #[error("operation requires a finite global budget")]
    UnboundedBudget,
    #[error("no strictly ROI-feasible auction in realization {0:?}")]
    InfeasibleRealization(Vec<usize>),
    #[error(
        "no channel is ROI-feasible in every outcome and the joint support exceeds {0} points"
    )]
    EnumerationCap(usize),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl From<LpStatus> for BenchmarkStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => Self::Optimal,
            LpStatus::Infeasible => Self::Infeasible,
            LpStatus::Unbounded => Self::Unbounded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkArgument {
    /// `allocation[j][z]` lists the fraction bought of every auction (or
    /// impression, flattened by auction) of channel `j` in outcome `z`.
    Allocation(Vec<Vec<Vec<f64>>>),
    Budgets(Vec<f64>),
    TargetRois(Vec<f64>),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub value: f64,
    pub status: BenchmarkStatus,
    pub argument: BenchmarkArgument,
}

impl BenchmarkResult {
    fn without_argument(status: BenchmarkStatus) -> Self {
        Self {
            value: f64::NAN,
            status,
            argument: BenchmarkArgument::None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

fn ensure_valid(instance: &Instance) -> Result<(), OracleError> {
    let v = validate(instance);
    if v.is_empty() {
        Ok(())
    } else {
        Err(OracleError::InvalidInstance(
            v.iter().map(ToString::to_string).collect(),
        ))
    }
}

/// Single-item view of a channel as seen by the budget and ROI levers.
fn lever_support(support: &ChannelSupport) -> Result<ChannelSupport, OracleError> {
    if support.is_multi_item() {
        check_support_increasing_marginal(support)?;
        Ok(reduce_support(support))
    } else {
        Ok(support.clone())
    }
}

// ---------------------------------------------------------------------------
// GL-OPT

/// The global optimum: every auction is bought directly, subject only to the
/// expected ROI and budget constraints. Allocations may depend on each
/// channel's own outcome only, since every coupling is an expectation of a
/// per-channel sum.
pub fn solve_gl_opt(instance: &Instance) -> Result<BenchmarkResult, OracleError> {
    ensure_valid(instance)?;
    let gamma = instance.gamma;
    let alpha = instance.alpha;
    // (channel, outcome, position in flattened list, probability, value, cost, group)
    let mut vars = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (j, ch) in instance.channels.iter().enumerate() {
        for (z, (p, outcome)) in ch.iter().enumerate() {
            match &outcome.impressions {
                None => {
                    for a in &outcome.auctions {
                        vars.push((j, z, p, a.value, a.cost));
                    }
                }
                Some(imps) => {
                    for group in imps {
                        let mut members = Vec::new();
                        for a in &group.impressions {
                            members.push(vars.len());
                            vars.push((j, z, p, a.value, a.cost));
                        }
                        groups.push(members);
                    }
                }
            }
        }
    }
    let mut lp = LinearProgram::new(vars.len());
    let mut roi = Vec::with_capacity(vars.len());
    let mut budget = Vec::with_capacity(vars.len());
    for (i, &(_, _, p, v, d)) in vars.iter().enumerate() {
        lp.objective[i] = p * (v - alpha * d);
        lp.bounds[i] = (0.0, 1.0);
        roi.push((i, p * (v - gamma * d)));
        budget.push((i, p * d));
    }
    lp.add_constraint(Constraint::ge(roi, 0.0));
    if instance.rho.is_finite() {
        lp.add_constraint(Constraint::le(budget, instance.rho));
    }
    for members in groups {
        lp.add_constraint(Constraint::le(
            members.into_iter().map(|i| (i, 1.0)).collect(),
            1.0,
        ));
    }
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(BenchmarkResult::without_argument(sol.status.into()));
    }
    check_argument(&lp, &sol.values)?;
    let mut alloc: Vec<Vec<Vec<f64>>> = instance
        .channels
        .iter()
        .map(|c| vec![Vec::new(); c.outcomes.len()])
        .collect();
    for (&(j, z, ..), &x) in vars.iter().zip(&sol.values) {
        alloc[j][z].push(x);
    }
    Ok(BenchmarkResult {
        value: sol.objective,
        status: BenchmarkStatus::Optimal,
        argument: BenchmarkArgument::Allocation(alloc),
    })
}

fn check_argument(lp: &LinearProgram, x: &[f64]) -> Result<(), OracleError> {
    let worst = lp.max_violation(x);
    if worst > ARGUMENT_TOL {
        return Err(OracleError::Numeric(format!(
            "optimal point violates a constraint by {worst}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Budget lever

/// Best per-channel budget profile. Each channel's curve is split into its
/// linear segments, one fill variable per segment; concavity makes the
/// segment fill exact. Budgets count fully toward spend. With an unbounded
/// global budget each channel is capped at its largest total cost.
pub fn solve_ch_opt_budget(instance: &Instance) -> Result<BenchmarkResult, OracleError> {
    ensure_valid(instance)?;
    let gamma = instance.gamma;
    let alpha = instance.alpha;
    let mut owner = Vec::new();
    let mut lp_obj = Vec::new();
    let mut lens = Vec::new();
    let mut roi = Vec::new();
    let mut base = 0.0;
    for (j, ch) in instance.channels.iter().enumerate() {
        let support = lever_support(ch)?;
        let cap = if instance.rho.is_finite() {
            instance.rho
        } else {
            support.max_total_cost()
        };
        let table = expected_segments(&support, cap);
        base += table.base_value;
        for seg in table.segments {
            let i = owner.len();
            owner.push(j);
            lp_obj.push(seg.value_slope - alpha);
            lens.push(seg.len());
            roi.push((i, seg.value_slope - gamma));
        }
    }
    let mut lp = LinearProgram::new(owner.len());
    lp.objective = lp_obj;
    lp.bounds = lens.iter().map(|&l| (0.0, l)).collect();
    lp.add_constraint(Constraint::ge(roi, -base));
    if instance.rho.is_finite() {
        lp.add_constraint(Constraint::le(
            (0..owner.len()).map(|i| (i, 1.0)).collect(),
            instance.rho,
        ));
    }
    let sol = simplex_solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(BenchmarkResult::without_argument(sol.status.into()));
    }
    check_argument(&lp, &sol.values)?;
    let mut budgets = vec![0.0; instance.num_channels()];
    for (&j, &y) in owner.iter().zip(&sol.values) {
        budgets[j] += y;
    }
    Ok(BenchmarkResult {
        value: base + sol.objective,
        status: BenchmarkStatus::Optimal,
        argument: BenchmarkArgument::Budgets(budgets),
    })
}

// ---------------------------------------------------------------------------
// ROI lever

/// Expected objective, conversion and spend of a full lever profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverEvaluation {
    pub objective: f64,
    pub conversion: f64,
    pub spend: f64,
    pub feasible: bool,
}

/// Evaluates per-channel levers and checks the global constraints.
pub fn evaluate_levers(
    instance: &Instance,
    levers: &[Lever],
) -> Result<LeverEvaluation, OracleError> {
    let mut conversion = 0.0;
    let mut spend = 0.0;
    for (ch, &lever) in instance.channels.iter().zip(levers) {
        let out = solve_sequence(&lever_support(ch)?, lever);
        conversion += out.conversion;
        spend += out.spend;
    }
    Ok(LeverEvaluation {
        objective: conversion - instance.alpha * spend,
        conversion,
        spend,
        feasible: globally_feasible(instance, conversion, spend),
    })
}

fn globally_feasible(instance: &Instance, conversion: f64, spend: f64) -> bool {
    let scale = conversion.abs().max(1.0);
    conversion - instance.gamma * spend >= -LEVER_FEASIBILITY_TOL * scale
        && (!instance.rho.is_finite()
            || spend <= instance.rho + LEVER_FEASIBILITY_TOL * instance.rho.max(1.0))
}

/// Candidate target ROIs for one channel: a regular grid up to the largest
/// finite ratio plus one step, augmented with every ratio and its neighbours.
pub fn roi_grid(support: &ChannelSupport, grid_step: f64) -> Vec<f64> {
    let ratios: Vec<f64> = support
        .outcomes
        .iter()
        .flat_map(|o| o.auctions.iter())
        .filter(|a| a.cost > 0.0)
        .map(|a| a.value / a.cost)
        .collect();
    let top = ratios.iter().copied().fold(0.0, f64::max) + grid_step;
    let steps = (top / grid_step).ceil() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|k| k as f64 * grid_step).collect();
    for r in ratios {
        grid.extend(
            [r - RATIO_BRACKET, r, r + RATIO_BRACKET]
                .into_iter()
                .filter(|&g| g >= 0.0),
        );
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Best per-channel target-ROI profile (unbounded per-channel budgets) by
/// exhaustive grid search over at most three channels.
pub fn solve_ch_opt_roi(
    instance: &Instance,
    grid_step: f64,
) -> Result<BenchmarkResult, OracleError> {
    ensure_valid(instance)?;
    let m = instance.num_channels();
    if m > 3 {
        return Err(OracleError::TooManyChannels(m));
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(OracleError::InvalidGridStep(grid_step));
    }
    // Distinct (target, conversion, spend) responses per channel, smallest target kept.
    let mut options: Vec<Vec<(f64, f64, f64)>> = Vec::with_capacity(m);
    for ch in &instance.channels {
        let support = lever_support(ch)?;
        let mut seen: Vec<(f64, f64, f64)> = Vec::new();
        for g in roi_grid(&support, grid_step) {
            let out = solve_sequence(&support, Lever::roi_only(g));
            if !seen.iter().any(|&(_, c, s)| {
                c.to_bits() == out.conversion.to_bits() && s.to_bits() == out.spend.to_bits()
            }) {
                seen.push((g, out.conversion, out.spend));
            }
        }
        options.push(seen);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; m];
    loop {
        let conversion: f64 = (0..m).map(|j| options[j][idx[j]].1).sum();
        let spend: f64 = (0..m).map(|j| options[j][idx[j]].2).sum();
        if globally_feasible(instance, conversion, spend) {
            let obj = conversion - instance.alpha * spend;
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, (0..m).map(|j| options[j][idx[j]].0).collect()));
            }
        }
        if !advance(&mut idx, &options.iter().map(Vec::len).collect::<Vec<_>>()) {
            break;
        }
    }
    Ok(match best {
        Some((value, rois)) => BenchmarkResult {
            value,
            status: BenchmarkStatus::Optimal,
            argument: BenchmarkArgument::TargetRois(rois),
        },
        None => BenchmarkResult::without_argument(BenchmarkStatus::Infeasible),
    })
}

/// Mixed-radix increment; false once every combination has been visited.
fn advance(idx: &mut [usize], radix: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < radix[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

// ---------------------------------------------------------------------------
// Dual bound

/// Bound on the dual iterates and the matching step-size ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualBound {
    pub cf: f64,
    pub step_size_bound: f64,
    /// Smallest Slater margin over realizations.
    pub min_margin: f64,
    /// Largest total value over joint realizations.
    pub max_joint_value: f64,
}

/// Largest step size for which the dual iterates stay bounded.
pub fn step_size_bound(instance: &Instance) -> f64 {
    let m = instance.num_channels() as f64;
    let vbar = instance.max_channel_value();
    let rho = instance.rho;
    1.0 / (m * ((vbar + instance.gamma * rho).powi(2) + rho * rho).sqrt())
}

/// Slater margin of realization `z` using its lowest-index strictly feasible
/// channel with half of its first auction's cost (capped by the budget).
fn slater_margin(instance: &Instance, z: &[usize]) -> Option<f64> {
    let gamma = instance.gamma;
    let outcomes: Vec<_> = instance
        .channels
        .iter()
        .zip(z)
        .map(|(c, &k)| &c.outcomes[k].auctions)
        .collect();
    let star = outcomes
        .iter()
        .position(|a| a.first().is_some_and(|f| f.strictly_roi_feasible(gamma)))?;
    let small = 0.5 * outcomes[star][0].cost.min(instance.rho);
    let value: f64 = outcomes
        .iter()
        .enumerate()
        .map(|(j, a)| budget_only_totals(a, if j == star { small } else { 0.0 }).0)
        .sum();
    Some((value - gamma * small).min(instance.rho - small))
}

/// Per-channel margin bound used when the joint support is too large to enumerate.
fn uniform_channel_margin(instance: &Instance, j: usize) -> f64 {
    let gamma = instance.gamma;
    instance.channels[j]
        .outcomes
        .iter()
        .map(|o| {
            let first = o.auctions[0];
            let small = 0.5 * first.cost.min(instance.rho);
            let v = budget_only_totals(&o.auctions, small).0;
            (v - gamma * small).min(instance.rho - small)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn compute_cf(instance: &Instance) -> Result<DualBound, OracleError> {
    ensure_valid(instance)?;
    if !instance.rho.is_finite() {
        return Err(OracleError::UnboundedBudget);
    }
    let sizes: Vec<usize> = instance.channels.iter().map(|c| c.outcomes.len()).collect();
    let min_margin = if instance.joint_support_size() <= JOINT_ENUMERATION_CAP {
        let mut idx = vec![0usize; sizes.len()];
        let mut worst = f64::INFINITY;
        loop {
            let margin = slater_margin(instance, &idx)
                .ok_or_else(|| OracleError::InfeasibleRealization(idx.clone()))?;
            worst = worst.min(margin);
            if !advance(&mut idx, &sizes) {
                break;
            }
        }
        worst
    } else {
        let j = instance
            .channels
            .iter()
            .position(|c| c.roi_feasible(instance.gamma))
            .ok_or(OracleError::EnumerationCap(JOINT_ENUMERATION_CAP))?;
        uniform_channel_margin(instance, j)
    };
    if !(min_margin > 0.0) {
        return Err(OracleError::Numeric(format!(
            "Slater margin {min_margin} is not positive"
        )));
    }
    let max_joint_value = instance.max_joint_value();
    Ok(DualBound {
        cf: 1.0 + (max_joint_value + 1.0) / min_margin,
        step_size_bound: step_size_bound(instance),
        min_margin,
        max_joint_value,
    })
}

// ---------------------------------------------------------------------------
// Registry

/// A named benchmark computed from the instance alone.
pub trait Benchmark: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, instance: &Instance) -> Result<BenchmarkResult, OracleError>;
}

pub struct GlobalOptimum;

impl Benchmark for GlobalOptimum {
    fn name(&self) -> &'static str {
        "gl"
    }

    fn description(&self) -> &'static str {
        "global per-auction optimum"
    }

    fn solve(&self, instance: &Instance) -> Result<BenchmarkResult, OracleError> {
        solve_gl_opt(instance)
    }
}

pub struct BudgetLeverOptimum;

impl Benchmark for BudgetLeverOptimum {
    fn name(&self) -> &'static str {
        "chb"
    }

    fn description(&self) -> &'static str {
        "best per-channel budget profile"
    }

    fn solve(&self, instance: &Instance) -> Result<BenchmarkResult, OracleError> {
        solve_ch_opt_budget(instance)
    }
}

pub struct RoiLeverOptimum {
    pub grid_step: f64,
}

impl Default for RoiLeverOptimum {
    fn default() -> Self {
        Self { grid_step: 0.01 }
    }
}

impl Benchmark for RoiLeverOptimum {
    fn name(&self) -> &'static str {
        "chr"
    }

    fn description(&self) -> &'static str {
        "best per-channel target-ROI profile (grid search)"
    }

    fn solve(&self, instance: &Instance) -> Result<BenchmarkResult, OracleError> {
        solve_ch_opt_roi(instance, self.grid_step)
    }
}

/// Benchmarks addressable by name.
pub struct BenchmarkRegistry {
    entries: BTreeMap<&'static str, Box<dyn Benchmark>>,
}

impl BenchmarkRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_grid_step(grid_step: f64) -> Self {
        let mut r = Self::empty();
        r.register(Box::new(GlobalOptimum));
        r.register(Box::new(BudgetLeverOptimum));
        r.register(Box::new(RoiLeverOptimum { grid_step }));
        r
    }

    pub fn register(&mut self, b: Box<dyn Benchmark>) {
        self.entries.insert(b.name(), b);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Benchmark> {
        self.entries.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for BenchmarkRegistry {
    fn default() -> Self {
        Self::with_grid_step(RoiLeverOptimum::default().grid_step)
    }
}
