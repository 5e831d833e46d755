//! Problem instances: channels with finite value/cost supports, the global
//! target ROI and budget, and the optional private cost.
//!
//! Instances are read from and written to JSON:
//!
//! ```text
//! { "gamma": 1.0, "rho": 2.0 | "inf", "alpha": 0.0,
//!   "channels": [ { "probs": [0.5, 0.5],
//!                   "outcomes": [ { "values": [..], "costs": [..] }, .. ] } ] }
//! ```
//!
//! An outcome may instead (or additionally) carry `"impressions"`: one list of
//! `{"value", "cost"}` entries per auction, ordered by position. The auction's
//! single-item view is then its first impression.

use std::fmt;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multi_item::MultiAuction;

/// Probability mass must sum to one within this tolerance.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Relative tolerance under which two value-to-cost ratios count as tied.
pub const RATIO_TIE_TOL: f64 = 1e-12;
/// Step used by [`Instance::perturb_ties`].
pub const TIE_PERTURBATION: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read instance file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance schema error: {0}")]
    Schema(String),
    #[error("operation requires a finite global budget")]
    UnboundedBudget,
}

/// One auction seen by a channel: expected conversion and the spend needed to win it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Auction {
    pub value: f64,
    pub cost: f64,
}

impl Auction {
    pub fn new(value: f64, cost: f64) -> Self {
        Self { value, cost }
    }

    /// Value-to-cost ratio; zero-cost auctions have ratio `+inf`.
    pub fn ratio(&self) -> f64 {
        if self.cost == 0.0 {
            f64::INFINITY
        } else {
            self.value / self.cost
        }
    }

    /// ROI surplus `v - gamma * d` contributed by winning the whole auction.
    pub fn roi_surplus(&self, gamma: f64) -> f64 {
        self.value - gamma * self.cost
    }

    pub fn strictly_roi_feasible(&self, gamma: f64) -> bool {
        self.value > gamma * self.cost
    }
}

/// One element of a channel's support: the auctions of a single period.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Single-item view, sorted by decreasing value-to-cost ratio.
    pub auctions: Vec<Auction>,
    /// Per-auction impressions for multi-item channels. `auctions[n]` is the
    /// first impression of `impressions[n]`.
    pub impressions: Option<Vec<MultiAuction>>,
}

impl Outcome {
    pub fn single(auctions: Vec<Auction>) -> Self {
        Self {
            auctions,
            impressions: None,
        }
    }

    pub fn from_pairs(values: &[f64], costs: &[f64]) -> Self {
        Self::single(
            values
                .iter()
                .zip(costs)
                .map(|(&v, &d)| Auction::new(v, d))
                .collect(),
        )
    }

    pub fn multi(impressions: Vec<MultiAuction>) -> Self {
        let auctions = impressions
            .iter()
            .map(|a| {
                a.impressions
                    .first()
                    .copied()
                    .unwrap_or(Auction::new(0.0, 0.0))
            })
            .collect();
        Self {
            auctions,
            impressions: Some(impressions),
        }
    }

    pub fn total_value(&self) -> f64 {
        self.auctions.iter().map(|a| a.value).sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.auctions.iter().map(|a| a.cost).sum()
    }
}

/// Finite support of one channel together with its probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSupport {
    pub outcomes: Vec<Outcome>,
    pub probs: Vec<f64>,
}

impl ChannelSupport {
    pub fn new(outcomes: Vec<Outcome>, probs: Vec<f64>) -> Self {
        Self { outcomes, probs }
    }

    /// Support with a single, certain outcome.
    pub fn deterministic(outcome: Outcome) -> Self {
        Self::new(vec![outcome], vec![1.0])
    }

    /// Support with equally likely outcomes.
    pub fn uniform(outcomes: Vec<Outcome>) -> Self {
        let p = 1.0 / outcomes.len() as f64;
        let probs = vec![p; outcomes.len()];
        Self::new(outcomes, probs)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Outcome)> {
        self.probs.iter().copied().zip(self.outcomes.iter())
    }

    /// Largest total cost over the support.
    pub fn max_total_cost(&self) -> f64 {
        self.outcomes
            .iter()
            .map(Outcome::total_cost)
            .fold(0.0, f64::max)
    }

    pub fn max_total_value(&self) -> f64 {
        self.outcomes
            .iter()
            .map(Outcome::total_value)
            .fold(0.0, f64::max)
    }

    pub fn is_multi_item(&self) -> bool {
        self.outcomes.iter().any(|o| o.impressions.is_some())
    }

    /// Every outcome has an auction with `v > gamma * d`.
    pub fn roi_feasible(&self, gamma: f64) -> bool {
        self.outcomes.iter().all(|o| outcome_roi_feasible(o, gamma))
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

fn outcome_roi_feasible(outcome: &Outcome, gamma: f64) -> bool {
    outcome
        .auctions
        .iter()
        .any(|a| a.strictly_roi_feasible(gamma))
}

/// A full problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub channels: Vec<ChannelSupport>,
    /// Global target ROI.
    pub gamma: f64,
    /// Global budget; `f64::INFINITY` for an unbounded budget.
    pub rho: f64,
    /// Private cost per unit of spend, in `[0, gamma]`.
    pub alpha: f64,
    /// Accept equal value-to-cost ratios inside an outcome.
    pub allow_ties: bool,
    /// Accept auctions with zero value and zero cost.
    pub allow_null_auctions: bool,
}

impl Instance {
    pub fn new(channels: Vec<ChannelSupport>, gamma: f64, rho: f64) -> Self {
        Self {
            channels,
            gamma,
            rho,
            alpha: 0.0,
            allow_ties: false,
            allow_null_auctions: false,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Per-channel conversion bound: largest total value of any outcome of any channel.
    pub fn max_channel_value(&self) -> f64 {
        self.channels
            .iter()
            .map(ChannelSupport::max_total_value)
            .fold(0.0, f64::max)
    }

    /// Largest total value over joint realizations (product support).
    pub fn max_joint_value(&self) -> f64 {
        self.channels
            .iter()
            .map(ChannelSupport::max_total_value)
            .sum()
    }

    /// Size of the joint support, saturating.
    pub fn joint_support_size(&self) -> usize {
        self.channels
            .iter()
            .fold(1usize, |acc, c| acc.saturating_mul(c.outcomes.len()))
    }

    pub fn is_multi_item(&self) -> bool {
        self.channels.iter().any(ChannelSupport::is_multi_item)
    }

    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RawInstance::from(self)).expect("instance serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Sorts every outcome by decreasing value-to-cost ratio (zero-cost first).
    /// Impression groups move with their first impression.
    pub fn sort_by_ratio(&mut self) {
        for channel in &mut self.channels {
            for outcome in &mut channel.outcomes {
                let mut order: Vec<usize> = (0..outcome.auctions.len()).collect();
                order.sort_by(|&a, &b| {
                    compare_ratio_desc(&outcome.auctions[a], &outcome.auctions[b])
                });
                outcome.auctions = order.iter().map(|&i| outcome.auctions[i]).collect();
                if let Some(imps) = &mut outcome.impressions {
                    *imps = order.iter().map(|&i| imps[i].clone()).collect();
                }
            }
        }
    }

    /// Breaks ratio ties by lowering the ratio of the `n`-th auction by
    /// `n * TIE_PERTURBATION` (values shift by `n * eps * cost`).
    /// Call after [`Instance::sort_by_ratio`].
    pub fn perturb_ties(&mut self) {
        for channel in &mut self.channels {
            for outcome in &mut channel.outcomes {
                for (n, a) in outcome.auctions.iter_mut().enumerate() {
                    if a.cost > 0.0 {
                        a.value -= n as f64 * TIE_PERTURBATION * a.cost;
                    }
                }
                if let Some(imps) = &mut outcome.impressions {
                    for (group, a) in imps.iter_mut().zip(&outcome.auctions) {
                        if let Some(first) = group.impressions.first_mut() {
                            first.value = a.value;
                        }
                    }
                }
            }
        }
    }

    /// Draws one outcome per channel, independently across channels.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Realization {
        Realization {
            outcome_indices: self.channels.iter().map(|c| c.sample_index(rng)).collect(),
        }
    }
}

fn compare_ratio_desc(a: &Auction, b: &Auction) -> std::cmp::Ordering {
    b.ratio()
        .partial_cmp(&a.ratio())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Draws one realization. Reproducible given the RNG state.
pub fn sample<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> Realization {
    instance.sample(rng)
}

/// One period's sampled outcome index per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub outcome_indices: Vec<usize>,
}

impl Realization {
    pub fn outcome<'a>(&self, instance: &'a Instance, channel: usize) -> &'a Outcome {
        &instance.channels[channel].outcomes[self.outcome_indices[channel]]
    }

    pub fn auctions<'a>(&self, instance: &'a Instance, channel: usize) -> &'a [Auction] {
        &self.outcome(instance, channel).auctions
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NoChannels,
    Gamma,
    Budget,
    Alpha,
    EmptySupport,
    ProbabilityLength,
    NonPositiveProbability,
    ProbabilitySum,
    AuctionCount,
    NonFinite,
    NegativeValue,
    NegativeCost,
    NullAuction,
    RatioOrdering,
    RatioTie,
    Impressions,
}

/// One invariant violation with its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub channel: Option<usize>,
    pub outcome: Option<usize>,
    pub auction: Option<usize>,
    pub message: String,
}

impl Violation {
    fn global(kind: ViolationKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            channel: None,
            outcome: None,
            auction: None,
            message: message.into(),
        }
    }

    fn at(
        kind: ViolationKind,
        channel: usize,
        outcome: Option<usize>,
        auction: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            kind,
            channel: Some(channel),
            outcome,
            auction,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut coords = Vec::new();
        if let Some(c) = self.channel {
            coords.push(format!("channel {c}"));
        }
        if let Some(o) = self.outcome {
            coords.push(format!("outcome {o}"));
        }
        if let Some(a) = self.auction {
            coords.push(format!("auction {a}"));
        }
        if coords.is_empty() {
            write!(f, "{:?}: {}", self.kind, self.message)
        } else {
            write!(
                f,
                "{:?} at {}: {}",
                self.kind,
                coords.join(", "),
                self.message
            )
        }
    }
}

/// Reports every invariant violation of `instance`. Empty means valid.
pub fn validate(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if instance.channels.is_empty() {
        out.push(Violation::global(
            ViolationKind::NoChannels,
            "instance has no channels",
        ));
    }
    if !(instance.gamma.is_finite() && instance.gamma > 0.0) {
        out.push(Violation::global(
            ViolationKind::Gamma,
            format!(
                "target ROI must be positive and finite, got {}",
                instance.gamma
            ),
        ));
    }
    if instance.rho.is_nan() || instance.rho <= 0.0 {
        out.push(Violation::global(
            ViolationKind::Budget,
            format!("budget must be positive or inf, got {}", instance.rho),
        ));
    }
    if !(instance.alpha >= 0.0 && instance.alpha <= instance.gamma) {
        out.push(Violation::global(
            ViolationKind::Alpha,
            format!(
                "private cost must lie in [0, gamma={}], got {}",
                instance.gamma, instance.alpha
            ),
        ));
    }
    for (j, channel) in instance.channels.iter().enumerate() {
        validate_channel(instance, j, channel, &mut out);
    }
    out
}

fn validate_channel(
    instance: &Instance,
    j: usize,
    channel: &ChannelSupport,
    out: &mut Vec<Violation>,
) {
    if channel.outcomes.is_empty() {
        out.push(Violation::at(
            ViolationKind::EmptySupport,
            j,
            None,
            None,
            "empty support",
        ));
        return;
    }
    if channel.probs.len() != channel.outcomes.len() {
        out.push(Violation::at(
            ViolationKind::ProbabilityLength,
            j,
            None,
            None,
            format!(
                "{} probabilities for {} outcomes",
                channel.probs.len(),
                channel.outcomes.len()
            ),
        ));
    }
    for (z, &p) in channel.probs.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            out.push(Violation::at(
                ViolationKind::NonPositiveProbability,
                j,
                Some(z),
                None,
                format!("probability {p} is not positive"),
            ));
        }
    }
    let sum: f64 = channel.probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        out.push(Violation::at(
            ViolationKind::ProbabilitySum,
            j,
            None,
            None,
            format!("probabilities sum to {sum}"),
        ));
    }
    let m = channel.outcomes[0].auctions.len();
    for (z, outcome) in channel.outcomes.iter().enumerate() {
        if outcome.auctions.len() != m {
            out.push(Violation::at(
                ViolationKind::AuctionCount,
                j,
                Some(z),
                None,
                format!("{} auctions, expected {m}", outcome.auctions.len()),
            ));
        }
        validate_outcome(instance, j, z, outcome, out);
    }
}

fn validate_outcome(
    instance: &Instance,
    j: usize,
    z: usize,
    outcome: &Outcome,
    out: &mut Vec<Violation>,
) {
    for (n, a) in outcome.auctions.iter().enumerate() {
        if !a.value.is_finite() || !a.cost.is_finite() {
            out.push(Violation::at(
                ViolationKind::NonFinite,
                j,
                Some(z),
                Some(n),
                "value and cost must be finite",
            ));
            continue;
        }
        if a.value < 0.0 {
            out.push(Violation::at(
                ViolationKind::NegativeValue,
                j,
                Some(z),
                Some(n),
                format!("value {} < 0", a.value),
            ));
        }
        if a.cost < 0.0 {
            out.push(Violation::at(
                ViolationKind::NegativeCost,
                j,
                Some(z),
                Some(n),
                format!("cost {} < 0", a.cost),
            ));
        }
        if a.value == 0.0 && a.cost == 0.0 && !instance.allow_null_auctions {
            out.push(Violation::at(
                ViolationKind::NullAuction,
                j,
                Some(z),
                Some(n),
                "auction with zero value and zero cost",
            ));
        }
    }
    for (n, pair) in outcome.auctions.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a.cost == 0.0 && b.cost == 0.0 {
            continue;
        }
        if a.cost > 0.0 && b.cost == 0.0 {
            out.push(Violation::at(
                ViolationKind::RatioOrdering,
                j,
                Some(z),
                Some(n + 1),
                "zero-cost auction after a priced auction",
            ));
            continue;
        }
        if b.cost == 0.0 {
            continue;
        }
        let (ra, rb) = (a.ratio(), b.ratio());
        let tie = (ra - rb).abs() <= RATIO_TIE_TOL * ra.abs().max(rb.abs());
        if tie {
            if !instance.allow_ties {
                out.push(Violation::at(
                    ViolationKind::RatioTie,
                    j,
                    Some(z),
                    Some(n + 1),
                    format!("ratio {rb} ties the previous auction"),
                ));
            }
        } else if rb > ra {
            out.push(Violation::at(
                ViolationKind::RatioOrdering,
                j,
                Some(z),
                Some(n + 1),
                format!("ratio {rb} exceeds previous ratio {ra}"),
            ));
        }
    }
    if let Some(imps) = &outcome.impressions {
        if imps.len() != outcome.auctions.len() {
            out.push(Violation::at(
                ViolationKind::Impressions,
                j,
                Some(z),
                None,
                "impression groups do not match the auction count",
            ));
        }
        for (n, (group, first)) in imps.iter().zip(&outcome.auctions).enumerate() {
            for msg in group.ordering_violations() {
                out.push(Violation::at(
                    ViolationKind::Impressions,
                    j,
                    Some(z),
                    Some(n),
                    msg,
                ));
            }
            if group.impressions.first() != Some(first) {
                out.push(Violation::at(
                    ViolationKind::Impressions,
                    j,
                    Some(z),
                    Some(n),
                    "single-item view differs from the first impression",
                ));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Assumption checks

/// Every outcome of every channel can absorb the whole global budget, so the
/// budget-only channel solution spends any per-channel budget `<= rho` exactly.
pub fn check_moderate_budgets(instance: &Instance) -> Result<bool, InstanceError> {
    if !instance.rho.is_finite() {
        return Err(InstanceError::UnboundedBudget);
    }
    Ok(instance
        .channels
        .iter()
        .all(|c| c.outcomes.iter().all(|o| o.total_cost() >= instance.rho)))
}

/// Every joint realization contains some auction with `v > gamma * d`.
///
/// Channels are independent and every support point has positive mass, so
/// the joint support is the full product. An all-infeasible combination
/// exists iff every channel has at least one infeasible outcome; the check is
/// therefore exact without enumerating the product.
pub fn check_global_roi_feasibility(instance: &Instance) -> bool {
    instance
        .channels
        .iter()
        .any(|c| c.roi_feasible(instance.gamma))
}

/// Every outcome of every channel contains an auction with `v > gamma * d`.
pub fn check_per_channel_roi_feasibility(instance: &Instance) -> bool {
    instance
        .channels
        .iter()
        .all(|c| c.roi_feasible(instance.gamma))
}

// ---------------------------------------------------------------------------
// JSON mirror

#[derive(Serialize, Deserialize)]
struct RawInstance {
    gamma: f64,
    rho: RawBudget,
    #[serde(default)]
    alpha: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    allow_ties: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    allow_null_auctions: bool,
    channels: Vec<RawChannel>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawBudget {
    Finite(f64),
    Literal(String),
}

#[derive(Serialize, Deserialize)]
struct RawChannel {
    probs: Vec<f64>,
    outcomes: Vec<RawOutcome>,
}

#[derive(Serialize, Deserialize)]
struct RawOutcome {
    #[serde(default)]
    values: Vec<f64>,
    #[serde(default)]
    costs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    impressions: Option<Vec<Vec<Auction>>>,
}

impl TryFrom<RawInstance> for Instance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        let rho = match raw.rho {
            RawBudget::Finite(x) => x,
            RawBudget::Literal(s) if s == "inf" => f64::INFINITY,
            RawBudget::Literal(s) => {
                return Err(InstanceError::Schema(format!(
                    "rho must be a number or \"inf\", got {s:?}"
                )))
            }
        };
        let mut channels = Vec::with_capacity(raw.channels.len());
        for (j, rc) in raw.channels.into_iter().enumerate() {
            let mut outcomes = Vec::with_capacity(rc.outcomes.len());
            for (z, ro) in rc.outcomes.into_iter().enumerate() {
                outcomes.push(raw_outcome(ro).map_err(|m| {
                    InstanceError::Schema(format!("channel {j}, outcome {z}: {m}"))
                })?);
            }
            channels.push(ChannelSupport::new(outcomes, rc.probs));
        }
        Ok(Instance {
            channels,
            gamma: raw.gamma,
            rho,
            alpha: raw.alpha,
            allow_ties: raw.allow_ties,
            allow_null_auctions: raw.allow_null_auctions,
        })
    }
}

fn raw_outcome(ro: RawOutcome) -> Result<Outcome, String> {
    if ro.values.len() != ro.costs.len() {
        return Err(format!(
            "{} values but {} costs",
            ro.values.len(),
            ro.costs.len()
        ));
    }
    match ro.impressions {
        None => Ok(Outcome::from_pairs(&ro.values, &ro.costs)),
        Some(groups) => {
            if groups.iter().any(Vec::is_empty) {
                return Err("auction with no impressions".into());
            }
            let outcome = Outcome::multi(groups.into_iter().map(MultiAuction::new).collect());
            if !ro.values.is_empty() {
                let explicit = Outcome::from_pairs(&ro.values, &ro.costs);
                if explicit.auctions != outcome.auctions {
                    return Err("values/costs disagree with first impressions".into());
                }
            }
            Ok(outcome)
        }
    }
}

impl From<&Instance> for RawInstance {
    fn from(inst: &Instance) -> Self {
        RawInstance {
            gamma: inst.gamma,
            rho: if inst.rho.is_finite() {
                RawBudget::Finite(inst.rho)
            } else {
                RawBudget::Literal("inf".into())
            },
            alpha: inst.alpha,
            allow_ties: inst.allow_ties,
            allow_null_auctions: inst.allow_null_auctions,
            channels: inst
                .channels
                .iter()
                .map(|c| RawChannel {
                    probs: c.probs.clone(),
                    outcomes: c
                        .outcomes
                        .iter()
                        .map(|o| RawOutcome {
                            values: o.auctions.iter().map(|a| a.value).collect(),
                            costs: o.auctions.iter().map(|a| a.cost).collect(),
                            impressions: o.impressions.as_ref().map(|groups| {
                                groups.iter().map(|g| g.impressions.clone()).collect()
                            }),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Reference instances

/// Two-channel counterexample for the per-channel ROI lever: channel 1 has a
/// free auction worth 1, channel 2 has auctions `(X, 1+X)` and `(2X, 2(1+X))`.
/// Target ROI 1, unbounded budget.
pub fn roi_lever_counterexample(x: f64) -> Instance {
    let ch1 = ChannelSupport::deterministic(Outcome::from_pairs(&[1.0], &[0.0]));
    let ch2 = ChannelSupport::deterministic(Outcome::from_pairs(
        &[x, 2.0 * x],
        &[1.0 + x, 2.0 * (1.0 + x)],
    ));
    let mut inst = Instance::new(vec![ch1, ch2], 1.0, f64::INFINITY);
    inst.allow_ties = true;
    inst
}

/// Three-outcome channel used to illustrate the conversion curve: outcomes
/// `((8,2),(2,3))`, `((3,4),(1,4))`, `((8,1),(4,2))` as (values, costs).
pub fn illustration_support() -> ChannelSupport {
    ChannelSupport::uniform(vec![
        Outcome::from_pairs(&[8.0, 2.0], &[2.0, 3.0]),
        Outcome::from_pairs(&[3.0, 4.0], &[1.0, 4.0]),
        Outcome::from_pairs(&[8.0, 1.0], &[4.0, 2.0]),
    ])
}
