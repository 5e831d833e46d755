//! Position auctions: several impressions per auction, at most one of which
//! can be won. Auctions with increasing marginal values reduce to their first
//! impression, which lets the single-item machinery run unchanged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel_oracle::{solve_budget_only, Allocation};
use crate::instance::{Auction, ChannelSupport, Outcome};
use crate::lp::{simplex_solve, Constraint, LinearProgram, LpError, LpStatus};
use crate::pwl::{build_expected_conversion, PiecewiseLinear, PwlError};

#[derive(Debug, Error)]
pub enum MultiItemError {
    #[error("invalid VCG specification: {0}")]
    InvalidVcg(String),
    #[error("auction {auction} (outcome {outcome}) does not have increasing marginal values")]
    NotIncreasingMarginal { outcome: usize, auction: usize },
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Impressions of one position auction, best position first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiAuction {
    pub impressions: Vec<Auction>,
}

impl MultiAuction {
    pub fn new(impressions: Vec<Auction>) -> Self {
        Self { impressions }
    }

    pub fn len(&self) -> usize {
        self.impressions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.impressions.is_empty()
    }

    pub fn first(&self) -> Auction {
        self.impressions[0]
    }

    /// Values and costs must be positive and strictly decreasing by position.
    pub fn ordering_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (l, a) in self.impressions.iter().enumerate() {
            if !(a.value > 0.0 && a.cost > 0.0) {
                out.push(format!("impression {l} must have positive value and cost"));
            }
        }
        for (l, w) in self.impressions.windows(2).enumerate() {
            if !(w[0].value > w[1].value && w[0].cost > w[1].cost) {
                out.push(format!(
                    "impression {} is not strictly below impression {l}",
                    l + 1
                ));
            }
        }
        out
    }
}

/// Marginal value-per-cost between positions strictly decreases with position
/// rank, and the last marginal exceeds the last impression's own ratio.
pub fn check_increasing_marginal(auction: &MultiAuction) -> bool {
    if !auction.ordering_violations().is_empty() {
        return false;
    }
    let imps = &auction.impressions;
    let l = imps.len();
    let mut prev = f64::INFINITY;
    for w in imps.windows(2) {
        let m = (w[0].value - w[1].value) / (w[0].cost - w[1].cost);
        if !(m < prev) {
            return false;
        }
        prev = m;
    }
    let last = imps[l - 1].value / imps[l - 1].cost;
    last > 0.0 && prev > last
}

/// A VCG position auction: base value, position discounts and competing bids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcgSpec {
    pub base_value: f64,
    pub discounts: Vec<f64>,
    pub competing_bids: Vec<f64>,
}

/// `v(l) = theta(l) * base`, `d(l) = sum_{l' >= l} (theta(l') - theta(l'+1)) * bid(l')`.
pub fn build_vcg(spec: &VcgSpec) -> Result<MultiAuction, MultiItemError> {
    let theta = &spec.discounts;
    let bids = &spec.competing_bids;
    if theta.is_empty() || theta.len() != bids.len() {
        return Err(MultiItemError::InvalidVcg(
            "discounts and bids must be non-empty and of equal length".into(),
        ));
    }
    if !(spec.base_value > 0.0) {
        return Err(MultiItemError::InvalidVcg(
            "base value must be positive".into(),
        ));
    }
    if !(theta[0] <= 1.0)
        || theta.windows(2).any(|w| !(w[0] > w[1]))
        || !(theta[theta.len() - 1] > 0.0)
    {
        return Err(MultiItemError::InvalidVcg(
            "discounts must satisfy 1 >= theta(1) > ... > theta(L) > 0".into(),
        ));
    }
    if bids.windows(2).any(|w| !(w[0] > w[1])) || !(bids[bids.len() - 1] > 0.0) {
        return Err(MultiItemError::InvalidVcg(
            "competing bids must be strictly decreasing and positive".into(),
        ));
    }
    let l = theta.len();
    let mut costs = vec![0.0; l];
    let mut acc = 0.0;
    for i in (0..l).rev() {
        let next = if i + 1 < l { theta[i + 1] } else { 0.0 };
        acc += (theta[i] - next) * bids[i];
        costs[i] = acc;
    }
    Ok(MultiAuction::new(
        theta
            .iter()
            .zip(costs)
            .map(|(&t, d)| Auction::new(t * spec.base_value, d))
            .collect(),
    ))
}

/// Allocation over impressions; only first positions are ever bought.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiAllocation {
    /// `fractions[n][l]` for auction `n`, impression `l`.
    pub fractions: Vec<Vec<f64>>,
    pub conversion: f64,
    pub spend: f64,
}

fn first_impressions(auctions: &[MultiAuction]) -> Vec<Auction> {
    auctions.iter().map(MultiAuction::first).collect()
}

/// Budget-only channel solution for one realization of position auctions.
pub fn solve_budget_only_multi(
    auctions: &[MultiAuction],
    budget: f64,
) -> Result<MultiAllocation, MultiItemError> {
    if let Some(n) = auctions.iter().position(|a| !check_increasing_marginal(a)) {
        return Err(MultiItemError::NotIncreasingMarginal {
            outcome: 0,
            auction: n,
        });
    }
    let Allocation {
        fractions,
        conversion,
        spend,
    } = solve_budget_only(&first_impressions(auctions), budget);
    let fractions = auctions
        .iter()
        .zip(fractions)
        .map(|(a, x)| {
            let mut row = vec![0.0; a.len()];
            row[0] = x;
            row
        })
        .collect();
    Ok(MultiAllocation {
        fractions,
        conversion,
        spend,
    })
}

/// Budget-only channel problem over every impression, with one
/// `sum_l x(l) <= 1` row per auction. Valid for any position auction.
pub fn solve_full_lp_multi(auctions: &[MultiAuction], budget: f64) -> Result<f64, MultiItemError> {
    let imps: Vec<(usize, Auction)> = auctions
        .iter()
        .enumerate()
        .flat_map(|(n, a)| a.impressions.iter().map(move |&imp| (n, imp)))
        .collect();
    let mut lp = LinearProgram::new(imps.len());
    for (i, (_, a)) in imps.iter().enumerate() {
        lp.objective[i] = a.value;
        lp.bounds[i] = (0.0, 1.0);
    }
    for n in 0..auctions.len() {
        let coeffs = imps
            .iter()
            .enumerate()
            .filter(|(_, (owner, _))| *owner == n)
            .map(|(i, _)| (i, 1.0))
            .collect();
        lp.add_constraint(Constraint::le(coeffs, 1.0));
    }
    if budget.is_finite() {
        let coeffs = imps
            .iter()
            .enumerate()
            .map(|(i, (_, a))| (i, a.cost))
            .collect();
        lp.add_constraint(Constraint::le(coeffs, budget));
    }
    let sol = simplex_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        other => Err(MultiItemError::Lp(LpError::Malformed(format!(
            "unexpected status {other:?} for a bounded feasible program"
        )))),
    }
}

/// Checks every auction of every outcome of a multi-item support.
pub fn check_support_increasing_marginal(support: &ChannelSupport) -> Result<(), MultiItemError> {
    for (z, outcome) in support.outcomes.iter().enumerate() {
        if let Some(groups) = &outcome.impressions {
            if let Some(n) = groups.iter().position(|a| !check_increasing_marginal(a)) {
                return Err(MultiItemError::NotIncreasingMarginal {
                    outcome: z,
                    auction: n,
                });
            }
        }
    }
    Ok(())
}

/// Expected conversion curve of a multi-item channel via the first-impression reduction.
pub fn build_expected_conversion_multi(
    support: &ChannelSupport,
    rho: f64,
    alpha: f64,
) -> Result<PiecewiseLinear, MultiItemError> {
    check_support_increasing_marginal(support)?;
    let reduced = reduce_support(support);
    Ok(build_expected_conversion(&reduced, rho, alpha)?)
}

/// Single-item support made of first impressions.
pub fn reduce_support(support: &ChannelSupport) -> ChannelSupport {
    ChannelSupport::new(
        support
            .outcomes
            .iter()
            .map(|o| match &o.impressions {
                Some(groups) => Outcome::single(first_impressions(groups)),
                None => Outcome::single(o.auctions.clone()),
            })
            .collect(),
        support.probs.clone(),
    )
}
