//! Exact per-realization channel procurement.
//!
//! Auctions arrive sorted by decreasing value-to-cost ratio, so both channel
//! problems are solved by a greedy prefix fill with at most one fractional item.

use serde::{Deserialize, Serialize};

use crate::instance::{Auction, ChannelSupport};

/// Absolute tolerance used inside the greedy.
pub const GREEDY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub fractions: Vec<f64>,
    pub conversion: f64,
    pub spend: f64,
}

/// Per-channel lever: target ROI and budget (either may be vacuous).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lever {
    pub target_roi: f64,
    pub budget: f64,
}

impl Lever {
    pub fn budget_only(budget: f64) -> Self {
        Self {
            target_roi: 0.0,
            budget,
        }
    }

    pub fn roi_only(target_roi: f64) -> Self {
        Self {
            target_roi,
            budget: f64::INFINITY,
        }
    }
}

/// Expected conversion and spend of a channel under a lever.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExpectedOutcome {
    pub conversion: f64,
    pub spend: f64,
}

/// Greedy over ratio-ordered auctions. `gamma == 0` makes the ROI cap vacuous.
fn greedy(auctions: &[Auction], gamma: f64, budget: f64, record: bool) -> Allocation {
    let budget = budget.max(0.0);
    let mut fractions = if record {
        vec![0.0; auctions.len()]
    } else {
        Vec::new()
    };
    let mut remaining = budget;
    let mut surplus: f64 = 0.0;
    let mut conversion = 0.0;
    let mut spend = 0.0;
    for (n, a) in auctions.iter().enumerate() {
        let budget_cap = if a.cost <= remaining + GREEDY_TOL {
            1.0
        } else {
            remaining.max(0.0) / a.cost
        };
        let s = a.roi_surplus(gamma);
        let roi_cap = if gamma == 0.0 || s >= -GREEDY_TOL {
            1.0
        } else {
            (surplus.max(0.0) / -s).min(1.0)
        };
        let x = budget_cap.min(roi_cap);
        if x > 0.0 {
            if record {
                fractions[n] = x;
            }
            conversion += a.value * x;
            surplus += s * x;
            if x < 1.0 && budget_cap <= roi_cap {
                spend = budget;
                remaining = 0.0;
            } else {
                spend += a.cost * x;
                remaining -= a.cost * x;
            }
        }
        if x < 1.0 {
            break;
        }
    }
    Allocation {
        fractions,
        conversion,
        spend,
    }
}

/// Fractional knapsack: fills auctions in ratio order until the budget runs out.
/// Zero-cost auctions are always taken in full.
pub fn solve_budget_only(auctions: &[Auction], budget: f64) -> Allocation {
    greedy(auctions, 0.0, budget, true)
}

/// Conversion and spend of [`solve_budget_only`] without the allocation vector.
pub fn budget_only_totals(auctions: &[Auction], budget: f64) -> (f64, f64) {
    let a = greedy(auctions, 0.0, budget, false);
    (a.conversion, a.spend)
}

/// Maximizes conversion subject to `conversion >= target_roi * spend` and
/// `spend <= budget` (`budget` may be `+inf`).
pub fn solve_with_roi(auctions: &[Auction], target_roi: f64, budget: f64) -> Allocation {
    greedy(auctions, target_roi, budget, true)
}

/// Probability-weighted conversion and spend of a channel under `lever`.
pub fn solve_sequence(support: &ChannelSupport, lever: Lever) -> ExpectedOutcome {
    let mut out = ExpectedOutcome::default();
    for (p, outcome) in support.iter() {
        let a = greedy(&outcome.auctions, lever.target_roi, lever.budget, false);
        out.conversion += p * a.conversion;
        out.spend += p * a.spend;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{illustration_support, roi_lever_counterexample, Outcome};

    fn auctions(values: &[f64], costs: &[f64]) -> Vec<Auction> {
        Outcome::from_pairs(values, costs).auctions
    }

    #[test]
    fn fractional_boundary_item() {
        let a = solve_budget_only(&auctions(&[8.0, 2.0], &[2.0, 3.0]), 3.5);
        assert_eq!(a.fractions, vec![1.0, 0.5]);
        assert_eq!(a.conversion, 9.0);
        assert_eq!(a.spend, 3.5);
    }

    #[test]
    fn zero_budget() {
        let a = solve_budget_only(&auctions(&[8.0, 2.0], &[2.0, 3.0]), 0.0);
        assert_eq!(a.fractions, vec![0.0, 0.0]);
        assert_eq!((a.conversion, a.spend), (0.0, 0.0));
    }

    #[test]
    fn zero_cost_items_taken_at_zero_budget() {
        let a = solve_budget_only(&auctions(&[1.0, 3.0], &[0.0, 1.0]), 0.0);
        assert_eq!(a.fractions, vec![1.0, 0.0]);
        assert_eq!(a.conversion, 1.0);
    }

    #[test]
    fn budget_exceeds_total_cost() {
        let a = solve_budget_only(&auctions(&[8.0, 2.0], &[2.0, 3.0]), 10.0);
        assert_eq!(a.fractions, vec![1.0, 1.0]);
        assert_eq!((a.conversion, a.spend), (10.0, 5.0));
    }

    #[test]
    fn roi_blocks_unprofitable_channel() {
        let inst = roi_lever_counterexample(9.0);
        let ch2 = &inst.channels[1].outcomes[0].auctions;
        let a = solve_with_roi(ch2, 0.95, f64::INFINITY);
        assert_eq!(a.fractions, vec![0.0, 0.0]);
        assert_eq!(a.conversion, 0.0);
    }

    #[test]
    fn roi_exactly_binding() {
        let inst = roi_lever_counterexample(9.0);
        let ch2 = &inst.channels[1].outcomes[0].auctions;
        let a = solve_with_roi(ch2, 0.9, f64::INFINITY);
        assert_eq!(a.fractions, vec![1.0, 1.0]);
        assert_eq!((a.conversion, a.spend), (27.0, 30.0));
    }

    #[test]
    fn surplus_limited_fraction() {
        // Item 1 leaves surplus 2, item 2 has surplus -4 per unit.
        let a = solve_with_roi(&auctions(&[3.0, 1.0], &[1.0, 5.0]), 1.0, f64::INFINITY);
        assert_eq!(a.fractions, vec![1.0, 0.5]);
        assert!((a.conversion - 3.5).abs() < 1e-12);
        assert!((a.conversion - a.spend).abs() < 1e-12);
    }

    #[test]
    fn zero_target_matches_budget_only() {
        let z = auctions(&[8.0, 2.0], &[2.0, 3.0]);
        assert_eq!(solve_with_roi(&z, 0.0, 3.5), solve_budget_only(&z, 3.5));
    }

    #[test]
    fn expected_value_on_illustration_support() {
        let out = solve_sequence(&illustration_support(), Lever::budget_only(2.0));
        assert!((out.conversion - 16.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_is_weighted_mean() {
        let support = ChannelSupport::uniform(vec![
            Outcome::from_pairs(&[4.0], &[1.0]),
            Outcome::from_pairs(&[6.0], &[1.0]),
        ]);
        let out = solve_sequence(&support, Lever::budget_only(1.0));
        assert_eq!(out.conversion, 5.0);
    }
}
