//! Seeded random instance generators for tests, property checks and sweeps.

use rand::Rng;

use crate::instance::{check_global_roi_feasibility, Auction, ChannelSupport, Instance, Outcome};
use crate::multi_item::MultiAuction;

/// Shape limits for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceShape {
    pub max_channels: usize,
    pub max_auctions: usize,
    pub max_outcomes: usize,
    /// Force the budget below every outcome's total cost.
    pub budget_binding: bool,
}

impl Default for InstanceShape {
    fn default() -> Self {
        Self {
            max_channels: 3,
            max_auctions: 4,
            max_outcomes: 3,
            budget_binding: false,
        }
    }
}

/// Probability vector with every entry at least `0.05 / n` and an exact unit sum.
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

/// Ratio-sorted auctions with positive values and costs.
pub fn random_auctions<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<Auction> {
    let mut a: Vec<Auction> = (0..m)
        .map(|_| Auction::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..5.0)))
        .collect();
    a.sort_by(|x, y| y.ratio().total_cmp(&x.ratio()));
    a
}

pub fn random_support<R: Rng + ?Sized>(rng: &mut R, m: usize, outcomes: usize) -> ChannelSupport {
    let outs = (0..outcomes)
        .map(|_| Outcome::single(random_auctions(rng, m)))
        .collect();
    ChannelSupport::new(outs, random_probs(rng, outcomes))
}

fn finish<R: Rng + ?Sized>(
    rng: &mut R,
    channels: Vec<ChannelSupport>,
    budget_binding: bool,
) -> Instance {
    // Target ROI below the weakest first ratio of some channel keeps that
    // channel feasible in every outcome.
    let anchor = channels
        .iter()
        .map(|c| {
            c.outcomes
                .iter()
                .map(|o| o.auctions[0].ratio())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let gamma = anchor * rng.gen_range(0.3..0.95);
    let min_total = channels
        .iter()
        .flat_map(|c| c.outcomes.iter().map(Outcome::total_cost))
        .fold(f64::INFINITY, f64::min);
    let rho = if budget_binding {
        min_total * rng.gen_range(0.3..0.95)
    } else {
        let expected: f64 = channels
            .iter()
            .map(|c| c.iter().map(|(p, o)| p * o.total_cost()).sum::<f64>())
            .sum();
        expected * rng.gen_range(0.1..1.2)
    };
    let mut inst = Instance::new(channels, gamma, rho);
    inst.sort_by_ratio();
    inst.perturb_ties();
    debug_assert!(check_global_roi_feasibility(&inst));
    inst
}

/// Random valid instance within `shape`, feasible under the global ROI target.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, shape: InstanceShape) -> Instance {
    let m_channels = rng.gen_range(1..=shape.max_channels);
    let channels = (0..m_channels)
        .map(|_| {
            let m = rng.gen_range(1..=shape.max_auctions);
            let f = rng.gen_range(1..=shape.max_outcomes);
            random_support(rng, m, f)
        })
        .collect();
    finish(rng, channels, shape.budget_binding)
}

/// Position auction with `positions` impressions and increasing marginal values.
pub fn random_increasing_marginal<R: Rng + ?Sized>(rng: &mut R, positions: usize) -> MultiAuction {
    let last = Auction::new(rng.gen_range(0.2..3.0), rng.gen_range(0.2..2.0));
    let mut imps = vec![last];
    let mut marginal = last.ratio();
    for _ in 1..positions {
        marginal *= rng.gen_range(1.05..2.0);
        let below = *imps.last().expect("non-empty");
        let dd = rng.gen_range(0.1..2.0);
        imps.push(Auction::new(below.value + marginal * dd, below.cost + dd));
    }
    imps.reverse();
    MultiAuction::new(imps)
}

/// Ratio-sorted position auctions for one outcome.
pub fn random_multi_outcome<R: Rng + ?Sized>(
    rng: &mut R,
    auctions: usize,
    max_positions: usize,
) -> Vec<MultiAuction> {
    let mut out: Vec<MultiAuction> = (0..auctions)
        .map(|_| {
            let l = rng.gen_range(1..=max_positions);
            random_increasing_marginal(rng, l)
        })
        .collect();
    out.sort_by(|a, b| b.first().ratio().total_cmp(&a.first().ratio()));
    out
}

/// Random multi-item instance whose auctions all have increasing marginal values.
pub fn random_multi_instance<R: Rng + ?Sized>(
    rng: &mut R,
    shape: InstanceShape,
    max_positions: usize,
) -> Instance {
    let m_channels = rng.gen_range(1..=shape.max_channels);
    let channels = (0..m_channels)
        .map(|_| {
            let m = rng.gen_range(1..=shape.max_auctions);
            let f = rng.gen_range(1..=shape.max_outcomes);
            let outs = (0..f)
                .map(|_| Outcome::multi(random_multi_outcome(rng, m, max_positions)))
                .collect();
            ChannelSupport::new(outs, random_probs(rng, f))
        })
        .collect();
    finish(rng, channels, shape.budget_binding)
}
