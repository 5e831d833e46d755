use autobid::channel_oracle::{budget_only_totals, solve_budget_only, solve_with_roi};
use autobid::generate::random_auctions;
use autobid::instance::Auction;
use autobid::lp::{simplex_solve, Constraint, LinearProgram, LpStatus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// max v^T x  s.t.  (v - gamma d)^T x >= 0, d^T x <= budget, x in [0,1].
fn lp_value(auctions: &[Auction], gamma: f64, budget: f64) -> f64 {
    let n = auctions.len();
    let mut lp = LinearProgram::new(n);
    for (i, a) in auctions.iter().enumerate() {
        lp.objective[i] = a.value;
        lp.bounds[i] = (0.0, 1.0);
    }
    lp.add_constraint(Constraint::ge(
        auctions
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.value - gamma * a.cost))
            .collect(),
        0.0,
    ));
    if budget.is_finite() {
        lp.add_constraint(Constraint::le(
            auctions
                .iter()
                .enumerate()
                .map(|(i, a)| (i, a.cost))
                .collect(),
            budget,
        ));
    }
    let s = simplex_solve(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    s.objective
}

fn triple(seed: u64) -> (Vec<Auction>, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=5);
    let a = random_auctions(&mut rng, m);
    let gamma = rng.gen_range(0.0..4.0);
    let total: f64 = a.iter().map(|x| x.cost).sum();
    let budget = if rng.gen_bool(0.2) {
        f64::INFINITY
    } else {
        rng.gen_range(0.0..1.2 * total)
    };
    (a, gamma, budget)
}

#[test]
fn greedy_matches_lp_on_random_triples() {
    let mut worst: f64 = 0.0;
    for seed in 0..500 {
        let (a, gamma, budget) = triple(seed);
        let g = solve_with_roi(&a, gamma, budget).conversion;
        worst = worst.max((g - lp_value(&a, gamma, budget)).abs());
        if budget.is_finite() {
            let b = solve_budget_only(&a, budget).conversion;
            worst = worst.max((b - lp_value(&a, 0.0, budget)).abs());
        }
    }
    assert!(worst <= 1e-8, "max deviation {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn allocation_identities_and_feasibility(seed in any::<u64>()) {
        let (a, gamma, budget) = triple(seed);
        let alloc = solve_with_roi(&a, gamma, budget);
        let conv: f64 = a.iter().zip(&alloc.fractions).map(|(x, f)| x.value * f).sum();
        let spend: f64 = a.iter().zip(&alloc.fractions).map(|(x, f)| x.cost * f).sum();
        prop_assert!(alloc.fractions.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!((conv - alloc.conversion).abs() <= 1e-12 * conv.abs().max(1.0));
        prop_assert!((spend - alloc.spend).abs() <= 1e-12 * spend.abs().max(1.0));
        prop_assert!(alloc.conversion - gamma * alloc.spend >= -1e-9);
        prop_assert!(alloc.spend <= budget + 1e-9);
    }

    #[test]
    fn zero_target_reproduces_budget_only(seed in any::<u64>()) {
        let (a, _, budget) = triple(seed);
        let budget = if budget.is_finite() { budget } else { 1.0 };
        prop_assert_eq!(solve_with_roi(&a, 0.0, budget), solve_budget_only(&a, budget));
    }

    #[test]
    fn budget_only_monotone(seed in any::<u64>(), u in 0.0f64..1.0, w in 0.0f64..1.0) {
        let (a, _, _) = triple(seed);
        let total: f64 = a.iter().map(|x| x.cost).sum();
        let (lo, hi) = if u < w { (u * total, w * total) } else { (w * total, u * total) };
        let v_lo = budget_only_totals(&a, lo).0;
        let v_hi = budget_only_totals(&a, hi).0;
        prop_assert!(v_hi >= v_lo);
        if hi > lo + 1e-9 && lo < total {
            prop_assert!(v_hi > v_lo);
        }
    }

    #[test]
    fn binding_budget_spends_exactly(seed in any::<u64>(), frac in 0.0f64..=1.0) {
        let (a, _, _) = triple(seed);
        let total: f64 = a.iter().map(|x| x.cost).sum();
        let budget = frac * total;
        prop_assert_eq!(budget_only_totals(&a, budget).1, budget);
    }
}
