use autobid::channel_oracle::{solve_sequence, Lever};
use autobid::generate::random_support;
use autobid::instance::ChannelSupport;
use autobid::pwl::{
    build_expected_conversion, lagrangian_argmax, lagrangian_value, DualContext, PiecewiseLinear,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn support_and_rho(seed: u64) -> (ChannelSupport, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=4);
    let f = rng.gen_range(1..=3);
    let support = random_support(&mut rng, m, f);
    let rho = support.max_total_cost() * rng.gen_range(0.2..1.5);
    (support, rho)
}

fn curve(seed: u64) -> (ChannelSupport, PiecewiseLinear) {
    let (support, rho) = support_and_rho(seed);
    let pwl = build_expected_conversion(&support, rho, 0.0).unwrap();
    (support, pwl)
}

#[test]
fn invariants_hold_on_random_supports() {
    for seed in 0..500 {
        let (support, rho) = support_and_rho(seed);
        let rho = rho.min(support.max_total_cost());
        let pwl = build_expected_conversion(&support, rho, 0.0).unwrap();
        let v = pwl.invariant_violations();
        assert!(v.is_empty(), "seed {seed}: {v:?}");
    }
}

#[test]
fn budget_past_every_outcome_adds_one_flat_segment() {
    for seed in 0..200 {
        let (support, _) = support_and_rho(seed);
        let cap = support.max_total_cost();
        let pwl = build_expected_conversion(&support, 1.5 * cap, 0.0).unwrap();
        let slopes = pwl.slopes();
        assert_eq!(*slopes.last().unwrap(), 0.0);
        assert!(slopes[..slopes.len() - 1].iter().all(|&s| s > 0.0));
        assert_eq!(pwl.turning_points()[pwl.num_segments() - 1], cap);
    }
}

#[test]
fn argmax_matches_grid_search() {
    let step = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..200 {
        let (_, pwl) = curve(1000 + case);
        let gamma = rng.gen_range(0.0..2.0);
        let ctx = DualContext::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let end = pwl.domain_end();
        let n = (end / step).floor() as usize;
        let (mut best_x, mut best) = (0.0, f64::NEG_INFINITY);
        for i in 0..=n + 1 {
            let x = (i as f64 * step).min(end);
            let v = lagrangian_value(&pwl, ctx, gamma, x).unwrap();
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let arg = lagrangian_argmax(&pwl, ctx, gamma);
        let at = lagrangian_value(&pwl, ctx, gamma, arg.budget).unwrap();
        assert!(
            at >= best - 1e-9,
            "case {case}: argmax value {at} below grid {best}"
        );
        assert!(
            (arg.budget - best_x).abs() <= step + 1e-9,
            "case {case}: {} vs grid {best_x}",
            arg.budget
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eval_matches_channel_oracle(seed in any::<u64>(), u in 0.0f64..=1.0) {
        let (support, pwl) = curve(seed);
        let x = u * pwl.domain_end();
        let expected = solve_sequence(&support, Lever::budget_only(x)).conversion;
        prop_assert!((pwl.eval(x).unwrap() - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn eval_is_concave(seed in any::<u64>(), a in 0.0f64..=1.0, b in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let (_, pwl) = curve(seed);
        let (ra, rb) = (a * pwl.domain_end(), b * pwl.domain_end());
        let mid = pwl.eval(t * ra + (1.0 - t) * rb).unwrap();
        let chord = t * pwl.eval(ra).unwrap() + (1.0 - t) * pwl.eval(rb).unwrap();
        prop_assert!(mid >= chord - 1e-9);
    }

    #[test]
    fn budget_lever_feasible_region_is_convex(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..=3);
        let curves: Vec<PiecewiseLinear> = (0..m).map(|_| curve(rng.gen()).1).collect();
        let gamma = rng.gen_range(0.2..2.0);
        let rho = curves.iter().map(PiecewiseLinear::domain_end).sum::<f64>() * rng.gen_range(0.3..1.0);
        let feasible = |x: &[f64]| {
            let conv: f64 = curves.iter().zip(x).map(|(c, &r)| c.eval(r).unwrap()).sum();
            let spend: f64 = x.iter().sum();
            conv - gamma * spend >= -1e-9 && spend <= rho + 1e-9
        };
        let mut points = Vec::new();
        for _ in 0..200 {
            let x: Vec<f64> = curves.iter().map(|c| rng.gen_range(0.0..=c.domain_end())).collect();
            if feasible(&x) {
                points.push(x);
            }
            if points.len() == 6 {
                break;
            }
        }
        for a in &points {
            for b in &points {
                for k in 1..10 {
                    let t = k as f64 / 10.0;
                    let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| t * p + (1.0 - t) * q).collect();
                    prop_assert!(feasible(&x));
                }
            }
        }
    }
}
