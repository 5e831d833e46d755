use autobid::benchmarks::compute_cf;
use autobid::generate::{random_instance, InstanceShape};
use autobid::instance::{check_per_channel_roi_feasibility, ChannelSupport, Instance, Outcome};
use autobid::learner::{evaluate_output, LearnerConfig, LearnerRegistry, RunLog};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BINDING: InstanceShape = InstanceShape {
    max_channels: 3,
    max_auctions: 4,
    max_outcomes: 3,
    budget_binding: true,
};

fn binding_instance(seed: u64, per_channel: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = random_instance(&mut rng, BINDING);
        if !per_channel || check_per_channel_roi_feasibility(&inst) {
            return inst;
        }
    }
}

fn run(algo: &str, inst: &Instance, cfg: &LearnerConfig) -> RunLog {
    LearnerRegistry::default()
        .get(algo)
        .unwrap()
        .run(inst, cfg)
        .unwrap()
}

fn check_running_means(log: &RunLog) {
    let m = log.rho_bar.len();
    let k = log.arms.len();
    let mut counts = vec![vec![0u64; k]; m];
    let mut sums = vec![vec![0.0; k]; m];
    for p in log.periods.iter().filter(|p| !p.warmup) {
        for j in 0..m {
            let a = p.arms[j].expect("bandit period has an arm");
            counts[j][a] += 1;
            sums[j][a] += p.conversions[j];
        }
    }
    assert_eq!(counts, log.stats.counts);
    for j in 0..m {
        for a in 0..k {
            if counts[j][a] > 0 {
                let mean = sums[j][a] / counts[j][a] as f64;
                assert!((mean - log.stats.means[j][a]).abs() <= 1e-9 * mean.abs().max(1.0));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sgd_ucb_run_invariants(seed in any::<u64>(), run_seed in any::<u64>(), horizon in 50usize..600) {
        let inst = binding_instance(seed, false);
        let cfg = LearnerConfig::new(horizon, run_seed);
        let log = run("sgd-ucb", &inst, &cfg);
        prop_assert_eq!(&log, &run("sgd-ucb", &inst, &cfg));
        prop_assert_eq!(log.periods.len(), horizon);
        check_running_means(&log);
        for p in &log.periods {
            prop_assert!(p.lambda >= 0.0 && p.mu >= 0.0);
            for (s, b) in p.spends.iter().zip(&p.budgets) {
                prop_assert!((s - b).abs() <= 1e-9 * b.max(1.0));
            }
            for b in &p.budgets {
                prop_assert!(*b >= 0.0 && *b <= inst.rho);
            }
        }
        prop_assert!(log.final_duals.lambda >= 0.0 && log.final_duals.mu >= 0.0);
    }

    #[test]
    fn sgd_ucb_ii_run_invariants(seed in any::<u64>(), run_seed in any::<u64>(), horizon in 50usize..600) {
        let inst = binding_instance(seed, true);
        let cfg = LearnerConfig::new(horizon, run_seed);
        let log = run("sgd-ucb-ii", &inst, &cfg);
        prop_assert_eq!(&log, &run("sgd-ucb-ii", &inst, &cfg));
        check_running_means(&log);
        prop_assert!(log.total_budget() <= inst.rho * horizon as f64 + 1e-9);
        prop_assert!(log.termination <= horizon);
        let t1 = log.phase_one_end.unwrap_or(0);
        for p in &log.periods {
            prop_assert!(p.lambda >= 0.0 && p.mu >= 0.0);
            prop_assert_eq!(p.warmup, p.t <= t1);
        }
        let mut last = 0.0;
        for p in &log.periods {
            prop_assert!(p.balance >= last);
            last = p.balance;
        }
    }
}

#[test]
fn duals_stay_below_the_bound_when_the_step_is_small() {
    let mut checked = 0;
    for seed in 0..40u64 {
        let inst = binding_instance(1000 + seed, false);
        let bound = compute_cf(&inst).unwrap();
        let horizon = 2000;
        let eta = 0.9 * bound.step_size_bound;
        let cfg = LearnerConfig {
            eta: Some(eta),
            ..LearnerConfig::new(horizon, seed)
        };
        let log = run("sgd-ucb", &inst, &cfg);
        assert!(!log.eta_warning);
        assert!(
            log.max_dual() <= bound.cf,
            "seed {seed}: max dual {} above C_F {}",
            log.max_dual(),
            bound.cf
        );
        let floor = -1.01 * bound.cf / (horizon as f64).sqrt();
        assert!(
            log.mean_g1() >= floor,
            "seed {seed}: mean g1 {}",
            log.mean_g1()
        );
        assert!(
            log.mean_g2() >= floor,
            "seed {seed}: mean g2 {}",
            log.mean_g2()
        );
        checked += 1;
    }
    assert_eq!(checked, 40);
}

#[test]
fn eta_above_the_bound_is_flagged() {
    let inst = binding_instance(7, false);
    let bound = compute_cf(&inst).unwrap();
    let cfg = LearnerConfig {
        eta: Some(2.0 * bound.step_size_bound),
        ..LearnerConfig::new(200, 0)
    };
    assert!(run("sgd-ucb", &inst, &cfg).eta_warning);
}

#[test]
fn single_outcome_channel_converges() {
    // One deterministic channel; the ROI target binds at budget 2.
    let support =
        ChannelSupport::deterministic(Outcome::from_pairs(&[6.0, 2.0, 1.0], &[1.0, 2.0, 4.0]));
    let inst = Instance::new(vec![support], 3.5, 3.0);
    let mut regrets = Vec::new();
    for horizon in [1_000usize, 20_000] {
        let log = run("sgd-ucb", &inst, &LearnerConfig::new(horizon, 11));
        let m = evaluate_output(&inst, &log).unwrap();
        regrets.push(m.regret.abs() + m.violation());
    }
    assert!(regrets[1] < regrets[0], "{regrets:?}");
    assert!(regrets[1] < 0.25, "{regrets:?}");
}

#[test]
fn different_seeds_give_different_trajectories() {
    let support = ChannelSupport::uniform(vec![
        Outcome::from_pairs(&[6.0, 2.0], &[1.0, 2.0]),
        Outcome::from_pairs(&[3.0, 1.0], &[1.0, 2.0]),
    ]);
    let inst = Instance::new(vec![support], 1.0, 2.0);
    let a = run("sgd-ucb", &inst, &LearnerConfig::new(400, 1));
    let b = run("sgd-ucb", &inst, &LearnerConfig::new(400, 2));
    assert_ne!(a.periods, b.periods);
}
