use autobid::benchmarks::{
    evaluate_levers, solve_ch_opt_budget, solve_ch_opt_roi, solve_gl_opt, BenchmarkArgument,
    BenchmarkStatus,
};
use autobid::channel_oracle::Lever;
use autobid::generate::{random_instance, InstanceShape};
use autobid::instance::Instance;
use autobid::lp::{simplex_solve, Constraint, LinearProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus(seed: u64, n: usize, shape: InstanceShape) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_instance(&mut rng, shape)).collect()
}

fn singleton_shape() -> InstanceShape {
    InstanceShape {
        max_outcomes: 1,
        ..InstanceShape::default()
    }
}

fn budgets(inst: &Instance) -> Vec<f64> {
    match solve_ch_opt_budget(inst).unwrap().argument {
        BenchmarkArgument::Budgets(b) => b,
        other => panic!("unexpected argument {other:?}"),
    }
}

#[test]
fn every_lever_option_is_dominated_by_the_global_optimum() {
    for (k, inst) in corpus(11, 100, InstanceShape::default()).iter().enumerate() {
        let gl = solve_gl_opt(inst).unwrap();
        assert_eq!(gl.status, BenchmarkStatus::Optimal);
        let chb = solve_ch_opt_budget(inst).unwrap().value;
        let chr = solve_ch_opt_roi(inst, 0.05).unwrap().value;
        assert!(
            chb <= gl.value + 1e-6,
            "instance {k}: chb {chb} > gl {}",
            gl.value
        );
        assert!(
            chr <= gl.value + 1e-6,
            "instance {k}: chr {chr} > gl {}",
            gl.value
        );
        // Joint levers with vacuous targets.
        let joint: Vec<Lever> = budgets(inst).into_iter().map(Lever::budget_only).collect();
        let at = evaluate_levers(inst, &joint).unwrap();
        assert!(at.feasible);
        assert!(at.objective <= gl.value + 1e-6);
    }
}

#[test]
fn zero_targets_attain_the_budget_optimum() {
    for inst in corpus(12, 100, InstanceShape::default()) {
        let chb = solve_ch_opt_budget(&inst).unwrap().value;
        let levers: Vec<Lever> = budgets(&inst).into_iter().map(Lever::budget_only).collect();
        let at = evaluate_levers(&inst, &levers).unwrap();
        assert!(at.feasible);
        assert!(
            (at.objective - chb).abs() <= 1e-6,
            "{} vs {chb}",
            at.objective
        );
    }
}

#[test]
fn positive_targets_do_not_beat_budget_levers_on_singleton_supports() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for inst in corpus(14, 100, singleton_shape()) {
        let chb = solve_ch_opt_budget(&inst).unwrap().value;
        for _ in 0..50 {
            let levers: Vec<Lever> = inst
                .channels
                .iter()
                .map(|c| Lever {
                    target_roi: (rng.gen_range(0.0..2.0 * inst.gamma) / 0.01).round() * 0.01,
                    budget: rng.gen_range(0.0..=c.max_total_cost()),
                })
                .collect();
            let at = evaluate_levers(&inst, &levers).unwrap();
            if at.feasible {
                assert!(at.objective <= chb + 1e-6, "{} > {chb}", at.objective);
            }
        }
    }
}

#[test]
fn budget_levers_match_global_optimum_on_singleton_supports() {
    for inst in corpus(15, 100, singleton_shape()) {
        let gl = solve_gl_opt(&inst).unwrap().value;
        let chb = solve_ch_opt_budget(&inst).unwrap().value;
        assert!((gl - chb).abs() <= 1e-6, "gl {gl} vs chb {chb}");
    }
}

#[test]
fn sampled_feasible_levers_never_beat_the_global_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut feasible = 0;
    for inst in corpus(17, 100, InstanceShape::default()) {
        let gl = solve_gl_opt(&inst).unwrap().value;
        for _ in 0..50 {
            let levers: Vec<Lever> = inst
                .channels
                .iter()
                .map(|c| Lever {
                    target_roi: if rng.gen_bool(0.5) {
                        0.0
                    } else {
                        rng.gen_range(0.0..2.0 * inst.gamma)
                    },
                    budget: rng.gen_range(0.0..=c.max_total_cost()),
                })
                .collect();
            let at = evaluate_levers(&inst, &levers).unwrap();
            if at.feasible {
                feasible += 1;
                assert!(at.objective <= gl + 1e-6);
            }
        }
    }
    assert!(feasible > 500);
}

/// GL-OPT without the ROI row, solved directly.
fn unconstrained_value(inst: &Instance) -> f64 {
    let mut coeffs = Vec::new();
    for ch in &inst.channels {
        for (p, o) in ch.iter() {
            for a in &o.auctions {
                coeffs.push((p, a.value, a.cost));
            }
        }
    }
    let mut lp = LinearProgram::new(coeffs.len());
    for (i, &(p, v, d)) in coeffs.iter().enumerate() {
        lp.objective[i] = p * (v - inst.alpha * d);
        lp.bounds[i] = (0.0, 1.0);
    }
    lp.add_constraint(Constraint::le(
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &(p, _, d))| (i, p * d))
            .collect(),
        inst.rho,
    ));
    simplex_solve(&lp).unwrap().objective
}

#[test]
fn roi_row_is_redundant_when_private_cost_equals_target() {
    for inst in corpus(18, 100, InstanceShape::default()) {
        let gamma = inst.gamma;
        let inst = inst.with_alpha(gamma);
        let gl = solve_gl_opt(&inst).unwrap().value;
        assert!((gl - unconstrained_value(&inst)).abs() <= 1e-8);
    }
}

#[test]
fn oracles_are_deterministic() {
    for inst in corpus(19, 30, InstanceShape::default()) {
        assert_eq!(solve_gl_opt(&inst).unwrap(), solve_gl_opt(&inst).unwrap());
        assert_eq!(
            solve_ch_opt_budget(&inst).unwrap(),
            solve_ch_opt_budget(&inst).unwrap()
        );
    }
}
