//! Two-phase learner: fixed small budgets until the realized ROI surplus
//! reaches `sqrt(T) ln T`, then the single-phase learner, stopping before any
//! period that could push cumulative budget past `rho T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    averaged_budgets, check_preconditions, gradients, BudgetLearner, LearnerConfig, LearnerError,
    PeriodRecord, RunLog, UcbCore,
};
use crate::channel_oracle::budget_only_totals;
use crate::instance::Instance;

pub struct SgdUcbII;

impl BudgetLearner for SgdUcbII {
    fn name(&self) -> &'static str {
        "sgd-ucb-ii"
    }

    fn run(&self, instance: &Instance, config: &LearnerConfig) -> Result<RunLog, LearnerError> {
        run_sgd_ucb_ii(instance, config)
    }
}

pub fn run_sgd_ucb_ii(instance: &Instance, config: &LearnerConfig) -> Result<RunLog, LearnerError> {
    check_preconditions(instance, true)?;
    let r = config.resolve(instance, true)?;
    let beta = r.beta.expect("resolved with beta");
    let horizon = config.horizon;
    let m = instance.num_channels();
    let rho = instance.rho;
    let cap = rho * horizon as f64;
    let threshold = (horizon as f64).sqrt() * (horizon as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut core = UcbCore::new(instance, &r, horizon);
    let mut periods: Vec<PeriodRecord> = Vec::with_capacity(horizon);
    let mut balance = 0.0;
    let mut surplus = 0.0;
    let mut stopped = false;
    let mut t = 1;

    // The check uses max(rho, beta) so a phase-one budget above rho can never
    // overshoot the total.
    let warmup_step = m as f64 * rho.max(beta);
    while t <= horizon && surplus <= threshold {
        if balance + warmup_step > cap {
            stopped = true;
            break;
        }
        let z = instance.sample(&mut rng);
        let budgets = vec![beta; m];
        let (conversions, spends): (Vec<f64>, Vec<f64>) = (0..m)
            .map(|j| budget_only_totals(z.auctions(instance, j), beta))
            .unzip();
        let (g1, g2) = gradients(instance, &conversions, &budgets);
        surplus += g1;
        balance += m as f64 * beta;
        periods.push(PeriodRecord {
            t,
            warmup: true,
            lambda: 0.0,
            mu: 0.0,
            budgets,
            arms: vec![None; m],
            conversions,
            spends,
            g1,
            g2,
            balance,
        });
        t += 1;
    }
    let phase_one_end = t - 1;

    if !stopped {
        let mut local = 1;
        while t <= horizon {
            if balance + m as f64 * rho > cap {
                break;
            }
            periods.push(core.play(t, local, &mut rng, &mut balance));
            t += 1;
            local += 1;
        }
    }

    Ok(RunLog {
        algorithm: "sgd-ucb-ii".into(),
        horizon,
        seed: config.seed,
        eta: r.eta,
        delta: r.delta,
        beta: Some(beta),
        eta_warning: r.eta >= r.eta_bound,
        eta_bound: r.eta_bound,
        arms: r.arms,
        rho_bar: averaged_budgets(&periods, m, horizon),
        termination: t - 1,
        phase_one_end: Some(phase_one_end),
        periods,
        stats: core.stats,
        final_duals: core.duals,
    })
}
