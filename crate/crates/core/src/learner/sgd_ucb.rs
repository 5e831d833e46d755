//! Single-phase learner: UCB budget choice per channel, SGD on the duals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    averaged_budgets, check_preconditions, BudgetLearner, LearnerConfig, LearnerError, RunLog,
    UcbCore,
};
use crate::instance::Instance;

pub struct SgdUcb;

impl BudgetLearner for SgdUcb {
    fn name(&self) -> &'static str {
        "sgd-ucb"
    }

    fn run(&self, instance: &Instance, config: &LearnerConfig) -> Result<RunLog, LearnerError> {
        run_sgd_ucb(instance, config)
    }
}

pub fn run_sgd_ucb(instance: &Instance, config: &LearnerConfig) -> Result<RunLog, LearnerError> {
    check_preconditions(instance, false)?;
    let r = config.resolve(instance, false)?;
    let horizon = config.horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut core = UcbCore::new(instance, &r, horizon);
    let mut balance = 0.0;
    let periods: Vec<_> = (1..=horizon)
        .map(|t| core.play(t, t, &mut rng, &mut balance))
        .collect();
    Ok(RunLog {
        algorithm: "sgd-ucb".into(),
        horizon,
        seed: config.seed,
        eta: r.eta,
        delta: r.delta,
        beta: None,
        eta_warning: r.eta >= r.eta_bound,
        eta_bound: r.eta_bound,
        arms: r.arms,
        rho_bar: averaged_budgets(&periods, instance.num_channels(), horizon),
        termination: horizon,
        phase_one_end: None,
        periods,
        stats: core.stats,
        final_duals: core.duals,
    })
}
