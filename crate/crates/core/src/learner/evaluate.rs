//! Scores averaged budgets against the exact expected curves.

use serde::{Deserialize, Serialize};

use super::{LearnerError, RunLog};
use crate::benchmarks::{solve_gl_opt, BenchmarkStatus};
use crate::instance::{check_moderate_budgets, ChannelSupport, Instance};
use crate::multi_item::build_expected_conversion_multi;
use crate::pwl::{build_expected_conversion, PiecewiseLinear};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// GL-OPT minus the expected objective at the averaged budgets.
    pub regret: f64,
    /// `sum_j (V_j(rho_bar_j) - gamma rho_bar_j)`.
    pub roi_surplus: f64,
    /// `rho - sum_j rho_bar_j`.
    pub budget_slack: f64,
}

impl RunMetrics {
    /// Combined negative parts of the two constraint margins.
    pub fn violation(&self) -> f64 {
        (-self.roi_surplus).max(0.0) + (-self.budget_slack).max(0.0)
    }
}

/// Expected conversion and objective curves of every channel, plus GL-OPT.
#[derive(Debug, Clone)]
pub struct Evaluator {
    gl_opt: f64,
    gamma: f64,
    rho: f64,
    conversion: Vec<PiecewiseLinear>,
    objective: Vec<PiecewiseLinear>,
}

fn curve(support: &ChannelSupport, rho: f64, alpha: f64) -> Result<PiecewiseLinear, LearnerError> {
    if support.is_multi_item() {
        Ok(build_expected_conversion_multi(support, rho, alpha)?)
    } else {
        Ok(build_expected_conversion(support, rho, alpha)?)
    }
}

impl Evaluator {
    /// Requires budgets that bind in every outcome, so that spend equals budget.
    pub fn new(instance: &Instance) -> Result<Self, LearnerError> {
        if !check_moderate_budgets(instance)? {
            return Err(LearnerError::Precondition(
                "evaluation needs every outcome's total cost to cover the global budget".into(),
            ));
        }
        let gl = solve_gl_opt(instance)?;
        if gl.status != BenchmarkStatus::Optimal {
            return Err(LearnerError::Precondition(format!(
                "GL-OPT is {:?}",
                gl.status
            )));
        }
        let mut conversion = Vec::new();
        let mut objective = Vec::new();
        for c in &instance.channels {
            conversion.push(curve(c, instance.rho, 0.0)?);
            objective.push(curve(c, instance.rho, instance.alpha)?);
        }
        Ok(Self {
            gl_opt: gl.value,
            gamma: instance.gamma,
            rho: instance.rho,
            conversion,
            objective,
        })
    }

    pub fn gl_opt(&self) -> f64 {
        self.gl_opt
    }

    pub fn evaluate(&self, rho_bar: &[f64]) -> Result<RunMetrics, LearnerError> {
        let mut value = 0.0;
        let mut surplus = 0.0;
        for ((conv, obj), &b) in self.conversion.iter().zip(&self.objective).zip(rho_bar) {
            value += obj.eval(b)?;
            surplus += conv.eval(b)? - self.gamma * b;
        }
        Ok(RunMetrics {
            regret: self.gl_opt - value,
            roi_surplus: surplus,
            budget_slack: self.rho - rho_bar.iter().sum::<f64>(),
        })
    }
}

pub fn evaluate_output(instance: &Instance, log: &RunLog) -> Result<RunMetrics, LearnerError> {
    Evaluator::new(instance)?.evaluate(&log.rho_bar)
}
