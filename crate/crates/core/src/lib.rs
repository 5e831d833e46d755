//! Multi-channel autobidding under global budget and ROI constraints.
//!
//! The crate provides exact channel procurement oracles, exact benchmarks
//! (the global optimum and the best lever-based optimum), the SGD-UCB family
//! of online budget-pacing learners, and a sweep harness that measures how
//! regret and constraint violation scale with the horizon.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod channel_oracle;
pub mod generate;
pub mod harness;
pub mod instance;
pub mod learner;
pub mod lp;
pub mod multi_item;
pub mod pwl;

pub use benchmarks::{
    compute_cf, solve_ch_opt_budget, solve_ch_opt_roi, solve_gl_opt, Benchmark, BenchmarkRegistry,
    BenchmarkResult,
};
pub use channel_oracle::{solve_budget_only, solve_sequence, solve_with_roi, Allocation, Lever};
pub use instance::{validate, Auction, ChannelSupport, Instance, Outcome, Realization};
pub use learner::{
    run_sgd_ucb, run_sgd_ucb_ii, BudgetLearner, LearnerConfig, LearnerRegistry, RunLog,
};
pub use pwl::{build_expected_conversion, DualContext, PiecewiseLinear};
