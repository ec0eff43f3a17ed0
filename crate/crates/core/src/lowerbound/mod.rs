//! Bayes risk lower bounds: regime priors, the constrained allocation
//! program, its closed-form relaxations and prior concentration checks.

mod closed_form;
mod membership;
mod prior;
mod solver;

pub use closed_form::{
    bound_report, bound_report_with, closed_form_bound, closed_form_on_prior, instance_for,
    BoundReport, DEFAULT_GAMMA,
};
pub use membership::{prior_membership_check, MembershipReport, DEFAULT_TAU};
pub use prior::{prior_dimension, prior_for_regime, PriorSpec, MAX_ELL};
pub use solver::{solve_optimization, LowerBoundInstance, LowerBoundSolution, BOTTOM_OFFSET};
