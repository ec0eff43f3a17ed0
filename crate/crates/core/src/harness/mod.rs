//! Monte Carlo risk estimation, sweeps over problem sizes, slope fits and
//! result tables.

mod experiment;
mod fit;
mod output;
mod risk;
mod sweep;

pub use experiment::{
    canonical_sweep, regime_experiment, slope_tolerance, RegimeExperiment, DEFAULT_TRIALS,
    SAFETY_FACTOR,
};
pub use fit::{fit_slope, SlopeFit};
pub use output::{write_csv, write_json, BoundRow, ResultRow};
pub use risk::{
    analytic_upper_bound, estimate_risk, estimate_risk_with, simulate_once, RiskComponents,
    RiskOptions, RiskReport, UpperBound,
};
pub use sweep::{
    budget_for_values, effective_dimension, geometric_points, point_seed, regime_margin, run_sweep,
    BudgetRule, SweepAxis, SweepFailure, SweepRow, SweepSpec, SweepTable, ThetaRecipe,
};
