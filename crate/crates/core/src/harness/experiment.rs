use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::DEFAULT_GAMMA;
use crate::model::{classify_regime, PriorMode, ProblemConfig, Regime};
use crate::scalar::Real;

use super::fit::{fit_slope, SlopeFit};
use super::sweep::{
    regime_margin, run_sweep, BudgetRule, SweepAxis, SweepSpec, SweepTable, ThetaRecipe,
};

/// Minimum factor by which every canonical point clears its regime's
/// inequalities.
pub const SAFETY_FACTOR: f64 = 4.0;

/// Default Monte Carlo trials per point.
pub const DEFAULT_TRIALS: u64 = 200;

/// Allowed deviation of the fitted slope from the expected exponent.
pub fn slope_tolerance(regime: Regime) -> f64 {
    match regime {
        Regime::Insufficient => 0.3,
        Regime::Intermediate => 0.12,
        Regime::Sufficient => 0.1,
    }
}

/// The fixed lattice each regime is checked on.
///
/// - insufficient: `m` doubles over five points at `n = 10^15` (`10^18`
///   for `alpha >= 2`) with a fixed number of values per machine, so `mb`
///   grows geometrically while `k = 1`;
/// - intermediate: `m = 64`, `n = 10^5 s^(2a+1)` and `2s` values per
///   machine for `s = 1, 2, 4, 8, 16` (`10^9 s^(2a+1)` and `s` values for
///   `alpha >= 2`);
/// - sufficient: `m = 8`, `n = 10^3 .. 10^7`, with enough values per
///   machine to cover four times the effective dimension.
///
/// Every point uses the regime's matched Gaussian prior.
pub fn canonical_sweep<T: Real>(
    regime: Regime,
    alpha: u32,
    trials: u64,
    seed: u64,
) -> Result<SweepSpec<T>> {
    if alpha == 0 {
        return Err(Error::validation("alpha", "must be at least 1"));
    }
    let c = T::lit(std::f64::consts::PI).powi(alpha as i32);
    let one = Some(T::one());
    let (axis, points, held, budget) = match regime {
        Regime::Insufficient if alpha == 1 => (
            SweepAxis::Mb,
            vec![8, 16, 32, 64, 128],
            ProblemConfig::new(1_000_000_000_000_000, 8, 1, alpha, c, one)?,
            BudgetRule::PerValue { values: 8 },
        ),
        Regime::Insufficient => (
            SweepAxis::Mb,
            vec![2, 4, 8, 16, 32],
            ProblemConfig::new(1_000_000_000_000_000_000, 2, 1, alpha, c, one)?,
            BudgetRule::PerValue { values: 1 },
        ),
        Regime::Intermediate if alpha == 1 => (
            SweepAxis::Mnb,
            vec![1, 2, 4, 8, 16],
            ProblemConfig::new(100_000, 64, 1, alpha, c, one)?,
            BudgetRule::PerValue { values: 2 },
        ),
        Regime::Intermediate => (
            SweepAxis::Mnb,
            vec![1, 2, 4, 8, 16],
            ProblemConfig::new(1_000_000_000, 64, 1, alpha, c, one)?,
            BudgetRule::PerValue { values: 1 },
        ),
        Regime::Sufficient => (
            SweepAxis::Mn,
            vec![1_000, 10_000, 100_000, 1_000_000, 10_000_000],
            ProblemConfig::new(1_000, 8, 1, alpha, c, one)?,
            BudgetRule::CoverDimension {
                factor: SAFETY_FACTOR,
            },
        ),
    };
    let sweep = SweepSpec {
        axis,
        points,
        held,
        budget,
        theta: ThetaRecipe::MatchedPrior {
            regime: Some(regime),
            gamma: T::lit(DEFAULT_GAMMA),
            mode: PriorMode::Reject,
        },
        trials,
        seed,
        gamma: T::lit(DEFAULT_GAMMA),
    };
    sweep.validate()?;
    for k in 0..sweep.points.len() {
        let cfg = sweep.config_at(k)?;
        let got = classify_regime(&cfg);
        let margin = regime_margin(&cfg);
        if got != regime || margin < SAFETY_FACTOR {
            return Err(Error::validation(
                "alpha",
                format!(
                    "canonical {regime} lattice point (n={}, m={}, b={}) is {got} with margin {margin:.2}",
                    cfg.n, cfg.m, cfg.b
                ),
            ));
        }
    }
    Ok(sweep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeExperiment<T> {
    pub regime: Regime,
    pub alpha: u32,
    pub slope: f64,
    pub expected_exponent: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub fit: SlopeFit,
    pub table: SweepTable<T>,
}

/// Runs the canonical sweep and compares the log-log slope of the mean
/// risk against the composite axis with the regime's exponent.
pub fn regime_experiment<T: Real>(
    regime: Regime,
    alpha: u32,
    trials: u64,
    seed: u64,
) -> Result<RegimeExperiment<T>> {
    let sweep = canonical_sweep::<T>(regime, alpha, trials, seed)?;
    let table = run_sweep(&sweep)?;
    if let Some(f) = table.failures.first() {
        return Err(Error::validation(
            "sweep",
            format!("point {} failed: {}", f.index, f.error),
        ));
    }
    let fit = fit_slope(&table.risk_points(), true)?;
    let expected_exponent = regime.expected_exponent(alpha);
    let tolerance = slope_tolerance(regime);
    Ok(RegimeExperiment {
        regime,
        alpha,
        slope: fit.slope,
        expected_exponent,
        tolerance,
        pass: (fit.slope - expected_exponent).abs() <= tolerance,
        fit,
        table,
    })
}
