use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lowerbound::prior::{prior_for_regime, PriorSpec};
use crate::lowerbound::solver::{solve_optimization, LowerBoundInstance};
use crate::model::{classify_regime, ProblemConfig, Regime};
use crate::scalar::Real;

/// Default tuning constant for the regime priors.
pub const DEFAULT_GAMMA: f64 = 1.0;

/// Relaxed bound for `regime` evaluated on an explicit prior, with the
/// budget `B = m b ln 2` in nats:
///
/// - insufficient: `ell (prod sigma_i^2)^(1/ell) exp(-2B/ell)`
/// - intermediate: `sum_i 1 / (1/sigma_i^2 + 2Bn/ell)`
/// - sufficient:   `sum_i sigma_i^2 v / (sigma_i^2 + v)`, `v = 1/(mn)`
pub fn closed_form_on_prior<T: Real>(
    config: &ProblemConfig<T>,
    regime: Regime,
    prior: &PriorSpec<T>,
) -> T {
    let ell = prior.ell as f64;
    let budget = config.m as f64 * config.b as f64 * std::f64::consts::LN_2;
    let n = config.n as f64;
    let vars = prior.variances.iter().map(|v| v.as_f64());
    let value = match regime {
        Regime::Insufficient => {
            let mean_log = vars.map(f64::ln).sum::<f64>() / ell;
            ell * (mean_log - 2.0 * budget / ell).exp()
        }
        Regime::Intermediate => vars.map(|v| 1.0 / (1.0 / v + 2.0 * budget * n / ell)).sum(),
        Regime::Sufficient => {
            let floor = 1.0 / (config.m as f64 * n);
            vars.map(|v| v * floor / (v + floor)).sum()
        }
    };
    T::lit(value)
}

/// [`closed_form_on_prior`] with the regime's own prior.
pub fn closed_form_bound<T: Real>(
    config: &ProblemConfig<T>,
    regime: Regime,
    gamma: T,
) -> Result<T> {
    let prior = prior_for_regime(config, regime, gamma)?;
    Ok(closed_form_on_prior(config, regime, &prior))
}

/// Lower-bound program for `config` on a given prior.
pub fn instance_for<T: Real>(
    config: &ProblemConfig<T>,
    prior: PriorSpec<T>,
) -> Result<LowerBoundInstance<T>> {
    LowerBoundInstance::new(
        config.m,
        T::from_u64_lossy(config.b),
        config.noise_variance(),
        prior,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub regime: Regime,
    pub solver_value: T,
    pub closed_form_value: T,
    pub prior: PriorSpec<T>,
}

/// Solver and closed-form bounds on the prior matching the config's regime.
pub fn bound_report<T: Real>(config: &ProblemConfig<T>) -> Result<BoundReport<T>> {
    bound_report_with(config, T::lit(DEFAULT_GAMMA))
}

pub fn bound_report_with<T: Real>(config: &ProblemConfig<T>, gamma: T) -> Result<BoundReport<T>> {
    let regime = classify_regime(config);
    let prior = prior_for_regime(config, regime, gamma)?;
    let closed_form_value = closed_form_on_prior(config, regime, &prior);
    let solution = solve_optimization(&instance_for(config, prior.clone())?)?;
    Ok(BoundReport {
        regime,
        solver_value: solution.value,
        closed_form_value,
        prior,
    })
}
