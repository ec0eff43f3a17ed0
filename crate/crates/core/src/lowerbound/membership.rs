use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::PriorSpec;
use crate::rng::{Role, StreamKey};
use crate::scalar::{powu, Real};

/// Default shrinkage of the prior variances for membership checks.
pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub trials: u64,
    pub tau: f64,
    pub empirical_violation_rate: f64,
    /// Binomial standard error of the empirical rate.
    pub std_error: f64,
    pub concentration_bound: f64,
    /// `empirical <= bound + 3 std_error`.
    pub pass: bool,
}

/// Draws `theta_i ~ N(0, (1 - tau) sigma_i^2)` and counts draws leaving the
/// ellipsoid. The concentration bound is `exp(-t^2 r / 8)` with
/// `t = tau / (1 - tau)` and `r` the prior's flatness ratio, valid when the
/// prior mass is at most `c_tilde^2`.
pub fn prior_membership_check<T: Real>(
    prior: &PriorSpec<T>,
    alpha: u32,
    c_tilde: T,
    trials: u64,
    seed: u64,
    tau: f64,
) -> Result<MembershipReport> {
    if trials == 0 {
        return Err(Error::validation("trials", "must be at least 1"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::validation(
            "tau",
            format!("must lie in (0, 1), got {tau}"),
        ));
    }
    let weights: Vec<f64> = prior
        .variances
        .iter()
        .enumerate()
        .map(|(k, v)| powu((k + 1) as f64, 2 * alpha) * v.as_f64() * (1.0 - tau))
        .collect();
    let sd: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let limit = c_tilde.as_f64().powi(2);

    let violations = (0..trials)
        .filter(|&trial| {
            let key = StreamKey::new(seed, Role::Check, trial, 0);
            let norm: f64 = sd
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let z = s * key.normal(i as u64);
                    z * z
                })
                .sum();
            norm > limit
        })
        .count() as u64;

    let rate = violations as f64 / trials as f64;
    let std_error = (rate * (1.0 - rate) / trials as f64).sqrt();
    let t = tau / (1.0 - tau);
    let ratio = prior.flatness_ratio(alpha).as_f64();
    let concentration_bound = (-t * t * ratio / 8.0).exp();
    Ok(MembershipReport {
        trials,
        tau,
        empirical_violation_rate: rate,
        std_error,
        concentration_bound,
        pass: rate <= concentration_bound + 3.0 * std_error,
    })
}
