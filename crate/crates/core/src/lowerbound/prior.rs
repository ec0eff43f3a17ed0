use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemConfig, Regime};
use crate::scalar::{powu, Real};

/// Largest prior dimension we are willing to materialize.
pub const MAX_ELL: usize = 1 << 24;

/// Independent centered Gaussian prior on the first `ell` coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec<T> {
    pub ell: usize,
    pub variances: Vec<T>,
    pub gamma: T,
    pub regime: Regime,
}

impl<T: Real> PriorSpec<T> {
    pub fn new(variances: Vec<T>, gamma: T, regime: Regime) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::validation(
                "variances",
                "prior needs at least one coordinate",
            ));
        }
        if let Some(v) = variances
            .iter()
            .find(|v| !(v.is_finite() && **v > T::zero()))
        {
            return Err(Error::validation(
                "variances",
                format!("must be finite and positive, got {v}"),
            ));
        }
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::validation(
                "gamma",
                format!("must be finite and positive, got {gamma}"),
            ));
        }
        Ok(PriorSpec {
            ell: variances.len(),
            variances,
            gamma,
            regime,
        })
    }

    /// `sum_i i^(2 alpha) sigma_i^2`.
    pub fn weighted_mass(&self, alpha: u32) -> T {
        self.weights(alpha).sum()
    }

    /// `sum_i w_i / max_i w_i` with `w_i = i^(2 alpha) sigma_i^2`.
    pub fn flatness_ratio(&self, alpha: u32) -> T {
        let max = self.weights(alpha).fold(T::zero(), T::max);
        self.weighted_mass(alpha) / max
    }

    /// Ellipsoid mass within a relative slack and the flatness floor
    /// `ratio >= ell / (2 alpha + 1)`.
    pub fn satisfies_invariants(&self, alpha: u32, c_tilde: T) -> bool {
        let slack = T::one() + T::lit(1e-9);
        let floor = T::from_usize(self.ell).unwrap() / T::from_u32(2 * alpha + 1).unwrap();
        self.weighted_mass(alpha) <= c_tilde * c_tilde * slack
            && self.flatness_ratio(alpha) >= floor * (T::one() - T::lit(1e-9))
    }

    fn weights(&self, alpha: u32) -> impl Iterator<Item = T> + '_ {
        self.variances
            .iter()
            .enumerate()
            .map(move |(k, v)| powu(T::from_usize(k + 1).unwrap(), 2 * alpha) * *v)
    }
}

fn round_dimension(raw: f64) -> Result<usize> {
    if !(raw.is_finite() && raw >= 0.5) {
        return Err(Error::validation(
            "gamma",
            format!("prior dimension {raw:.3} rounds below 1"),
        ));
    }
    let ell = raw.round();
    if ell > MAX_ELL as f64 {
        return Err(Error::validation(
            "gamma",
            format!("prior dimension {ell} exceeds {MAX_ELL}"),
        ));
    }
    Ok(ell as usize)
}

/// Prior dimension for `regime`, before any variance profile is built.
pub fn prior_dimension<T: Real>(
    config: &ProblemConfig<T>,
    regime: Regime,
    gamma: T,
) -> Result<usize> {
    if !(gamma.is_finite() && gamma > T::zero()) {
        return Err(Error::validation(
            "gamma",
            format!("must be finite and positive, got {gamma}"),
        ));
    }
    let g = gamma.as_f64();
    let (n, m, b) = (config.n as f64, config.m as f64, config.b as f64);
    let a = config.alpha as f64;
    let raw = match regime {
        Regime::Insufficient => g * m * b,
        Regime::Intermediate => (g * m * b * n).powf(1.0 / (2.0 * a + 2.0)),
        Regime::Sufficient => (g * m * n).powf(1.0 / (2.0 * a + 1.0)),
    };
    round_dimension(raw)
}

/// The least-favorable prior used for `regime`'s lower bound.
///
/// Insufficient: `ell = gamma m b`, `sigma_i^2 = c^2 / (i^(2a) ell)`.
/// Intermediate: `ell = (gamma m b n)^(1/(2a+2))`, flat `sigma^2 = c^2 / sum i^(2a)`.
/// Sufficient: `ell = (gamma m n)^(1/(2a+1))`, same flat profile.
/// `ell` is rounded to the nearest integer.
pub fn prior_for_regime<T: Real>(
    config: &ProblemConfig<T>,
    regime: Regime,
    gamma: T,
) -> Result<PriorSpec<T>> {
    let ell = prior_dimension(config, regime, gamma)?;
    let c2 = config.c_tilde * config.c_tilde;
    let two_a = 2 * config.alpha;
    let variances = match regime {
        Regime::Insufficient => {
            let ell_t = T::from_usize(ell).unwrap();
            (1..=ell)
                .map(|i| c2 / (powu(T::from_usize(i).unwrap(), two_a) * ell_t))
                .collect()
        }
        Regime::Intermediate | Regime::Sufficient => {
            let mass: T = (1..=ell)
                .map(|i| powu(T::from_usize(i).unwrap(), two_a))
                .sum();
            vec![c2 / mass; ell]
        }
    };
    PriorSpec::new(variances, gamma, regime)
}
