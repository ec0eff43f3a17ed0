use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{powu, Real};

/// One problem instance: `m` machines, each holding `n` samples (noise
/// variance `1/n` per coefficient) and allowed `b` bits to the center,
/// estimating a function of smoothness `alpha` in a Sobolev ball of
/// radius `c`.
///
/// `c_tilde` is the radius of the matching coefficient ellipsoid
/// `sum_i i^(2 alpha) theta_i^2 <= c_tilde^2`; it defaults to `c / pi^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig<T> {
    pub n: u64,
    pub m: u64,
    pub b: u64,
    pub alpha: u32,
    pub c: T,
    pub c_tilde: T,
}

impl<T: Real> ProblemConfig<T> {
    pub fn new(n: u64, m: u64, b: u64, alpha: u32, c: T, c_tilde: Option<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("n", "must be at least 1"));
        }
        if m == 0 {
            return Err(Error::validation("m", "must be at least 1"));
        }
        if b == 0 {
            return Err(Error::validation("b", "must be at least 1"));
        }
        if alpha == 0 {
            return Err(Error::validation("alpha", "must be at least 1"));
        }
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::validation(
                "c",
                format!("must be finite and positive, got {c}"),
            ));
        }
        let c_tilde = match c_tilde {
            Some(ct) if !(ct.is_finite() && ct > T::zero()) => {
                return Err(Error::validation(
                    "c_tilde",
                    format!("must be finite and positive, got {ct}"),
                ))
            }
            Some(ct) => ct,
            None => c / powu(T::lit(std::f64::consts::PI), alpha),
        };
        Ok(ProblemConfig {
            n,
            m,
            b,
            alpha,
            c,
            c_tilde,
        })
    }

    /// Same instance with one of the integer parameters replaced.
    pub fn with_nmb(&self, n: u64, m: u64, b: u64) -> Result<Self> {
        Self::new(n, m, b, self.alpha, self.c, Some(self.c_tilde))
    }

    /// Noise variance of a single observation, `1/n`.
    pub fn noise_variance(&self) -> T {
        T::one() / T::from_u64_lossy(self.n)
    }

    /// Exponent denominator `2 alpha + 1`.
    pub fn rate_root(&self) -> u32 {
        2 * self.alpha + 1
    }
}

/// Validated constructor with `c_tilde` defaulting to `c / pi^alpha`.
pub fn make_config<T: Real>(
    n: u64,
    m: u64,
    b: u64,
    alpha: u32,
    c: T,
    c_tilde: Option<T>,
) -> Result<ProblemConfig<T>> {
    ProblemConfig::new(n, m, b, alpha, c, c_tilde)
}
