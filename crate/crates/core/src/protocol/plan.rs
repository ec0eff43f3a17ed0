use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmath::{floor_root, floor_root_ratio};
use crate::model::ProblemConfig;
use crate::quantizer::QuantizerSpec;
use crate::scalar::Real;

/// Constants every machine and the center derive from the public config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolPlan<T> {
    pub config: ProblemConfig<T>,
    /// Grid step `max{(mb)^-(2a+1)/2, n^-1/2}`.
    pub delta: T,
    /// Bits per quantized value.
    pub b0: u32,
    /// Values per machine, `floor(b / b0)`.
    pub btilde: u64,
    /// Machines quantizing each retained coefficient.
    pub k: u64,
    /// Truncation index; the estimate is zero past it.
    pub istar: u64,
    pub quantizer: QuantizerSpec<T>,
}

/// Derives the protocol constants for `config`.
pub fn plan<T: Real>(config: &ProblemConfig<T>) -> Result<ProtocolPlan<T>> {
    let p = 2 * config.alpha + 1;
    let (n, m, b) = (config.n, config.m, config.b);
    let mn = m as u128 * n as u128;

    let quantizer = quantizer_for(config)?;
    let b0 = quantizer.bits_per_value.max(1);
    let btilde = b / b0 as u64;
    if btilde == 0 {
        return Err(Error::BudgetTooSmall { b, b0 });
    }

    let k = replication_count(config);
    let istar = ((m as u128 * btilde as u128 / k as u128).min(floor_root(mn, p))) as u64;
    debug_assert!(istar >= 1);

    Ok(ProtocolPlan {
        config: *config,
        delta: quantizer.delta,
        b0,
        btilde,
        k,
        istar,
        quantizer,
    })
}

impl<T: Real> ProtocolPlan<T> {
    /// Payload length of every message, `btilde * b0 <= b`.
    pub fn message_bits(&self) -> u64 {
        self.btilde * self.b0 as u64
    }

    /// `I_j = { ceil((m s + j) / k) : s = 0..btilde }` in `s` order, 1-based `j`.
    pub fn index_set(&self, j: u64) -> Vec<usize> {
        (0..self.btilde).map(|s| self.index_of(j, s)).collect()
    }

    #[inline]
    pub fn index_of(&self, j: u64, s: u64) -> usize {
        debug_assert!(j >= 1 && j <= self.config.m);
        (self.config.m * s + j).div_ceil(self.k) as usize
    }

    /// Number of machines whose index set contains `i`.
    ///
    /// `m s + j` enumerates `1..=m btilde` exactly once, and `i` collects the
    /// values in `((i-1)k, ik]`, so the count is the overlap of the two ranges.
    pub fn coverage_count(&self, i: usize) -> u64 {
        let total = self.config.m * self.btilde;
        let lo = (i as u64 - 1) * self.k;
        let hi = (i as u64 * self.k).min(total);
        hi.saturating_sub(lo)
    }
}

/// Grid step `max{(mb)^-(2a+1)/2, n^-1/2}` and the quantizer built on it.
fn quantizer_for<T: Real>(config: &ProblemConfig<T>) -> Result<QuantizerSpec<T>> {
    let p = 2 * config.alpha + 1;
    let mb = config.m as u128 * config.b as u128;
    let budget_step = T::from_u128(mb)
        .unwrap()
        .powf(-T::from_u32(p).unwrap() / T::lit(2.0));
    let noise_step = T::one() / T::from_u64_lossy(config.n).sqrt();
    QuantizerSpec::new(budget_step.max(noise_step), config.c_tilde)
}

/// Bits per quantized value, `b0`, without checking that `b` can hold one.
pub fn quantizer_width<T: Real>(config: &ProblemConfig<T>) -> Result<u32> {
    Ok(quantizer_for(config)?.bits_per_value.max(1))
}

/// `k = (floor((mb)^(p/(p+1)) n^(-1/(p+1))) v 1) ^ m` with `p = 2 alpha + 1`.
pub fn replication_count<T>(config: &ProblemConfig<T>) -> u64 {
    let p = 2 * config.alpha + 1;
    let mb = config.m as u128 * config.b as u128;
    floor_root_ratio(mb, p, config.n as u128, p + 1)
        .max(1)
        .min(config.m as u128) as u64
}

/// Free-function form of [`ProtocolPlan::index_set`].
pub fn index_set<T: Real>(plan: &ProtocolPlan<T>, j: u64) -> Vec<usize> {
    plan.index_set(j)
}

/// Free-function form of [`ProtocolPlan::coverage_count`].
pub fn coverage_count<T: Real>(plan: &ProtocolPlan<T>, i: usize) -> u64 {
    plan.coverage_count(i)
}
