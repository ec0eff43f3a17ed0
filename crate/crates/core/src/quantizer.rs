//! Subtractive-dithered uniform scalar quantizer and its grid-index codec.
//!
//! The grid `G(u, delta) = {u + t delta}` is offset by a dither `u` that
//! both ends regenerate from a shared key. For any input distribution the
//! error `q(X) - X` is then uniform on `(-delta/2, delta/2)` and independent
//! of `X`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Role, StreamKey};
use crate::scalar::Real;
use crate::stats;

/// Grid step, winsorization bound and the fixed index width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec<T> {
    pub delta: T,
    pub clamp: T,
    pub bits_per_value: u32,
}

impl<T: Real> QuantizerSpec<T> {
    /// Width is `ceil(log2(floor(2 clamp / delta) + 2))`, one index per grid
    /// point that can meet `[-clamp - delta/2, clamp + delta/2]`.
    pub fn new(delta: T, clamp: T) -> Result<Self> {
        if !(delta.is_finite() && delta > T::zero()) {
            return Err(Error::validation(
                "delta",
                format!("must be finite and positive, got {delta}"),
            ));
        }
        if !(clamp.is_finite() && clamp > T::zero()) {
            return Err(Error::validation(
                "clamp",
                format!("must be finite and positive, got {clamp}"),
            ));
        }
        let ratio = (T::lit(2.0) * clamp / delta).floor();
        let points = ratio
            .to_u64()
            .and_then(|r| r.checked_add(2))
            .filter(|p| *p <= 1u64 << 62)
            .ok_or_else(|| Error::validation("delta", "grid too fine for a 62-bit index"))?;
        Ok(QuantizerSpec {
            delta,
            clamp,
            bits_per_value: ceil_log2(points),
        })
    }

    /// Number of distinct indices the codec can emit.
    pub fn index_count(&self) -> u64 {
        1u64 << self.bits_per_value
    }
}

fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Shared-randomness address for one dither value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DitherKey {
    pub seed: u64,
    pub i: u64,
    pub j: u64,
}

impl DitherKey {
    pub fn new(seed: u64, i: u64, j: u64) -> Self {
        DitherKey { seed, i, j }
    }
}

/// `U_ij ~ Unif[0, delta)`, regenerable from the key alone.
#[inline]
pub fn dither<T: Real>(key: DitherKey, delta: T) -> T {
    let u = T::lit(StreamKey::new(key.seed, Role::Dither, key.j, key.i).uniform(0)) * delta;
    // rounding of the product can land on delta itself in low precision
    if u >= delta {
        T::zero()
    } else {
        u
    }
}

/// Integer grid coordinate of the nearest point; ties go to the lower point.
#[inline]
fn grid_coordinate<T: Real>(x: T, u: T, delta: T) -> i64 {
    ((x - u) / delta - T::lit(0.5))
        .ceil()
        .to_i64()
        .expect("grid coordinate fits in i64")
}

#[inline]
fn grid_point<T: Real>(t: i64, u: T, delta: T) -> T {
    u + T::from_i64(t).unwrap() * delta
}

/// Nearest point of `G(u, delta)` to `x`.
#[inline]
pub fn quantize<T: Real>(x: T, u: T, delta: T) -> T {
    grid_point(grid_coordinate(x, u, delta), u, delta)
}

#[inline]
pub fn winsorize<T: Real>(x: T, clamp: T) -> T {
    x.max(-clamp).min(clamp)
}

/// Clamps, quantizes against the keyed grid and returns the grid index.
/// Index 0 is the grid point nearest `-clamp`, the smallest one a clamped
/// input can reach.
pub fn encode_value<T: Real>(x: T, key: DitherKey, spec: &QuantizerSpec<T>) -> u64 {
    let u = dither(key, spec.delta);
    let base = grid_coordinate(-spec.clamp, u, spec.delta);
    let t = grid_coordinate(winsorize(x, spec.clamp), u, spec.delta);
    let index = (t - base) as u64;
    debug_assert!(index < spec.index_count());
    index
}

/// Inverse of [`encode_value`]: the grid point with the given index.
pub fn decode_value<T: Real>(index: u64, key: DitherKey, spec: &QuantizerSpec<T>) -> Result<T> {
    if index >= spec.index_count() {
        return Err(Error::IndexOutOfRange {
            index,
            bits: spec.bits_per_value,
        });
    }
    let u = dither(key, spec.delta);
    let base = grid_coordinate(-spec.clamp, u, spec.delta);
    Ok(grid_point(base + index as i64, u, spec.delta))
}

/// Outcome of [`error_law_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorLawCheck {
    pub samples: u64,
    /// KS p-value of the error against `Unif(-delta/2, delta/2)`.
    pub ks_pvalue: f64,
    /// Pearson correlation between error and input.
    pub correlation: f64,
    /// `E[e^2] / (delta^2 / 12)`.
    pub second_moment_ratio: f64,
    /// `p > 0.01`, `|corr| < 0.02` and the ratio within 3% of one.
    pub pass: bool,
}

/// Round-trips `samples` clamped Gaussian inputs with standard deviation
/// `clamp / sqrt(10)` through the codec and tests the error law.
pub fn error_law_check(
    spec: &QuantizerSpec<f64>,
    samples: u64,
    seed: u64,
) -> Result<ErrorLawCheck> {
    if samples < 2 {
        return Err(Error::validation("samples", "need at least 2"));
    }
    let sd = spec.clamp / 10f64.sqrt();
    let mut xs = Vec::with_capacity(samples as usize);
    let mut errs = Vec::with_capacity(samples as usize);
    for s in 0..samples {
        let x = winsorize(
            sd * StreamKey::new(seed, Role::Check, s, 0).normal(0),
            spec.clamp,
        );
        let key = DitherKey::new(seed, s, 1);
        let q = decode_value(encode_value(x, key, spec), key, spec)?;
        xs.push(x);
        errs.push(q - x);
    }
    let delta = spec.delta;
    let ks_pvalue = stats::ks_pvalue(&errs, |e| ((e + delta / 2.0) / delta).clamp(0.0, 1.0));
    let correlation = stats::pearson(&errs, &xs);
    let second_moment_ratio =
        errs.iter().map(|e| e * e).sum::<f64>() / samples as f64 / (delta * delta / 12.0);
    Ok(ErrorLawCheck {
        samples,
        ks_pvalue,
        correlation,
        second_moment_ratio,
        pass: ks_pvalue > 0.01
            && correlation.abs() < 0.02
            && (second_moment_ratio - 1.0).abs() <= 0.03,
    })
}
