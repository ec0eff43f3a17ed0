//! Convex program for the Bayes risk lower bound:
//!
//! ```text
//! minimize   sum_i d_i
//! subject to sum_i g_i(d_i) <= B
//!            s_i^2 a / (s_i^2 + a) <= d_i <= s_i^2,     a = eps^2 / m
//! g_i(d) = 1/2 log(s_i^2 / d) + m/2 log((m / eps^2) / (1/s_i^2 + m/eps^2 - 1/d))
//! ```
//!
//! with the budget `B = m b ln 2` in nats. Each `g_i` is convex and
//! decreasing on its box, so the Lagrangian separates and both the inner
//! per-coordinate search and the outer search on the multiplier are
//! monotone bisections. Arithmetic runs in f64 regardless of `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowerbound::PriorSpec;
use crate::scalar::Real;

/// Relative offset keeping the inner search off the singular box bottom.
pub const BOTTOM_OFFSET: f64 = 1e-12;
const INNER_REL_WIDTH: f64 = 1e-12;
const OUTER_REL_WIDTH: f64 = 1e-14;
const MAX_ITER: u32 = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundInstance<T> {
    pub m: u64,
    /// Per-machine budget in bits; may be fractional.
    pub b: T,
    pub eps2: T,
    pub prior: PriorSpec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundSolution<T> {
    pub d: Vec<T>,
    pub value: T,
    /// Multiplier on the budget; infinite when the budget is zero.
    pub multiplier: T,
    /// Whether the budget binds.
    pub active: bool,
}

impl<T: Real> LowerBoundInstance<T> {
    pub fn new(m: u64, b: T, eps2: T, prior: PriorSpec<T>) -> Result<Self> {
        if m == 0 {
            return Err(Error::validation("m", "must be at least 1"));
        }
        if !(b.is_finite() && b >= T::zero()) {
            return Err(Error::validation(
                "b",
                format!("must be finite and non-negative, got {b}"),
            ));
        }
        if !(eps2.is_finite() && eps2 > T::zero()) {
            return Err(Error::validation(
                "eps2",
                format!("must be finite and positive, got {eps2}"),
            ));
        }
        Ok(LowerBoundInstance { m, b, eps2, prior })
    }

    /// `m b ln 2`.
    pub fn budget_nats(&self) -> f64 {
        self.m as f64 * self.b.as_f64() * std::f64::consts::LN_2
    }

    /// Left-hand side of the budget constraint at `d`.
    pub fn constraint_value(&self, d: &[T]) -> f64 {
        let ctx = self.context();
        ctx.coords
            .iter()
            .zip(d)
            .map(|(c, di)| c.g(di.as_f64(), ctx.m, ctx.eps2))
            .sum()
    }

    /// `[s^2 a / (s^2 + a), s^2]` for every coordinate.
    pub fn boxes(&self) -> Vec<(T, T)> {
        self.context()
            .coords
            .iter()
            .map(|c| (T::lit(c.bottom), T::lit(c.var)))
            .collect()
    }

    fn context(&self) -> Context {
        let m = self.m as f64;
        let eps2 = self.eps2.as_f64();
        let a = eps2 / m;
        let coords = self
            .prior
            .variances
            .iter()
            .map(|v| {
                let var = v.as_f64();
                let bottom = var * a / (var + a);
                Coord {
                    var,
                    bottom,
                    lo: (bottom * (1.0 + BOTTOM_OFFSET)).min(var),
                }
            })
            .collect();
        Context { m, eps2, coords }
    }
}

struct Context {
    m: f64,
    eps2: f64,
    coords: Vec<Coord>,
}

struct Coord {
    var: f64,
    bottom: f64,
    lo: f64,
}

impl Coord {
    fn g(&self, d: f64, m: f64, eps2: f64) -> f64 {
        if d >= self.var {
            return 0.0;
        }
        let gap = (self.var - d) / self.var;
        let w = (self.var - d) * eps2 / (m * d * self.var);
        if w >= 1.0 {
            return f64::INFINITY;
        }
        -0.5 * (-gap).ln_1p() - 0.5 * m * (-w).ln_1p()
    }

    fn dg(&self, d: f64, m: f64, eps2: f64) -> f64 {
        let v = m / eps2 - (self.var - d) / (d * self.var);
        -0.5 / d - m / (2.0 * d * d * v)
    }

    /// Minimizer of `d + lambda g(d)` on `[lo, var]`.
    fn argmin(&self, lambda: f64, m: f64, eps2: f64) -> f64 {
        let slope = |d: f64| 1.0 + lambda * self.dg(d, m, eps2);
        if slope(self.var) <= 0.0 {
            return self.var;
        }
        if slope(self.lo) >= 0.0 {
            return self.lo;
        }
        let (mut lo, mut hi) = (self.lo, self.var);
        while hi - lo > INNER_REL_WIDTH * hi {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

impl Context {
    fn allocation(&self, lambda: f64) -> (Vec<f64>, f64) {
        let d: Vec<f64> = self
            .coords
            .iter()
            .map(|c| c.argmin(lambda, self.m, self.eps2))
            .collect();
        let g = self
            .coords
            .iter()
            .zip(&d)
            .map(|(c, di)| c.g(*di, self.m, self.eps2))
            .sum();
        (d, g)
    }
}

fn finish<T: Real>(d: Vec<f64>, multiplier: f64, active: bool) -> LowerBoundSolution<T> {
    let value = d.iter().sum::<f64>();
    LowerBoundSolution {
        d: d.into_iter().map(T::lit).collect(),
        value: T::lit(value),
        multiplier: T::lit(multiplier),
        active,
    }
}

/// Solves the program by bisection on the budget multiplier.
///
/// Returns the feasible end of the final bracket, so the budget residual
/// is never positive beyond rounding.
pub fn solve_optimization<T: Real>(
    instance: &LowerBoundInstance<T>,
) -> Result<LowerBoundSolution<T>> {
    let ctx = instance.context();
    let budget = instance.budget_nats();
    if budget <= 0.0 {
        let d = ctx.coords.iter().map(|c| c.var).collect();
        return Ok(finish(d, f64::INFINITY, true));
    }

    let bottom: Vec<f64> = ctx.coords.iter().map(|c| c.lo).collect();
    let at_bottom: f64 = ctx.coords.iter().map(|c| c.g(c.lo, ctx.m, ctx.eps2)).sum();
    if at_bottom <= budget {
        return Ok(finish(bottom, 0.0, false));
    }

    // bracket: g(lambda_lo) > budget >= g(lambda_hi)
    let mut iterations = 0u32;
    let mut lambda = 1.0;
    let (mut lo, mut hi);
    let (_, g1) = ctx.allocation(lambda);
    if g1 <= budget {
        hi = lambda;
        loop {
            lambda *= 0.5;
            iterations += 1;
            if ctx.allocation(lambda).1 > budget {
                lo = lambda;
                break;
            }
            hi = lambda;
            if iterations > MAX_ITER {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: at_bottom - budget,
                });
            }
        }
    } else {
        lo = lambda;
        loop {
            lambda *= 2.0;
            iterations += 1;
            if ctx.allocation(lambda).1 <= budget {
                hi = lambda;
                break;
            }
            lo = lambda;
            if iterations > MAX_ITER {
                return Err(Error::NoConvergence {
                    iterations,
                    residual: g1 - budget,
                });
            }
        }
    }

    while hi / lo - 1.0 > OUTER_REL_WIDTH {
        iterations += 1;
        if iterations > MAX_ITER {
            let residual = ctx.allocation(hi).1 - budget;
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if ctx.allocation(mid).1 > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (d, _) = ctx.allocation(hi);
    Ok(finish(d, hi, true))
}
