//! Exact integer roots for the protocol's floor expressions.
//!
//! Expressions like `floor((mn)^(1/(2a+1)))` hit exact integers at common
//! parameter choices (`8000^(1/3) = 20`), where a floating-point root lands
//! just below and floors to the wrong value. These helpers estimate in
//! floating point and then correct with checked `u128` arithmetic, falling
//! back to log-space comparison only when the integers would overflow.

use std::cmp::Ordering;

fn checked_pow(x: u128, p: u32) -> Option<u128> {
    x.checked_pow(p)
}

/// Compares `lhs_base^lhs_exp * lhs_mul` with `rhs_base^rhs_exp * rhs_mul`.
pub fn cmp_powers(
    lhs_base: u128,
    lhs_exp: u32,
    lhs_mul: u128,
    rhs_base: u128,
    rhs_exp: u32,
    rhs_mul: u128,
) -> Ordering {
    let lhs = checked_pow(lhs_base, lhs_exp).and_then(|v| v.checked_mul(lhs_mul));
    let rhs = checked_pow(rhs_base, rhs_exp).and_then(|v| v.checked_mul(rhs_mul));
    match (lhs, rhs) {
        (Some(l), Some(r)) => l.cmp(&r),
        _ => {
            let ln = |b: u128, e: u32, m: u128| {
                if b == 0 || m == 0 {
                    f64::NEG_INFINITY
                } else {
                    e as f64 * (b as f64).ln() + (m as f64).ln()
                }
            };
            ln(lhs_base, lhs_exp, lhs_mul)
                .partial_cmp(&ln(rhs_base, rhs_exp, rhs_mul))
                .unwrap_or(Ordering::Equal)
        }
    }
}

/// Largest `r >= 0` with `r^p * den <= base^exp`, i.e. `floor((base^exp / den)^(1/p))`.
pub fn floor_root_ratio(base: u128, exp: u32, den: u128, p: u32) -> u128 {
    assert!(p >= 1 && den >= 1);
    let est = ((exp as f64 * (base as f64).ln() - (den as f64).ln()) / p as f64).exp();
    let mut r = if est.is_finite() && est > 0.0 {
        est.floor().min(u128::MAX as f64 / 2.0) as u128
    } else {
        0
    };
    let fits = |r: u128| cmp_powers(r, p, den, base, exp, 1) != Ordering::Greater;
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// `floor(x^(1/p))`.
pub fn floor_root(x: u128, p: u32) -> u128 {
    floor_root_ratio(x, 1, 1, p)
}
