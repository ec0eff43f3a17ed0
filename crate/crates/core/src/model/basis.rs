use crate::error::{Error, Result};
use crate::model::CoefficientSequence;
use crate::scalar::Real;

/// Trigonometric basis on `[0, 1]`: `phi_1 = 1`, `phi_2k = sqrt2 cos(2 pi k t)`,
/// `phi_2k+1 = sqrt2 sin(2 pi k t)`.
#[inline]
pub fn basis_function<T: Real>(i: usize, t: T) -> T {
    debug_assert!(i >= 1);
    if i == 1 {
        return T::one();
    }
    let k = T::from_usize(i / 2).unwrap();
    let arg = T::lit(std::f64::consts::TAU) * k * t;
    let root2 = T::lit(std::f64::consts::SQRT_2);
    if i.is_multiple_of(2) {
        root2 * arg.cos()
    } else {
        root2 * arg.sin()
    }
}

/// Evaluates `f(t) = sum_i theta_i phi_i(t)` at each grid point.
pub fn synthesize_function<T: Real>(
    theta: &CoefficientSequence<T>,
    t_grid: &[T],
) -> Result<Vec<T>> {
    if let Some(bad) = t_grid
        .iter()
        .find(|t| !(**t >= T::zero() && **t <= T::one()))
    {
        return Err(Error::validation("t", format!("{bad} lies outside [0, 1]")));
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            theta
                .values
                .iter()
                .enumerate()
                .map(|(idx, &th)| th * basis_function(idx + 1, t))
                .sum()
        })
        .collect())
}
