use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`, on `(ln x, ln y)` when `log_log`.
pub fn fit_slope(points: &[(f64, f64)], log_log: bool) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(Error::validation("points", "a fit needs at least 2 points"));
    }
    let mut xy = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::validation(
                "points",
                format!("non-finite point ({x}, {y})"),
            ));
        }
        if log_log {
            if x <= 0.0 || y <= 0.0 {
                return Err(Error::validation(
                    "points",
                    format!("log-log fit needs positive values, got ({x}, {y})"),
                ));
            }
            xy.push((x.ln(), y.ln()));
        } else {
            xy.push((x, y));
        }
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("points", "all x values are equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
