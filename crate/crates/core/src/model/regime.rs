use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::intmath::cmp_powers;
use crate::model::ProblemConfig;

/// Which of the three budget-vs-data scalings an instance falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Total bits `mb` below the single-machine effective dimension.
    Insufficient,
    Intermediate,
    /// Per-machine bits exceed the pooled effective dimension.
    Sufficient,
}

impl Regime {
    pub const ALL: [Regime; 3] = [
        Regime::Insufficient,
        Regime::Intermediate,
        Regime::Sufficient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Insufficient => "insufficient",
            Regime::Intermediate => "intermediate",
            Regime::Sufficient => "sufficient",
        }
    }

    /// Risk exponent along the regime's composite axis
    /// (`mb`, `mnb` and `mn` respectively).
    pub fn expected_exponent(self, alpha: u32) -> f64 {
        let a = alpha as f64;
        match self {
            Regime::Insufficient => -2.0 * a,
            Regime::Intermediate => -a / (a + 1.0),
            Regime::Sufficient => -2.0 * a / (2.0 * a + 1.0),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "insufficient" => Ok(Regime::Insufficient),
            "intermediate" => Ok(Regime::Intermediate),
            "sufficient" => Ok(Regime::Sufficient),
            other => Err(Error::validation(
                "regime",
                format!("unknown regime `{other}`"),
            )),
        }
    }
}

/// Finite-sample regime rule, evaluated in exact integer arithmetic:
/// sufficient if `b > (mn)^(1/(2a+1))`, insufficient if
/// `mb <= n^(1/(2a+1))`, intermediate otherwise. The thresholds coincide
/// with the protocol's `k = m` and `k = 1` branch points.
pub fn classify_regime<T>(config: &ProblemConfig<T>) -> Regime {
    let p = 2 * config.alpha + 1;
    let (n, m, b) = (config.n as u128, config.m as u128, config.b as u128);
    // b^p > m n
    if cmp_powers(b, p, 1, m * n, 1, 1) == Ordering::Greater {
        Regime::Sufficient
    } else if cmp_powers(m * b, p, 1, n, 1, 1) != Ordering::Greater {
        Regime::Insufficient
    } else {
        Regime::Intermediate
    }
}
