//! Problem instances, the coefficient ellipsoid, coefficient generators and
//! per-machine observations in the Gaussian sequence model.

mod basis;
mod coefficients;
mod config;
mod io;
mod observation;
mod regime;

pub use basis::{basis_function, synthesize_function};
pub use coefficients::{
    ellipsoid_norm, sample_coefficients, CoefficientKind, CoefficientSequence, CoefficientSpec,
    PriorMode,
};
pub use config::{make_config, ProblemConfig};
pub use io::{
    read_coefficients_csv, read_coefficients_json, write_coefficients_csv, write_coefficients_json,
};
pub use observation::{observe, sample_observation_row, ObservationRow};
pub use regime::{classify_regime, Regime};

use crate::intmath::floor_root;

/// Default stored length for deterministic sequences: `4 * ceil((mn)^(1/(2a+1)))`.
pub fn default_length<T>(config: &ProblemConfig<T>) -> usize {
    let p = 2 * config.alpha + 1;
    let mn = config.m as u128 * config.n as u128;
    let r = floor_root(mn, p);
    let ceil = if r.pow(p) == mn { r } else { r + 1 };
    (4 * ceil) as usize
}
