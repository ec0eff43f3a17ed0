use serde::{Deserialize, Serialize};

use crate::model::CoefficientSequence;
use crate::rng::{Role, StreamKey};
use crate::scalar::Real;

/// What machine `j` sees: `X_ij = theta_i + Z_ij / sqrt(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRow<T> {
    pub machine: u64,
    pub values: Vec<T>,
}

/// A single observation `X_ij`. The noise draw is keyed by `(seed, j, i)`
/// so it does not depend on which other coordinates are generated.
#[inline]
pub fn observe<T: Real>(
    theta: &CoefficientSequence<T>,
    n: u64,
    machine: u64,
    i: usize,
    seed: u64,
) -> T {
    let z = StreamKey::new(seed, Role::Noise, machine, i as u64).normal_as::<T>(0);
    theta.get(i) + z / T::from_u64_lossy(n).sqrt()
}

/// Full row for machine `j` over the stored length of `theta`.
pub fn sample_observation_row<T: Real>(
    theta: &CoefficientSequence<T>,
    n: u64,
    machine: u64,
    seed: u64,
) -> ObservationRow<T> {
    let values = (1..=theta.len())
        .map(|i| observe(theta, n, machine, i, seed))
        .collect();
    ObservationRow { machine, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_coefficients, CoefficientKind, CoefficientSpec};

    fn theta() -> CoefficientSequence<f64> {
        let spec = CoefficientSpec {
            kind: CoefficientKind::PolynomialDecay {
                kappa: 0.5,
                rho: 0.9,
            },
            length: 100,
        };
        sample_coefficients(&spec, 1.0, 1, 0).unwrap()
    }

    #[test]
    fn huge_n_reproduces_theta() {
        let th = theta();
        let row = sample_observation_row(&th, 1_000_000_000_000, 3, 17);
        assert_eq!(row.values.len(), th.len());
        let worst = row
            .values
            .iter()
            .zip(&th.values)
            .map(|(x, t)| (x - t).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "max deviation {worst}");
    }

    #[test]
    fn rows_are_reproducible_and_machine_specific() {
        let th = theta();
        let a = sample_observation_row(&th, 100, 4, 9);
        let b = sample_observation_row(&th, 100, 4, 9);
        assert_eq!(a, b);
        let c = sample_observation_row(&th, 100, 5, 9);
        assert_ne!(a.values, c.values);
        assert_eq!(observe(&th, 100, 4, 7, 9).to_bits(), a.values[6].to_bits());
    }

    #[test]
    fn noise_variance_is_one_over_n() {
        let th = theta();
        let n = 400u64;
        let machines = 100_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for j in 1..=machines {
            let e = observe(&th, n, j, 1, 5) - th.values[0];
            s += e;
            s2 += e * e;
        }
        let mean = s / machines as f64;
        let var = s2 / machines as f64 - mean * mean;
        assert!(
            (var * n as f64 - 1.0).abs() < 0.05,
            "var*n = {}",
            var * n as f64
        );
        // independent across machines: lag-one correlation is small
        let mut cross = 0.0;
        for j in 1..machines {
            cross += (observe(&th, n, j, 1, 5) - th.values[0])
                * (observe(&th, n, j + 1, 1, 5) - th.values[0]);
        }
        let r = cross / (machines - 1) as f64 / var;
        assert!(r.abs() < 0.02, "lag-one correlation {r}");
    }

    #[test]
    fn past_stored_length_is_pure_noise() {
        let th = theta();
        let x = observe(&th, 1_000_000_000_000, 1, 500, 0);
        assert!(x.abs() < 1e-5);
    }
}
