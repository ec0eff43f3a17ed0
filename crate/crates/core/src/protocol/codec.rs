//! Machine-side encoder and center-side decoder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ObservationRow;
use crate::protocol::message::{BitWriter, Message};
use crate::protocol::plan::ProtocolPlan;
use crate::quantizer::{decode_value, encode_value, DitherKey};
use crate::scalar::Real;

/// Center's estimate; coordinates past `istar` are zero and not stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub values: Vec<T>,
}

impl<T: Real> Estimate<T> {
    /// 1-based coordinate, zero past the stored prefix.
    pub fn get(&self, i: usize) -> T {
        self.values
            .get(i.wrapping_sub(1))
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn istar(&self) -> usize {
        self.values.len()
    }

    /// `||theta_hat - theta||^2` over the union of both supports.
    pub fn squared_error(&self, theta: &[T]) -> T {
        let len = self.values.len().max(theta.len());
        (0..len)
            .map(|k| {
                let e = self.values.get(k).copied().unwrap_or_else(T::zero)
                    - theta.get(k).copied().unwrap_or_else(T::zero);
                e * e
            })
            .sum()
    }
}

/// How the center normalizes each coordinate's sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Divisor {
    /// Number of machines that actually reported the coordinate.
    #[default]
    Coverage,
    /// The nominal replication `k` regardless of coverage.
    Nominal,
}

fn machine_id(j: u64) -> Result<u32> {
    u32::try_from(j)
        .map_err(|_| Error::validation("machine", format!("{j} does not fit in 32 bits")))
}

/// Encodes machine `j` given a lookup for `X_ij`. Lets callers generate
/// observations lazily instead of materializing a full row.
pub(crate) fn encode_with<T: Real>(
    plan: &ProtocolPlan<T>,
    j: u64,
    seed: u64,
    mut x: impl FnMut(usize) -> Result<T>,
) -> Result<Message> {
    let width = plan.b0;
    let mut w = BitWriter::with_capacity(plan.message_bits());
    for s in 0..plan.btilde {
        let i = plan.index_of(j, s);
        let index = encode_value(x(i)?, DitherKey::new(seed, i as u64, j), &plan.quantizer);
        w.push(index, width);
    }
    let (bytes, bits) = w.finish();
    Message::new(machine_id(j)?, bits, bytes, plan.config.b)
}

/// Quantizes the coordinates of `I_j` from machine `j`'s row into a message.
pub fn local_encode<T: Real>(
    plan: &ProtocolPlan<T>,
    row: &ObservationRow<T>,
    seed: u64,
) -> Result<Message> {
    let j = row.machine;
    if j == 0 || j > plan.config.m {
        return Err(Error::validation(
            "machine",
            format!("{j} outside 1..={}", plan.config.m),
        ));
    }
    encode_with(plan, j, seed, |i| {
        row.values.get(i - 1).copied().ok_or(Error::RowTooShort {
            need: i,
            len: row.values.len(),
        })
    })
}

/// Averages the decoded values per coordinate, dividing by actual coverage.
pub fn central_decode<T: Real>(
    plan: &ProtocolPlan<T>,
    messages: &[Message],
    seed: u64,
) -> Result<Estimate<T>> {
    central_decode_with(plan, messages, seed, Divisor::Coverage)
}

/// [`central_decode`] with an explicit divisor rule.
pub fn central_decode_with<T: Real>(
    plan: &ProtocolPlan<T>,
    messages: &[Message],
    seed: u64,
    divisor: Divisor,
) -> Result<Estimate<T>> {
    let m = plan.config.m;
    let mut by_machine: Vec<Option<&Message>> = vec![None; m as usize];
    for msg in messages {
        let j = msg.machine() as u64;
        if j == 0 || j > m {
            return Err(Error::validation("machine", format!("{j} outside 1..={m}")));
        }
        let slot = &mut by_machine[j as usize - 1];
        if slot.is_some() {
            return Err(Error::DuplicateMessage(msg.machine()));
        }
        *slot = Some(msg);
    }

    let istar = plan.istar as usize;
    let mut sums = vec![T::zero(); istar];
    let expected = plan.message_bits();
    for (slot, j) in by_machine.iter().zip(1u64..) {
        let msg = slot.ok_or(Error::MissingMessage(j as u32))?;
        if msg.bit_len() != expected {
            return Err(Error::PayloadLength {
                machine: msg.machine(),
                got: msg.bit_len(),
                expected,
            });
        }
        let mut reader = msg.reader();
        for s in 0..plan.btilde {
            let i = plan.index_of(j, s);
            let index = reader.read(plan.b0).expect("length checked above");
            if i <= istar {
                sums[i - 1] +=
                    decode_value(index, DitherKey::new(seed, i as u64, j), &plan.quantizer)?;
            }
        }
    }

    let values = sums
        .into_iter()
        .enumerate()
        .map(|(k, sum)| {
            let count = match divisor {
                Divisor::Coverage => plan.coverage_count(k + 1),
                Divisor::Nominal => plan.k,
            };
            if count == 0 {
                T::zero()
            } else {
                sum / T::from_u64_lossy(count)
            }
        })
        .collect();
    Ok(Estimate { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        make_config, sample_coefficients, sample_observation_row, CoefficientKind, CoefficientSpec,
    };
    use crate::protocol::plan;

    fn worked_plan() -> ProtocolPlan<f64> {
        plan(&make_config(1_000_000, 100, 64, 1, 1.0, Some(1.0)).unwrap()).unwrap()
    }

    fn constant_row(j: u64, len: usize, v: f64) -> ObservationRow<f64> {
        ObservationRow {
            machine: j,
            values: vec![v; len],
        }
    }

    #[test]
    fn payload_is_btilde_times_b0() {
        let p = worked_plan();
        let msg = local_encode(&p, &constant_row(1, 100, 0.1), 5).unwrap();
        assert_eq!(msg.bit_len(), 55);
        assert!(msg.bit_len() <= p.config.b);
    }

    #[test]
    fn distinct_machines_use_distinct_dither() {
        let p = worked_plan();
        let a = local_encode(&p, &constant_row(1, 100, 0.1234), 5).unwrap();
        let b = local_encode(&p, &constant_row(2, 100, 0.1234), 5).unwrap();
        assert_eq!(p.index_set(1), p.index_set(2));
        assert_ne!(a.payload(), b.payload());
    }

    #[test]
    fn encoding_is_deterministic() {
        let p = worked_plan();
        let row = constant_row(7, 100, -0.30037);
        assert_eq!(
            local_encode(&p, &row, 9).unwrap(),
            local_encode(&p, &row, 9).unwrap()
        );
        assert_ne!(
            local_encode(&p, &row, 9).unwrap(),
            local_encode(&p, &row, 10).unwrap()
        );
    }

    #[test]
    fn short_row_and_bad_machine_are_errors() {
        let p = worked_plan();
        assert!(matches!(
            local_encode(&p, &constant_row(1, 3, 0.0), 0),
            Err(Error::RowTooShort { .. })
        ));
        assert!(local_encode(&p, &constant_row(0, 100, 0.0), 0).is_err());
        assert!(local_encode(&p, &constant_row(101, 100, 0.0), 0).is_err());
    }

    fn all_messages(
        p: &ProtocolPlan<f64>,
        rows: &[ObservationRow<f64>],
        seed: u64,
    ) -> Vec<Message> {
        rows.iter()
            .map(|r| local_encode(p, r, seed).unwrap())
            .collect()
    }

    #[test]
    fn decode_reports_protocol_violations() {
        let p = worked_plan();
        let rows: Vec<_> = (1..=100).map(|j| constant_row(j, 100, 0.0)).collect();
        let mut msgs = all_messages(&p, &rows, 1);
        assert!(central_decode(&p, &msgs, 1).is_ok());

        let last = msgs.pop().unwrap();
        assert!(matches!(
            central_decode(&p, &msgs, 1),
            Err(Error::MissingMessage(100))
        ));
        msgs.push(msgs[0].clone());
        assert!(matches!(
            central_decode(&p, &msgs, 1),
            Err(Error::DuplicateMessage(1))
        ));
        msgs.pop();

        let short = Message::new(100, 11, vec![0, 0], 64).unwrap();
        msgs.push(short);
        assert!(matches!(
            central_decode(&p, &msgs, 1),
            Err(Error::PayloadLength {
                machine: 100,
                got: 11,
                expected: 55
            })
        ));
        msgs.pop();
        msgs.push(last);
        assert!(central_decode(&p, &msgs, 1).is_ok());
    }

    #[test]
    fn fine_grid_recovers_theta_up_to_istar() {
        // noise is negligible at this n; decoded values are theta to grid precision
        let cfg = make_config(1_000_000_000_000, 4, 4 * 64, 1, 1.0, Some(1.0)).unwrap();
        let p = plan(&cfg).unwrap();
        let spec = CoefficientSpec {
            kind: CoefficientKind::PolynomialDecay {
                kappa: 0.5,
                rho: 0.9,
            },
            length: 400,
        };
        let theta = sample_coefficients(&spec, 1.0, 1, 0).unwrap();
        let rows: Vec<_> = (1..=4)
            .map(|j| sample_observation_row(&theta, cfg.n, j, 3))
            .collect();
        let est = central_decode(&p, &all_messages(&p, &rows, 3), 3).unwrap();
        assert_eq!(est.istar(), p.istar as usize);
        for i in 1..=est.istar() {
            assert!((est.get(i) - theta.get(i)).abs() < p.delta, "i={i}");
        }
        assert_eq!(est.get(est.istar() + 1), 0.0);
    }

    #[test]
    fn fixture_averages_the_right_machines() {
        // m = 4, k = 2, btilde = 2: I_1 = I_2 = {1, 3}, I_3 = I_4 = {2, 4}
        let p = plan::tests::fixture(4, 2, 2);
        let rows: Vec<_> = (1..=4u64)
            .map(|j| ObservationRow {
                machine: j,
                values: vec![0.1 * j as f64; 4],
            })
            .collect();
        let est = central_decode(&p, &all_messages(&p, &rows, 0), 0).unwrap();
        let tol = p.delta;
        assert!((est.get(1) - 0.15).abs() <= tol);
        assert!((est.get(2) - 0.35).abs() <= tol);
    }

    #[test]
    fn nominal_divisor_agrees_when_k_divides_m() {
        let p = plan::tests::fixture(4, 2, 2);
        let rows: Vec<_> = (1..=4u64).map(|j| constant_row(j, 4, 0.2)).collect();
        let msgs = all_messages(&p, &rows, 4);
        let a = central_decode_with(&p, &msgs, 4, Divisor::Coverage).unwrap();
        let b = central_decode_with(&p, &msgs, 4, Divisor::Nominal).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squared_error_pads_with_zeros() {
        let est = Estimate {
            values: vec![1.0, 2.0],
        };
        assert_eq!(est.squared_error(&[1.0, 2.0, 3.0]), 9.0);
        assert_eq!(est.squared_error(&[0.0]), 5.0);
    }
}
