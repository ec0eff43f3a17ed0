//! Coefficient sequences as CSV (`i,theta_i`) and JSON (`{alpha, c_tilde, values}`).

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CoefficientSequence;
use crate::scalar::Real;

#[derive(Serialize, Deserialize)]
struct CsvRow<T> {
    i: usize,
    theta_i: T,
}

pub fn write_coefficients_csv<T: Real + Serialize, W: Write>(
    theta: &CoefficientSequence<T>,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (idx, &v) in theta.values.iter().enumerate() {
        w.serialize(CsvRow {
            i: idx + 1,
            theta_i: v,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `i,theta_i` rows. Indices must run 1, 2, ..., L in order; the
/// ellipsoid parameters are not part of the CSV and are supplied here.
pub fn read_coefficients_csv<T: Real + DeserializeOwned, R: Read>(
    input: R,
    alpha: u32,
    c_tilde: T,
) -> Result<CoefficientSequence<T>> {
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow<T> = row?;
        if row.i != values.len() + 1 {
            return Err(Error::validation(
                "i",
                format!("expected index {}, found {}", values.len() + 1, row.i),
            ));
        }
        values.push(row.theta_i);
    }
    CoefficientSequence::new(values, alpha, c_tilde)
}

pub fn write_coefficients_json<T: Real + Serialize, W: Write>(
    theta: &CoefficientSequence<T>,
    out: W,
) -> Result<()> {
    serde_json::to_writer_pretty(out, theta)?;
    Ok(())
}

pub fn read_coefficients_json<T: Real + DeserializeOwned, R: Read>(
    input: R,
) -> Result<CoefficientSequence<T>> {
    let raw: CoefficientSequence<T> = serde_json::from_reader(input)?;
    CoefficientSequence::new(raw.values, raw.alpha, raw.c_tilde)
}
