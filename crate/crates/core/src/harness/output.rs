//! CSV and JSON tables. Floats are written in shortest round-trip form, so
//! identical inputs give byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lowerbound::BoundReport;
use crate::model::{classify_regime, ProblemConfig, Regime};
use crate::scalar::Real;

use super::risk::{RiskReport, UpperBound};
use super::sweep::SweepTable;

/// One result line: the risk schema followed by the plan constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: u64,
    pub m: u64,
    pub b: u64,
    pub alpha: u32,
    pub c_tilde: f64,
    pub regime: Regime,
    pub trials: u64,
    pub mean_risk: f64,
    pub std_error: f64,
    pub sampling_var: f64,
    pub quant_var: f64,
    pub tail_bias: f64,
    pub lower_solver: f64,
    pub lower_closed: f64,
    pub upper_analytic: f64,
    pub delta: f64,
    pub b0: u32,
    pub btilde: u64,
    pub k: u64,
    pub istar: u64,
}

impl ResultRow {
    pub fn new<T: Real>(
        report: &RiskReport<T>,
        lower: &BoundReport<T>,
        upper: &UpperBound<T>,
    ) -> Self {
        let cfg = &report.config;
        let plan = &report.plan;
        ResultRow {
            n: cfg.n,
            m: cfg.m,
            b: cfg.b,
            alpha: cfg.alpha,
            c_tilde: cfg.c_tilde.as_f64(),
            regime: classify_regime(cfg),
            trials: report.trials,
            mean_risk: report.mean_risk.as_f64(),
            std_error: report.std_error.as_f64(),
            sampling_var: report.components.sampling_var.as_f64(),
            quant_var: report.components.quant_var.as_f64(),
            tail_bias: report.components.tail_bias.as_f64(),
            lower_solver: lower.solver_value.as_f64(),
            lower_closed: lower.closed_form_value.as_f64(),
            upper_analytic: upper.total.as_f64(),
            delta: plan.delta.as_f64(),
            b0: plan.b0,
            btilde: plan.btilde,
            k: plan.k,
            istar: plan.istar,
        }
    }

    pub fn from_table<T: Real>(table: &SweepTable<T>) -> Vec<Self> {
        table
            .rows
            .iter()
            .map(|r| ResultRow::new(&r.report, &r.lower, &r.upper))
            .collect()
    }
}

/// One lower-bound line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: u64,
    pub m: u64,
    pub b: u64,
    pub alpha: u32,
    pub regime: Regime,
    pub solver_value: f64,
    pub closed_form_value: f64,
}

impl BoundRow {
    pub fn new<T: Real>(config: &ProblemConfig<T>, report: &BoundReport<T>) -> Self {
        BoundRow {
            n: config.n,
            m: config.m,
            b: config.b,
            alpha: config.alpha,
            regime: report.regime,
            solver_value: report.solver_value.as_f64(),
            closed_form_value: report.closed_form_value.as_f64(),
        }
    }
}

pub fn write_csv<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<R: Serialize, W: Write>(rows: &[R], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n")?;
    Ok(())
}
