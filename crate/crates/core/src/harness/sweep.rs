use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmath::floor_root;
use crate::lowerbound::{bound_report_with, prior_for_regime, BoundReport};
use crate::model::{
    classify_regime, default_length, CoefficientKind, CoefficientSpec, PriorMode, ProblemConfig,
    Regime,
};
use crate::protocol::quantizer_width;
use crate::rng::{child_seed, Role};
use crate::scalar::Real;

use super::risk::{analytic_upper_bound, estimate_risk, RiskReport, UpperBound};

/// Which parameter a sweep moves, and which product its fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    M,
    B,
    /// Points are `m`; fit against `m b`.
    Mb,
    /// Points are `n`; fit against `m n`.
    Mn,
    /// Points are a scale `s` with `n = n0 s^(2 alpha + 1)` and the budget
    /// rule scaled by `s`; fit against `m n b`.
    Mnb,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::N => "n",
            SweepAxis::M => "m",
            SweepAxis::B => "b",
            SweepAxis::Mb => "mb",
            SweepAxis::Mn => "mn",
            SweepAxis::Mnb => "mnb",
        }
    }

    /// Abscissa used for slope fits.
    pub fn composite<T>(self, cfg: &ProblemConfig<T>) -> f64 {
        let (n, m, b) = (cfg.n as f64, cfg.m as f64, cfg.b as f64);
        match self {
            SweepAxis::N => n,
            SweepAxis::M => m,
            SweepAxis::B => b,
            SweepAxis::Mb => m * b,
            SweepAxis::Mn => m * n,
            SweepAxis::Mnb => m * n * b,
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "n" => SweepAxis::N,
            "m" => SweepAxis::M,
            "b" => SweepAxis::B,
            "mb" => SweepAxis::Mb,
            "mn" => SweepAxis::Mn,
            "mnb" => SweepAxis::Mnb,
            _ => return Err(Error::validation("axis", format!("unknown axis {s:?}"))),
        })
    }
}

/// How the per-machine budget `b` (bits) is set at each point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BudgetRule {
    /// Use the held `b`.
    Fixed,
    /// Exactly `values` quantized values per machine: `b = values * b0`,
    /// where `b0` is itself a function of `b`.
    PerValue { values: u64 },
    /// `values = ceil(factor (mn)^(1/(2 alpha + 1)))`, then as `PerValue`.
    CoverDimension { factor: f64 },
}

/// Coefficient sequence to simulate at each point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum ThetaRecipe<T> {
    /// The same spec everywhere.
    Spec { spec: CoefficientSpec<T> },
    /// A deterministic kind stored at the config's default length.
    Kind { kind: CoefficientKind<T> },
    /// The Gaussian prior of `regime` (default: the point's own regime).
    MatchedPrior {
        regime: Option<Regime>,
        gamma: T,
        mode: PriorMode,
    },
}

impl<T: Real> ThetaRecipe<T> {
    pub fn resolve(&self, config: &ProblemConfig<T>) -> Result<CoefficientSpec<T>> {
        Ok(match self {
            ThetaRecipe::Spec { spec } => spec.clone(),
            ThetaRecipe::Kind { kind } => CoefficientSpec {
                kind: kind.clone(),
                length: default_length(config),
            },
            ThetaRecipe::MatchedPrior {
                regime,
                gamma,
                mode,
            } => {
                let regime = regime.unwrap_or_else(|| classify_regime(config));
                let prior = prior_for_regime(config, regime, *gamma)?;
                CoefficientSpec {
                    length: prior.ell,
                    kind: CoefficientKind::GaussianPrior { prior, mode: *mode },
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec<T> {
    pub axis: SweepAxis,
    pub points: Vec<u64>,
    /// Parameters not moved by the axis.
    pub held: ProblemConfig<T>,
    pub budget: BudgetRule,
    pub theta: ThetaRecipe<T>,
    pub trials: u64,
    pub seed: u64,
    /// Tuning constant for the lower-bound prior.
    pub gamma: T,
}

/// `count` integers spaced geometrically from `from` to `to` inclusive.
pub fn geometric_points(from: u64, to: u64, count: usize) -> Result<Vec<u64>> {
    if from == 0 || to <= from || count < 2 {
        return Err(Error::validation(
            "points",
            "need 0 < from < to and at least 2 points",
        ));
    }
    let ratio = (to as f64 / from as f64).powf(1.0 / (count - 1) as f64);
    let pts: Vec<u64> = (0..count)
        .map(|k| match k {
            0 => from,
            k if k == count - 1 => to,
            k => (from as f64 * ratio.powi(k as i32)).round() as u64,
        })
        .collect();
    if pts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation(
            "points",
            format!("{count} points do not fit between {from} and {to}"),
        ));
    }
    Ok(pts)
}

/// Smallest `b = values * b0(b)`. `b0` only grows with `b` and is capped by
/// the noise floor, so the iteration terminates.
pub fn budget_for_values<T: Real>(config: &ProblemConfig<T>, values: u64) -> Result<u64> {
    if values == 0 {
        return Err(Error::validation("values", "must be at least 1"));
    }
    let mut b = values;
    for _ in 0..64 {
        let b0 = quantizer_width(&config.with_nmb(config.n, config.m, b)?)? as u64;
        let next = values * b0;
        if next == b {
            return Ok(b);
        }
        b = next;
    }
    Err(Error::validation(
        "values",
        "budget fixed point did not settle",
    ))
}

impl<T: Real> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 4 {
            return Err(Error::validation(
                "points",
                "a sweep needs at least 4 points",
            ));
        }
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        for k in 0..self.points.len() {
            self.config_at(k)?;
        }
        Ok(())
    }

    /// Config for point `index`.
    pub fn config_at(&self, index: usize) -> Result<ProblemConfig<T>> {
        let v = *self
            .points
            .get(index)
            .ok_or_else(|| Error::validation("points", format!("no point {index}")))?;
        let h = &self.held;
        let p = 2 * h.alpha + 1;
        let (n, m, scale) = match self.axis {
            SweepAxis::N | SweepAxis::Mn => (v, h.m, 1),
            SweepAxis::M | SweepAxis::Mb => (h.n, v, 1),
            SweepAxis::B => return h.with_nmb(h.n, h.m, v),
            SweepAxis::Mnb => {
                let n = v
                    .checked_pow(p)
                    .and_then(|s| s.checked_mul(h.n))
                    .ok_or_else(|| {
                        Error::validation("points", format!("n overflows at scale {v}"))
                    })?;
                (n, h.m, v)
            }
        };
        let base = h.with_nmb(n, m, h.b)?;
        let b = match self.budget {
            BudgetRule::Fixed => h.b * scale,
            BudgetRule::PerValue { values } => budget_for_values(&base, values * scale)?,
            BudgetRule::CoverDimension { factor } => {
                if !(factor.is_finite() && factor > 0.0) {
                    return Err(Error::validation("factor", "must be finite and positive"));
                }
                let dim = (m as f64 * n as f64).powf(1.0 / p as f64);
                let values = (factor * dim).ceil() as u64 * scale;
                budget_for_values(&base, values)?
            }
        };
        h.with_nmb(n, m, b)
    }
}

/// Seed for sweep point `index`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    child_seed(seed, Role::Point, index as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub index: usize,
    pub axis_value: u64,
    /// Composite abscissa for the fit.
    pub x: f64,
    pub report: RiskReport<T>,
    pub lower: BoundReport<T>,
    pub upper: UpperBound<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub index: usize,
    pub axis_value: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow<T>>,
    pub failures: Vec<SweepFailure>,
}

impl<T: Real> SweepTable<T> {
    /// `(x, mean_risk)` for every successful row.
    pub fn risk_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .map(|r| (r.x, r.report.mean_risk.as_f64()))
            .collect()
    }
}

fn run_point<T: Real>(sweep: &SweepSpec<T>, index: usize) -> Result<SweepRow<T>> {
    let config = sweep.config_at(index)?;
    let theta_spec = sweep.theta.resolve(&config)?;
    let report = estimate_risk(
        &config,
        &theta_spec,
        sweep.trials,
        point_seed(sweep.seed, index),
    )?;
    let lower = bound_report_with(&config, sweep.gamma)?;
    let upper = analytic_upper_bound(&report.plan, None);
    Ok(SweepRow {
        index,
        axis_value: sweep.points[index],
        x: sweep.axis.composite(&config),
        report,
        lower,
        upper,
    })
}

/// Runs every point; a failing point is recorded and the sweep continues.
pub fn run_sweep<T: Real>(sweep: &SweepSpec<T>) -> Result<SweepTable<T>> {
    if sweep.points.len() < 4 {
        return Err(Error::validation(
            "points",
            "a sweep needs at least 4 points",
        ));
    }
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for index in 0..sweep.points.len() {
        match run_point(sweep, index) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(SweepFailure {
                index,
                axis_value: sweep.points[index],
                error: e.to_string(),
            }),
        }
    }
    Ok(SweepTable {
        axis: sweep.axis,
        rows,
        failures,
    })
}

/// Ratio by which `config` clears the inequalities of its regime:
/// insufficient `n^(1/p) / (mb)`, intermediate the smaller of
/// `(mn)^(1/p) / b` and `mb / n^(1/p)`, sufficient `b / (mn)^(1/p)`.
pub fn regime_margin<T>(config: &ProblemConfig<T>) -> f64 {
    let p = (2 * config.alpha + 1) as f64;
    let (n, m, b) = (config.n as f64, config.m as f64, config.b as f64);
    let root_n = n.powf(1.0 / p);
    let root_mn = (m * n).powf(1.0 / p);
    match classify_regime(config) {
        Regime::Insufficient => root_n / (m * b),
        Regime::Intermediate => (root_mn / b).min(m * b / root_n),
        Regime::Sufficient => b / root_mn,
    }
}

/// Integer effective dimension `floor((mn)^(1/(2 alpha + 1)))`.
pub fn effective_dimension<T>(config: &ProblemConfig<T>) -> u64 {
    floor_root(config.m as u128 * config.n as u128, 2 * config.alpha + 1) as u64
}
