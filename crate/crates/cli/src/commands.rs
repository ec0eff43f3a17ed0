use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use dnpr::harness::{
    analytic_upper_bound, estimate_risk_with, geometric_points, regime_experiment, run_sweep,
    write_csv, write_json, BoundRow, BudgetRule, ResultRow, RiskOptions, SweepSpec, ThetaRecipe,
};
use dnpr::lowerbound::{bound_report_with, prior_for_regime};
use dnpr::model::{
    default_length, make_config, sample_coefficients, sample_observation_row, CoefficientKind,
    CoefficientSpec, PriorMode, ProblemConfig, Regime,
};
use dnpr::protocol::{local_encode, plan, write_transcript, Divisor};
use dnpr::quantizer::{error_law_check, QuantizerSpec};

use crate::{
    BoundsArgs, EstimateArgs, Format, Outcome, ProblemArgs, QuantizerArgs, RegimeArgs, SweepArgs,
};

fn config(p: &ProblemArgs) -> Result<ProblemConfig<f64>> {
    Ok(make_config(p.n, p.m, p.b, p.alpha, p.c, p.c_tilde)?)
}

/// Parsed `--theta` value.
enum Theta {
    Kind(CoefficientKind<f64>),
    Prior { regime: Option<Regime>, gamma: f64 },
}

fn parse_theta(s: &str) -> Result<Theta> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| {
        x.parse::<f64>()
            .with_context(|| format!("bad number {x:?} in --theta {s:?}"))
    };
    Ok(match parts.as_slice() {
        ["spike", i0] => Theta::Kind(CoefficientKind::SingleSpike {
            i0: i0
                .parse()
                .with_context(|| format!("bad index in --theta {s:?}"))?,
        }),
        ["poly", kappa, rho] => Theta::Kind(CoefficientKind::PolynomialDecay {
            kappa: num(kappa)?,
            rho: num(rho)?,
        }),
        ["prior", "matched", gamma] => Theta::Prior {
            regime: None,
            gamma: num(gamma)?,
        },
        ["prior", regime, gamma] => Theta::Prior {
            regime: Some(regime.parse()?),
            gamma: num(gamma)?,
        },
        _ => bail!(
            "--theta must be spike:<i0>, poly:<kappa>:<rho> or prior:<regime>:<gamma>, got {s:?}"
        ),
    })
}

fn theta_spec(
    theta: &Theta,
    cfg: &ProblemConfig<f64>,
    length: Option<usize>,
) -> Result<CoefficientSpec<f64>> {
    Ok(match theta {
        Theta::Kind(kind) => {
            let min = match kind {
                CoefficientKind::SingleSpike { i0 } => *i0,
                _ => 1,
            };
            CoefficientSpec {
                kind: kind.clone(),
                length: length.unwrap_or_else(|| default_length(cfg).max(min)),
            }
        }
        Theta::Prior { regime, gamma } => {
            let regime = regime.unwrap_or_else(|| dnpr::model::classify_regime(cfg));
            let prior = prior_for_regime(cfg, regime, *gamma)?;
            CoefficientSpec {
                length: length.unwrap_or(prior.ell),
                kind: CoefficientKind::GaussianPrior {
                    prior,
                    mode: PriorMode::Reject,
                },
            }
        }
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit<R: Serialize>(rows: &[R], path: Option<&Path>, format: Format) -> Result<()> {
    let mut out = open_out(path)?;
    match format {
        Format::Csv => write_csv(rows, &mut out)?,
        Format::Json => write_json(rows, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn estimate(a: EstimateArgs) -> Result<Outcome> {
    let cfg = config(&a.problem)?;
    let spec = theta_spec(&parse_theta(&a.theta)?, &cfg, a.length)?;
    let opts = RiskOptions {
        divisor: if a.nominal_divisor {
            Divisor::Nominal
        } else {
            Divisor::Coverage
        },
        quantize: true,
    };
    let report = estimate_risk_with(&cfg, &spec, a.trials, a.seed, opts)?;
    let lower = bound_report_with(&cfg, 1.0)?;
    let upper = analytic_upper_bound(&report.plan, None);
    emit(
        &[ResultRow::new(&report, &lower, &upper)],
        a.output.out.as_deref(),
        a.output.format,
    )?;

    if let Some(path) = &a.transcript {
        let p = plan(&cfg)?;
        let theta = sample_coefficients(&spec, cfg.c_tilde, cfg.alpha, a.seed)?;
        let messages = (1..=cfg.m)
            .map(|j| {
                local_encode(
                    &p,
                    &sample_observation_row(&theta, cfg.n, j, a.seed),
                    a.seed,
                )
            })
            .collect::<dnpr::Result<Vec<_>>>()?;
        let mut out = open_out(Some(path))?;
        write_transcript(&messages, &mut out)?;
        out.flush()?;
    }
    Ok(Outcome::Pass)
}

fn parse_budget(s: &str) -> Result<BudgetRule> {
    Ok(match s.split_once(':') {
        None if s == "fixed" => BudgetRule::Fixed,
        Some(("per-value", v)) => BudgetRule::PerValue {
            values: v
                .parse()
                .with_context(|| format!("bad count in --budget {s:?}"))?,
        },
        Some(("cover", f)) => BudgetRule::CoverDimension {
            factor: f
                .parse()
                .with_context(|| format!("bad factor in --budget {s:?}"))?,
        },
        _ => bail!("--budget must be fixed, per-value:<v> or cover:<factor>, got {s:?}"),
    })
}

pub fn sweep(a: SweepArgs) -> Result<Outcome> {
    let held = make_config(a.n, a.m, a.b, a.alpha, a.c, a.c_tilde)?;
    let theta = match parse_theta(&a.theta)? {
        Theta::Kind(kind) => ThetaRecipe::Kind { kind },
        Theta::Prior { regime, gamma } => ThetaRecipe::MatchedPrior {
            regime,
            gamma,
            mode: PriorMode::Reject,
        },
    };
    let spec = SweepSpec {
        axis: a.axis.parse()?,
        points: geometric_points(a.from, a.to, a.points)?,
        held,
        budget: parse_budget(&a.budget)?,
        theta,
        trials: a.trials,
        seed: a.seed,
        gamma: a.gamma,
    };
    spec.validate()?;
    let table = run_sweep(&spec)?;
    for f in &table.failures {
        eprintln!(
            "warning: point {} ({} = {}) failed: {}",
            f.index, spec.axis, f.axis_value, f.error
        );
    }
    if table.rows.is_empty() {
        return Err(anyhow!("every sweep point failed"));
    }
    emit(
        &ResultRow::from_table(&table),
        a.output.out.as_deref(),
        a.output.format,
    )?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct Verdict {
    regime: Regime,
    alpha: u32,
    slope: f64,
    expected_exponent: f64,
    tolerance: f64,
    r_squared: f64,
    pass: bool,
}

pub fn regime(a: RegimeArgs) -> Result<Outcome> {
    let regime: Regime = a.which.parse()?;
    let exp = regime_experiment::<f64>(regime, a.alpha, a.trials, a.seed)?;
    if let Some(path) = a.output.out.as_deref() {
        emit(
            &ResultRow::from_table(&exp.table),
            Some(path),
            a.output.format,
        )?;
    }
    let verdict = Verdict {
        regime,
        alpha: a.alpha,
        slope: exp.slope,
        expected_exponent: exp.expected_exponent,
        tolerance: exp.tolerance,
        r_squared: exp.fit.r_squared,
        pass: exp.pass,
    };
    println!("{}", serde_json::to_string(&verdict)?);
    Ok(if exp.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

pub fn bounds(a: BoundsArgs) -> Result<Outcome> {
    let cfg = config(&a.problem)?;
    let report = bound_report_with(&cfg, a.gamma)?;
    emit(
        &[BoundRow::new(&cfg, &report)],
        a.output.out.as_deref(),
        a.output.format,
    )?;
    Ok(Outcome::Pass)
}

pub fn quantizer_check(a: QuantizerArgs) -> Result<Outcome> {
    let spec = QuantizerSpec::new(a.delta, a.clamp)?;
    let check = error_law_check(&spec, a.samples, a.seed)?;
    println!("{}", serde_json::to_string(&check)?);
    Ok(if check.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}
