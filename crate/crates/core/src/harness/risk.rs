use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{
    observe, sample_coefficients, CoefficientSequence, CoefficientSpec, ProblemConfig,
};
use crate::protocol::{central_decode_with, encode_with, plan, Divisor, Estimate, ProtocolPlan};
use crate::quantizer::winsorize;
use crate::rng::{child_seed, Role};
use crate::scalar::{powu, Real};

/// Per-trial squared-error split into its three parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RiskComponents<T> {
    /// `sum_{i <= istar} (avg clamped X_i - theta_i)^2`.
    pub sampling_var: T,
    /// `sum_{i <= istar} (theta_hat_i - avg clamped X_i)^2`.
    pub quant_var: T,
    /// `sum_{i > istar} theta_i^2`.
    pub tail_bias: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskReport<T> {
    pub config: ProblemConfig<T>,
    pub plan: ProtocolPlan<T>,
    pub trials: u64,
    pub mean_risk: T,
    pub std_error: T,
    pub components: RiskComponents<T>,
    pub theta_spec: CoefficientSpec<T>,
    /// Longest payload seen over all trials and machines.
    pub max_message_bits: u64,
    pub messages_checked: u64,
}

/// Knobs for [`estimate_risk_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskOptions {
    pub divisor: Divisor,
    /// When false the center averages the exact clamped values instead of
    /// the decoded grid points.
    pub quantize: bool,
}

impl Default for RiskOptions {
    fn default() -> Self {
        RiskOptions {
            divisor: Divisor::Coverage,
            quantize: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound<T> {
    pub sampling: T,
    pub quantization: T,
    pub bias: T,
    pub total: T,
}

/// `istar/(nk) + istar delta^2/(3k) + bias`, where the bias is the
/// worst case `c_tilde^2 / istar^(2 alpha)` unless an exact tail is given.
pub fn analytic_upper_bound<T: Real>(
    plan: &ProtocolPlan<T>,
    theta_tail: Option<T>,
) -> UpperBound<T> {
    let cfg = &plan.config;
    let istar = T::from_u64_lossy(plan.istar);
    let k = T::from_u64_lossy(plan.k);
    let sampling = istar / (T::from_u64_lossy(cfg.n) * k);
    let quantization = istar * plan.delta * plan.delta / (T::lit(3.0) * k);
    let bias = theta_tail.unwrap_or_else(|| cfg.c_tilde * cfg.c_tilde / powu(istar, 2 * cfg.alpha));
    UpperBound {
        sampling,
        quantization,
        bias,
        total: sampling + quantization + bias,
    }
}

struct Trial<T> {
    total: T,
    parts: RiskComponents<T>,
    max_bits: u64,
    messages: u64,
}

/// Runs one full protocol round on `theta`; also returns the estimate.
fn run_trial<T: Real>(
    plan: &ProtocolPlan<T>,
    theta: &CoefficientSequence<T>,
    seed: u64,
    opts: RiskOptions,
) -> Result<(Trial<T>, Estimate<T>)> {
    let cfg = &plan.config;
    let istar = plan.istar as usize;
    let clamp = plan.quantizer.clamp;
    let mut exact = vec![T::zero(); istar];
    let mut messages = Vec::with_capacity(cfg.m as usize);
    let mut max_bits = 0;
    for j in 1..=cfg.m {
        let msg = encode_with(plan, j, seed, |i| {
            let x = observe(theta, cfg.n, j, i, seed);
            if i <= istar {
                exact[i - 1] += winsorize(x, clamp);
            }
            Ok(x)
        })?;
        max_bits = max_bits.max(msg.bit_len());
        messages.push(msg);
    }
    for (k, v) in exact.iter_mut().enumerate() {
        let count = match opts.divisor {
            Divisor::Coverage => plan.coverage_count(k + 1),
            Divisor::Nominal => plan.k,
        };
        if count > 0 {
            *v /= T::from_u64_lossy(count);
        }
    }
    let estimate = if opts.quantize {
        central_decode_with(plan, &messages, seed, opts.divisor)?
    } else {
        Estimate {
            values: exact.clone(),
        }
    };

    let mut parts = RiskComponents {
        tail_bias: theta.tail_energy(istar),
        ..Default::default()
    };
    for (k, avg) in exact.iter().enumerate() {
        let t = theta.get(k + 1);
        let s = *avg - t;
        let q = estimate.values[k] - *avg;
        parts.sampling_var += s * s;
        parts.quant_var += q * q;
    }
    let trial = Trial {
        total: estimate.squared_error(&theta.values),
        parts,
        max_bits,
        messages: cfg.m,
    };
    Ok((trial, estimate))
}

/// Monte Carlo estimate of `E ||theta_hat - theta||^2` with default options.
pub fn estimate_risk<T: Real>(
    config: &ProblemConfig<T>,
    theta_spec: &CoefficientSpec<T>,
    trials: u64,
    seed: u64,
) -> Result<RiskReport<T>> {
    estimate_risk_with(config, theta_spec, trials, seed, RiskOptions::default())
}

/// Trials run in parallel; each is seeded from `(seed, trial index)` and
/// the results are reduced in index order, so the report does not depend
/// on scheduling.
pub fn estimate_risk_with<T: Real>(
    config: &ProblemConfig<T>,
    theta_spec: &CoefficientSpec<T>,
    trials: u64,
    seed: u64,
    opts: RiskOptions,
) -> Result<RiskReport<T>> {
    if trials == 0 {
        return Err(crate::error::Error::validation(
            "trials",
            "must be at least 1",
        ));
    }
    let plan = plan(config)?;
    let fixed = if theta_spec.is_random() {
        None
    } else {
        Some(sample_coefficients(
            theta_spec,
            config.c_tilde,
            config.alpha,
            seed,
        )?)
    };

    let outcomes: Vec<Result<Trial<T>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = child_seed(seed, Role::Trial, t);
            let drawn;
            let theta = match &fixed {
                Some(th) => th,
                None => {
                    drawn =
                        sample_coefficients(theta_spec, config.c_tilde, config.alpha, trial_seed)?;
                    &drawn
                }
            };
            run_trial(&plan, theta, trial_seed, opts).map(|(trial, _)| trial)
        })
        .collect();

    let mut totals = Vec::with_capacity(trials as usize);
    let mut sums = RiskComponents::<T>::default();
    let (mut max_bits, mut messages) = (0, 0);
    for outcome in outcomes {
        let trial = outcome?;
        totals.push(trial.total);
        sums.sampling_var += trial.parts.sampling_var;
        sums.quant_var += trial.parts.quant_var;
        sums.tail_bias += trial.parts.tail_bias;
        max_bits = max_bits.max(trial.max_bits);
        messages += trial.messages;
    }
    let count = T::from_u64_lossy(trials);
    let mean = totals.iter().copied().sum::<T>() / count;
    let std_error = if trials > 1 {
        let ss: T = totals.iter().map(|x| (*x - mean) * (*x - mean)).sum();
        (ss / T::from_u64_lossy(trials - 1) / count).sqrt()
    } else {
        T::zero()
    };
    Ok(RiskReport {
        config: *config,
        plan,
        trials,
        mean_risk: mean,
        std_error,
        components: RiskComponents {
            sampling_var: sums.sampling_var / count,
            quant_var: sums.quant_var / count,
            tail_bias: sums.tail_bias / count,
        },
        theta_spec: theta_spec.clone(),
        max_message_bits: max_bits,
        messages_checked: messages,
    })
}

/// One end-to-end round on a given sequence; exposed for pipeline tests.
pub fn simulate_once<T: Real>(
    plan: &ProtocolPlan<T>,
    theta: &CoefficientSequence<T>,
    seed: u64,
    opts: RiskOptions,
) -> Result<Estimate<T>> {
    run_trial(plan, theta, seed, opts).map(|(_, est)| est)
}
