//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line on stderr
//! (written directly, so it survives output capture) and then asserts.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use dnpr::harness::{regime_experiment, write_csv, RegimeExperiment, ResultRow, RiskReport};
use dnpr::lowerbound::{
    bound_report, closed_form_bound, prior_membership_check, solve_optimization,
    LowerBoundInstance, PriorSpec,
};
use dnpr::model::{classify_regime, make_config, CoefficientSpec, PriorMode, Regime};
use dnpr::quantizer::{decode_value, encode_value, winsorize, DitherKey, QuantizerSpec};
use dnpr::rng::{Role, StreamKey};
use dnpr::stats::{ks_pvalue, pearson};

const SEED: u64 = 7;
const TRIALS: u64 = 200;

fn report(id: u32, name: &str, pass: bool, elapsed: Duration, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "acceptance {id:>2} [{verdict}] {name} ({:.2}s): {detail}\n",
        elapsed.as_secs_f64()
    );
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    pass
}

// ---------------------------------------------------------------- shared runs

fn regime_run(regime: Regime) -> &'static (RegimeExperiment<f64>, Duration) {
    static INS: OnceLock<(RegimeExperiment<f64>, Duration)> = OnceLock::new();
    static INT: OnceLock<(RegimeExperiment<f64>, Duration)> = OnceLock::new();
    static SUF: OnceLock<(RegimeExperiment<f64>, Duration)> = OnceLock::new();
    let cell = match regime {
        Regime::Insufficient => &INS,
        Regime::Intermediate => &INT,
        Regime::Sufficient => &SUF,
    };
    cell.get_or_init(|| {
        let start = Instant::now();
        let exp =
            regime_experiment::<f64>(regime, 1, TRIALS, SEED).expect("regime experiment runs");
        (exp, start.elapsed())
    })
}

struct Lattice {
    points: Vec<(RiskReport<f64>, f64)>,
    elapsed: Duration,
}

fn lattice_values() -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for n in [10_000u64, 1_000_000, 100_000_000] {
        for m in [2u64, 8, 32] {
            for b in [16u64, 64, 256] {
                out.push((n, m, b));
            }
        }
    }
    out
}

fn lattice() -> &'static Lattice {
    static CELL: OnceLock<Lattice> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let points = lattice_values()
            .into_iter()
            .enumerate()
            .map(|(k, (n, m, b))| {
                let cfg = make_config(n, m, b, 1, std::f64::consts::PI, None).unwrap();
                let lower = bound_report(&cfg).unwrap();
                let spec = CoefficientSpec {
                    length: lower.prior.ell,
                    kind: dnpr::model::CoefficientKind::GaussianPrior {
                        prior: lower.prior.clone(),
                        mode: PriorMode::Reject,
                    },
                };
                let risk =
                    dnpr::harness::estimate_risk(&cfg, &spec, TRIALS, SEED + k as u64).unwrap();
                (risk, lower.solver_value)
            })
            .collect();
        Lattice {
            points,
            elapsed: start.elapsed(),
        }
    })
}

// ------------------------------------------------------------------ criteria

#[test]
fn criterion_01_quantizer_law() {
    let start = Instant::now();
    let (delta, clamp, samples) = (0.01f64, 1.0f64, 100_000u64);
    let spec = QuantizerSpec::new(delta, clamp).unwrap();
    let mut xs = Vec::with_capacity(samples as usize);
    let mut errs = Vec::with_capacity(samples as usize);
    for s in 0..samples {
        let x = winsorize(
            0.1f64.sqrt() * StreamKey::new(SEED, Role::Check, s, 0).normal(0),
            clamp,
        );
        let key = DitherKey::new(SEED, s, 1);
        let q = decode_value(encode_value(x, key, &spec), key, &spec).unwrap();
        xs.push(x);
        errs.push(q - x);
    }
    let half = delta / 2.0;
    let p = ks_pvalue(&errs, |e| ((e + half) / delta).clamp(0.0, 1.0));
    let corr = pearson(&errs, &xs);
    let second = errs.iter().map(|e| e * e).sum::<f64>() / samples as f64;
    let rel = (second / (delta * delta / 12.0) - 1.0).abs();
    let pass = p > 0.01 && corr.abs() < 0.02 && rel <= 0.03;
    let ok = report(
        1,
        "quantizer error law",
        pass,
        start.elapsed(),
        &format!(
            "ks_p={p:.4} (>0.01), corr={corr:.5} (|.|<0.02), E[e^2]/(d^2/12)-1={rel:.4} (<=0.03)"
        ),
    );
    assert!(ok);
}

fn slope_line(id: u32, name: &str, regime: Regime) {
    let (exp, elapsed) = regime_run(regime);
    let pts: Vec<String> = exp
        .table
        .rows
        .iter()
        .map(|r| format!("({:.3e}, {:.3e})", r.x, r.report.mean_risk))
        .collect();
    let ok = report(
        id,
        name,
        exp.pass,
        *elapsed,
        &format!(
            "slope={:.4} expected={:.4} tol={} r2={:.4} points={}",
            exp.slope,
            exp.expected_exponent,
            exp.tolerance,
            exp.fit.r_squared,
            pts.join(" ")
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_02_insufficient_slope() {
    slope_line(2, "insufficient-regime slope vs mb", Regime::Insufficient);
}

#[test]
fn criterion_03_sufficient_slope() {
    slope_line(3, "sufficient-regime slope vs mn", Regime::Sufficient);
}

#[test]
fn criterion_04_intermediate_slope() {
    slope_line(4, "intermediate-regime slope vs mnb", Regime::Intermediate);
}

// Independent grid oracle for the allocation program with up to three
// coordinates, written directly from the constraint formula.

struct Oracle {
    vars: Vec<f64>,
    m: f64,
    eps2: f64,
    budget: f64,
}

impl Oracle {
    fn g(&self, i: usize, d: f64) -> f64 {
        let s2 = self.vars[i];
        let big = self.m / self.eps2;
        let den = 1.0 / s2 + big - 1.0 / d;
        if den <= 0.0 {
            return f64::INFINITY;
        }
        0.5 * (s2 / d).ln() + 0.5 * self.m * (big / den).ln()
    }

    fn bottom(&self, i: usize) -> f64 {
        let a = self.eps2 / self.m;
        self.vars[i] * a / (self.vars[i] + a)
    }

    /// Smallest `d_i` in the box with `g_i(d_i) <= budget`, or `None`.
    fn smallest(&self, i: usize, budget: f64) -> Option<f64> {
        if budget < 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (self.bottom(i), self.vars[i]);
        if self.g(i, lo * (1.0 + 1e-12)) <= budget {
            return Some(lo * (1.0 + 1e-12));
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.g(i, mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }

    /// Minimum of `sum_{i >= first} d_i` with the given remaining budget.
    /// With two coordinates the first is scanned at 1e-4 of its box width;
    /// with three, each outer coordinate gets a coarse scan. Every scan is
    /// then refined by golden section, valid because partial minima of the
    /// convex program are convex.
    fn value(&self, first: usize, budget: f64) -> Option<f64> {
        let last = self.vars.len() - 1;
        if first == last {
            return self.smallest(first, budget);
        }
        let lo = self.smallest(first, budget)?;
        let hi = self.vars[first];
        let f = |d: f64| match self.value(first + 1, budget - self.g(first, d)) {
            Some(rest) => d + rest,
            None => f64::INFINITY,
        };
        let steps = if self.vars.len() <= 2 { 10_000 } else { 200 };
        let h = (hi - lo) / steps as f64;
        let (mut best_k, mut best) = (0usize, f64::INFINITY);
        for k in 0..=steps {
            let v = f(lo + h * k as f64);
            if v < best {
                best = v;
                best_k = k;
            }
        }
        let (mut a, mut b) = (
            lo + h * best_k.saturating_sub(1) as f64,
            (lo + h * (best_k + 1) as f64).min(hi),
        );
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..80 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        Some(best.min(f(0.5 * (a + b))))
    }
}

#[test]
fn criterion_05_solver_matches_grid_oracle() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for inst_id in 0..20u64 {
        let key = StreamKey::new(SEED, Role::Check, 5, inst_id);
        let ell = 1 + (key.bits(0) % 3) as usize;
        let vars: Vec<f64> = (0..ell)
            .map(|i| 0.05 + 2.0 * key.uniform(1 + i as u64))
            .collect();
        let eps2 = 0.01 + key.uniform(10);
        let m = 1 + key.bits(11) % 8;
        let bits = 0.05 + 3.0 * key.uniform(12);
        let prior = PriorSpec::new(vars.clone(), 1.0, Regime::Intermediate).unwrap();
        let inst = LowerBoundInstance::new(m, bits, eps2, prior).unwrap();
        let sol = solve_optimization(&inst).unwrap();
        let oracle = Oracle {
            vars,
            m: m as f64,
            eps2,
            budget: inst.budget_nats(),
        };
        let expect = oracle.value(0, oracle.budget).unwrap();
        let diff = (sol.value - expect).abs();
        worst = worst.max(diff);
        all_ok &= diff <= 1e-6;
    }
    let ok = report(
        5,
        "lower-bound solver vs grid oracle",
        all_ok,
        start.elapsed(),
        &format!("20 instances, max |solver - oracle| = {worst:.3e} (<=1e-6)"),
    );
    assert!(ok);
}

#[test]
fn criterion_06_closed_form_rates() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for alpha in [1u32, 2] {
        for regime in Regime::ALL {
            let pts: Vec<(f64, f64)> = (0..7)
                .map(|k| {
                    let (n, m, b) = match regime {
                        Regime::Insufficient => {
                            (1_000_000_000_000_000_000u64, 1u64, 100u64 * 3u64.pow(k))
                        }
                        Regime::Intermediate => (10_000_000_000 * 4u64.pow(k), 10, 100),
                        Regime::Sufficient => (100_000_000 * 10u64.pow(k), 10, 100),
                    };
                    let cfg = make_config(n, m, b, alpha, 1.0f64, Some(1.0)).unwrap();
                    let x = match regime {
                        Regime::Insufficient => (m * b) as f64,
                        Regime::Intermediate => m as f64 * n as f64 * b as f64,
                        Regime::Sufficient => m as f64 * n as f64,
                    };
                    (x, closed_form_bound(&cfg, regime, 1.0).unwrap())
                })
                .collect();
            let fit = dnpr::harness::fit_slope(&pts, true).unwrap();
            let expect = regime.expected_exponent(alpha);
            let rel = (fit.slope / expect - 1.0).abs();
            all_ok &= rel <= 0.05;
            lines.push(format!(
                "a={alpha} {regime}: {:.4}/{:.4}",
                fit.slope, expect
            ));
        }
    }
    let ok = report(
        6,
        "closed-form bound rates",
        all_ok,
        start.elapsed(),
        &format!("{} (each within 5%)", lines.join(", ")),
    );
    assert!(ok);
}

#[test]
fn criterion_07_sandwich_ordering() {
    let lat = lattice();
    let mut regimes = [0usize; 3];
    let mut bad = Vec::new();
    for (risk, lower) in &lat.points {
        let r = classify_regime(&risk.config);
        regimes[Regime::ALL.iter().position(|x| *x == r).unwrap()] += 1;
        let upper = dnpr::harness::analytic_upper_bound(&risk.plan, None).total;
        let high = risk.mean_risk + 3.0 * risk.std_error;
        if !(*lower <= high && high <= upper + 3.0 * risk.std_error) {
            bad.push(format!(
                "(n={}, m={}, b={}): lower={lower:.3e} risk={:.3e}+-{:.1e} upper={upper:.3e}",
                risk.config.n, risk.config.m, risk.config.b, risk.mean_risk, risk.std_error
            ));
        }
    }
    let spans = regimes.iter().all(|&c| c > 0);
    let ok = report(
        7,
        "lower <= risk <= upper on 27-point lattice",
        bad.is_empty() && spans && lat.points.len() == 27,
        lat.elapsed,
        &format!(
            "{} points, regimes (ins/int/suf) = {:?}, violations: {}",
            lat.points.len(),
            regimes,
            if bad.is_empty() {
                "none".to_string()
            } else {
                bad.join("; ")
            }
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_08_hard_budget() {
    let start = Instant::now();
    let mut checked = 0u64;
    let mut violations = 0u64;
    let mut sum_ok = true;
    let mut visit = |r: &RiskReport<f64>| {
        checked += r.messages_checked;
        if r.max_message_bits > r.config.b {
            violations += 1;
        }
        sum_ok &= r.config.m * r.max_message_bits <= r.config.m * r.config.b;
    };
    for regime in Regime::ALL {
        for row in &regime_run(regime).0.table.rows {
            visit(&row.report);
        }
    }
    for (risk, _) in &lattice().points {
        visit(risk);
    }
    let ok = report(
        8,
        "hard per-machine budget",
        violations == 0 && sum_ok && checked > 0,
        start.elapsed(),
        &format!("{checked} messages checked, {violations} over budget"),
    );
    assert!(ok);
}

#[test]
fn criterion_09_prior_concentration() {
    let start = Instant::now();
    let mass: f64 = (1..=100).map(|i| (i * i) as f64).sum();
    let prior = PriorSpec::new(vec![1.0 / mass; 100], 1.0, Regime::Sufficient).unwrap();
    let r = prior_membership_check(&prior, 1, 1.0, 10_000, SEED, 0.5).unwrap();
    let ok = report(
        9,
        "prior concentration bound",
        r.pass,
        start.elapsed(),
        &format!(
            "violation rate {:.4} (se {:.4}) vs bound {:.4e}",
            r.empirical_violation_rate, r.std_error, r.concentration_bound
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_10_determinism() {
    let (first, _) = regime_run(Regime::Insufficient);
    let start = Instant::now();
    let again = regime_experiment::<f64>(Regime::Insufficient, 1, TRIALS, SEED).unwrap();
    let csv = |e: &RegimeExperiment<f64>| {
        let mut buf = Vec::new();
        write_csv(&ResultRow::from_table(&e.table), &mut buf).unwrap();
        buf
    };
    let (a, b) = (csv(first), csv(&again));
    let ok = report(
        10,
        "byte-identical rerun",
        a == b && !a.is_empty(),
        start.elapsed(),
        &format!("{} CSV bytes, identical = {}", a.len(), a == b),
    );
    assert!(ok);
}
