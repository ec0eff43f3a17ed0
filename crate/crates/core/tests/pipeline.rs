use dnpr::harness::{
    estimate_risk, run_sweep, simulate_once, BudgetRule, RiskOptions, SweepAxis, SweepSpec,
    ThetaRecipe,
};
use dnpr::lowerbound::{bound_report, instance_for, prior_for_regime, solve_optimization};
use dnpr::model::{
    classify_regime, make_config, sample_coefficients, sample_observation_row, CoefficientKind,
    CoefficientSpec, PriorMode, Regime,
};
use dnpr::protocol::{
    central_decode, local_encode, plan, read_transcript, write_transcript, Message,
};
use dnpr::rng::{child_seed, Role};

fn poly(length: usize, rho: f64) -> CoefficientSpec<f64> {
    CoefficientSpec {
        kind: CoefficientKind::PolynomialDecay { kappa: 0.5, rho },
        length,
    }
}

#[test]
fn estimator_is_unbiased() {
    // m = 10 with k = 3: replication does not divide the machine count
    let cfg = make_config(1_000_000, 10, 60, 1, 1.0, Some(1.0)).unwrap();
    let p = plan(&cfg).unwrap();
    assert_eq!(p.k, 3);
    let theta = sample_coefficients(&poly(100, 0.5), 1.0, 1, 0).unwrap();
    let trials = 10_000u64;
    let istar = p.istar as usize;
    let mut sum = vec![0.0; istar];
    let mut sum_sq = vec![0.0; istar];
    for t in 0..trials {
        let est = simulate_once(
            &p,
            &theta,
            child_seed(3, Role::Trial, t),
            RiskOptions::default(),
        )
        .unwrap();
        for i in 1..=istar {
            let e = est.get(i) - theta.get(i);
            sum[i - 1] += e;
            sum_sq[i - 1] += e * e;
        }
        assert!(est.values.len() == istar);
    }
    let n = trials as f64;
    for i in 0..istar {
        let mean = sum[i] / n;
        let se = ((sum_sq[i] / n - mean * mean) / n).sqrt();
        assert!(
            mean.abs() <= 3.0 * se,
            "i={} mean={mean:e} se={se:e}",
            i + 1
        );
    }
}

#[test]
fn transcript_files_round_trip_through_decode() {
    let cfg = make_config(1_000_000, 100, 64, 1, 1.0, Some(1.0)).unwrap();
    let p = plan(&cfg).unwrap();
    let theta = sample_coefficients(&poly(200, 0.9), 1.0, 1, 0).unwrap();
    let msgs: Vec<Message> = (1..=cfg.m)
        .map(|j| local_encode(&p, &sample_observation_row(&theta, cfg.n, j, 5), 5).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trial.dnpr");
    write_transcript(&msgs, &mut std::fs::File::create(&path).unwrap()).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    // 16-byte header plus 7 payload bytes per 55-bit message
    assert_eq!(bytes.len(), 100 * (16 + 7));
    let back = read_transcript(&mut bytes.as_slice()).unwrap();
    assert_eq!(back, msgs);
    let a = central_decode(&p, &msgs, 5).unwrap();
    let b = central_decode(&p, &back, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn insufficient_sweep_risk_is_non_increasing() {
    let held = make_config(1_000_000_000_000_000, 2, 1, 1, std::f64::consts::PI, None).unwrap();
    let sweep = SweepSpec {
        axis: SweepAxis::Mb,
        points: vec![2, 4, 8, 16, 32, 64, 128, 256],
        held,
        budget: BudgetRule::PerValue { values: 4 },
        theta: ThetaRecipe::MatchedPrior {
            regime: Some(Regime::Insufficient),
            gamma: 1.0,
            mode: PriorMode::Reject,
        },
        trials: 100,
        seed: 11,
        gamma: 1.0,
    };
    let table = run_sweep(&sweep).unwrap();
    assert!(table.failures.is_empty(), "{:?}", table.failures);
    assert_eq!(table.rows.len(), 8);
    for row in &table.rows {
        assert_eq!(classify_regime(&row.report.config), Regime::Insufficient);
        assert_eq!(row.report.config.n, held.n);
        assert_eq!(row.report.config.alpha, held.alpha);
        assert!(row.lower.solver_value <= row.upper.total);
    }
    for w in table.rows.windows(2) {
        let (a, b) = (&w[0].report, &w[1].report);
        assert!(
            b.mean_risk <= a.mean_risk + 2.0 * (a.std_error + b.std_error),
            "{} -> {}",
            a.mean_risk,
            b.mean_risk
        );
    }
    let again = run_sweep(&sweep).unwrap();
    assert_eq!(table, again);
}

#[test]
fn solver_solutions_are_feasible_across_a_lattice() {
    for n in [10_000u64, 1_000_000, 100_000_000] {
        for m in [2u64, 8, 32] {
            let mut prev = f64::INFINITY;
            for b in [16u64, 64, 256] {
                let cfg = make_config(n, m, b, 1, 1.0, Some(1.0)).unwrap();
                let prior = prior_for_regime(&cfg, classify_regime(&cfg), 1.0).unwrap();
                let inst = instance_for(&cfg, prior).unwrap();
                let sol = solve_optimization(&inst).unwrap();
                for ((lo, hi), d) in inst.boxes().iter().zip(&sol.d) {
                    assert!(d >= lo && d <= hi);
                }
                let budget = inst.budget_nats();
                assert!(inst.constraint_value(&sol.d) <= budget * (1.0 + 1e-6));

                let r = bound_report(&cfg).unwrap();
                assert!(r.solver_value >= r.closed_form_value - 1e-9, "{r:?}");
                // monotone in b on a fixed prior
                let fixed = prior_for_regime(
                    &make_config(n, m, 16, 1, 1.0, Some(1.0)).unwrap(),
                    Regime::Intermediate,
                    1.0,
                )
                .unwrap();
                let v = solve_optimization(&instance_for(&cfg, fixed).unwrap())
                    .unwrap()
                    .value;
                assert!(v <= prev * (1.0 + 1e-12));
                prev = v;
            }
        }
    }
}

#[test]
fn gaussian_prior_risk_sits_above_the_lower_bound() {
    let cfg = make_config(1_000_000, 8, 64, 1, 1.0, Some(1.0)).unwrap();
    let lower = bound_report(&cfg).unwrap();
    let spec = CoefficientSpec {
        length: lower.prior.ell,
        kind: CoefficientKind::GaussianPrior {
            prior: lower.prior.clone(),
            mode: PriorMode::Project,
        },
    };
    let r = estimate_risk(&cfg, &spec, 200, 2).unwrap();
    assert!(r.mean_risk + 3.0 * r.std_error >= lower.solver_value);
}
