use emden_fowler::integrator::{fmt12, integrate_field, integrate_fixed, VectorField};
use emden_fowler::nonlinearity::{critical_exponent, hardy_rellich_constant};
use emden_fowler::orbit::{energy_drift, find_periodic, verify_orbit};
use emden_fowler::{integrate, IntegratorConfig, Monomial, NonlinearitySpec, Problem, State4, Termination};
use proptest::prelude::*;

fn model() -> Problem {
    Problem::from_config(8, "critical").unwrap()
}

/// `v'''' + 10 v'' + 9 v = 0`: bounded in both time directions.
struct TwoFrequency;

impl VectorField for TwoFrequency {
    fn deriv(&self, s: &State4) -> State4 {
        State4::new(s.v1, s.v2, s.v3, -10.0 * s.v2 - 9.0 * s.v)
    }
}

/// Exact solution of [`TwoFrequency`] from `s0` at time `t`.
fn two_frequency_exact(s0: State4, t: f64) -> State4 {
    // v = p cos t + q sin t + r cos 3t + w sin 3t
    let r = -(s0.v + s0.v2) / 8.0;
    let p = s0.v - r;
    let w = -(s0.v1 + s0.v3) / 24.0;
    let q = s0.v1 - 3.0 * w;
    let (c1, s1, c3, s3) = (t.cos(), t.sin(), (3.0 * t).cos(), (3.0 * t).sin());
    State4::new(
        p * c1 + q * s1 + r * c3 + w * s3,
        -p * s1 + q * c1 - 3.0 * r * s3 + 3.0 * w * c3,
        -p * c1 - q * s1 - 9.0 * r * c3 - 9.0 * w * s3,
        p * s1 - q * c1 + 27.0 * r * s3 - 27.0 * w * c3,
    )
}

fn valid_spec() -> impl Strategy<Value = NonlinearitySpec> {
    (5u32..=12)
        .prop_flat_map(|n| {
            let crit = critical_exponent(n);
            let mono = (0.1f64..10.0, 1.3f64..=crit).prop_map(|(c, q)| Monomial::new(c, q));
            (Just(n), 0.0f64..0.9, prop::collection::vec(mono, 1..=3))
        })
        .prop_map(|(n, beta_frac, monos)| NonlinearitySpec::new(beta_frac * hardy_rellich_constant(n), monos, n))
        .prop_filter("valid", |s| s.validate().passed())
}

fn log_grid() -> impl Iterator<Item = f64> {
    (0..=90).map(|k| 10f64.powf(-6.0 + k as f64 / 10.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_pinched(spec in valid_spec()) {
        let crit = critical_exponent(spec.n);
        for t in log_grid() {
            let g = spec.eval_g(t).unwrap();
            let gp = spec.eval_g_prime(t).unwrap();
            prop_assert!(gp * t <= crit * g * (1.0 + 1e-13), "upper bound fails at t = {t}");
            // The gap t g' - g = sum c (q - 1) t^q is resolvable only above rounding of beta t.
            let gap: f64 = spec.monomials.iter().map(|m| m.coef * (m.exponent - 1.0) * t.powf(m.exponent)).sum();
            if gap > 1e-12 * g {
                prop_assert!(g < gp * t, "lower bound fails at t = {t}");
            } else {
                prop_assert!(g <= gp * t * (1.0 + 1e-13));
            }
        }
    }

    #[test]
    fn potential_has_single_well_at_a0(spec in valid_spec()) {
        let b_coef = hardy_rellich_constant(spec.n);
        let a0 = spec.find_a0(b_coef).unwrap();
        let big = |v: f64| spec.eval_big_g(v, b_coef).unwrap();
        let below: Vec<f64> = (1..40).map(|k| big(a0 * k as f64 / 40.0)).collect();
        prop_assert!(below.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(below[38] > big(a0));
        let above: Vec<f64> = (1..=40).map(|k| big(a0 * (1.0 + k as f64 / 40.0))).collect();
        prop_assert!(above[0] > big(a0));
        prop_assert!(above.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn a0_and_b(spec in valid_spec()) {
        let b_coef = hardy_rellich_constant(spec.n);
        let a0 = spec.find_a0(b_coef).unwrap();
        let b = spec.find_b(b_coef).unwrap();
        prop_assert!(b > 0.0);
        let defect = b_coef * a0 - spec.eval_g(a0).unwrap();
        prop_assert!(defect.abs() <= 1e-9 * b_coef * a0);
        prop_assert!(defect <= b);
    }

    #[test]
    fn potential_derivative(spec in valid_spec(), frac in 0.05f64..2.0) {
        let b_coef = hardy_rellich_constant(spec.n);
        let v = frac * spec.find_a0(b_coef).unwrap();
        let h = 1e-5 * v;
        let fd = (spec.eval_big_g(v + h, b_coef).unwrap() - spec.eval_big_g(v - h, b_coef).unwrap()) / (2.0 * h);
        let g = spec.eval_g(v).unwrap();
        let exact = g - b_coef * v;
        prop_assert!((fd - exact).abs() <= 1e-8 * g.max(b_coef * v), "{fd} vs {exact}");
    }

    #[test]
    fn equilibrium_is_at_rest(spec in valid_spec()) {
        let p = Problem::new(spec.n, spec).unwrap();
        let r = p.rhs(&p.equilibrium()).unwrap();
        prop_assert_eq!((r.v, r.v1, r.v2), (0.0, 0.0, 0.0));
        prop_assert!(r.v3.abs() <= 1e-9 * p.consts.coef_b * p.consts.a0);
    }

    #[test]
    fn unshifted_roots_coincide(n in 5u32..40, k in 0usize..3) {
        let spec = match k {
            0 => NonlinearitySpec::critical(n).unwrap(),
            1 => NonlinearitySpec::power(0.5 * (1.0 + critical_exponent(n)), n),
            _ => NonlinearitySpec::new(0.0, vec![Monomial::new(2.0, 1.2), Monomial::new(0.5, critical_exponent(n))], n),
        };
        let c = Problem::new(n, spec).unwrap().consts;
        prop_assert_eq!(c.lambda_s, c.lambda_d);
        prop_assert_eq!(c.mu_s, c.mu_d);
    }

    #[test]
    fn forward_backward_returns(v in -2.0f64..2.0, v1 in -2.0f64..2.0, v2 in -2.0f64..2.0, v3 in -2.0f64..2.0) {
        let s0 = State4::new(v, v1, v2, v3);
        let cfg = IntegratorConfig::default();
        let fwd = integrate_field(&TwoFrequency, s0, (0.0, 10.0), &cfg, &[]).unwrap();
        let back = integrate_field(&TwoFrequency, fwd.final_state(), (10.0, 0.0), &cfg, &[]).unwrap();
        prop_assert_eq!(back.termination, Termination::ReachedEnd);
        prop_assert!((back.final_state() - s0).max_abs() <= 1e-7);
    }

    #[test]
    fn formatting_keeps_twelve_digits(x in -1e12f64..1e12) {
        let s = fmt12(x);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
        let digits = s.trim_start_matches('-').split(['e', 'E']).next().unwrap().replace('.', "");
        prop_assert!(digits.trim_start_matches('0').len() <= 12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_conserved(frac in 0.05f64..0.95, cfrac in 0.0f64..1.0) {
        let p = model();
        let s0 = State4::new(frac * p.consts.a0, 0.0, cfrac * p.consts.curvature_ceiling(), 0.0);
        let e0 = p.energy(&s0);
        let traj = integrate(&p, s0, (0.0, 8.0), &IntegratorConfig::default()).unwrap();
        // The terms of E cancel to a small E0 on these trajectories, so the
        // error is measured against the largest term met so far.
        let mut scale = 1.0 + e0.abs();
        for s in &traj.states {
            let terms = (s.v1 * s.v3).abs() + 0.5 * s.v2 * s.v2 + 0.5 * p.consts.coef_a * s.v1 * s.v1 + p.big_g(s.v).abs();
            scale = scale.max(terms);
            prop_assert!((p.energy(s) - e0).abs() <= 1e-8 * scale, "E = {} vs {e0} at v = {}", p.energy(s), s.v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn periodic_orbits_satisfy_invariants(frac in 0.1f64..0.9) {
        let p = model();
        let o = find_periodic(&p, frac * p.consts.a0).unwrap();
        prop_assert!(o.a < p.consts.a0 && o.v_max > p.consts.a0);
        let report = verify_orbit(&p, &o).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.name.clone()).collect();
        prop_assert!(report.passed, "failed: {:?}", failed);
        let inv = o.inversion().inversion();
        prop_assert_eq!(inv.samples, o.samples);
    }
}

#[test]
fn fixed_step_halving_is_fifth_order() {
    let s0 = State4::new(1.0, 0.3, -0.5, 0.2);
    let exact = two_frequency_exact(s0, 2.0);
    let err = |steps| (integrate_fixed(&TwoFrequency, s0, 2.0, steps) - exact).max_abs();
    for steps in [40, 80, 160] {
        let ratio = err(steps) / err(2 * steps);
        assert!(ratio >= 20.0, "ratio {ratio} at {steps} steps");
    }
}

#[test]
fn adaptive_error_is_proportional_to_tolerance() {
    // From a minimum up to its first turning point.
    let p = model();
    let s0 = State4::new(4.0, 0.0, 9.0, 0.0);
    let at = |rel_tol: f64| {
        let cfg = IntegratorConfig { rel_tol, abs_tol: rel_tol * 1e-2, ..Default::default() };
        integrate(&p, s0, (0.0, 0.3), &cfg).unwrap().final_state()
    };
    let reference = at(1e-14);
    for tol in [1e-6, 1e-7, 1e-8] {
        let ratio = (at(tol) - reference).max_abs() / (at(tol / 2.0) - reference).max_abs();
        assert!((1.5..3.0).contains(&ratio), "ratio {ratio} at {tol:e}");
        let ratio32 = (at(tol) - reference).max_abs() / (at(tol / 32.0) - reference).max_abs();
        assert!(ratio32 >= 4.0, "ratio {ratio32} at {tol:e}");
    }
}

#[test]
fn periodic_energy_drift_at_default_tolerance() {
    let p = model();
    let o = find_periodic(&p, 4.0).unwrap();
    // 32 periods of length 3.17 cover [0, 100].
    let d = energy_drift(&p, &o, 32, &IntegratorConfig::default()).unwrap();
    assert!(d.time >= 100.0);
    assert!(d.relative <= 1e-8, "{}", d.relative);
}
