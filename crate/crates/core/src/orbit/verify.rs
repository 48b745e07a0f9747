use std::fmt;

use serde::{Deserialize, Serialize};

use super::homoclinic::decay_slope;
use super::{Orbit, OrbitEvaluator, OrbitKind};
use crate::error::{Error, Result};
use crate::integrator::{integrate, integrate_field, EventKind, IntegratorConfig, Termination};
use crate::problem::Problem;
use crate::state::State4;

/// Symmetry residual about an extremum, relative to `v_max`.
pub const SYMMETRY_TOL: f64 = 1e-7;
/// Sup-norm gap when re-integrating from the maximum.
pub const RIGIDITY_TOL: f64 = 1e-7;
/// Energy drift, relative to `1 + |E|`.
const DRIFT_TOL: f64 = 1e-8;
/// Periods followed by the long-run energy check.
const DRIFT_PERIODS: usize = 20;
/// Half-width of the re-integration window for homoclinic orbits.
const HOMOCLINIC_CHECK_WINDOW: f64 = 2.0;

/// Integrator settings used for the independent re-integrations.
fn check_config() -> IntegratorConfig {
    IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..Default::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= limit`.
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value <= limit }
    }

    /// Passes when `value > limit`.
    fn above(name: &str, value: f64, limit: f64) -> Self {
        Check { name: name.into(), value, limit, passed: value > limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: OrbitKind,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.check(name).map(|c| c.value)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "{mark} {:<28} {:>14.6e}  (limit {:.3e})", c.name, c.value, c.limit)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDrift {
    pub periods: usize,
    pub time: f64,
    pub max_drift: f64,
    /// Energy difference between the two turning states legs start from.
    pub restart_mismatch: f64,
    /// `max_drift / (1 + |E|)`.
    pub relative: f64,
}

/// Energy drift of a periodic orbit followed for `periods` periods.
///
/// The orbit is strongly unstable (errors grow by about 1e7 per period), so
/// one long integration leaves it within three periods whatever the
/// tolerance. The run is therefore chained from half-period legs, each
/// started at the orbit's own turning state, and the per-leg energy errors
/// are accumulated as they would be along one continuous run.
pub fn energy_drift(
    problem: &Problem,
    orbit: &Orbit,
    periods: usize,
    config: &IntegratorConfig,
) -> Result<EnergyDrift> {
    let (a, c, l) = match (orbit.kind, orbit.c, orbit.period) {
        (OrbitKind::Periodic, Some(c), Some(l)) => (orbit.a, c, l),
        _ => return Err(Error::Domain("energy drift is defined for periodic orbits".into())),
    };
    let bottom = State4::new(a, 0.0, c, 0.0);
    let top = orbit.evaluator(problem)?.max_state(problem);
    let e0 = problem.energy(&bottom);
    let cfg = IntegratorConfig { max_time: config.max_time.max(l), ..*config };
    let legs = [bottom, top].map(|start| integrate_field(problem, start, (0.0, l), &cfg, &[EventKind::VPrimeZero]));
    let mut per_leg = Vec::with_capacity(2);
    for (leg, start) in legs.into_iter().zip([bottom, top]) {
        let tr = leg?;
        let te = match tr.termination {
            Termination::Event { time, .. } => time,
            other => return Err(Error::NoPeriodicOrbit { a, reason: format!("half-period leg ended with {other:?}") }),
        };
        let e_start = problem.energy(&start);
        let errs: Vec<f64> = tr.states.iter().map(|s| problem.energy(s) - e_start).collect();
        per_leg.push((te, errs));
    }
    let mut offset = 0.0;
    let mut time = 0.0;
    let mut max_drift = 0.0_f64;
    for k in 0..2 * periods {
        let (te, errs) = &per_leg[k % 2];
        for e in errs {
            max_drift = max_drift.max((offset + e).abs());
        }
        offset += errs.last().copied().unwrap_or(0.0);
        time += te;
    }
    let restart = (problem.energy(&top) - e0).abs();
    Ok(EnergyDrift { periods, time, max_drift, restart_mismatch: restart, relative: max_drift / (1.0 + e0.abs()) })
}

/// Re-derive every invariant the orbit is supposed to satisfy.
pub fn verify_orbit(problem: &Problem, orbit: &Orbit) -> Result<VerifyReport> {
    if orbit.samples.is_empty() {
        return Err(Error::Domain("orbit has no samples".into()));
    }
    let c = &problem.consts;
    let mut checks = Vec::new();
    let v_max_samples = orbit.sample_max();
    checks.push(Check::at_most(
        "v_max_consistent",
        (orbit.v_max - v_max_samples).abs() / v_max_samples.abs().max(1e-300),
        1e-9,
    ));
    let half_gap = c.half_gap();
    let margin = orbit.states().map(|s| half_gap * s.v - s.v1).fold(f64::INFINITY, f64::min);
    checks.push(Check::above("radial_monotonicity_margin", margin, 0.0));

    match orbit.kind {
        OrbitKind::Constant => verify_constant(problem, orbit, &mut checks),
        OrbitKind::Periodic => verify_periodic(problem, orbit, &mut checks)?,
        OrbitKind::Homoclinic => verify_homoclinic(problem, orbit, &mut checks)?,
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { kind: orbit.kind, passed, checks })
}

fn verify_constant(problem: &Problem, orbit: &Orbit, checks: &mut Vec<Check>) {
    let c = &problem.consts;
    let s = orbit.states().next().unwrap();
    let rhs = problem.rhs_extended(&s);
    checks.push(Check::at_most("equilibrium_residual", rhs.max_abs(), 1e-9 * c.coef_b * c.a0));
    checks.push(Check::at_most("a_equals_a0", (orbit.a - c.a0).abs() / c.a0, 1e-12));
    checks.push(Check::at_most(
        "energy_consistent",
        (orbit.energy - problem.big_g(c.a0)).abs() / (1.0 + orbit.energy.abs()),
        1e-12,
    ));
}

fn sample_evaluator_gap(problem: &Problem, orbit: &Orbit, eval: &OrbitEvaluator) -> f64 {
    orbit
        .times()
        .zip(orbit.states())
        .map(|(t, s)| (eval.eval(problem, t) - s).max_abs() / (1.0 + s.max_abs()))
        .fold(0.0, f64::max)
}

/// Integrate from `s` by `half` both ways and compare `v(s)` with `v(-s)`.
fn symmetry_residual(problem: &Problem, s: State4, half: f64) -> Result<f64> {
    let cfg = check_config();
    let fwd = integrate(problem, s, (0.0, half), &cfg)?;
    let bwd = integrate(problem, s, (0.0, -half), &cfg)?;
    let reach = fwd.t_end().min(-bwd.t_end());
    let n = 400;
    let mut worst = 0.0_f64;
    for k in 0..=n {
        let t = reach * k as f64 / n as f64;
        if let (Some(a), Some(b)) = (fwd.eval(t), bwd.eval(-t)) {
            worst = worst.max((a.v - b.v).abs());
        }
    }
    if reach < half * (1.0 - 1e-12) {
        return Ok(f64::INFINITY);
    }
    Ok(worst)
}

/// Integrate from the maximum state over `[-half, half]` and compare with
/// the stored samples; returns the sup gap and the end states.
fn rigidity(problem: &Problem, orbit: &Orbit, top: State4, half: f64) -> Result<(f64, State4, State4)> {
    let cfg = check_config();
    let fwd = integrate(problem, top, (0.0, half), &cfg)?;
    let bwd = integrate(problem, top, (0.0, -half), &cfg)?;
    let mut worst = 0.0_f64;
    for (t, s) in orbit.times().zip(orbit.states()) {
        if t.abs() > half {
            continue;
        }
        let re = if t >= 0.0 { fwd.eval(t) } else { bwd.eval(t) };
        worst = worst.max(re.map_or(f64::INFINITY, |r| (r.v - s.v).abs()));
    }
    Ok((worst, bwd.final_state(), fwd.final_state()))
}

fn verify_periodic(problem: &Problem, orbit: &Orbit, checks: &mut Vec<Check>) -> Result<()> {
    let k = &problem.consts;
    let (c, l) = match (orbit.c, orbit.period) {
        (Some(c), Some(l)) if l > 0.0 => (c, l),
        _ => return Err(Error::Domain("periodic orbit needs c and L".into())),
    };
    let eval = orbit.evaluator(problem)?;
    checks.push(Check::at_most("samples_match_evaluator", sample_evaluator_gap(problem, orbit, &eval), 1e-9));
    let e_min = 0.5 * c * c + problem.big_g(orbit.a);
    checks.push(Check::at_most("energy_consistent", (orbit.energy - e_min).abs() / (1.0 + e_min.abs()), 1e-9));
    let top = eval.max_state(problem);
    let e_max = 0.5 * top.v2 * top.v2 + problem.big_g(top.v);
    checks.push(Check::at_most("energy_identity_extrema", (e_min - e_max).abs(), 1e-7));
    let spread = orbit.states().map(|s| (problem.energy(&s) - e_min).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("sample_energy_spread", spread / (1.0 + e_min.abs()), DRIFT_TOL));
    let drift = energy_drift(problem, orbit, DRIFT_PERIODS, &check_config())?;
    checks.push(Check::at_most("energy_drift_20_periods", drift.relative, DRIFT_TOL));

    let v_min = orbit.sample_min();
    checks.push(Check::at_most("min_equals_a", (v_min - orbit.a).abs(), 1e-7 * k.a0));
    checks.push(Check::above("a0_minus_min", k.a0 - v_min, 0.0));
    checks.push(Check::above("max_minus_a0", orbit.v_max - k.a0, 0.0));

    // Sign changes of v' around the closed loop of samples.
    let v1: Vec<f64> = orbit.states().map(|s| s.v1).filter(|x| *x != 0.0).collect();
    let changes = (0..v1.len()).filter(|&i| (v1[i] > 0.0) != (v1[(i + 1) % v1.len()] > 0.0)).count();
    checks.push(Check::at_most("extrema_per_period", (changes as f64 - 2.0).abs(), 0.0));

    let bottom = State4::new(orbit.a, 0.0, c, 0.0);
    let sym = symmetry_residual(problem, bottom, 0.5 * l)?.max(symmetry_residual(problem, top, 0.5 * l)?);
    checks.push(Check::at_most("symmetry_residual", sym / orbit.v_max, SYMMETRY_TOL));
    let (rig, left, right) = rigidity(problem, orbit, top, 0.5 * l)?;
    checks.push(Check::at_most("rigidity_gap", rig, RIGIDITY_TOL));
    let per = (left.v - right.v).abs().max((left.v1 - right.v1).abs());
    checks.push(Check::at_most("periodicity_residual", per / orbit.v_max, SYMMETRY_TOL));
    if let Some(r) = orbit.diagnostics.shooting_residual {
        let scale = orbit.v_max.max(1.0) * k.lambda_s.powf(1.5);
        checks.push(Check::at_most("shooting_residual", r.abs() / scale, super::periodic::RESIDUAL_TOL));
    }
    Ok(())
}

fn verify_homoclinic(problem: &Problem, orbit: &Orbit, checks: &mut Vec<Check>) -> Result<()> {
    let k = &problem.consts;
    let eval = orbit.evaluator(problem)?;
    checks.push(Check::at_most("samples_match_evaluator", sample_evaluator_gap(problem, orbit, &eval), 1e-9));
    checks.push(Check::above("max_minus_a0", orbit.v_max - k.a0, 0.0));
    let top = eval.max_state(problem);
    checks.push(Check::at_most("energy", orbit.energy.abs() / k.b, 1e-6));

    // Symmetric and decreasing away from the maximum.
    let samples: Vec<[f64; 5]> = orbit.samples.clone();
    let n = samples.len();
    let asym = (0..n / 2).map(|i| (samples[i][1] - samples[n - 1 - i][1]).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("even_profile", asym / orbit.v_max, 1e-12));
    let increasing = samples.iter().filter(|r| r[0] > 0.0).filter(|r| r[2] >= 0.0).count();
    checks.push(Check::at_most("increasing_after_max", increasing as f64, 0.0));

    let half = HOMOCLINIC_CHECK_WINDOW;
    checks.push(Check::at_most(
        "symmetry_residual",
        symmetry_residual(problem, top, half)? / orbit.v_max,
        SYMMETRY_TOL,
    ));
    let (rig, _, _) = rigidity(problem, orbit, top, half)?;
    checks.push(Check::at_most("rigidity_gap", rig, RIGIDITY_TOL));

    let slope = decay_slope(orbit).unwrap_or(f64::NAN);
    let rate = k.slow_rate();
    checks.push(Check::at_most("decay_slope_error", ((-slope) / rate - 1.0).abs(), 0.01));
    let profile = orbit.uniform_samples()?;
    let green = problem.greens_fixed_point_residual(&profile)?;
    checks.push(Check::at_most("greens_fixed_point", green / orbit.v_max, 1e-5));
    let limit = problem.decay_limit(&profile)?;
    checks.push(Check::above("decay_limit", limit, 0.0));
    if let Some(tail) = orbit.diagnostics.tail {
        checks.push(Check::at_most("decay_limit_vs_tail", (limit / tail.c_slow - 1.0).abs(), 1e-3));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{constant_orbit, find_periodic};

    fn model() -> Problem {
        Problem::from_config(8, "critical").unwrap()
    }

    #[test]
    fn constant_orbit_passes_with_zero_residuals() {
        let p = model();
        let r = verify_orbit(&p, &constant_orbit(&p)).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.value("equilibrium_residual"), Some(0.0));
    }

    #[test]
    fn periodic_orbit_passes() {
        let p = model();
        let o = find_periodic(&p, 4.0).unwrap();
        let r = verify_orbit(&p, &o).unwrap();
        assert!(r.passed, "{r}");
        assert!(r.value("symmetry_residual").unwrap() <= 1e-7);
    }

    #[test]
    fn edited_v_max_is_flagged() {
        let p = model();
        let mut o = find_periodic(&p, 4.0).unwrap();
        o.v_max += 0.01;
        let r = verify_orbit(&p, &o).unwrap();
        assert!(!r.passed);
        assert!(!r.check("v_max_consistent").unwrap().passed);
    }

    #[test]
    fn long_run_drift() {
        let p = model();
        let o = find_periodic(&p, 4.0).unwrap();
        let d = energy_drift(&p, &o, 20, &IntegratorConfig::default()).unwrap();
        assert!(d.relative <= 1e-8, "{d:?}");
        assert!((d.time - 20.0 * o.period.unwrap()).abs() < 1e-6);
    }
}
