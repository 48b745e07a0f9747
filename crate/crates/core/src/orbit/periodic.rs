use serde::{Deserialize, Serialize};

use super::profile::{HalfProfile, OrbitEvaluator, NODE_STEP, SUBSTEPS};
use super::{sample_row, Diagnostics, Orbit, OrbitKind, TableInfo};
use crate::error::{Error, Result};
use crate::integrator::{integrate_field, EventKind, IntegratorConfig, Termination};
use crate::problem::Problem;
use crate::roots::bisect;
use crate::state::State4;

/// Uniform samples stored per period.
pub const SAMPLES_PER_PERIOD: usize = 2000;

/// Accepted shooting residual, relative to `max(1, v_max lambda_s^{3/2})`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Longest half period the shooting integration will follow.
const SHOOT_HORIZON: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicOptions {
    pub integrator: IntegratorConfig,
    pub c_lo: f64,
    /// Defaults to `b / A`.
    pub c_hi: Option<f64>,
    pub max_probes: usize,
    /// Narrower bracket to try first, e.g. from a neighbouring `a`.
    pub hint: Option<(f64, f64)>,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions { integrator: IntegratorConfig::default(), c_lo: 1e-8, c_hi: None, max_probes: 60, hint: None }
    }
}

fn check_a(problem: &Problem, a: f64) -> Result<()> {
    let a0 = problem.consts.a0;
    if !(a > 0.0 && a < a0) {
        return Err(Error::Domain(format!("orbit minimum a = {a} must lie in (0, a0 = {a0})")));
    }
    Ok(())
}

/// `(v'''(t*), t*)` for the trajectory from the minimum `(a, 0, c, 0)`, where
/// `t*` is the first zero of `v'`.
///
/// Blow-up before `t*` yields `+inf`, loss of positivity `-inf` (with `t*`
/// NaN in both cases).
pub fn shoot_residual(problem: &Problem, a: f64, c: f64, config: &IntegratorConfig) -> Result<(f64, f64)> {
    check_a(problem, a)?;
    if !(c > 0.0) {
        return Err(Error::Domain(format!("curvature c = {c} at the minimum must be positive")));
    }
    let cfg = IntegratorConfig { max_time: config.max_time.max(SHOOT_HORIZON), ..*config };
    let tr =
        integrate_field(problem, State4::new(a, 0.0, c, 0.0), (0.0, SHOOT_HORIZON), &cfg, &[EventKind::VPrimeZero])?;
    match tr.termination {
        Termination::Event { time, .. } => Ok((tr.final_state().v3, time)),
        Termination::BlowUp { .. } => Ok((f64::INFINITY, f64::NAN)),
        Termination::LeftPositiveCone { .. } => Ok((f64::NEG_INFINITY, f64::NAN)),
        Termination::ReachedEnd => Err(Error::NoPeriodicOrbit {
            a,
            reason: format!("no turning point within t = {SHOOT_HORIZON} for c = {c}"),
        }),
    }
}

/// `2 pi / omega` from the linearization at `a0`, the limit of `L_a` as `a -> a0`.
pub fn linearized_period(problem: &Problem) -> f64 {
    let c = &problem.consts;
    let k = problem.spec.g_prime_unchecked(c.a0) - c.coef_b;
    let omega2 = 0.5 * (-c.coef_a + (c.coef_a * c.coef_a + 4.0 * k).sqrt());
    2.0 * std::f64::consts::PI / omega2.sqrt()
}

pub fn find_periodic(problem: &Problem, a: f64) -> Result<Orbit> {
    find_periodic_with(problem, a, &PeriodicOptions::default())
}

pub fn find_periodic_with(problem: &Problem, a: f64, opts: &PeriodicOptions) -> Result<Orbit> {
    check_a(problem, a)?;
    let cfg = &opts.integrator;
    let c_hi = opts.c_hi.unwrap_or_else(|| problem.consts.curvature_ceiling());
    let mut probes = 0usize;
    let mut f = |c: f64| -> Result<f64> {
        probes += 1;
        Ok(shoot_residual(problem, a, c, cfg)?.0)
    };

    let mut bracket = None;
    if let Some((lo, hi)) = opts.hint {
        let (lo, hi) = (lo.max(opts.c_lo), hi.min(c_hi));
        if lo < hi {
            let (flo, fhi) = (f(lo)?, f(hi)?);
            if flo < 0.0 && fhi > 0.0 {
                bracket = Some((lo, hi, flo, fhi));
            }
        }
    }
    if bracket.is_none() {
        bracket = Some(scan_bracket(&mut f, opts.c_lo, c_hi, opts.max_probes, a)?);
    }
    let (lo, hi, flo, fhi) = bracket.unwrap();

    let mut failure = None;
    let b = bisect(
        |c| match f(c) {
            Ok(r) => r,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        flo,
        fhi,
        0.0,
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let c_adaptive = b.best();
    let (residual, t_star) = shoot_residual(problem, a, c_adaptive, cfg)?;
    if !residual.is_finite() {
        return Err(Error::NoPeriodicOrbit { a, reason: "bracket collapsed onto a sentinel".into() });
    }

    let (_, c, turn) = refine_on_table(problem, a, c_adaptive)?;
    let info =
        TableInfo { start: State4::new(a, 0.0, c, 0.0), step: NODE_STEP, substeps: SUBSTEPS, turn, refined: true };
    let (nodes, turn) = crate::precise::node_table(problem, &info, None)?;
    let info = TableInfo { turn, ..info };
    let table = HalfProfile::from_nodes(info.start, info.step, info.substeps, nodes);
    let period = 2.0 * turn;
    let eval = OrbitEvaluator::Periodic { table, turn, period };
    let v_max = eval.max_state(problem).v;
    let scale = v_max.max(1.0) * problem.consts.lambda_s.powf(1.5);
    if residual.abs() > RESIDUAL_TOL * scale {
        return Err(Error::NoPeriodicOrbit {
            a,
            reason: format!("shooting residual {residual:e} above tolerance after bisection to roundoff"),
        });
    }

    let samples = (0..SAMPLES_PER_PERIOD)
        .map(|k| {
            let t = -0.5 * period + period * k as f64 / SAMPLES_PER_PERIOD as f64;
            sample_row(t, eval.eval(problem, t))
        })
        .collect();
    Ok(Orbit {
        kind: OrbitKind::Periodic,
        n: problem.n(),
        g: problem.spec.to_string(),
        a,
        c: Some(c),
        period: Some(period),
        v_max,
        energy: 0.5 * c * c + problem.big_g(a),
        samples,
        diagnostics: Diagnostics {
            method: Some("shooting".into()),
            shooting_residual: Some(residual),
            c_adaptive: Some(c_adaptive),
            t_star: Some(t_star),
            table: Some(info),
            ..Default::default()
        },
    })
}

/// Find adjacent probes with residuals of opposite sign on `[lo, hi]`.
fn scan_bracket(
    f: &mut impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    max_probes: usize,
    a: f64,
) -> Result<(f64, f64, f64, f64)> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo < 0.0 && fhi > 0.0 {
        return Ok((lo, hi, flo, fhi));
    }
    // Geometric refinement: look for a sign change between successive probes.
    let n = max_probes.max(2);
    let mut prev = (lo, flo);
    for k in 1..=n {
        let c = lo * (hi / lo).powf(k as f64 / n as f64);
        let fc = if k == n { fhi } else { f(c)? };
        if prev.1 < 0.0 && fc > 0.0 {
            return Ok((prev.0, c, prev.1, fc));
        }
        prev = (c, fc);
    }
    let reason = if fhi < 0.0 || fhi.is_nan() {
        format!("residual never turns positive on [{lo:e}, {hi}] after {n} probes")
    } else {
        format!("residual never negative on [{lo:e}, {hi}] after {n} probes")
    };
    Err(Error::NoPeriodicOrbit { a, reason })
}

/// Re-solve the shooting condition on the fixed-step node table so that its
/// turning point is exactly symmetric.
fn refine_on_table(problem: &Problem, a: f64, c0: f64) -> Result<(HalfProfile, f64, f64)> {
    let horizon = SHOOT_HORIZON;
    let build = |c: f64| HalfProfile::build(problem, State4::new(a, 0.0, c, 0.0), horizon, NODE_STEP, SUBSTEPS);
    let res = |c: f64| -> f64 {
        let t = build(c);
        match t.turning_point(problem) {
            Some(s) => t.eval(problem, s).v3,
            None => {
                let last = t.eval(problem, t.s_max());
                if last.v <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
        }
    };
    let mut found: Option<f64> = (res(c0) == 0.0).then_some(c0);
    let mut w = 1e-12;
    while found.is_none() && w <= 1e-4 {
        let (lo, hi) = (c0 * (1.0 - w), c0 * (1.0 + w));
        let (rl, rh) = (res(lo), res(hi));
        if rl < 0.0 && rh > 0.0 {
            found = Some(bisect(res, lo, hi, rl, rh, 0.0, 0.0).best());
        }
        w *= 10.0;
    }
    let c = match found {
        Some(c) => c,
        None => {
            return Err(Error::NoPeriodicOrbit {
                a,
                reason: "fixed-step table does not close near the shooting root".into(),
            })
        }
    };
    let table = build(c);
    let turn = table
        .turning_point(problem)
        .ok_or_else(|| Error::NoPeriodicOrbit { a, reason: "table has no turning point".into() })?;
    Ok((table, c, turn))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub c: Option<f64>,
    #[serde(rename = "L")]
    pub period: Option<f64>,
    #[serde(rename = "E")]
    pub energy: Option<f64>,
    pub v_max: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Whether `L` increases as `a` decreases along the successful rows.
    /// Reported only: monotonicity is not a theorem.
    pub period_increasing: bool,
}

impl Sweep {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    /// CSV with header `a,c,L,E,v_max`; failed rows carry `ERROR`.
    pub fn to_csv(&self) -> String {
        use crate::integrator::fmt12;
        let mut out = String::from("a,c,L,E,v_max\n");
        for r in &self.rows {
            match (r.c, r.period, r.energy, r.v_max) {
                (Some(c), Some(l), Some(e), Some(m)) => {
                    out.push_str(&format!("{},{},{},{},{}\n", fmt12(r.a), fmt12(c), fmt12(l), fmt12(e), fmt12(m)));
                }
                _ => out.push_str(&format!("{},ERROR,ERROR,ERROR,ERROR\n", fmt12(r.a))),
            }
        }
        out
    }
}

/// One periodic orbit per `a`, warm-starting each bracket from the previous row.
pub fn sweep_periods(problem: &Problem, a_values: &[f64]) -> Sweep {
    sweep_periods_with(problem, a_values, &PeriodicOptions::default())
}

/// [`sweep_periods`] with explicit solver options; their `hint` is replaced
/// row by row.
pub fn sweep_periods_with(problem: &Problem, a_values: &[f64], base: &PeriodicOptions) -> Sweep {
    let mut rows = Vec::with_capacity(a_values.len());
    let mut hint: Option<f64> = None;
    for &a in a_values {
        let opts = PeriodicOptions { hint: hint.map(|c| (0.5 * c, 2.0 * c)), ..*base };
        match find_periodic_with(problem, a, &opts) {
            Ok(o) => {
                hint = o.c;
                rows.push(SweepRow {
                    a,
                    c: o.c,
                    period: o.period,
                    energy: Some(o.energy),
                    v_max: Some(o.v_max),
                    error: None,
                });
            }
            Err(e) => {
                rows.push(SweepRow { a, c: None, period: None, energy: None, v_max: None, error: Some(e.to_string()) })
            }
        }
    }
    let periods: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.period.map(|l| (r.a, l))).collect();
    let period_increasing = periods.windows(2).all(|w| (w[1].0 < w[0].0) == (w[1].1 > w[0].1));
    Sweep { rows, period_increasing }
}
