use serde::{Deserialize, Serialize};

use super::periodic::{find_periodic_with, PeriodicOptions};
use super::profile::{HalfProfile, OrbitEvaluator, TailModel, NODE_STEP, SUBSTEPS};
use super::{sample_row, Diagnostics, Orbit, OrbitKind, TableInfo};
use crate::error::{Error, Result};
use crate::integrator::{integrate_field, EventKind, IntegratorConfig, Termination};
use crate::problem::Problem;
use crate::roots::bisect;
use crate::state::State4;

/// Sample spacing of homoclinic profiles.
pub const HOMOCLINIC_DT: f64 = 0.01;

/// Smallest half-width of the homoclinic sample window.
const MIN_WINDOW: f64 = 15.0;

/// The window is widened until the tail falls below this fraction of `v_max`.
const WINDOW_TAIL: f64 = 1e-10;

/// Default tail amplitude for tail shooting.
pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Continuation stops once successive spliced profiles are this close.
pub const CONTINUATION_GAP_TOL: f64 = 2e-6;

const THETA_RANGE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationInfo {
    /// Minimum of the last periodic orbit used.
    pub a_final: f64,
    /// Sup-norm distance between the last two spliced profiles.
    pub gap: f64,
    /// Half-width of the window the gap was measured on.
    pub gap_window: f64,
    /// `(a, gap)` for each step after the first.
    pub history: Vec<[f64; 2]>,
}

/// Geometric sequence from `a0 / 2` down to `a_min_frac * a0`.
pub fn continuation_sequence(problem: &Problem, a_min_frac: f64, steps: usize) -> Vec<f64> {
    let a0 = problem.consts.a0;
    let (hi, lo) = (0.5 * a0, a_min_frac * a0);
    let steps = steps.max(2);
    (0..steps).map(|k| hi * (lo / hi).powf(k as f64 / (steps - 1) as f64)).collect()
}

/// Limit of max-centred periodic orbits as their minimum tends to zero.
///
/// Each periodic orbit is spliced, at a quarter period from its maximum, to
/// the two-mode decaying tail matching its value and slope there. The
/// sequence stops once successive spliced profiles differ by less than
/// [`CONTINUATION_GAP_TOL`] on the window of half-width `W = min(L) / 2`.
pub fn homoclinic_by_continuation(problem: &Problem, a_seq: &[f64]) -> Result<Orbit> {
    if a_seq.is_empty() {
        return Err(Error::Domain("continuation needs at least one value of a".into()));
    }
    if a_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("continuation sequence must be strictly decreasing".into()));
    }
    let (rs, rf) = (problem.consts.slow_rate(), problem.consts.fast_rate());
    let mut prev: Option<(OrbitEvaluator, f64)> = None;
    let mut history = Vec::new();
    let mut last_gap = f64::INFINITY;
    let mut hint: Option<f64> = None;
    for &a in a_seq {
        let opts = PeriodicOptions { hint: hint.map(|c| (0.5 * c, 2.0 * c)), ..Default::default() };
        let orbit = find_periodic_with(problem, a, &opts)?;
        hint = orbit.c;
        let info = orbit.diagnostics.table.expect("periodic orbits carry a table");
        let table = HalfProfile::build(problem, info.start, info.turn + 4.0 * info.step, info.step, info.substeps);
        let d_c = 0.5 * info.turn;
        let at = table.eval(problem, info.turn - d_c);
        let tail = TailModel::matching(at.v, -at.v1, d_c, rs, rf);
        let eval = OrbitEvaluator::Homoclinic { table, turn: info.turn, tail };
        if let Some((pe, pturn)) = &prev {
            let w = pturn.min(info.turn);
            let steps = (w / HOMOCLINIC_DT).ceil() as usize;
            let gap = (0..=steps)
                .map(|k| {
                    let t = w * k as f64 / steps as f64;
                    (eval.eval(problem, t).v - pe.eval(problem, t).v).abs()
                })
                .fold(0.0, f64::max);
            history.push([a, gap]);
            last_gap = gap;
            if gap < CONTINUATION_GAP_TOL {
                let (info, table) = refine_table(problem, TableInfo { refined: true, ..info }, None)?;
                let d_c = 0.5 * info.turn;
                let at = table.eval(problem, info.turn - d_c);
                let tail = TailModel::matching(at.v, -at.v1, d_c, rs, rf);
                let eval = OrbitEvaluator::Homoclinic { table, turn: info.turn, tail };
                let cont = ContinuationInfo { a_final: a, gap, gap_window: w, history };
                let diagnostics = Diagnostics {
                    method: Some("continuation".into()),
                    shooting_residual: orbit.diagnostics.shooting_residual,
                    c_adaptive: orbit.diagnostics.c_adaptive,
                    table: Some(info),
                    tail: Some(tail),
                    continuation: Some(cont),
                    ..Default::default()
                };
                return assemble(problem, eval, diagnostics);
            }
        }
        prev = Some((eval, info.turn));
    }
    Err(Error::ContinuationStalled { gap: last_gap })
}

/// Node table from the double-double march, with its turning point.
fn refine_table(problem: &Problem, info: TableInfo, seed: Option<(f64, f64)>) -> Result<(TableInfo, HalfProfile)> {
    let (nodes, turn) = crate::precise::node_table(problem, &info, seed)?;
    let table = HalfProfile::from_nodes(info.start, info.step, info.substeps, nodes);
    Ok((TableInfo { turn, ..info }, table))
}

fn seed(problem: &Problem, epsilon: f64, theta: f64) -> State4 {
    let (rs, rf) = (problem.consts.slow_rate(), problem.consts.fast_rate());
    let mode = |r: f64| State4::new(1.0, r, r * r, r * r * r);
    (mode(rs) + mode(rf) * theta) * epsilon
}

/// Shoot from the two-dimensional stable manifold of 0.
///
/// The seed is `epsilon [m(sqrt mu_d) + theta m(sqrt lambda_d)]` with
/// `m(r) = (1, r, r^2, r^3)`; `theta` is tuned until `v'''` vanishes at the
/// first zero of `v'`, and the profile is completed by reflection.
pub fn homoclinic_by_tail_shooting(problem: &Problem, epsilon: f64) -> Result<Orbit> {
    if !(epsilon > 1e-8 && epsilon < 1e-3) {
        return Err(Error::Domain(format!("tail amplitude epsilon = {epsilon} must lie in (1e-8, 1e-3)")));
    }
    let cfg = IntegratorConfig::default();
    let horizon = 200.0;
    let shoot = |theta: f64| -> f64 {
        let s0 = seed(problem, epsilon, theta);
        if s0.v <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match integrate_field(problem, s0, (0.0, horizon), &cfg, &[EventKind::VPrimeZero]) {
            Ok(tr) => match tr.termination {
                Termination::Event { .. } => tr.final_state().v3,
                Termination::BlowUp { .. } => f64::INFINITY,
                Termination::LeftPositiveCone { .. } => f64::NEG_INFINITY,
                Termination::ReachedEnd => f64::NAN,
            },
            Err(_) => f64::NAN,
        }
    };
    let (flo, fhi) = (shoot(-THETA_RANGE), shoot(THETA_RANGE));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::NoTailBracket { lo: -THETA_RANGE, hi: THETA_RANGE });
    }
    let b = bisect(shoot, -THETA_RANGE, THETA_RANGE, flo, fhi, 0.0, 0.0);
    let theta_adaptive = b.best();
    let residual = shoot(theta_adaptive);

    // Same condition on the node table.
    let build = |theta: f64| HalfProfile::build(problem, seed(problem, epsilon, theta), horizon, NODE_STEP, SUBSTEPS);
    let table_res = |theta: f64| -> f64 {
        let t = build(theta);
        match t.turning_point(problem) {
            Some(s) => t.eval(problem, s).v3,
            None => {
                if t.eval(problem, t.s_max()).v <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
        }
    };
    let mut theta = None;
    let mut w = 1e-14;
    while w <= 1.0 {
        let (lo, hi) = (theta_adaptive - w, theta_adaptive + w);
        let (rl, rh) = (table_res(lo), table_res(hi));
        if rl < 0.0 && rh > 0.0 {
            theta = Some(bisect(table_res, lo, hi, rl, rh, 0.0, 0.0).best());
            break;
        }
        w *= 10.0;
    }
    let theta = theta.ok_or(Error::NoTailBracket { lo: theta_adaptive - 1.0, hi: theta_adaptive + 1.0 })?;
    let start = seed(problem, epsilon, theta);
    let turn = build(theta).turning_point(problem).ok_or(Error::NoTailBracket { lo: -THETA_RANGE, hi: THETA_RANGE })?;
    let (info, table) = refine_table(
        problem,
        TableInfo { start, step: NODE_STEP, substeps: SUBSTEPS, turn, refined: true },
        Some((epsilon, theta)),
    )?;
    let turn = info.turn;
    let (rs, rf) = (problem.consts.slow_rate(), problem.consts.fast_rate());
    let tail = TailModel {
        c_slow: epsilon * (rs * turn).exp(),
        r_slow: rs,
        c_fast: epsilon * theta * (rf * turn).exp(),
        r_fast: rf,
        from: turn,
    };
    let eval = OrbitEvaluator::Homoclinic { table, turn, tail };
    let diagnostics = Diagnostics {
        method: Some("tail".into()),
        shooting_residual: Some(residual),
        table: Some(info),
        tail: Some(tail),
        epsilon: Some(epsilon),
        theta: Some(theta),
        ..Default::default()
    };
    assemble(problem, eval, diagnostics)
}

fn assemble(problem: &Problem, eval: OrbitEvaluator, diagnostics: Diagnostics) -> Result<Orbit> {
    let top = eval.max_state(problem);
    let tail = diagnostics.tail.expect("homoclinic diagnostics carry a tail");
    let needed = if tail.c_slow > 0.0 { (tail.c_slow / (WINDOW_TAIL * top.v)).ln() / tail.r_slow } else { 0.0 };
    let half = MIN_WINDOW.max(needed);
    let k_max = (half / HOMOCLINIC_DT).ceil() as i64;
    let samples = (-k_max..=k_max)
        .map(|k| {
            let t = k as f64 * HOMOCLINIC_DT;
            sample_row(t, eval.eval(problem, t))
        })
        .collect();
    Ok(Orbit {
        kind: OrbitKind::Homoclinic,
        n: problem.n(),
        g: problem.spec.to_string(),
        a: 0.0,
        c: None,
        period: None,
        v_max: top.v,
        energy: problem.energy(&top),
        samples,
        diagnostics,
    })
}

/// Least-squares slope of `ln v` against `t` over `t > 0` samples with
/// `v` in `(1e-6, 1e-3) v_max`.
pub fn decay_slope(orbit: &Orbit) -> Option<f64> {
    let v_max = orbit.sample_max();
    let pts: Vec<(f64, f64)> = orbit
        .times()
        .zip(orbit.states())
        .filter(|(t, s)| *t > 0.0 && s.v > 1e-6 * v_max && s.v < 1e-3 * v_max)
        .map(|(t, s)| (t, s.v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    Some(sxy / sxx)
}
