use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig, Termination, Trajectory};
use crate::problem::Problem;
use crate::roots::bisect;
use crate::state::State4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionTag {
    Constant,
    PeriodicLike,
    DecaysToZero,
    BlowUp,
    LeavesCone,
    Indeterminate,
}

/// Outcome in one time direction, with the time the tag was decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalTag {
    pub tag: SolutionTag,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: SolutionTag,
    pub forward: DirectionalTag,
    pub backward: DirectionalTag,
}

/// Distance from `(a0, 0, 0, 0)` below which data count as the equilibrium.
const EQUILIBRIUM_TOL: f64 = 1e-9;
/// Recurrence tolerance on `(v, v')`.
const RECURRENCE_TOL: f64 = 1e-6;
/// Decay threshold on `v`, relative to `a0`.
const DECAY_TOL: f64 = 1e-6;

/// Tag the solution through `s0` by integrating both ways up to `horizon`.
///
/// In each direction the earliest of recurrence, decay, blow-up and loss of
/// positivity decides. Overall: recurrence in either direction gives
/// `PeriodicLike`; decay in both gives `DecaysToZero`; otherwise a forward
/// (then backward) blow-up or cone exit is reported.
pub fn classify_solution(problem: &Problem, s0: State4, horizon: f64) -> Result<Classification> {
    if !(s0.is_finite() && s0.v > 0.0) {
        return Err(Error::Domain(format!("classification needs finite data with v > 0, got {s0:?}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let a0 = problem.consts.a0;
    if (s0 - problem.equilibrium()).max_abs() <= EQUILIBRIUM_TOL * a0 {
        let d = DirectionalTag { tag: SolutionTag::Constant, time: Some(0.0) };
        return Ok(Classification { tag: SolutionTag::Constant, forward: d, backward: d });
    }
    let cfg = IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-15, max_time: horizon.max(1.0), ..Default::default() };
    let forward = one_direction(problem, s0, horizon, &cfg)?;
    let backward = one_direction(problem, s0, -horizon, &cfg)?;
    use SolutionTag::*;
    let tag = if forward.tag == PeriodicLike || backward.tag == PeriodicLike {
        PeriodicLike
    } else if forward.tag == DecaysToZero && backward.tag == DecaysToZero {
        DecaysToZero
    } else if matches!(forward.tag, BlowUp | LeavesCone) {
        forward.tag
    } else if matches!(backward.tag, BlowUp | LeavesCone) {
        backward.tag
    } else {
        Indeterminate
    };
    Ok(Classification { tag, forward, backward })
}

fn one_direction(problem: &Problem, s0: State4, t1: f64, cfg: &IntegratorConfig) -> Result<DirectionalTag> {
    let tr = integrate(problem, s0, (0.0, t1), cfg)?;
    let mut candidates: Vec<(f64, SolutionTag)> = Vec::new();
    match tr.termination {
        Termination::BlowUp { time } => candidates.push((time.abs(), SolutionTag::BlowUp)),
        Termination::LeftPositiveCone { time } => candidates.push((time.abs(), SolutionTag::LeavesCone)),
        _ => {}
    }
    if let Some(t) = recurrence_time(problem, &tr, s0) {
        candidates.push((t.abs(), SolutionTag::PeriodicLike));
    }
    let c = &problem.consts;
    let v_tol = DECAY_TOL * c.a0;
    let d_tol = v_tol * c.lambda_s.powf(1.5);
    if let Some((t, _)) = tr
        .times
        .iter()
        .zip(&tr.states)
        .find(|(_, s)| s.v > 0.0 && s.v < v_tol && s.v1.abs().max(s.v2.abs()).max(s.v3.abs()) <= d_tol)
    {
        candidates.push((t.abs(), SolutionTag::DecaysToZero));
    }
    let first = candidates.into_iter().min_by(|a, b| a.0.total_cmp(&b.0));
    Ok(match first {
        Some((time, tag)) => DirectionalTag { tag, time: Some(time) },
        None => DirectionalTag { tag: SolutionTag::Indeterminate, time: None },
    })
}

/// First return of `(v, v')` to its initial value, detected as a crossing of
/// one coordinate's level in the original direction with the other
/// coordinate matching.
fn recurrence_time(problem: &Problem, tr: &Trajectory, s0: State4) -> Option<f64> {
    let scale = problem.consts.a0.max(1.0);
    let tol = RECURRENCE_TOL * scale;
    let slope_scale = scale * problem.consts.lambda_s.sqrt();
    // Cross the level of v unless v' is near zero, then use v' instead.
    let use_v = s0.v1.abs() > 1e-3 * slope_scale;
    let phi = |s: &State4| if use_v { s.v - s0.v } else { s.v1 - s0.v1 };
    let other = |s: &State4| if use_v { s.v1 - s0.v1 } else { s.v - s0.v };
    let dir0 = if use_v { s0.v1 } else { s0.v2 } * tr.direction();
    let mut departed = false;
    let mut prev: Option<(f64, f64)> = None;
    for seg in &tr.segments {
        for k in 0..=8 {
            let t = seg.t0 + seg.h * k as f64 / 8.0;
            if (t - tr.t_end()) * tr.direction() > 0.0 {
                break;
            }
            let s = seg.eval(t);
            if !departed {
                departed = (s - s0).v.abs() + (s - s0).v1.abs() > 1e3 * tol;
                prev = Some((t, phi(&s)));
                continue;
            }
            let f = phi(&s);
            if let Some((tp, fp)) = prev {
                let crossing = (fp < 0.0 && f >= 0.0) || (fp > 0.0 && f <= 0.0);
                let same_way = (f - fp) * dir0 * tr.direction() * (t - tp).signum() > 0.0;
                if crossing && same_way {
                    let g = |x: f64| phi(&tr.eval(x).unwrap_or(s));
                    let b = bisect(g, tp, t, fp, f, 0.0, 1e-13);
                    let tc = b.best();
                    let sc = tr.eval(tc).unwrap_or(s);
                    if other(&sc).abs() <= tol {
                        return Some(tc);
                    }
                }
            }
            prev = Some((t, f));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::find_periodic;

    fn model() -> Problem {
        Problem::from_config(8, "critical").unwrap()
    }

    #[test]
    fn equilibrium_is_constant() {
        let p = model();
        assert_eq!(classify_solution(&p, p.equilibrium(), 20.0).unwrap().tag, SolutionTag::Constant);
    }

    #[test]
    fn raised_curvature_blows_up() {
        let p = model();
        let c = classify_solution(&p, State4::new(8.0, 0.0, 0.1, 0.0), 50.0).unwrap();
        assert_eq!(c.tag, SolutionTag::BlowUp);
    }

    #[test]
    fn low_rest_state_is_not_entire() {
        let p = model();
        let c = classify_solution(&p, State4::new(1.0, 0.0, 0.0, 0.0), 50.0).unwrap();
        assert!(matches!(c.tag, SolutionTag::LeavesCone | SolutionTag::BlowUp), "{c:?}");
    }

    #[test]
    fn periodic_states_recur() {
        let p = model();
        let o = find_periodic(&p, 4.0).unwrap();
        for k in [0usize, 137, 500, 1000, 1733] {
            let r = o.samples[k];
            let s = State4::new(r[1], r[2], r[3], r[4]);
            let c = classify_solution(&p, s, 20.0).unwrap();
            assert_eq!(c.tag, SolutionTag::PeriodicLike, "sample {k}: {c:?}");
        }
    }
}
