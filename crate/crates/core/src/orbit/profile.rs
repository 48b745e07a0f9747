//! Smooth evaluation of orbits at arbitrary times.
//!
//! A half orbit is stored as a table of fixed-step Runge-Kutta nodes; values
//! between nodes come from a partial step off the preceding node, using the
//! same substep count so that a partial step of full length lands on the
//! next node bit for bit. The resulting function is smooth to roundoff, which
//! the finite-difference checks downstream rely on.

use serde::{Deserialize, Serialize};

use crate::integrator::{rk_step, VectorField};
use crate::problem::Problem;
use crate::roots::bisect;
use crate::state::State4;

/// Default node spacing of a [`HalfProfile`].
pub const NODE_STEP: f64 = 0.005;
/// Default substeps per node interval.
pub const SUBSTEPS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct HalfProfile {
    pub start: State4,
    pub h: f64,
    pub substeps: usize,
    nodes: Vec<State4>,
}

impl HalfProfile {
    /// Nodes from `s = 0` until `v'` changes sign (plus one node) or `s_max`.
    pub fn build(problem: &Problem, start: State4, s_max: f64, h: f64, substeps: usize) -> Self {
        let mut nodes = vec![start];
        let mut s = start;
        let mut sign = None::<bool>;
        let limit = (s_max / h).ceil() as usize;
        for _ in 0..limit {
            s = multi_step(problem, s, h, substeps);
            nodes.push(s);
            if !s.is_finite() || s.max_abs() > 1e6 {
                break;
            }
            if s.v1 != 0.0 {
                let pos = s.v1 > 0.0;
                match sign {
                    None => sign = Some(pos),
                    Some(p) if p != pos => {
                        s = multi_step(problem, s, h, substeps);
                        nodes.push(s);
                        break;
                    }
                    _ => {}
                }
            }
        }
        HalfProfile { start, h, substeps, nodes }
    }

    /// Table over precomputed nodes at spacing `h`.
    pub(crate) fn from_nodes(start: State4, h: f64, substeps: usize, nodes: Vec<State4>) -> Self {
        HalfProfile { start, h, substeps, nodes }
    }

    pub fn s_max(&self) -> f64 {
        (self.nodes.len() - 1) as f64 * self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, problem: &Problem, s: f64) -> State4 {
        let s = s.clamp(0.0, self.s_max());
        let k = ((s / self.h).floor() as usize).min(self.nodes.len() - 1);
        let ds = s - k as f64 * self.h;
        if ds == 0.0 {
            return self.nodes[k];
        }
        multi_step(problem, self.nodes[k], ds, self.substeps)
    }

    /// First sign change of `v'` after the start, localized to roundoff.
    pub fn turning_point(&self, problem: &Problem) -> Option<f64> {
        let mut prev: Option<(usize, f64)> = None;
        for (k, n) in self.nodes.iter().enumerate() {
            if n.v1 == 0.0 {
                if k > 0 {
                    return Some(k as f64 * self.h);
                }
                continue;
            }
            if let Some((kp, vp)) = prev {
                if (vp > 0.0) != (n.v1 > 0.0) {
                    let (lo, hi) = (kp as f64 * self.h, k as f64 * self.h);
                    let b = bisect(|s| self.eval(problem, s).v1, lo, hi, vp, n.v1, 0.0, 0.0);
                    return Some(b.best());
                }
            }
            prev = Some((k, n.v1));
        }
        None
    }
}

fn multi_step<F: VectorField>(field: &F, s: State4, h: f64, m: usize) -> State4 {
    let dh = h / m as f64;
    (0..m).fold(s, |acc, _| rk_step(field, acc, dh))
}

/// `c_slow e^{-r_slow d} + c_fast e^{-r_fast d}` for distances `d >= from`
/// past the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub c_slow: f64,
    pub r_slow: f64,
    pub c_fast: f64,
    pub r_fast: f64,
    pub from: f64,
}

impl TailModel {
    /// `(T, T', T'', T''')` with respect to the distance `d`.
    pub fn jet(&self, d: f64) -> State4 {
        let es = self.c_slow * (-self.r_slow * d).exp();
        let ef = self.c_fast * (-self.r_fast * d).exp();
        let (rs, rf) = (self.r_slow, self.r_fast);
        State4::new(es + ef, -rs * es - rf * ef, rs * rs * es + rf * rf * ef, -rs.powi(3) * es - rf.powi(3) * ef)
    }

    /// Amplitudes matching value and slope `(v, dv/dd)` at `d`.
    pub fn matching(v: f64, dv: f64, d: f64, r_slow: f64, r_fast: f64) -> Self {
        // v = A + B, dv = -rs A - rf B with A, B the mode values at d.
        let b = -(dv + r_slow * v) / (r_fast - r_slow);
        let a = v - b;
        TailModel { c_slow: a * (r_slow * d).exp(), r_slow, c_fast: b * (r_fast * d).exp(), r_fast, from: d }
    }
}

/// Evaluates an orbit with its maximum at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum OrbitEvaluator {
    Constant {
        a0: f64,
    },
    /// `table` starts at the minimum; `turn` is the table time of the maximum.
    Periodic {
        table: HalfProfile,
        turn: f64,
        period: f64,
    },
    /// `table` ends at the maximum `turn`; beyond distance `tail.from` the
    /// tail model takes over.
    Homoclinic {
        table: HalfProfile,
        turn: f64,
        tail: TailModel,
    },
}

impl OrbitEvaluator {
    pub fn eval(&self, problem: &Problem, t: f64) -> State4 {
        match self {
            OrbitEvaluator::Constant { a0 } => State4::new(*a0, 0.0, 0.0, 0.0),
            OrbitEvaluator::Periodic { table, turn, period } => {
                let tau = t - period * (t / period).round();
                mirrored(tau, |d| table.eval(problem, turn - d))
            }
            OrbitEvaluator::Homoclinic { table, turn, tail } => {
                let d = t.abs();
                if d >= tail.from {
                    let j = tail.jet(d);
                    let sg = if t > 0.0 { 1.0 } else { -1.0 };
                    State4::new(j.v, sg * j.v1, j.v2, sg * j.v3)
                } else {
                    mirrored(t, |d| table.eval(problem, turn - d))
                }
            }
        }
    }

    pub fn max_state(&self, problem: &Problem) -> State4 {
        self.eval(problem, 0.0)
    }
}

/// Even extension of a profile given in table time `turn - |t|`.
fn mirrored(t: f64, table_at_distance: impl Fn(f64) -> State4) -> State4 {
    let w = table_at_distance(t.abs());
    if t > 0.0 {
        State4::new(w.v, -w.v1, w.v2, -w.v3)
    } else {
        w
    }
}
