//! The solution family: the constant `a0`, periodic orbits `v_a`, and the
//! homoclinic orbit, plus classification and verification of arbitrary data.

mod classify;
mod homoclinic;
mod periodic;
pub mod profile;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::UniformSamples;
use crate::problem::Problem;
use crate::state::State4;

pub use classify::{classify_solution, Classification, DirectionalTag, SolutionTag};
pub use homoclinic::{
    continuation_sequence, decay_slope, homoclinic_by_continuation, homoclinic_by_tail_shooting, ContinuationInfo,
    CONTINUATION_GAP_TOL, DEFAULT_EPSILON, HOMOCLINIC_DT,
};
pub use periodic::{
    find_periodic, find_periodic_with, linearized_period, shoot_residual, sweep_periods, sweep_periods_with,
    PeriodicOptions, Sweep, SweepRow, SAMPLES_PER_PERIOD,
};
pub use profile::{HalfProfile, OrbitEvaluator, TailModel};
pub use verify::{energy_drift, verify_orbit, Check, EnergyDrift, VerifyReport, RIGIDITY_TOL, SYMMETRY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Constant,
    Periodic,
    Homoclinic,
}

/// Where the smooth evaluator of an orbit comes from, so that it can be
/// rebuilt from serialized output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableInfo {
    pub start: State4,
    pub step: f64,
    pub substeps: usize,
    /// Table time of the maximum.
    pub turn: f64,
    /// Nodes come from a double-double march with the start parameter
    /// re-solved, rather than from an f64 march of `start`.
    #[serde(default)]
    pub refined: bool,
}

impl TableInfo {
    /// Node table of the half orbit; `seed` is `(epsilon, theta)` for tail
    /// seeds.
    pub(crate) fn half_profile(&self, problem: &Problem, seed: Option<(f64, f64)>) -> Result<HalfProfile> {
        if self.refined {
            let (nodes, _) = crate::precise::node_table(problem, self, seed)?;
            Ok(HalfProfile::from_nodes(self.start, self.step, self.substeps, nodes))
        } else {
            Ok(HalfProfile::build(problem, self.start, self.turn + 4.0 * self.step, self.step, self.substeps))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shooting_residual: Option<f64>,
    /// Root of the adaptive shooting residual; the orbit's `c` is the same
    /// root refined on the node table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_adaptive: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuation: Option<ContinuationInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub kind: OrbitKind,
    pub n: u32,
    /// Canonical nonlinearity string.
    pub g: String,
    /// Minimum of `v` (0 for the homoclinic).
    pub a: f64,
    /// `v''` at the minimum.
    pub c: Option<f64>,
    #[serde(rename = "L")]
    pub period: Option<f64>,
    pub v_max: f64,
    pub energy: f64,
    /// Rows `[t, v, v', v'', v''']`, maximum at `t = 0`.
    pub samples: Vec<[f64; 5]>,
    pub diagnostics: Diagnostics,
}

impl Orbit {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|r| r[0])
    }

    pub fn states(&self) -> impl Iterator<Item = State4> + '_ {
        self.samples.iter().map(|r| State4::new(r[1], r[2], r[3], r[4]))
    }

    pub fn sample_max(&self) -> f64 {
        self.states().fold(f64::NEG_INFINITY, |m, s| m.max(s.v))
    }

    pub fn sample_min(&self) -> f64 {
        self.states().fold(f64::INFINITY, |m, s| m.min(s.v))
    }

    /// Problem the orbit was computed for.
    pub fn problem(&self) -> Result<Problem> {
        Problem::from_config(self.n, &self.g)
    }

    /// Rebuild the smooth evaluator recorded in the diagnostics.
    pub fn evaluator(&self, problem: &Problem) -> Result<OrbitEvaluator> {
        match self.kind {
            OrbitKind::Constant => Ok(OrbitEvaluator::Constant { a0: self.a }),
            OrbitKind::Periodic => {
                let info = self.table_info()?;
                let period = self.period.ok_or_else(|| Error::Domain("periodic orbit without L".into()))?;
                let table = info.half_profile(problem, None)?;
                Ok(OrbitEvaluator::Periodic { table, turn: info.turn, period })
            }
            OrbitKind::Homoclinic => {
                let info = self.table_info()?;
                let tail =
                    self.diagnostics.tail.ok_or_else(|| Error::Domain("homoclinic orbit without tail model".into()))?;
                let table = info.half_profile(problem, self.diagnostics.epsilon.zip(self.diagnostics.theta))?;
                Ok(OrbitEvaluator::Homoclinic { table, turn: info.turn, tail })
            }
        }
    }

    fn table_info(&self) -> Result<TableInfo> {
        self.diagnostics.table.ok_or_else(|| Error::Domain("orbit carries no table description".into()))
    }

    /// `v` on the uniform sample grid.
    pub fn uniform_samples(&self) -> Result<UniformSamples> {
        let t: Vec<f64> = self.times().collect();
        if t.len() < 2 {
            return Err(Error::Domain("orbit has fewer than two samples".into()));
        }
        let dt = t[1] - t[0];
        let uniform = t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1e-300));
        if !uniform {
            return Err(Error::Domain("orbit samples are not uniformly spaced".into()));
        }
        Ok(UniformSamples::new(t[0], dt, self.states().map(|s| s.v).collect()))
    }

    /// CSV with header `t,v,v1,v2,v3,E`.
    pub fn to_csv(&self, problem: &Problem) -> String {
        use crate::integrator::fmt12;
        let mut out = String::from("t,v,v1,v2,v3,E\n");
        for (t, s) in self.times().zip(self.states()) {
            let row = [t, s.v, s.v1, s.v2, s.v3, problem.energy(&s)].map(fmt12);
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Reflection `t -> -t`, the Kelvin inversion in Emden-Fowler variables.
    pub fn inversion(&self) -> Orbit {
        let mut out = self.clone();
        out.samples = self.samples.iter().rev().map(|r| [-r[0], r[1], -r[2], r[3], -r[4]]).collect();
        out
    }
}

pub(crate) fn sample_row(t: f64, s: State4) -> [f64; 5] {
    [t, s.v, s.v1, s.v2, s.v3]
}

/// The equilibrium `v = a0`, with `L` recorded as 0.
pub fn constant_orbit(problem: &Problem) -> Orbit {
    let a0 = problem.consts.a0;
    let s = problem.equilibrium();
    Orbit {
        kind: OrbitKind::Constant,
        n: problem.n(),
        g: problem.spec.to_string(),
        a: a0,
        c: Some(0.0),
        period: Some(0.0),
        v_max: a0,
        energy: problem.energy(&s),
        samples: vec![sample_row(0.0, s)],
        diagnostics: Diagnostics::default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_orbit_n8() {
        let p = Problem::from_config(8, "critical").unwrap();
        let o = constant_orbit(&p);
        assert_eq!(o.kind, OrbitKind::Constant);
        assert_relative_eq!(o.a, 8.0, max_relative = 1e-12);
        assert_relative_eq!(o.energy, -1024.0, max_relative = 1e-12);
        assert_eq!(o.period, Some(0.0));
        let s = o.states().next().unwrap();
        assert_eq!(p.rhs(&s).unwrap(), State4::ZERO);
    }

    #[test]
    fn inversion_is_an_involution() {
        let p = Problem::from_config(8, "critical").unwrap();
        let mut o = constant_orbit(&p);
        o.samples = (0..7).map(|k| [k as f64 * 0.5 - 1.0, 1.0 + k as f64, 0.3 * k as f64, -2.0, 0.25]).collect();
        let back = o.inversion().inversion();
        assert_eq!(back, o);
        assert_ne!(o.inversion().samples, o.samples);
    }

    #[test]
    fn json_field_names() {
        let p = Problem::from_config(8, "critical").unwrap();
        let v = serde_json::to_value(constant_orbit(&p)).unwrap();
        let obj = v.as_object().unwrap();
        for k in ["kind", "n", "g", "a", "c", "L", "v_max", "energy", "samples", "diagnostics"] {
            assert!(obj.contains_key(k), "{k}");
        }
        assert_eq!(obj["kind"], "constant");
        assert_eq!(obj["samples"][0].as_array().unwrap().len(), 5);
    }
}
