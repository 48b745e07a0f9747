//! Dormand-Prince 5(4) with continuous extension, sign-change events and
//! blow-up / positivity monitoring.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::roots::bisect;
use crate::state::State4;

/// Autonomous vector field on 4-jets.
pub trait VectorField {
    fn deriv(&self, s: &State4) -> State4;

    /// Whether leaving `v > 0` ends the integration.
    fn positive_cone(&self) -> bool {
        false
    }
}

impl VectorField for Problem {
    fn deriv(&self, s: &State4) -> State4 {
        self.rhs_extended(s)
    }

    fn positive_cone(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub blowup_threshold: f64,
    /// Longest admissible `|t1 - t0|`.
    pub max_time: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.1, blowup_threshold: 1e6, max_time: 1e4 }
    }
}

/// Steps below this size signal stiffness.
pub const MIN_STEP: f64 = 1e-14;

/// Absolute accuracy of event times.
pub const EVENT_TOL: f64 = 1e-12;

impl IntegratorConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive =
            [self.rel_tol, self.abs_tol, self.max_step, self.blowup_threshold, self.max_time].iter().all(|x| *x > 0.0);
        if !all_positive || self.rel_tol < 1e-14 {
            return Err(Error::Domain(format!("invalid integrator configuration {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    VPrimeZero,
    VPPPZero,
    VZero,
}

impl EventKind {
    pub fn component(self, s: &State4) -> f64 {
        match self {
            EventKind::VPrimeZero => s.v1,
            EventKind::VPPPZero => s.v3,
            EventKind::VZero => s.v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    ReachedEnd,
    Event { kind: EventKind, time: f64 },
    BlowUp { time: f64 },
    LeftPositiveCone { time: f64 },
}

/// Quartic continuous extension over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    r: [State4; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> State4 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = self.r;
        r1 + (r2 + (r3 + (r4 + r5 * th1) * th) * th1) * th
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = ordered(self.t0, self.t1());
        t >= lo && t <= hi
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Accepted steps of one integration run, in the order they were taken.
///
/// Times are strictly monotone in the direction of integration (increasing
/// for forward runs, decreasing for backward ones).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State4>,
    pub segments: Vec<DenseSegment>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn final_state(&self) -> State4 {
        *self.states.last().unwrap()
    }

    pub fn direction(&self) -> f64 {
        if self.t_end() < self.t_start() {
            -1.0
        } else {
            1.0
        }
    }

    /// Dense state at `t`, or `None` outside the integrated range.
    pub fn eval(&self, t: f64) -> Option<State4> {
        if self.segments.is_empty() {
            return (t == self.t_start()).then(|| self.states[0]);
        }
        let (lo, hi) = ordered(self.t_start(), self.t_end());
        if t < lo || t > hi {
            return None;
        }
        let dir = self.direction();
        let idx = self.segments.partition_point(|seg| dir * seg.t1() < dir * t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        debug_assert!(seg.contains(t));
        Some(seg.eval(t))
    }

    /// First sign change of `kind` strictly beyond `after` in the direction of
    /// integration, to [`EVENT_TOL`].
    pub fn locate_event(&self, kind: EventKind, after: f64) -> Option<f64> {
        let dir = self.direction();
        let t_end = self.t_end();
        let mut last: Option<(f64, f64)> = None;
        for seg in &self.segments {
            if dir * seg.t1() <= dir * after {
                continue;
            }
            if let Some(t) = scan_segment(seg, kind, after, t_end, &mut last) {
                return Some(t);
            }
        }
        None
    }

    /// CSV with header `t,v,v1,v2,v3,E`.
    pub fn to_csv(&self, problem: &Problem) -> String {
        let mut out = String::from("t,v,v1,v2,v3,E\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt12(*t),
                fmt12(s.v),
                fmt12(s.v1),
                fmt12(s.v2),
                fmt12(s.v3),
                fmt12(problem.energy(s))
            );
        }
        out
    }
}

/// Twelve significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.11e}");
    let parsed: f64 = s.parse().unwrap_or(x);
    format!("{parsed}")
}

/// Looks for a sign change of `kind` on `seg`, restricted to times beyond
/// `after` and not beyond `t_end`. `last` carries the latest nonzero sample
/// across segments.
fn scan_segment(
    seg: &DenseSegment,
    kind: EventKind,
    after: f64,
    t_end: f64,
    last: &mut Option<(f64, f64)>,
) -> Option<f64> {
    const SUBSAMPLES: usize = 4;
    let dir = seg.h.signum();
    let beyond = |t: f64| dir * t > dir * after;
    let f = |t: f64| kind.component(&seg.eval(t));
    for k in 0..=SUBSAMPLES {
        let mut t = seg.t0 + seg.h * k as f64 / SUBSAMPLES as f64;
        if dir * t > dir * t_end {
            t = t_end;
        }
        if !beyond(t) && !(dir * t == dir * after) {
            continue;
        }
        let val = f(t);
        if !beyond(t) {
            if val != 0.0 {
                *last = Some((t, val));
            }
            continue;
        }
        if val == 0.0 {
            return Some(t);
        }
        match *last {
            Some((tp, vp)) if (vp > 0.0) != (val > 0.0) => {
                let tp = if seg.contains(tp) { tp } else { seg.t0 };
                let fp = f(tp);
                if (fp > 0.0) == (val > 0.0) || fp == 0.0 {
                    // Crossing lies in the previous segment's final sliver; take the boundary.
                    return Some(tp);
                }
                let b = bisect(f, tp, t, fp, val, 0.0, EVENT_TOL);
                return Some(if beyond(b.hi) { b.hi } else { t });
            }
            _ => *last = Some((t, val)),
        }
        if dir * t >= dir * t_end {
            break;
        }
    }
    None
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Stage {
    y1: State4,
    k7: State4,
    err: State4,
    k: [State4; 7],
}

fn dopri_stage<F: VectorField + ?Sized>(field: &F, y: State4, k1: State4, h: f64) -> Stage {
    let k2 = field.deriv(&(y + k1 * (h * A21)));
    let k3 = field.deriv(&(y + (k1 * A31 + k2 * A32) * h));
    let k4 = field.deriv(&(y + (k1 * A41 + k2 * A42 + k3 * A43) * h));
    let k5 = field.deriv(&(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
    let k6 = field.deriv(&(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h));
    let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
    let k7 = field.deriv(&y1);
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    Stage { y1, k7, err, k: [k1, k2, k3, k4, k5, k6, k7] }
}

fn dense_segment(t0: f64, h: f64, y0: State4, st: &Stage) -> DenseSegment {
    let [k1, _, k3, k4, k5, k6, k7] = st.k;
    let r2 = st.y1 - y0;
    let r3 = k1 * h - r2;
    let r4 = r2 - k7 * h - r3;
    let r5 = (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h;
    DenseSegment { t0, h, r: [y0, r2, r3, r4, r5] }
}

/// One fifth-order step of size `h` without error control.
pub fn rk_step<F: VectorField + ?Sized>(field: &F, s: State4, h: f64) -> State4 {
    dopri_stage(field, s, field.deriv(&s), h).y1
}

/// `steps` equal fifth-order steps from `t = 0` to `t_end`.
pub fn integrate_fixed<F: VectorField + ?Sized>(field: &F, s0: State4, t_end: f64, steps: usize) -> State4 {
    let h = t_end / steps as f64;
    (0..steps).fold(s0, |s, _| rk_step(field, s, h))
}

/// Integrate the model ODE from `s0` over `[t0, t1]` (`t1 < t0` runs backward).
pub fn integrate(problem: &Problem, s0: State4, t_span: (f64, f64), config: &IntegratorConfig) -> Result<Trajectory> {
    if !(s0.is_finite() && s0.v > 0.0) {
        return Err(Error::Domain(format!("initial state must be finite with v > 0, got {s0:?}")));
    }
    integrate_field(problem, s0, t_span, config, &[])
}

/// Integrate any field, halting at the first sign change of one of `stop_at`.
pub fn integrate_field<F: VectorField + ?Sized>(
    field: &F,
    s0: State4,
    (t0, t1): (f64, f64),
    config: &IntegratorConfig,
    stop_at: &[EventKind],
) -> Result<Trajectory> {
    config.validate()?;
    if !s0.is_finite() {
        return Err(Error::Domain("initial state is not finite".into()));
    }
    if (t1 - t0).abs() > config.max_time {
        return Err(Error::Domain(format!("time span {} exceeds max_time {}", (t1 - t0).abs(), config.max_time)));
    }
    let mut traj =
        Trajectory { times: vec![t0], states: vec![s0], segments: Vec::new(), termination: Termination::ReachedEnd };
    if t1 == t0 {
        return Ok(traj);
    }
    let dir = (t1 - t0).signum();
    let mut watch: Vec<EventKind> = stop_at.to_vec();
    if field.positive_cone() && !watch.contains(&EventKind::VZero) {
        watch.push(EventKind::VZero);
    }
    let mut carried: Vec<Option<(f64, f64)>> = vec![None; watch.len()];
    for (i, kind) in watch.iter().enumerate() {
        let val = kind.component(&s0);
        if val != 0.0 {
            carried[i] = Some((t0, val));
        }
    }

    let mut t = t0;
    let mut y = s0;
    let mut k1 = field.deriv(&y);
    let mut h = dir * initial_step(field, y, k1, config).min((t1 - t0).abs());
    let mut rejected_last = false;
    loop {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < MIN_STEP {
            return Err(Error::StepUnderflow { time: t, step: h.abs() });
        }
        let st = dopri_stage(field, y, k1, h);
        let err = error_norm(&st.err, &y, &st.y1, config);
        if !(err <= 1.0) {
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= factor;
            rejected_last = true;
            continue;
        }
        let seg = dense_segment(t, h, y, &st);
        let t_next = if (t + h - t1).abs() <= 1e-15 * t1.abs().max(1.0) { t1 } else { t + h };
        traj.segments.push(seg);

        let mut hit: Option<(f64, EventKind)> = None;
        for (i, kind) in watch.iter().enumerate() {
            let mut last = carried[i];
            if let Some(te) = scan_segment(&seg, *kind, t0, t_next, &mut last) {
                if hit.is_none_or(|(th, _)| dir * te < dir * th) {
                    hit = Some((te, *kind));
                }
            }
            carried[i] = last;
        }
        if let Some((te, kind)) = hit {
            traj.times.push(te);
            traj.states.push(seg.eval(te));
            traj.termination =
                if kind == EventKind::VZero && field.positive_cone() && !stop_at.contains(&EventKind::VZero) {
                    Termination::LeftPositiveCone { time: te }
                } else {
                    Termination::Event { kind, time: te }
                };
            return Ok(traj);
        }

        t = t_next;
        y = st.y1;
        k1 = st.k7;
        traj.times.push(t);
        traj.states.push(y);
        if !y.is_finite() || y.max_abs() > config.blowup_threshold {
            traj.termination = Termination::BlowUp { time: t };
            return Ok(traj);
        }
        if t == t1 {
            return Ok(traj);
        }
        let mut factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        factor = factor.clamp(0.2, 5.0);
        if rejected_last {
            factor = factor.min(1.0);
        }
        rejected_last = false;
        h = dir * (h.abs() * factor).min(config.max_step);
    }
}

fn error_norm(err: &State4, y0: &State4, y1: &State4, c: &IntegratorConfig) -> f64 {
    let (e, a, b) = (err.to_array(), y0.to_array(), y1.to_array());
    (0..4).fold(0.0_f64, |m, i| {
        let sc = c.abs_tol + c.rel_tol * a[i].abs().max(b[i].abs());
        m.max(e[i].abs() / sc)
    })
}

fn initial_step<F: VectorField + ?Sized>(field: &F, y: State4, k1: State4, c: &IntegratorConfig) -> f64 {
    let scale = |s: &State4, r: &State4| {
        let (s, r) = (s.to_array(), r.to_array());
        (0..4).fold(0.0_f64, |m, i| m.max(s[i].abs() / (c.abs_tol + c.rel_tol * r[i].abs())))
    };
    let d0 = scale(&y, &y);
    let d1 = scale(&k1, &y);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let k2 = field.deriv(&(y + k1 * h0));
    let d2 = scale(&(k2 - k1), &y) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(c.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    struct Oscillator;

    /// `v'''' = -v`, whose solutions are combinations of `e^{t/sqrt2} cos`, etc.;
    /// used with `v = cos(t)`-type data via the two-frequency field below.
    struct TwoFrequency;

    impl VectorField for Oscillator {
        fn deriv(&self, s: &State4) -> State4 {
            // v'''' = -5 v'' - 4 v: modes cos t and cos 2t.
            State4::new(s.v1, s.v2, s.v3, -5.0 * s.v2 - 4.0 * s.v)
        }
    }

    impl VectorField for TwoFrequency {
        fn deriv(&self, s: &State4) -> State4 {
            State4::new(s.v1, s.v2, s.v3, -10.0 * s.v2 - 9.0 * s.v)
        }
    }

    fn exact(t: f64) -> State4 {
        // cos t + cos 2t
        State4::new(
            t.cos() + (2.0 * t).cos(),
            -t.sin() - 2.0 * (2.0 * t).sin(),
            -t.cos() - 4.0 * (2.0 * t).cos(),
            t.sin() + 8.0 * (2.0 * t).sin(),
        )
    }

    fn model() -> Problem {
        Problem::from_config(8, "critical").unwrap()
    }

    #[test]
    fn reproduces_trigonometric_solution() {
        let cfg = IntegratorConfig::default();
        let tr = integrate_field(&Oscillator, exact(0.0), (0.0, 10.0), &cfg, &[]).unwrap();
        assert_eq!(tr.termination, Termination::ReachedEnd);
        assert_eq!(tr.t_end(), 10.0);
        assert!((tr.final_state() - exact(10.0)).max_abs() < 1e-8);
        for k in 0..=100 {
            let t = 0.1 * k as f64;
            assert!((tr.eval(t).unwrap() - exact(t)).max_abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn dense_output_matches_nodes() {
        let tr = integrate_field(&Oscillator, exact(0.0), (0.0, 5.0), &IntegratorConfig::default(), &[]).unwrap();
        for (i, seg) in tr.segments.iter().enumerate() {
            assert!((seg.eval(seg.t0) - tr.states[i]).max_abs() <= 1e-12);
            assert!((seg.eval(seg.t1()) - tr.states[i + 1]).max_abs() <= 1e-12);
        }
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn backward_integration() {
        let cfg = IntegratorConfig::default();
        let tr = integrate_field(&TwoFrequency, State4::new(1.0, 0.0, -1.0, 0.0), (0.0, -3.0), &cfg, &[]).unwrap();
        assert_eq!(tr.direction(), -1.0);
        assert!(tr.times.windows(2).all(|w| w[1] < w[0]));
        // cos t solves v'''' + 10 v'' + 9 v = 0.
        assert_relative_eq!(tr.final_state().v, (-3.0f64).cos(), epsilon = 1e-8);
        assert_relative_eq!(tr.eval(-1.5).unwrap().v, 1.5f64.cos(), epsilon = 1e-8);
    }

    #[test]
    fn locate_event_matches_exact_zero() {
        let s0 = State4::new(1.0, 0.0, -1.0, 0.0);
        let tr = integrate_field(&TwoFrequency, s0, (0.0, 4.0), &IntegratorConfig::default(), &[]).unwrap();
        let tz = tr.locate_event(EventKind::VZero, 0.0).unwrap();
        assert!((tz - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        // v' = -sin t vanishes at 0 (skipped) and next at pi.
        let tp = tr.locate_event(EventKind::VPrimeZero, 0.0).unwrap();
        assert!((tp - std::f64::consts::PI).abs() < 1e-9);
        assert!(tr.locate_event(EventKind::VPrimeZero, 3.5).is_none());
    }

    #[test]
    fn stop_at_event() {
        let s0 = State4::new(1.0, 0.0, -1.0, 0.0);
        let tr = integrate_field(&TwoFrequency, s0, (0.0, 10.0), &IntegratorConfig::default(), &[EventKind::VPPPZero])
            .unwrap();
        match tr.termination {
            Termination::Event { kind: EventKind::VPPPZero, time } => {
                assert!((time - std::f64::consts::PI).abs() < 1e-9);
                assert_eq!(tr.t_end(), time);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let p = model();
        let tr = integrate(&p, p.equilibrium(), (0.0, 50.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.termination, Termination::ReachedEnd);
        assert!(tr.states.iter().all(|s| (s.v - 8.0).abs() <= 1e-8));
    }

    #[test]
    fn sub_equilibrium_rest_is_not_entire() {
        let p = model();
        let tr = integrate(&p, State4::new(1.0, 0.0, 0.0, 0.0), (0.0, 100.0), &IntegratorConfig::default()).unwrap();
        assert!(
            matches!(tr.termination, Termination::LeftPositiveCone { .. } | Termination::BlowUp { .. }),
            "{:?}",
            tr.termination
        );
        if let Termination::LeftPositiveCone { time } = tr.termination {
            assert!(tr.final_state().v.abs() < 1e-9);
            // Independent oracle: bisection on the raw step that brackets the crossing.
            let i = tr.states.iter().rposition(|s| s.v > 0.0).unwrap();
            let (ta, sa) = (tr.times[i], tr.states[i]);
            let f = |t: f64| integrate_fixed(&p, sa, t - ta, 64).v;
            let b =
                bisect(f, ta, tr.times[i + 1].max(time + 1e-3), sa.v, f(tr.times[i + 1].max(time + 1e-3)), 0.0, 1e-13);
            assert!((b.best() - time).abs() < 1e-10, "{} vs {time}", b.best());
        }
    }

    #[test]
    fn zero_span() {
        let p = model();
        let tr = integrate(&p, p.equilibrium(), (2.0, 2.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.states, vec![p.equilibrium()]);
        assert_eq!(tr.termination, Termination::ReachedEnd);
    }

    #[test]
    fn rejects_bad_input() {
        let p = model();
        assert!(integrate(&p, State4::new(-1.0, 0.0, 0.0, 0.0), (0.0, 1.0), &IntegratorConfig::default()).is_err());
        let bad = IntegratorConfig { rel_tol: 1e-16, ..Default::default() };
        assert!(integrate(&p, p.equilibrium(), (0.0, 1.0), &bad).is_err());
    }

    #[test]
    fn blow_up_detected() {
        let p = model();
        let tr = integrate(&p, State4::new(8.0, 0.0, 0.1, 0.0), (0.0, 100.0), &IntegratorConfig::default()).unwrap();
        assert!(matches!(tr.termination, Termination::BlowUp { .. }), "{:?}", tr.termination);
    }

    #[test]
    fn fifth_order_convergence() {
        let s0 = exact(0.0);
        let err = |n: usize| (integrate_fixed(&Oscillator, s0, 2.0, n) - exact(2.0)).max_abs();
        let (e1, e2) = (err(20), err(40));
        assert!(e1 / e2 > 25.0, "{e1} {e2}");
    }

    #[test]
    fn csv_header_and_energy() {
        let p = model();
        let tr = integrate(&p, p.equilibrium(), (0.0, 0.3), &IntegratorConfig::default()).unwrap();
        let csv = tr.to_csv(&p);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,v,v1,v2,v3,E"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[5], "-1024");
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(64.0), "64");
        assert_eq!(fmt12(0.0), "0");
    }
}
