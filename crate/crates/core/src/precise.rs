//! Double-double marching of orbits.
//!
//! A fourth derivative by nested central differences amplifies sample noise
//! by about `30 / dt^4`, which at a few thousand points per decade turns
//! f64 rounding into residuals near 1e-3. Samples and stencils are therefore
//! carried in double-double arithmetic, with the orbit re-marched from its
//! recorded start state by a fixed-step fifth-order method.

use crate::dd::Dd as D;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::orbit::{Orbit, OrbitKind, TableInfo};
use crate::problem::Problem;
use crate::state::State4;

/// Largest substep of the march.
const MARCH_STEP: f64 = 2.0e-4;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet {
    pub v: D,
    pub v1: D,
    pub v2: D,
    pub v3: D,
}

impl Jet {
    fn from_f64(s: [f64; 4]) -> Self {
        Jet { v: D::from(s[0]), v1: D::from(s[1]), v2: D::from(s[2]), v3: D::from(s[3]) }
    }

    fn to_f64(self) -> State4 {
        State4::new(self.v.hi(), self.v1.hi(), self.v2.hi(), self.v3.hi())
    }

    /// `self + sum_j w_j k_j`.
    fn plus(&self, terms: &[(D, &Jet)]) -> Jet {
        let mut out = *self;
        for (w, k) in terms {
            out.v += *w * k.v;
            out.v1 += *w * k.v1;
            out.v2 += *w * k.v2;
            out.v3 += *w * k.v3;
        }
        out
    }
}

/// `q`-th power; integer exponents avoid the `exp(q ln v)` route.
pub(crate) fn pow(v: D, q: f64) -> D {
    if q.fract() == 0.0 && q.abs() < 64.0 {
        v.powi(q as i32)
    } else {
        v.powf(q)
    }
}

pub(crate) fn g(spec: &NonlinearitySpec, v: D) -> D {
    if v <= 0.0 {
        return D::from(0.0);
    }
    spec.monomials.iter().fold(v * spec.beta, |acc, m| acc + pow(v, m.exponent) * m.coef)
}

struct Field<'a> {
    coef_a: D,
    coef_b: D,
    spec: &'a NonlinearitySpec,
}

impl Field<'_> {
    fn deriv(&self, s: &Jet) -> Jet {
        Jet { v: s.v1, v1: s.v2, v2: s.v3, v3: self.coef_a * s.v2 - self.coef_b * s.v + g(self.spec, s.v) }
    }
}

fn q(num: f64, den: f64) -> D {
    D::from(num) / den
}

/// One Dormand-Prince step (fifth-order solution) of size `h`.
fn step(f: &Field, y: &Jet, h: D) -> Jet {
    let k1 = f.deriv(y);
    let k2 = f.deriv(&y.plus(&[(h * q(1.0, 5.0), &k1)]));
    let k3 = f.deriv(&y.plus(&[(h * q(3.0, 40.0), &k1), (h * q(9.0, 40.0), &k2)]));
    let k4 = f.deriv(&y.plus(&[(h * q(44.0, 45.0), &k1), (h * q(-56.0, 15.0), &k2), (h * q(32.0, 9.0), &k3)]));
    let k5 = f.deriv(&y.plus(&[
        (h * q(19372.0, 6561.0), &k1),
        (h * q(-25360.0, 2187.0), &k2),
        (h * q(64448.0, 6561.0), &k3),
        (h * q(-212.0, 729.0), &k4),
    ]));
    let k6 = f.deriv(&y.plus(&[
        (h * q(9017.0, 3168.0), &k1),
        (h * q(-355.0, 33.0), &k2),
        (h * q(46732.0, 5247.0), &k3),
        (h * q(49.0, 176.0), &k4),
        (h * q(-5103.0, 18656.0), &k5),
    ]));
    y.plus(&[
        (h * q(35.0, 384.0), &k1),
        (h * q(500.0, 1113.0), &k3),
        (h * q(125.0, 192.0), &k4),
        (h * q(-2187.0, 6784.0), &k5),
        (h * q(11.0, 84.0), &k6),
    ])
}

/// Advance by `span >= 0` in equal substeps no longer than [`MARCH_STEP`].
fn advance(f: &Field, y: &Jet, span: D) -> Jet {
    if span <= 0.0 {
        return *y;
    }
    let m = (span.hi() / MARCH_STEP).ceil().max(1.0);
    let h = span / m;
    (0..m as usize).fold(*y, |acc, _| step(f, &acc, h))
}

/// Table time of the first sign change of `v'`, refined by Newton steps.
fn turning_point(f: &Field, start: &Jet, horizon: f64) -> Option<D> {
    let h = D::from(MARCH_STEP * 10.0);
    let mut s = D::from(0.0);
    let mut y = *start;
    let mut sign: Option<bool> = None;
    while s.hi() < horizon {
        let next = advance(f, &y, h);
        if next.v1 != 0.0 {
            let pos = next.v1 > 0.0;
            match sign {
                Some(p) if p != pos => {
                    let mut delta = h * (y.v1 / (y.v1 - next.v1));
                    for _ in 0..6 {
                        let at = advance(f, &y, delta);
                        delta -= at.v1 / at.v2;
                    }
                    return Some(s + delta);
                }
                None => sign = Some(pos),
                _ => {}
            }
        }
        y = next;
        s += h;
    }
    None
}

/// One-parameter family of start states whose member with `v'''` = 0 at
/// the turning point is the symmetric orbit.
enum Start {
    /// `(a, 0, c, 0)`, parameter `c`.
    Minimum { a: D },
    /// `eps [m(r_s) + theta m(r_f)]`, parameter `theta`.
    Seed { eps: D, rs: D, rf: D },
}

impl Start {
    fn jet(&self, p: D) -> Jet {
        let zero = D::from(0.0);
        match self {
            Start::Minimum { a } => Jet { v: *a, v1: zero, v2: p, v3: zero },
            Start::Seed { eps, rs, rf } => {
                let (r2s, r2f) = (*rs * *rs, *rf * *rf);
                Jet {
                    v: *eps * (p + 1.0),
                    v1: *eps * (*rs + p * *rf),
                    v2: *eps * (r2s + p * r2f),
                    v3: *eps * (r2s * *rs + p * r2f * *rf),
                }
            }
        }
    }
}

/// Symmetry residual `v'''` at the turning point, and the turning point.
fn shoot(f: &Field, start: &Jet, horizon: f64) -> Option<(D, D)> {
    let turn = turning_point(f, start, horizon)?;
    Some((advance(f, start, turn).v3, turn))
}

/// Secant iteration on the start parameter in double-double, from the f64
/// root `p0`.
fn refine(f: &Field, family: &Start, p0: f64, horizon: f64) -> Option<(Jet, D)> {
    let mut p = D::from(p0);
    let (mut r, mut turn) = shoot(f, &family.jet(p), horizon)?;
    let mut q = p + D::from(p0.abs().max(1e-300) * 1e-10);
    for _ in 0..12 {
        let Some((rq, tq)) = shoot(f, &family.jet(q), horizon) else { break };
        let slope = (rq - r) / (q - p);
        let next = q - rq / slope;
        if rq.abs() < r.abs() {
            (p, r, turn) = (q, rq, tq);
        }
        if rq == 0.0 || (next - q).abs().hi() <= 1e-31 * q.abs().hi().max(1.0) {
            break;
        }
        q = next;
    }
    Some((family.jet(p), turn))
}

fn field(problem: &Problem) -> Field<'_> {
    let c = &problem.consts;
    Field { coef_a: D::from(c.coef_a), coef_b: D::from(c.coef_b), spec: &problem.spec }
}

/// Start state and turning point of the half orbit described by `info`.
///
/// Starts of the form `(a, 0, c, 0)` are re-solved in `c`; tail seeds with
/// amplitude and weight `seed = (epsilon, theta)` in `theta`. Anything else
/// is marched as given.
fn refined_start(problem: &Problem, info: &TableInfo, seed: Option<(f64, f64)>) -> Result<(Jet, D)> {
    let f = field(problem);
    let c = &problem.consts;
    let horizon = info.turn + 1.0;
    let st = info.start;
    let refined = if st.v1 == 0.0 && st.v3 == 0.0 {
        refine(&f, &Start::Minimum { a: D::from(st.v) }, st.v2, horizon)
    } else if let Some((eps, theta)) = seed {
        let family = Start::Seed { eps: D::from(eps), rs: D::from(c.mu_d).sqrt(), rf: D::from(c.lambda_d).sqrt() };
        refine(&f, &family, theta, horizon)
    } else {
        let start = Jet::from_f64([st.v, st.v1, st.v2, st.v3]);
        turning_point(&f, &start, horizon).map(|t| (start, t))
    };
    refined.ok_or_else(|| Error::Refinement("re-marched table has no turning point".into()))
}

fn seed_of(orbit: &Orbit) -> Option<(f64, f64)> {
    orbit.diagnostics.epsilon.zip(orbit.diagnostics.theta)
}

/// Nodes `k h` of the refined half orbit, rounded to f64, up to four steps
/// past the turning point, and the turning point.
pub(crate) fn node_table(problem: &Problem, info: &TableInfo, seed: Option<(f64, f64)>) -> Result<(Vec<State4>, f64)> {
    let (start, turn) = refined_start(problem, info, seed)?;
    let f = field(problem);
    let h = D::from(info.step);
    let count = (turn.hi() / info.step).ceil() as usize + 4;
    let mut y = start;
    let mut nodes = Vec::with_capacity(count + 1);
    nodes.push(y.to_f64());
    for _ in 0..count {
        y = advance(&f, &y, h);
        nodes.push(y.to_f64());
    }
    Ok((nodes, turn.hi()))
}

/// Values `v(t_i)` of an orbit carrying its table description.
///
/// The half orbit is re-marched in double-double from its recorded start,
/// with the start parameter re-solved so that the reflected profile is
/// smooth at the maximum.
pub(crate) fn sample_orbit(problem: &Problem, orbit: &Orbit, times: &[D]) -> Result<Vec<D>> {
    if orbit.kind == OrbitKind::Constant {
        return Ok(vec![D::from(orbit.a); times.len()]);
    }
    let info = orbit.diagnostics.table.ok_or_else(|| Error::Coverage("orbit carries no table description".into()))?;
    let f = field(problem);
    let (start, turn) = refined_start(problem, &info, seed_of(orbit))?;
    let tail = match orbit.kind {
        OrbitKind::Homoclinic => Some(orbit.diagnostics.tail.ok_or_else(|| Error::Coverage("no tail model".into()))?),
        _ => None,
    };
    let period = turn * 2.0;
    // (sample index, table time) for samples inside the tail junction.
    let mut table_time: Vec<(usize, D)> = Vec::with_capacity(times.len());
    let mut out = vec![D::from(0.0); times.len()];
    for (i, &t) in times.iter().enumerate() {
        let d = match orbit.kind {
            OrbitKind::Periodic => (t - period * (t / period).hi().round()).abs(),
            _ => t.abs(),
        };
        match tail {
            Some(m) if d >= m.from => {
                out[i] = (-(d * m.r_slow)).exp() * m.c_slow + (-(d * m.r_fast)).exp() * m.c_fast;
            }
            _ => {
                let s = turn - d;
                table_time.push((i, if s < 0.0 { D::from(0.0) } else { s }));
            }
        }
    }
    table_time.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut y = start;
    let mut s = D::from(0.0);
    for (i, target) in table_time {
        y = advance(&f, &y, target - s);
        s = target;
        out[i] = y.v;
    }
    Ok(out)
}
