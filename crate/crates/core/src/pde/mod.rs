//! Radial solutions `u(r) = r^{-(n-4)/2} v(ln r)` of the biharmonic equation
//! and checks on them that use only sampled values of `u`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dd::Dd as D;
use crate::error::{Error, Result};
use crate::integrator::fmt12;
use crate::orbit::{Orbit, OrbitKind};
use crate::precise;
use crate::problem::Problem;

/// Where a radial profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceOrbit {
    pub kind: OrbitKind,
    pub a: f64,
    #[serde(rename = "L")]
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: u32,
    pub r_grid: Vec<f64>,
    pub u: Vec<f64>,
    /// Low words of `u` in double-double; empty when `u` is plain f64.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub u_lo: Vec<f64>,
    /// `ln r` of the first point and the log step, as double-double pairs.
    pub log_start: [f64; 2],
    pub log_step: [f64; 2],
    pub source: SourceOrbit,
    /// Pointwise residual, `None` where the stencil does not fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<Vec<Option<f64>>>,
}

fn dd(x: [f64; 2]) -> D {
    D::new(x[0], x[1])
}

fn pair(x: D) -> [f64; 2] {
    [x.hi(), x.lo()]
}

/// Cubic Hermite interpolation of `v` from the orbit samples.
fn sample_interp(orbit: &Orbit, t: f64) -> Option<f64> {
    let s = &orbit.samples;
    let k = s.partition_point(|row| row[0] <= t);
    if k == 0 || k == s.len() {
        return (s.last().map(|r| r[0]) == Some(t)).then(|| s[s.len() - 1][1]);
    }
    let (p, q) = (&s[k - 1], &s[k]);
    let h = q[0] - p[0];
    let x = (t - p[0]) / h;
    let (x2, x3) = (x * x, x * x * x);
    Some(
        (2.0 * x3 - 3.0 * x2 + 1.0) * p[1]
            + (x3 - 2.0 * x2 + x) * h * p[2]
            + (-2.0 * x3 + 3.0 * x2) * q[1]
            + (x3 - x2) * h * q[2],
    )
}

/// Image of `orbit` on a log-uniform grid of `points` radii in `[r_min, r_max]`.
///
/// Orbits carrying their evaluator are extended by periodicity or by their
/// decaying tails. Others are interpolated from their samples, which must
/// then cover `[ln r_min, ln r_max]`.
pub fn to_radial(problem: &Problem, orbit: &Orbit, r_min: f64, r_max: f64, points: usize) -> Result<RadialProfile> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::Domain(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if points < 2 {
        return Err(Error::Domain(format!("need at least 2 grid points, got {points}")));
    }
    let k = problem.consts.half_gap();
    let t0 = D::from(r_min.ln());
    let dt = (D::from(r_max.ln()) - t0) / (points - 1) as f64;
    let times: Vec<D> = (0..points).map(|i| t0 + dt * i as f64).collect();
    let v: Vec<D> = if orbit.kind == OrbitKind::Constant || orbit.diagnostics.table.is_some() {
        precise::sample_orbit(problem, orbit, &times)?
    } else {
        let (lo, hi) = (times[0].hi(), times[points - 1].hi());
        let (s0, s1) = match (orbit.samples.first(), orbit.samples.last()) {
            (Some(a), Some(b)) => (a[0], b[0]),
            _ => return Err(Error::Coverage("orbit has no samples".into())),
        };
        if lo < s0 || hi > s1 {
            return Err(Error::Coverage(format!("samples span [{s0}, {s1}] but [{lo}, {hi}] was requested")));
        }
        times.iter().map(|t| D::from(sample_interp(orbit, t.hi().clamp(s0, s1)).unwrap_or(f64::NAN))).collect()
    };
    let u: Vec<D> = times.iter().zip(&v).map(|(t, v)| *v * (-(*t * k)).exp()).collect();
    if let Some(i) = u.iter().position(|x| !(x.hi() > 0.0)) {
        return Err(Error::Domain(format!("u = {} is not positive at r = {}", u[i].hi(), times[i].hi().exp())));
    }
    Ok(RadialProfile {
        n: problem.n(),
        r_grid: times.iter().map(|t| t.exp().hi()).collect(),
        u: u.iter().map(|x| x.hi()).collect(),
        u_lo: u.iter().map(|x| x.lo()).collect(),
        log_start: pair(t0),
        log_step: pair(dt),
        source: SourceOrbit { kind: orbit.kind, a: orbit.a, period: orbit.period },
        residual: None,
    })
}

/// The orbit values `v(t)` that [`to_radial`] maps to `u`.
///
/// For orbits carrying a table description these come from the
/// double-double march, which agrees with [`Orbit::evaluator`] to the
/// accuracy of the f64 table rather than to rounding.
pub fn orbit_values(problem: &Problem, orbit: &Orbit, times: &[f64]) -> Result<Vec<f64>> {
    let t: Vec<D> = times.iter().map(|&x| D::from(x)).collect();
    Ok(precise::sample_orbit(problem, orbit, &t)?.iter().map(|x| x.hi()).collect())
}

impl RadialProfile {
    /// `ln r` at grid index `i`.
    fn log_r(&self, i: usize) -> D {
        dd(self.log_start) + dd(self.log_step) * i as f64
    }

    fn u_dd(&self, i: usize) -> D {
        match self.u_lo.get(i) {
            Some(&lo) => dd([self.u[i], lo]),
            None => D::from(self.u[i]),
        }
    }

    /// Multiply `u` by `factor` in full precision.
    pub fn scale(&mut self, factor: f64) {
        let scaled: Vec<D> = (0..self.u.len()).map(|i| self.u_dd(i) * factor).collect();
        self.u = scaled.iter().map(|x| x.hi()).collect();
        self.u_lo = scaled.iter().map(|x| x.lo()).collect();
    }

    /// `r^{(n-4)/2} u`, which is `v(ln r)`.
    pub fn scaled(&self, half_gap: f64) -> Vec<f64> {
        self.r_grid.iter().zip(&self.u).map(|(r, u)| r.powf(half_gap) * u).collect()
    }

    /// Every other grid point, from the first.
    pub fn coarsened(&self) -> RadialProfile {
        fn pick(x: &[f64]) -> Vec<f64> {
            x.iter().step_by(2).copied().collect()
        }
        RadialProfile {
            n: self.n,
            r_grid: pick(&self.r_grid),
            u: pick(&self.u),
            u_lo: pick(&self.u_lo),
            log_start: self.log_start,
            log_step: pair(dd(self.log_step) * 2.0),
            source: self.source,
            residual: None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,residual\n");
        for (i, (r, u)) in self.r_grid.iter().zip(&self.u).enumerate() {
            let res = self.residual.as_ref().and_then(|v| v[i]).map(fmt12).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", fmt12(*r), fmt12(*u), res);
        }
        out
    }
}

/// Radial Laplacian in `t = ln r` by fourth-order central differences:
/// `r^{-2} (f_tt + (n-2) f_t)` at indices `2..len-2`.
fn radial_laplacian(f: &[D], r_inv2: &[D], dt: D, n: u32) -> Vec<D> {
    let m = f.len();
    let mut out = vec![D::from(f64::NAN); m];
    let (c1, c2) = (D::from(1.0) / (dt * 12.0), D::from(1.0) / (dt * dt * 12.0));
    for i in 2..m.saturating_sub(2) {
        let d1 = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * c1;
        let d2 = (f[i - 1] * 16.0 - f[i - 2] - f[i] * 30.0 + f[i + 1] * 16.0 - f[i + 2]) * c2;
        out[i] = (d2 + d1 * (n as f64 - 2.0)) * r_inv2[i];
    }
    out
}

/// Residual of `Δ²u = r^{-(n+4)/2} g(r^{(n-4)/2} u)` on a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    /// `max |Δ²u - RHS| / max |RHS|` over interior points.
    pub residual: f64,
    /// Same quantity on every other grid point.
    pub coarse_residual: Option<f64>,
    /// `coarse_residual / residual`; about 16 for a fourth-order stencil.
    pub convergence_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip)]
    pub pointwise: Vec<Option<f64>>,
}

/// Smallest convergence factor accepted before a warning is attached.
pub const MIN_CONVERGENCE_FACTOR: f64 = 8.0;

fn residual_once(profile: &RadialProfile, problem: &Problem) -> (f64, Vec<Option<f64>>) {
    let n = problem.n();
    let k = problem.consts.half_gap();
    let m = profile.r_grid.len();
    let t: Vec<D> = (0..m).map(|i| profile.log_r(i)).collect();
    let u: Vec<D> = (0..m).map(|i| profile.u_dd(i)).collect();
    let r_inv2: Vec<D> = t.iter().map(|t| (-(*t * 2.0)).exp()).collect();
    let dt = dd(profile.log_step);
    let w = radial_laplacian(&u, &r_inv2, dt, n);
    let bi = radial_laplacian(&w, &r_inv2, dt, n);
    let mut point = vec![None; m];
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 4..m - 4 {
        // r^{-(n+4)/2} g(r^{(n-4)/2} u)
        let rhs = (-(t[i] * ((n as f64 + 4.0) / 2.0))).exp() * precise::g(&problem.spec, (t[i] * k).exp() * u[i]);
        let d = (bi[i] - rhs).abs().hi();
        point[i] = Some(d);
        worst = worst.max(d);
        scale = scale.max(rhs.abs().hi());
    }
    let norm = if scale > 0.0 { scale } else { 1.0 };
    for p in point.iter_mut().flatten() {
        *p /= norm;
    }
    (worst / norm, point)
}

/// Check the PDE on sampled values only, with a grid-halving order check.
pub fn pde_residual(profile: &RadialProfile, problem: &Problem) -> Result<PdeResidual> {
    let m = profile.r_grid.len();
    if m < 9 {
        return Err(Error::Domain(format!("residual needs at least 9 grid points, got {m}")));
    }
    if profile.n != problem.n() {
        return Err(Error::Domain(format!("profile is for n = {}, problem for n = {}", profile.n, problem.n())));
    }
    let (residual, pointwise) = residual_once(profile, problem);
    let coarse = profile.coarsened();
    let coarse_residual = (coarse.r_grid.len() >= 9).then(|| residual_once(&coarse, problem).0);
    let convergence_factor = coarse_residual.map(|c| if residual > 0.0 { c / residual } else { f64::INFINITY });
    let warning = match convergence_factor {
        Some(f) if f < MIN_CONVERGENCE_FACTOR => {
            Some(format!("residual fell only by {f:.3} on halving the step; truncation or rounding dominates"))
        }
        None => Some("grid too coarse for the halving check".into()),
        _ => None,
    };
    Ok(PdeResidual { residual, coarse_residual, convergence_factor, warning, pointwise })
}

/// Extrema of `f` on a uniform grid in `t`, refined by a parabola through
/// the three nearest points.
fn refined_extrema(f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (mut mins, mut maxs) = (Vec::new(), Vec::new());
    for i in 1..f.len().saturating_sub(1) {
        let (a, b, c) = (f[i - 1], f[i], f[i + 1]);
        let is_max = b > a && b >= c;
        let is_min = b < a && b <= c;
        if !(is_max || is_min) {
            continue;
        }
        let den = a - 2.0 * b + c;
        let peak = if den != 0.0 { b - (c - a) * (c - a) / (8.0 * den) } else { b };
        if is_max {
            maxs.push(peak);
        } else {
            mins.push(peak);
        }
    }
    (mins, maxs)
}

/// Range of `r^{(n-4)/2} u` over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub inf: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    /// Fitted power of `r` in the inner window.
    pub exp_at_0: f64,
    /// Fitted power of `r` in the outer window.
    pub exp_at_inf: f64,
    pub expected_exp_at_0: f64,
    pub expected_exp_at_inf: f64,
    /// `r^{-expected_exp_at_0} u` at the innermost radius.
    pub limit_at_0: Option<f64>,
    /// `r^{-expected_exp_at_inf} u` at the outermost radius.
    pub limit_at_inf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_at_0: Option<Band>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_at_inf: Option<Band>,
    /// Relative mismatch of the limits (or of the band ends) at 0 and infinity.
    pub mismatch: f64,
}

/// Decades each side of `r = 1` the report needs.
pub const ASYMPTOTIC_DECADES: f64 = 3.0;

fn linear_fit(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Behaviour of a radial profile as `r -> 0` and `r -> infinity`.
///
/// The inner and outer windows are the outermost third of the grid in
/// `ln r` on each side. Periodic images report the range of
/// `r^{(n-4)/2} u` in both windows; decaying images report the fitted
/// powers and the limits of `u` over the expected powers.
pub fn asymptotics_report(profile: &RadialProfile, problem: &Problem) -> Result<AsymptoticsReport> {
    let m = profile.r_grid.len();
    if m < 9 {
        return Err(Error::Domain(format!("asymptotics need at least 9 grid points, got {m}")));
    }
    let (r0, r1) = (profile.r_grid[0], profile.r_grid[m - 1]);
    let decades = ASYMPTOTIC_DECADES * std::f64::consts::LN_10;
    if -r0.ln() < decades * (1.0 - 1e-9) || r1.ln() < decades * (1.0 - 1e-9) {
        return Err(Error::Domain(format!(
            "profile spans [{r0:e}, {r1:e}], needs {ASYMPTOTIC_DECADES} decades on each side of r = 1"
        )));
    }
    let c = &problem.consts;
    let k = c.half_gap();
    let w = m / 3;
    let t: Vec<f64> = profile.r_grid.iter().map(|r| r.ln()).collect();
    let lu: Vec<f64> = profile.u.iter().map(|u| u.ln()).collect();
    let exp_at_0 = linear_fit(&t[..w], &lu[..w]);
    let exp_at_inf = linear_fit(&t[m - w..], &lu[m - w..]);
    let scaled = profile.scaled(k);
    match profile.source.kind {
        OrbitKind::Periodic => {
            if let Some(l) = profile.source.period {
                if t[w] - t[0] < l {
                    return Err(Error::Domain(format!("windows of width {} hold less than one period", t[w] - t[0])));
                }
            }
            let band = |f: &[f64]| -> Result<Band> {
                let (mins, maxs) = refined_extrema(f);
                if mins.is_empty() || maxs.is_empty() {
                    return Err(Error::Domain("window holds no oscillation".into()));
                }
                Ok(Band {
                    inf: mins.iter().copied().fold(f64::INFINITY, f64::min),
                    sup: maxs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                })
            };
            let b0 = band(&scaled[..w])?;
            let b1 = band(&scaled[m - w..])?;
            Ok(AsymptoticsReport {
                exp_at_0,
                exp_at_inf,
                expected_exp_at_0: -k,
                expected_exp_at_inf: -k,
                limit_at_0: None,
                limit_at_inf: None,
                band_at_0: Some(b0),
                band_at_inf: Some(b1),
                mismatch: rel_diff(b0.inf, b1.inf).max(rel_diff(b0.sup, b1.sup)),
            })
        }
        OrbitKind::Constant | OrbitKind::Homoclinic => {
            let s = if profile.source.kind == OrbitKind::Constant { 0.0 } else { c.slow_rate() };
            let (e0, e1) = (-k + s, -k - s);
            let l0 = profile.u[0] * r0.powf(-e0);
            let l1 = profile.u[m - 1] * r1.powf(-e1);
            Ok(AsymptoticsReport {
                exp_at_0,
                exp_at_inf,
                expected_exp_at_0: e0,
                expected_exp_at_inf: e1,
                limit_at_0: Some(l0),
                limit_at_inf: Some(l1),
                band_at_0: None,
                band_at_inf: None,
                mismatch: rel_diff(l0, l1),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::{constant_orbit, find_periodic, homoclinic_by_tail_shooting, DEFAULT_EPSILON};
    use approx::assert_relative_eq;

    fn model() -> Problem {
        Problem::from_config(8, "critical").unwrap()
    }

    #[test]
    fn constant_image_is_a0_over_r_squared() {
        let p = model();
        let prof = to_radial(&p, &constant_orbit(&p), 0.1, 10.0, 2000).unwrap();
        for (r, u) in prof.r_grid.iter().zip(&prof.u) {
            assert_relative_eq!(*u, 8.0 / (r * r), max_relative = 1e-13);
        }
        assert!(prof.r_grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn constant_image_solves_the_pde() {
        let p = model();
        let prof = to_radial(&p, &constant_orbit(&p), 0.1, 10.0, 2000).unwrap();
        let res = pde_residual(&prof, &p).unwrap();
        assert!(res.residual <= 1e-6, "{res:?}");
    }

    #[test]
    fn scaled_profile_fails() {
        let p = model();
        let mut prof = to_radial(&p, &constant_orbit(&p), 0.1, 10.0, 2000).unwrap();
        prof.scale(1.01);
        assert!(pde_residual(&prof, &p).unwrap().residual > 1e-2);
    }

    #[test]
    fn too_few_points() {
        let p = model();
        let prof = to_radial(&p, &constant_orbit(&p), 0.1, 10.0, 8).unwrap();
        assert!(matches!(pde_residual(&prof, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_coverage_is_enforced() {
        let p = model();
        let mut o = constant_orbit(&p);
        o.kind = OrbitKind::Periodic;
        o.samples = (0..11).map(|i| [i as f64 * 0.1 - 0.5, 8.0, 0.0, 0.0, 0.0]).collect();
        assert!(to_radial(&p, &o, 0.7, 1.5, 20).is_ok());
        assert!(matches!(to_radial(&p, &o, 0.1, 1.5, 20), Err(Error::Coverage(_))));
    }

    #[test]
    fn refined_extrema_of_cosine() {
        let dt = 0.01;
        let f: Vec<f64> = (0..1000).map(|i| 3.0 + (i as f64 * dt + 0.3).cos()).collect();
        let (mins, maxs) = refined_extrema(&f);
        assert!(!mins.is_empty() && !maxs.is_empty());
        for m in mins {
            assert_relative_eq!(m, 2.0, max_relative = 1e-8);
        }
        for m in maxs {
            assert_relative_eq!(m, 4.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn constant_asymptotics() {
        let p = model();
        let prof = to_radial(&p, &constant_orbit(&p), 1e-3, 1e3, 600).unwrap();
        let rep = asymptotics_report(&prof, &p).unwrap();
        assert_relative_eq!(rep.exp_at_0, -2.0, max_relative = 1e-10);
        assert_relative_eq!(rep.limit_at_inf.unwrap(), 8.0, max_relative = 1e-12);
        assert!(rep.mismatch < 1e-12);
        let short = to_radial(&p, &constant_orbit(&p), 1e-2, 1e3, 600).unwrap();
        assert!(matches!(asymptotics_report(&short, &p), Err(Error::Domain(_))));
    }

    /// `r^2 u` against the march values and the f64 evaluator.
    fn assert_substitution(p: &Problem, o: &Orbit, prof: &RadialProfile) {
        let t: Vec<f64> = (0..prof.u.len()).map(|i| prof.log_r(i).hi()).collect();
        let v = orbit_values(p, o, &t).unwrap();
        let ev = o.evaluator(p).unwrap();
        for (i, s) in prof.scaled(2.0).iter().enumerate() {
            assert!((s - v[i]).abs() <= 1e-12 * v[i], "{i}: {s} vs {}", v[i]);
            assert!((v[i] - ev.eval(p, t[i]).v).abs() <= 1e-12 * o.v_max, "{i}");
        }
    }

    #[test]
    fn periodic_image() {
        let p = model();
        let o = find_periodic(&p, 4.0).unwrap();
        let l = o.period.unwrap();
        let prof = to_radial(&p, &o, 0.1, 10.0, 2000).unwrap();
        let res = pde_residual(&prof, &p).unwrap();
        assert!(res.residual <= 1e-5 && res.convergence_factor.unwrap() >= 8.0, "{res:?}");
        assert_substitution(&p, &o, &prof);
        // periodic in ln r
        let a = to_radial(&p, &o, 0.5, 2.0, 50).unwrap();
        let b = to_radial(&p, &o, 0.5 * l.exp(), 2.0 * l.exp(), 50).unwrap();
        for (x, y) in a.scaled(2.0).iter().zip(b.scaled(2.0)) {
            assert_relative_eq!(*x, y, max_relative = 1e-9);
        }
        let wide = to_radial(&p, &o, 1e-3, 1e3, 3000).unwrap();
        let rep = asymptotics_report(&wide, &p).unwrap();
        assert!(rep.mismatch <= 1e-4, "{rep:?}");
        let (b0, b1) = (rep.band_at_0.unwrap(), rep.band_at_inf.unwrap());
        assert_relative_eq!(b0.inf, 4.0, max_relative = 1e-4);
        assert_relative_eq!(b1.sup, o.v_max, max_relative = 1e-4);
    }

    #[test]
    fn homoclinic_image() {
        let p = model();
        let o = homoclinic_by_tail_shooting(&p, DEFAULT_EPSILON).unwrap();
        let prof = to_radial(&p, &o, 0.1, 10.0, 2000).unwrap();
        let res = pde_residual(&prof, &p).unwrap();
        assert!(res.residual <= 1e-5 && res.convergence_factor.unwrap() >= 8.0, "{res:?}");
        assert!(res.warning.is_none());
        assert_substitution(&p, &o, &prof);
        let k = 120f64.sqrt();
        for (r, u) in prof.r_grid.iter().zip(&prof.u) {
            let bubble = k / r.ln().cosh().powi(2);
            assert!((u * r * r - bubble).abs() <= 1e-5, "{r}");
        }
        let inv = o.inversion();
        let inv_prof = to_radial(&p, &inv, 0.1, 10.0, 2000).unwrap();
        let m = prof.u.len();
        for i in 0..m {
            // u*(r) = r^{4-n} u(1/r)
            let kelvin = prof.r_grid[i].powi(-4) * prof.u[m - 1 - i];
            assert_relative_eq!(kelvin, prof.u[i], max_relative = 1e-9);
            assert_relative_eq!(inv_prof.u[i], prof.u[i], max_relative = 1e-12);
        }
        let wide = to_radial(&p, &o, 1e-3, 1e3, 1200).unwrap();
        let rep = asymptotics_report(&wide, &p).unwrap();
        assert_relative_eq!(rep.exp_at_0, 0.0, epsilon = 5e-3);
        assert_relative_eq!(rep.exp_at_inf, -4.0, max_relative = 5e-3);
        assert_relative_eq!(rep.limit_at_inf.unwrap(), 4.0 * k, max_relative = 1e-4);
        assert!(rep.mismatch < 1e-6, "{rep:?}");
    }

    #[test]
    fn hardy_image_is_singular_at_origin() {
        let p = Problem::from_config(8, "beta=32;mono=1,3").unwrap();
        let o = homoclinic_by_tail_shooting(&p, DEFAULT_EPSILON).unwrap();
        let wide = to_radial(&p, &o, 1e-3, 1e3, 1200).unwrap();
        let rep = asymptotics_report(&wide, &p).unwrap();
        let expected = -(2.0 - (10.0 - 68f64.sqrt()).sqrt());
        assert!(rep.expected_exp_at_0 < 0.0);
        assert_relative_eq!(rep.expected_exp_at_0, expected, max_relative = 1e-12);
        assert_relative_eq!(rep.exp_at_0, expected, max_relative = 1e-2);
    }

    #[test]
    fn csv_header() {
        let p = model();
        let mut prof = to_radial(&p, &constant_orbit(&p), 0.5, 2.0, 12).unwrap();
        let res = pde_residual(&prof, &p).unwrap();
        prof.residual = Some(res.pointwise);
        let csv = prof.to_csv();
        assert!(csv.starts_with("r,u,residual\n"));
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }
}
