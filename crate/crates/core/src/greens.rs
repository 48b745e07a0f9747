//! Green's function of `(d^2 - lambda_d)(d^2 - mu_d)` on the line and the
//! integral identities it gives for decaying solutions.

use crate::error::{Error, Result};
use crate::problem::{Problem, ProblemConstants};

/// Profile sampled at `t0 + i * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    pub t0: f64,
    pub dt: f64,
    pub v: Vec<f64>,
}

impl UniformSamples {
    pub fn new(t0: f64, dt: f64, v: Vec<f64>) -> Self {
        UniformSamples { t0, dt, v }
    }

    pub fn from_fn(t0: f64, t1: f64, dt: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = ((t1 - t0) / dt).round() as usize + 1;
        let v = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        UniformSamples { t0, dt, v }
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn trapezoid_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.v.len() {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Ends must sit below `rel * max`.
    fn check_decay(&self, rel: f64) -> Result<()> {
        let max = self.max();
        let (left, right) = match (self.v.first(), self.v.last()) {
            (Some(l), Some(r)) => (l.abs(), r.abs()),
            _ => return Err(Error::Domain("empty profile".into())),
        };
        if max > 0.0 && (left > rel * max || right > rel * max) {
            return Err(Error::NonDecayingProfile { left, right, max });
        }
        Ok(())
    }
}

/// End values of an admissible profile must be below this fraction of its max.
pub const DECAY_PRECONDITION: f64 = 1e-8;

/// Share of the decay integral allowed in the last tenth of the window.
pub const TAIL_WEIGHT_LIMIT: f64 = 0.01;

impl ProblemConstants {
    /// `G(t, s)`, depending only on `|t - s|`.
    pub fn greens_function(&self, t: f64, s: f64) -> f64 {
        self.greens_kernel((t - s).abs())
    }

    pub(crate) fn greens_kernel(&self, tau: f64) -> f64 {
        let (sl, sm) = (self.lambda_d.sqrt(), self.mu_d.sqrt());
        ((-sm * tau).exp() / (2.0 * sm) - (-sl * tau).exp() / (2.0 * sl)) / (self.lambda_d - self.mu_d)
    }
}

impl Problem {
    /// `sup_i |v_i - sum_j w_j G(t_i, t_j) h(v_j)|` with trapezoid weights.
    pub fn greens_fixed_point_residual(&self, profile: &UniformSamples) -> Result<f64> {
        profile.check_decay(DECAY_PRECONDITION)?;
        let n = profile.len();
        let kernel: Vec<f64> = (0..n).map(|k| self.consts.greens_kernel(k as f64 * profile.dt)).collect();
        let source: Vec<f64> =
            (0..n).map(|j| profile.trapezoid_weight(j) * self.spec.h_unchecked(profile.v[j])).collect();
        let mut worst = 0.0_f64;
        for i in 0..n {
            let conv: f64 = source.iter().enumerate().map(|(j, s)| kernel[i.abs_diff(j)] * s).sum();
            worst = worst.max((profile.v[i] - conv).abs());
        }
        Ok(worst)
    }

    /// `lim_{t -> inf} e^{sqrt(mu_d) t} v(t)` from its integral representation.
    pub fn decay_limit(&self, profile: &UniformSamples) -> Result<f64> {
        profile.check_decay(DECAY_PRECONDITION)?;
        let c = &self.consts;
        let rate = c.mu_d.sqrt();
        let terms: Vec<f64> = (0..profile.len())
            .map(|i| profile.trapezoid_weight(i) * (rate * profile.time(i)).exp() * self.spec.h_unchecked(profile.v[i]))
            .collect();
        let total: f64 = terms.iter().sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let tail: f64 = terms[terms.len() - terms.len() / 10..].iter().sum();
        let weight = (tail / total).abs();
        if !(weight <= TAIL_WEIGHT_LIMIT) {
            return Err(Error::TailTruncation { weight });
        }
        Ok(total / ((c.lambda_d - c.mu_d) * 2.0 * rate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model() -> Problem {
        Problem::from_config(8, "critical").unwrap()
    }

    fn bubble(t: f64) -> f64 {
        120f64.sqrt() / t.cosh().powi(2)
    }

    #[test]
    fn kernel_at_diagonal() {
        assert_relative_eq!(model().consts.greens_function(0.3, 0.3), 1.0 / 96.0, max_relative = 1e-14);
    }

    #[test]
    fn kernel_symmetric_and_decaying() {
        let c = model().consts;
        assert_eq!(c.greens_function(1.0, -2.5), c.greens_function(-2.5, 1.0));
        assert!(c.greens_function(0.0, 40.0) < 1e-30);
        assert!(c.greens_function(0.0, 40.0) > 0.0);
    }

    #[test]
    fn kernel_solves_homogeneous_equation_off_diagonal() {
        let c = Problem::from_config(8, "hardy:20+power:3").unwrap().consts;
        // Each exponential mode of the kernel is annihilated by the operator.
        for rate2 in [c.lambda_d, c.mu_d] {
            let poly = (rate2 - c.lambda_d) * (rate2 - c.mu_d);
            assert!(poly.abs() < 1e-12 * c.coef_a * c.coef_a);
        }
        // Fourth difference check at tau = 1, Richardson-extrapolated in h.
        let k = |x: f64| c.greens_kernel(x);
        let op_at = |h: f64| {
            let d2 = |x: f64| (k(x + h) - 2.0 * k(x) + k(x - h)) / (h * h);
            let d4 = (d2(1.0 + h) - 2.0 * d2(1.0) + d2(1.0 - h)) / (h * h);
            d4 - c.coef_a * d2(1.0) + (c.coef_b - c.beta) * k(1.0)
        };
        let op = (4.0 * op_at(5e-3) - op_at(1e-2)) / 3.0;
        assert!(op.abs() < 1e-5 * k(1.0), "{op}");
    }

    #[test]
    fn bubble_is_a_fixed_point() {
        let p = model();
        let prof = UniformSamples::from_fn(-15.0, 15.0, 0.01, bubble);
        let res = p.greens_fixed_point_residual(&prof).unwrap();
        assert!(res <= 1e-5 * 120f64.sqrt(), "{res}");
    }

    #[test]
    fn zero_profile() {
        let p = model();
        let prof = UniformSamples::from_fn(-5.0, 5.0, 0.1, |_| 0.0);
        assert_eq!(p.greens_fixed_point_residual(&prof).unwrap(), 0.0);
        assert_eq!(p.decay_limit(&prof).unwrap(), 0.0);
    }

    #[test]
    fn periodic_profile_rejected() {
        let p = model();
        let prof = UniformSamples::from_fn(-5.0, 5.0, 0.01, |t| 6.0 + t.cos());
        assert!(matches!(p.greens_fixed_point_residual(&prof), Err(Error::NonDecayingProfile { .. })));
        assert!(matches!(p.decay_limit(&prof), Err(Error::NonDecayingProfile { .. })));
    }

    #[test]
    fn bubble_decay_limit() {
        let p = model();
        let prof = UniformSamples::from_fn(-15.0, 15.0, 0.01, bubble);
        let lim = p.decay_limit(&prof).unwrap();
        assert_relative_eq!(lim, 4.0 * 120f64.sqrt(), max_relative = 1e-6);
        // Direct evaluation of e^{2t} v(t) far out.
        assert_relative_eq!((2.0 * 12.0f64).exp() * bubble(12.0), 4.0 * 120f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn truncated_tail_detected() {
        let p = model();
        // Slowly decaying profile whose weighted source is not integrable on the window.
        let prof = UniformSamples::from_fn(-40.0, 40.0, 0.01, |t| (-0.6 * t.abs()).exp());
        assert!(matches!(p.decay_limit(&prof), Err(Error::TailTruncation { .. })));
    }
}
