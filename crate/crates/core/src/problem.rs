//! Constants, vector field and conserved energy of
//! `v'''' - A v'' + B v = g(v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::{check_dimension, hardy_rellich_constant, NonlinearitySpec};
use crate::state::State4;

/// Scalars that fix one instance of the ODE.
///
/// Two root pairs are kept apart on purpose. `lambda_s > mu_s` solve
/// `xi^2 - A xi + B = 0` and drive the comparison arguments; `lambda_d > mu_d`
/// solve `xi^2 - A xi + (B - beta) = 0` and give the decay rates of the
/// homoclinic orbit. They coincide only when `beta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub n: u32,
    #[serde(rename = "A")]
    pub coef_a: f64,
    #[serde(rename = "B")]
    pub coef_b: f64,
    pub beta: f64,
    pub a0: f64,
    /// `max_{v >= 0} (B v - g(v))`; `b / A` caps `v''` at a minimum.
    pub b: f64,
    pub lambda_s: f64,
    pub mu_s: f64,
    pub lambda_d: f64,
    pub mu_d: f64,
}

impl ProblemConstants {
    /// Build the constants for dimension `n` and a validated nonlinearity.
    pub fn new(n: u32, spec: &NonlinearitySpec) -> Result<Self> {
        check_dimension(n)?;
        if spec.n != n {
            return Err(Error::Domain(format!("nonlinearity was posed for n = {}, not n = {n}", spec.n)));
        }
        spec.ensure_valid()?;
        let nf = n as f64;
        let coef_a = (nf * (nf - 4.0) + 8.0) / 2.0;
        let coef_b = hardy_rellich_constant(n);
        let (lambda_s, mu_s) = quadratic_roots(coef_a, coef_b);
        let (lambda_d, mu_d) = quadratic_roots(coef_a, coef_b - spec.beta);
        Ok(ProblemConstants {
            n,
            coef_a,
            coef_b,
            beta: spec.beta,
            a0: spec.find_a0(coef_b)?,
            b: spec.find_b(coef_b)?,
            lambda_s,
            mu_s,
            lambda_d,
            mu_d,
        })
    }

    /// `(n - 4) / 2`, the Emden-Fowler weight exponent.
    pub fn half_gap(&self) -> f64 {
        (self.n as f64 - 4.0) / 2.0
    }

    /// Slow decay rate `sqrt(mu_d)` of the homoclinic orbit.
    pub fn slow_rate(&self) -> f64 {
        self.mu_d.sqrt()
    }

    pub fn fast_rate(&self) -> f64 {
        self.lambda_d.sqrt()
    }

    /// Ceiling `b / A` for `v''` at the minimum of a periodic orbit.
    pub fn curvature_ceiling(&self) -> f64 {
        self.b / self.coef_a
    }
}

/// Roots `lambda > mu > 0` of `xi^2 - a xi + c`, with `mu` computed from the
/// product to avoid cancellation.
fn quadratic_roots(a: f64, c: f64) -> (f64, f64) {
    let disc = (a * a - 4.0 * c).sqrt();
    let lambda = 0.5 * (a + disc);
    (lambda, c / lambda)
}

/// A fully specified ODE: constants plus the nonlinearity they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub consts: ProblemConstants,
    pub spec: NonlinearitySpec,
}

impl Problem {
    pub fn new(n: u32, spec: NonlinearitySpec) -> Result<Self> {
        let consts = ProblemConstants::new(n, &spec)?;
        Ok(Problem { consts, spec })
    }

    /// Shorthand for `n` with the configuration grammar of
    /// [`NonlinearitySpec::parse`].
    pub fn from_config(n: u32, g: &str) -> Result<Self> {
        let spec = NonlinearitySpec::parse_valid(g, n)?;
        Self::new(n, spec)
    }

    pub fn n(&self) -> u32 {
        self.consts.n
    }

    /// `(v', v'', v''', A v'' - B v + g(v))`; requires `v > 0`.
    pub fn rhs(&self, s: &State4) -> Result<State4> {
        if !(s.v > 0.0) {
            return Err(Error::LeftPositiveCone { time: f64::NAN });
        }
        Ok(self.rhs_extended(s))
    }

    /// The vector field with `g` continued by zero below `v = 0`.
    pub(crate) fn rhs_extended(&self, s: &State4) -> State4 {
        let c = &self.consts;
        State4::new(s.v1, s.v2, s.v3, c.coef_a * s.v2 - c.coef_b * s.v + self.spec.g_unchecked(s.v))
    }

    /// `G(v) = int_0^v g - B v^2 / 2`.
    pub fn big_g(&self, v: f64) -> f64 {
        self.spec.big_g_unchecked(v, self.consts.coef_b)
    }

    /// `E = -v' v''' + v''^2 / 2 + A v'^2 / 2 + G(v)`, constant along solutions.
    pub fn energy(&self, s: &State4) -> f64 {
        -s.v1 * s.v3 + 0.5 * s.v2 * s.v2 + 0.5 * self.consts.coef_a * s.v1 * s.v1 + self.big_g(s.v)
    }

    /// Equilibrium state `(a0, 0, 0, 0)`.
    pub fn equilibrium(&self) -> State4 {
        State4::new(self.consts.a0, 0.0, 0.0, 0.0)
    }
}
