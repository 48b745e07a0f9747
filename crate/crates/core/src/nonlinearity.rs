//! Admissible nonlinearities `g(t) = beta * t + sum_i c_i * t^{q_i}`.
//!
//! Restricting `g` to this family turns every structural condition into a
//! closed-form check: positivity, the criticality bound
//! `g'(t) <= (n+4)/(n-4) * g(t)/t`, strict superlinearity `g(t)/t < g'(t)` and
//! the Hardy-Rellich bound `beta < n^2 (n-4)^2 / 16`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::bisect;

/// One term `coef * t^exponent` of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub exponent: f64,
}

impl Monomial {
    pub fn new(coef: f64, exponent: f64) -> Self {
        Monomial { coef, exponent }
    }
}

/// Tolerances for the two scalar root solves (`a0` and `b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootTolerances {
    /// Relative width of the final bisection bracket.
    pub bracket_rel: f64,
    /// Relative residual accepted for `g(a0) = B a0`.
    pub residual_rel: f64,
    pub max_doublings: u32,
}

impl Default for RootTolerances {
    fn default() -> Self {
        RootTolerances { bracket_rel: 1e-12, residual_rel: 1e-9, max_doublings: 200 }
    }
}

/// The nonlinearity together with the dimension it is posed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub beta: f64,
    pub monomials: Vec<Monomial>,
    pub n: u32,
}

/// `(n+4)/(n-4)`, the Sobolev-critical exponent for the bilaplacian.
pub fn critical_exponent(n: u32) -> f64 {
    let n = n as f64;
    (n + 4.0) / (n - 4.0)
}

/// `n^2 (n-4)^2 / 16`; equals the coefficient `B` of the ODE.
pub fn hardy_rellich_constant(n: u32) -> f64 {
    let n = n as f64;
    n * n * (n - 4.0) * (n - 4.0) / 16.0
}

// Relative slack when comparing an exponent with the critical one, so that
// `critical` built from a float division still passes.
const EXPONENT_SLACK: f64 = 1e-12;

impl NonlinearitySpec {
    pub fn new(beta: f64, monomials: Vec<Monomial>, n: u32) -> Self {
        NonlinearitySpec { beta, monomials, n }
    }

    /// `g(t) = t^{(n+4)/(n-4)}`.
    pub fn critical(n: u32) -> Result<Self> {
        check_dimension(n)?;
        Ok(Self::new(0.0, vec![Monomial::new(1.0, critical_exponent(n))], n))
    }

    /// `g(t) = t^q`.
    pub fn power(q: f64, n: u32) -> Self {
        Self::new(0.0, vec![Monomial::new(1.0, q)], n)
    }

    /// `g(t) = beta t + t^q`.
    pub fn hardy(beta: f64, q: f64, n: u32) -> Self {
        Self::new(beta, vec![Monomial::new(1.0, q)], n)
    }

    /// Parse the configuration grammar:
    ///
    /// * `critical`
    /// * `power:<q>`
    /// * `hardy:<beta>+power:<q>`
    /// * `beta=<v>;mono=<c>,<q>;mono=...`
    pub fn parse(input: &str, n: u32) -> Result<Self> {
        let s = input.trim();
        let err = |reason: &str| Error::Parse { input: input.to_string(), reason: reason.to_string() };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| err(&format!("`{}` is not a number", x.trim())));

        if s == "critical" {
            return Self::critical(n);
        }
        if let Some(rest) = s.strip_prefix("power:") {
            return Ok(Self::power(num(rest)?, n));
        }
        if let Some(rest) = s.strip_prefix("hardy:") {
            let (beta, power) = rest.split_once('+').ok_or_else(|| err("expected hardy:<beta>+power:<q>"))?;
            let q = power.trim().strip_prefix("power:").ok_or_else(|| err("expected hardy:<beta>+power:<q>"))?;
            return Ok(Self::hardy(num(beta)?, num(q)?, n));
        }

        let mut beta = 0.0;
        let mut monomials = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| err(&format!("`{part}` is not key=value")))?;
            match key.trim() {
                "beta" => beta = num(value)?,
                "mono" => {
                    let (c, q) = value.split_once(',').ok_or_else(|| err("mono needs <coef>,<exponent>"))?;
                    monomials.push(Monomial::new(num(c)?, num(q)?));
                }
                other => return Err(err(&format!("unknown key `{other}`"))),
            }
        }
        if monomials.is_empty() && s.is_empty() {
            return Err(err("empty nonlinearity"));
        }
        Ok(Self::new(beta, monomials, n))
    }

    /// Parse and reject anything that fails [`validate`](Self::validate).
    pub fn parse_valid(input: &str, n: u32) -> Result<Self> {
        check_dimension(n)?;
        let spec = Self::parse(input, n)?;
        spec.ensure_valid()?;
        Ok(spec)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// `g(t)` for `t > 0`.
    pub fn eval_g(&self, t: f64) -> Result<f64> {
        positive(t)?;
        Ok(self.g_unchecked(t))
    }

    /// `g'(t)` for `t > 0`.
    pub fn eval_g_prime(&self, t: f64) -> Result<f64> {
        positive(t)?;
        Ok(self.g_prime_unchecked(t))
    }

    /// `G(v) = int_0^v g - B v^2 / 2` in closed form.
    pub fn eval_big_g(&self, v: f64, b_coef: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return Err(Error::Domain(format!("G needs v >= 0, got {v}")));
        }
        Ok(self.big_g_unchecked(v, b_coef))
    }

    /// `h(t) = g(t) - beta t`, the superlinear part.
    pub fn eval_h(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("h needs t >= 0, got {t}")));
        }
        Ok(self.h_unchecked(t))
    }

    /// `g` continued by zero to `t <= 0`. This keeps the vector field defined
    /// while a trajectory crosses `v = 0`, so the crossing can be located.
    pub(crate) fn g_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.beta * t + self.h_unchecked(t)
    }

    pub(crate) fn h_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.monomials.iter().map(|m| m.coef * t.powf(m.exponent)).sum()
    }

    pub(crate) fn g_prime_unchecked(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.beta;
        }
        self.beta + self.monomials.iter().map(|m| m.coef * m.exponent * t.powf(m.exponent - 1.0)).sum::<f64>()
    }

    pub(crate) fn big_g_unchecked(&self, v: f64, b_coef: f64) -> f64 {
        if v <= 0.0 {
            // primitive of the zero continuation of g
            return -0.5 * b_coef * v * v;
        }
        let integral: f64 = self.monomials.iter().map(|m| m.coef * v.powf(m.exponent + 1.0) / (m.exponent + 1.0)).sum();
        0.5 * (self.beta - b_coef) * v * v + integral
    }

    /// Smallest monomial exponent `r`, so that `|h(t)| <= C t^r` near zero.
    pub fn min_exponent(&self) -> Option<f64> {
        self.monomials.iter().map(|m| m.exponent).fold(None, |acc, q| Some(acc.map_or(q, |a: f64| a.min(q))))
    }

    /// Whether `g' <= (n+4)/(n-4) g/t` holds strictly for every `t > 0`.
    ///
    /// `t g' - p g = beta (1 - p) t + sum c_i (q_i - p) t^{q_i}`, which vanishes
    /// identically only when `beta = 0` and every exponent is critical.
    pub fn criticality_strict(&self) -> bool {
        let p = critical_exponent(self.n);
        self.beta > 0.0 || self.monomials.iter().any(|m| m.exponent < p * (1.0 - EXPONENT_SLACK))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let n = self.n;
        checks.push(ValidationCheck::new("dimension", n >= 5, format!("n = {n} (need n >= 5)")));
        if n < 5 {
            return ValidationReport { checks, criticality_strict: false };
        }
        let p = critical_exponent(n);
        let hr = hardy_rellich_constant(n);

        checks.push(ValidationCheck::new(
            "superlinear_monomial",
            !self.monomials.is_empty(),
            format!("{} monomial term(s); at least one with exponent > 1 is required", self.monomials.len()),
        ));

        let bad_coef: Vec<String> = self
            .monomials
            .iter()
            .filter(|m| !(m.coef > 0.0 && m.coef.is_finite()))
            .map(|m| m.coef.to_string())
            .collect();
        checks.push(ValidationCheck::new(
            "coefficients_positive",
            bad_coef.is_empty(),
            if bad_coef.is_empty() {
                "all coefficients > 0".into()
            } else {
                format!("non-positive coefficients: {}", bad_coef.join(", "))
            },
        ));

        let bad_exp: Vec<String> = self
            .monomials
            .iter()
            .filter(|m| !(m.exponent > 1.0 && m.exponent <= p * (1.0 + EXPONENT_SLACK)))
            .map(|m| m.exponent.to_string())
            .collect();
        checks.push(ValidationCheck::new(
            "exponent_range",
            bad_exp.is_empty(),
            if bad_exp.is_empty() {
                format!("all exponents in (1, {p}]")
            } else {
                format!("exponents outside (1, {p}] (supercritical or not superlinear): {}", bad_exp.join(", "))
            },
        ));

        checks.push(ValidationCheck::new(
            "hardy_rellich",
            self.beta >= 0.0 && self.beta < hr && self.beta.is_finite(),
            format!("beta = {} must satisfy 0 <= beta < n^2(n-4)^2/16 = {hr}", self.beta),
        ));

        // Only meaningful once the structural checks hold.
        if checks.iter().all(|c| c.passed) {
            let grid = log_grid(1e-6, 1e3, 91);
            let lower = grid.iter().all(|&t| t * self.g_prime_unchecked(t) > self.g_unchecked(t));
            checks.push(ValidationCheck::new(
                "strict_superlinearity",
                lower,
                "g(t)/t < g'(t) on a log grid 1e-6..1e3 (holds analytically for this family)".into(),
            ));
            let upper = grid.iter().all(|&t| t * self.g_prime_unchecked(t) <= p * self.g_unchecked(t) * (1.0 + 1e-12));
            checks.push(ValidationCheck::new(
                "criticality_bound",
                upper,
                format!("g'(t) <= {p} g(t)/t on a log grid 1e-6..1e3"),
            ));
        }

        ValidationReport { checks, criticality_strict: self.criticality_strict() }
    }

    /// The unique `a0 > 0` with `g(a0) = B a0`.
    pub fn find_a0(&self, b_coef: f64) -> Result<f64> {
        self.find_a0_with(b_coef, RootTolerances::default())
    }

    pub fn find_a0_with(&self, b_coef: f64, tol: RootTolerances) -> Result<f64> {
        // g(a)/a - B is increasing, negative near 0 because beta < B.
        let f = |a: f64| self.g_unchecked(a) - b_coef * a;
        let hi = double_until(|a| f(a) > 0.0, tol.max_doublings)
            .ok_or(Error::SuperlinearityViolated { what: "a0", doublings: tol.max_doublings })?;
        let lo = 0.5 * hi;
        let lo = if f(lo) < 0.0 { lo } else { 0.0 };
        let bracket = bisect(f, lo, hi, f(lo).min(-f64::MIN_POSITIVE), f(hi), tol.bracket_rel, 0.0);
        let a0 = bracket.best();
        let residual = (self.g_unchecked(a0) - b_coef * a0).abs();
        if residual > tol.residual_rel * b_coef * a0 {
            return Err(Error::Domain(format!("a0 residual {residual:e} exceeds tolerance")));
        }
        Ok(a0)
    }

    /// `b = max_{v >= 0} (B v - g(v))`, attained where `g'(v) = B`.
    pub fn find_b(&self, b_coef: f64) -> Result<f64> {
        let v_star = self.find_b_argmax(b_coef)?;
        Ok(b_coef * v_star - self.g_unchecked(v_star))
    }

    /// The maximiser `v*` of `B v - g(v)`.
    pub fn find_b_argmax(&self, b_coef: f64) -> Result<f64> {
        let tol = RootTolerances::default();
        let f = |v: f64| self.g_prime_unchecked(v) - b_coef;
        let hi = double_until(|v| f(v) > 0.0, tol.max_doublings)
            .ok_or(Error::SuperlinearityViolated { what: "b", doublings: tol.max_doublings })?;
        let lo = 0.5 * hi;
        let lo = if f(lo) < 0.0 { lo } else { 0.0 };
        let bracket = bisect(f, lo, hi, f(lo).min(-f64::MIN_POSITIVE), f(hi), tol.bracket_rel, 0.0);
        Ok(bracket.best())
    }
}

impl fmt::Display for NonlinearitySpec {
    /// Canonical general form, e.g. `beta=0;mono=1,3`. Round-trips through
    /// [`NonlinearitySpec::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta={}", self.beta)?;
        for m in &self.monomials {
            write!(f, ";mono={},{}", m.coef, m.exponent)?;
        }
        Ok(())
    }
}

/// Parses `<n>|<spec>`, e.g. `8|critical`.
impl FromStr for NonlinearitySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (n, rest) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse { input: s.to_string(), reason: "expected <n>|<spec>".into() })?;
        let n: u32 =
            n.trim().parse().map_err(|_| Error::Parse { input: s.to_string(), reason: "bad dimension".into() })?;
        Self::parse(rest, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl ValidationCheck {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        ValidationCheck { name: name.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    /// Whether the criticality inequality is strict for every `t > 0`. When
    /// it is not, radial symmetry about the origin additionally needs the
    /// solution to lie outside `L^{2n/(n-4)}`.
    pub criticality_strict: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ValidationCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(f, "  criticality inequality strict: {}", self.criticality_strict)
    }
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n < 5 {
        Err(Error::Domain(format!("n must be >= 5, got {n}")))
    } else {
        Ok(())
    }
}

fn positive(t: f64) -> Result<()> {
    if t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("g is evaluated on t > 0, got {t}")))
    }
}

fn double_until(pred: impl Fn(f64) -> bool, max_doublings: u32) -> Option<f64> {
    let mut x = 1.0_f64;
    for _ in 0..=max_doublings {
        if pred(x) {
            return Some(x);
        }
        x *= 2.0;
    }
    None
}

pub(crate) fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..points).map(|i| (la + (lb - la) * i as f64 / (points - 1) as f64).exp()).collect()
}
