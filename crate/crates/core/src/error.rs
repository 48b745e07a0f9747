use thiserror::Error;

use crate::nonlinearity::ValidationReport;

/// Errors raised by the library.
///
/// Variants fall into two groups that the command line maps to distinct exit
/// codes: configuration problems (bad input, domain violations) and solver
/// failures (a numerical procedure did not produce a result).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("nonlinearity rejected:\n{0}")]
    Invalid(ValidationReport),

    #[error("could not parse nonlinearity `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("superlinearity violated: no bracket for {what} after {doublings} doublings")]
    SuperlinearityViolated { what: &'static str, doublings: u32 },

    #[error("trajectory left the positive cone at t = {time}")]
    LeftPositiveCone { time: f64 },

    #[error("step size underflow at t = {time} (h = {step:e}); problem looks stiff")]
    StepUnderflow { time: f64, step: f64 },

    #[error("profile does not decay at both ends (end values {left:e}, {right:e}, max {max:e})")]
    NonDecayingProfile { left: f64, right: f64, max: f64 },

    #[error("tail weight {weight:e} of the decay integral exceeds 1% of the total")]
    TailTruncation { weight: f64 },

    #[error("no periodic orbit found for a = {a}: {reason}")]
    NoPeriodicOrbit { a: f64, reason: String },

    #[error("continuation did not converge; last sup-norm gap {gap:e}")]
    ContinuationStalled { gap: f64 },

    #[error("no shooting bracket for the tail parameter in [{lo}, {hi}]; try a smaller epsilon")]
    NoTailBracket { lo: f64, hi: f64 },

    #[error("double-double refinement failed: {0}")]
    Refinement(String),

    #[error("coverage gap: {0}")]
    Coverage(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a solver.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Invalid(_) | Error::Parse { .. } | Error::Coverage(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
