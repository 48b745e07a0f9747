mod dd;
pub mod error;
pub mod greens;
pub mod integrator;
pub mod nonlinearity;
pub mod orbit;
pub mod pde;
mod precise;
pub mod problem;
pub mod roots;
pub mod state;
pub mod svg;

pub use error::{Error, Result};
pub use greens::UniformSamples;
pub use integrator::{integrate, EventKind, IntegratorConfig, Termination, Trajectory};
pub use nonlinearity::{Monomial, NonlinearitySpec};
pub use orbit::{Orbit, OrbitKind};
pub use pde::{asymptotics_report, orbit_values, pde_residual, to_radial, RadialProfile};
pub use problem::{Problem, ProblemConstants};
pub use state::State4;
