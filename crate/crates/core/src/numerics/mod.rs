//! Quadrature-defined antiderivatives, monotone inversion, the log-sqrt
//! antiderivative used by the implicit families, and an RK4 reference solver.

mod antiderivative;
mod logsqrt;
mod ode;
mod quadrature;

use thiserror::Error;

pub use antiderivative::{Antiderivative, Integrand, OffsetIntegrand, TABLE_NODES};
pub use logsqrt::{GluedSolution, LogSqrt, GLUE_DELTA};
pub use ode::{ode_oracle, OdeSolution, BLOWUP_THRESHOLD};
pub use quadrature::{adaptive_simpson, integrate, integrate_offset, MAX_DEPTH, QUAD_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature on [{a}, {b}] did not converge within depth {depth}")]
    NonIntegrableSingularity { a: f64, b: f64, depth: u32 },
    #[error("{y} is outside the range ({lo}, {hi}) of the antiderivative")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
    #[error("{x} is outside the domain ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("solution left the domain near x = {x} (g = {g:e})")]
    BlowUp { x: f64, g: f64 },
    #[error("integrand is not finite at {0}")]
    NonFinite(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
