//! Curvature of diagonal metrics
//! `g = Σ (dx^i)^2 / f_i^2` on boxes in R^3, the flat families of such
//! metrics, and numerical flatness checks.
//!
//! - [`jets`]: second-order forward-mode derivatives.
//! - [`expr`]: expression language for coefficient functions.
//! - [`metric`]: boxes, metrics, frame quantities, connection.
//! - [`curvature`]: Riemann and Ricci tensors.
//! - [`numerics`]: quadrature, monotone inversion, ODE oracle.
//! - [`families`]: flat family constructors and existence predicates.
//! - [`verify`]: grids, reports, finite-difference oracle, perturbations.
//! - [`cli`]: the `flat3` command line.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::should_implement_trait,
    clippy::type_complexity
)]

pub mod cli;
pub mod curvature;
pub mod expr;
pub mod families;
pub mod jets;
pub mod metric;
pub mod numerics;
pub mod verify;

pub use curvature::{reconstruct_riemann, ricci, riemann, RicciMatrix, RiemannComponents};
pub use expr::{parse, Bindings, Expr, VarSet};
pub use jets::Jet2;
pub use metric::{BoxDomain, DiagonalMetric, FrameData};
pub use verify::{FlatnessReport, GridSpec};
