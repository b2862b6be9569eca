//! Numerical toolkit for path-dependent stochastic optimal control.
//!
//! The state space is C([0,T]; R^d), represented by piecewise-linear paths.
//! On top of it the crate provides: the sup-norm/pseudometric geometry of
//! path space, deterministic forward integrals, Dupire pathwise derivatives
//! and the functional Ito residual, Gaussian mollification of coefficients
//! into cylindrical (finite-dimensional) form, Euler-Maruyama simulation of
//! controlled path-dependent SDEs, Monte-Carlo value functions with
//! dynamic-programming diagnostics, lifted finite-dimensional HJB solves
//! with viscosity regularization, the smooth gauge functions and a
//! Borwein-Preiss variational principle on finite candidate sets, and
//! one-sided viscosity-inequality evaluators.

pub mod calculus;
pub mod coeff;
pub mod control;
pub mod error;
pub mod forward;
pub mod gauge;
pub mod hjb;
pub mod la;
pub mod mollify;
pub mod path;
pub mod problems;
pub mod quad;
pub mod rng;
pub mod sde;
pub mod viscosity;

pub use error::{Error, Result};
pub use path::{d_infinity, oscillation, polygonal_from_nodes, GaugePoint, Path, TimeGrid};
