//! Conformal map of a two-slit parametric domain onto a wedge flow past a
//! Sadovskii vortex, built from a symmetric Riemann-Hilbert problem on an
//! elliptic surface.

pub mod cli;
pub mod conformal_map;
pub mod error;
pub mod factorization;
pub mod flowfield;
pub mod jacobi;
pub mod kernel;
pub mod quadrature;
pub mod rh_solver;
pub mod special_fn;
pub mod surface;

pub use error::{Error, Result};
