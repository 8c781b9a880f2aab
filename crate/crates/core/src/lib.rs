//! Structure-preserving direct discontinuous Galerkin solver for the
//! Keller–Segel chemotaxis system.
//!
//! The density equation is a mobility-weighted gradient flow of the free
//! energy; it is stepped implicitly with a lagged mobility and a Newton
//! solve, after a linear implicit step for the chemical concentration.
//! Scaling limiters keep nodal values inside the admissible range.

pub mod config;
pub mod ddg;
pub mod dg;
pub mod error;
pub mod experiment;
pub mod io;
pub mod limiter;
pub mod linalg;
pub mod mesh;
pub mod model;
pub mod quadrature;
pub mod stepper;

pub use error::{Error, Result};
