//! Numerical laboratory for the critical Neumann problem on the half-space
//! with Gaussian weight K(x) = exp(|x|^2/4): bubbles, weighted energies,
//! expansion fits, fibering analysis and an axisymmetric mountain-pass solver.

pub mod asymptotics;
pub mod bubble;
pub mod dim;
pub mod error;
pub mod landscape;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use dim::Dimension;
pub use error::{Error, Result};
