//! Numerical laboratory for spectral and scattering theory of Schrödinger-type
//! operators on a manifold with a polynomially growing end.
//!
//! The model end is R+ x S^1 with metric scaling k(r); the unperturbed operator
//! is L0 = D_r^2 + k(r) P, where P acts on angular modes by m^2. The crate
//! discretises L0, a symmetric perturbation E and a dilation-type conjugate
//! operator, and provides diagnostics (positive commutator, weighted
//! resolvent, smoothness integrals), wave operators by Cook's method with and
//! without a long-range phase modifier, and the oscillating-symbol calculus
//! behind that modifier.

pub mod assemble;
pub mod config;
pub mod banded;
pub mod eigen;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod model;
pub mod pdo;
pub mod propagator;
pub mod phase;
pub mod quadrature;
pub mod runner;
pub mod scattering;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
