//! Spectral tools for periodic dispersive-dissipative equations
//! `u_t + u_xxx - ε u_xx = ∂_x(u^α)`, `α ∈ {2, 3}`: Fourier fields, resonance
//! algebra, normal-form operators, a Picard solver for the integral
//! formulation with an independent Runge–Kutta reference, energy diagnostics
//! and the inviscid-limit experiments.

pub mod diagnostics;
pub mod error;
pub mod integrators;
pub mod inviscid;
pub mod operators;
pub mod phase;
pub mod quadrature;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use integrators::{solve, Equation, Method, SolverConfig, Trajectory};
pub use quadrature::QuadratureRule;
pub use spectral::{Gauge, GridSpec, ProductMethod, SobolevIndex, SpectralField};
