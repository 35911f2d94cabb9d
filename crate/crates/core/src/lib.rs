//! Pseudospectral laboratory for the Benjamin-Ono-Zakharov-Kuznetsov equation
//!
//! ```text
//! u_t + H u_xx + u_xyy + u u_x = 0
//! ```
//!
//! on a doubly periodic box, with its parabolic regularization
//! `u_t + ... = mu Δu`, the weighted and anisotropic Sobolev norms used to
//! measure decay, a quadrature engine for Stein fractional derivatives, and
//! the numerical experiments around persistence and unique continuation.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod operators;
mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod stein;
pub mod uc_lab;
pub mod weights;

pub use error::{Error, Result};
pub use spectral::{Grid2D, RealField, SpectrumField};
