//! Pseudo-spectral laboratory for advection-diffusion equations with singular,
//! divergence-free drift on the periodic torus.
//!
//! The crate is organised bottom-up:
//!
//! - [`field`]: grids, real and spectral fields, transforms, Fourier multipliers, `L^p` norms.
//! - [`dyadic`]: Littlewood-Paley blocks, low-pass operators, Besov and Chemin-Lerner norms,
//!   Hölder-exponent estimation, trajectories of per-shell norm records.
//! - [`drift`]: constitutive velocity laws (matrix Calderón-Zygmund laws, SQG, modified SQG).
//! - [`solver`]: integrating-factor RK2 time stepping and the energy/Duhamel audits.
//! - [`paraproduct`]: Bony decomposition of `Δ_j(u·∇θ)` and bounds for its three terms.
//! - [`exponent`]: exact rational exponent arithmetic for the regularity bootstrap.
//! - [`snapshot`]: binary snapshot files.
//! - [`synthetic`]: reproducible synthetic initial data.

pub mod drift;
pub mod dyadic;
pub mod error;
pub mod exponent;
mod fft;
pub mod field;
pub mod paraproduct;
pub mod serde_ext;
pub mod snapshot;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use field::{Grid, RealField, SpectralField, VectorField};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
