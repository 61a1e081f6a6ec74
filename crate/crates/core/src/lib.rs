//! Pseudo-spectral solver and Littlewood–Paley diagnostics for the
//! two-and-a-half-dimensional electron-MHD system on the torus `[0, 2π)²`,
//!
//! ```text
//! ∂_t a + a_y b_x − a_x b_y      = −Λ^α a
//! ∂_t b − a_y Δa_x + a_x Δa_y    = −Λ^β b
//! ```
//!
//! with magnetic field `B = (a_y, −a_x, b)`.

pub mod diagnostics;
pub mod emhd;
pub mod error;
pub mod integrator;
pub mod littlewood_paley;
pub mod spectral;

pub use error::{Error, Result};
