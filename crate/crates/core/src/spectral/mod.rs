//! Torus grid, transforms, Fourier multipliers and alias-free products.

mod fft;
mod field;
mod grid;
pub mod random;

pub use field::{
    dealiased_product, forward_transform, fractional_symbol, inverse_transform, RealField,
    SpectralField, HERMITIAN_TOL,
};
pub(crate) use field::{from_collocation, from_collocation_pair, to_collocation};
pub use grid::{GridSpec, WaveVector};
