//! Periodic grids, transforms and band-limited field evaluation.

pub mod dump;
mod fft;
mod field;
mod grid;
mod shift;

pub use field::{transform_forward, transform_inverse, ComplexPair, SpectralField};
pub use grid::{Grid, GridSpec};
pub use shift::{
    evaluate_complex_shift, evaluate_many, max_shift_exponent, shifted_coefficients,
    ShiftedValues, SHIFT_OVERFLOW,
};
