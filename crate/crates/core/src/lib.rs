//! Complexified Picard iteration for the periodic Navier–Stokes equations,
//! with the function-space norms and estimate checks that go with it.

pub mod analyticity;
pub mod calibration;
pub mod error;
pub mod iteration;
pub mod semigroup;
pub mod spaces;
pub mod spectral;
pub mod verify;
pub mod weights;

pub use error::{OscError, Result};
pub use spectral::{ComplexPair, Grid, SpectralField};
