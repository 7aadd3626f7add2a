//! Discrete modulation spaces, Gabor frames, traces and pseudo-differential
//! operators on periodized grids.

pub mod error;
pub mod fft;
pub mod field_io;
pub mod gabor;
pub mod lattice;
pub mod mixed_norm;
pub mod operator;
pub mod psdo;
pub mod spectral;
pub mod trace;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use lattice::{GridSpec, SampledField};
pub use mixed_norm::{Exponent, MixedNormSpec};
pub use weights::Weight;
