//! Design of frequency-chirped pulses that drive complete Rabi-like
//! population oscillations in two-level systems whose dipole moments are
//! induced by the field, plus propagators that check the designs in the
//! lab, tau, and rabi frames.

pub mod cli;
pub mod designer;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod transform;

pub use error::{Error, Result};
