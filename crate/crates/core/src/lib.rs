//! Gaussian and Fock-space tools for quantum illumination, covert sensing,
//! gain estimation and photon-subtracted probes.

pub mod channels;
pub mod covert;
pub mod distinguish;
pub mod error;
pub mod fock;
pub mod gain;
pub mod gaussian;
pub mod genfun;
pub mod optimize;
pub mod spes;
pub mod special;

pub use error::{Error, Result};
