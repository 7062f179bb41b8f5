//! Sphere decoding, linear detection and lossless size reduction for
//! integer least-squares detection over MIMO channels.

pub mod detectors;
pub mod error;
pub mod harness;
pub mod lsr;
pub mod mac;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
