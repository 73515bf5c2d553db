//! Volumetric ultrasound beamforming for 2D matrix arrays with large,
//! electronically coupled elements.
//!
//! The crate covers the full experiment pipeline: array geometry with
//! element coupling and a 2x2 virtual large aperture, plane-wave star
//! transmit sequences, an analytic point-scatterer forward model, IQ
//! demodulation, DAS / NSI / DCF / MV volume beamformers sharing one
//! delayed-pixel pipeline, image quality metrics, and a config-driven
//! CLI with a runtime scaling benchmark.

pub mod array;
pub mod channel;
pub mod error;
pub mod signal;
pub mod transmit;

pub use error::{Error, Result};
