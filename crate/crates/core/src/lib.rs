//! Coordinate networks with periodic activations: SIREN, FINER, H-SIREN
//! and WIRE, trained full-batch with Adam on images, videos and 1D signals.

pub mod activations;
pub mod analysis;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numkit;

pub use error::{Error, Result};
